use crate::curve::SpectrumCurve;
use crate::error::{Error, FitFailure, Result};
use crate::lsq::{self, Parameter, Settings};

const MIN_POINTS: usize = 5;

/// Least-squares Gaussian `amplitude · exp(-4 ln2 (x - center)² / fwhm²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianFit {
    pub center: f64,
    /// Full width at half maximum of the fitted curve itself.
    pub fwhm: f64,
    pub amplitude: f64,
    /// Standard errors of (center, fwhm, amplitude), when the Jacobian allows them.
    pub errors: Option<[f64; 3]>,
    pub residual_rms: f64,
}

impl GaussianFit {
    pub fn value(&self, x: f64) -> f64 {
        gaussian(x, self.center, self.fwhm, self.amplitude)
    }
}

fn gaussian(x: f64, center: f64, fwhm: f64, amplitude: f64) -> f64 {
    let u = (x - center) / fwhm;
    amplitude * (-4.0 * std::f64::consts::LN_2 * u * u).exp()
}

/// Fits a Gaussian to a single-peaked curve. Points are weighted by `1/sigma`
/// when every sigma is positive and unweighted otherwise.
pub fn gaussian_fit(curve: &SpectrumCurve) -> Result<GaussianFit> {
    if curve.len() < MIN_POINTS {
        return Err(Error::Precondition(format!(
            "Gaussian fit needs >= {MIN_POINTS} points, got {}",
            curve.len()
        )));
    }
    let (ip, peak) = curve.peak();
    let floor = curve.y.iter().copied().fold(f64::INFINITY, f64::min);
    if !(peak > 0.0) || peak - floor <= 1e-12 * peak.abs() {
        return Err(FitFailure {
            reason: "curve has no peak".into(),
            best_parameters: vec![],
            best_cost: f64::NAN,
            cost_trace: vec![],
        }
        .into());
    }
    let (lo, hi) = curve.support();
    let span = hi - lo;
    let width0 = curve.fwhm().unwrap_or(0.5 * span).max(1e-6 * span);
    let weights: Vec<f64> = if curve.sigma.iter().all(|&s| s > 0.0) {
        curve.sigma.iter().map(|s| 1.0 / s).collect()
    } else {
        vec![1.0; curve.len()]
    };
    let params = [
        Parameter::free(curve.x[ip], 1e-2 * width0),
        Parameter::bounded(width0, 1e-2 * width0, 1e-9 * span, f64::INFINITY),
        Parameter::bounded(peak, 1e-2 * peak, 0.0, f64::INFINITY),
    ];
    let sol = lsq::minimize(&params, &Settings::default(), |p| {
        Ok(curve
            .x
            .iter()
            .zip(&curve.y)
            .zip(&weights)
            .map(|((&x, &y), &w)| (gaussian(x, p[0], p[1], p[2]) - y) * w)
            .collect())
    })?;
    let p = &sol.parameters;
    let errors = sol.standard_errors().map(|e| [e[0], e[1], e[2]]);
    Ok(GaussianFit {
        center: p[0],
        fwhm: p[1],
        amplitude: p[2],
        errors,
        residual_rms: (sol.cost / curve.len() as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    fn samples(n: usize, center: f64, fwhm: f64, amp: f64) -> SpectrumCurve {
        let x: Vec<f64> = (0..n).map(|i| 1540.0 + 40.0 * i as f64 / (n - 1) as f64).collect();
        let y = x.iter().map(|&v| gaussian(v, center, fwhm, amp)).collect();
        SpectrumCurve::new(x, y).unwrap()
    }

    #[test]
    fn exact_samples_recovered() {
        let c = samples(80, 1558.3, 6.33, 0.17);
        let f = gaussian_fit(&c).unwrap();
        assert!((f.center / 1558.3 - 1.0).abs() < 1e-9);
        assert!((f.fwhm / 6.33 - 1.0).abs() < 1e-9);
        assert!((f.amplitude / 0.17 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn noisy_center_within_twentieth_of_width() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let noise = Normal::new(0.0, 0.02).unwrap();
        for _ in 0..20 {
            let mut c = samples(50, 1561.0, 3.26, 1.0);
            c.y.iter_mut().for_each(|v| *v += noise.sample(&mut rng));
            let f = gaussian_fit(&c).unwrap();
            assert!((f.center - 1561.0).abs() < 3.26 / 20.0);
            assert!(f.errors.is_some());
        }
    }

    #[test]
    fn flat_curve_fails() {
        let c = SpectrumCurve::new((0..10).map(f64::from).collect(), vec![2.0; 10]).unwrap();
        assert!(matches!(gaussian_fit(&c), Err(Error::Fit(_))));
    }
}

use super::amplitude::nonuniform_amplitude_auto;
use super::mismatch::{mismatch_shg, shg_kappa};
use super::{sinc, IndexProfile, WaveguideSpec};
use crate::curve::{spectrum_overlap, SpectrumCurve};
use crate::dispersion::DispersionModel;
use crate::error::{Error, Result};
use crate::lsq::{self, Parameter, Settings};

/// `sinc²(x) = 1/2` at this `x`.
const SINC2_HALF_POWER: f64 = 1.391_557_377_3;

/// Search box for profile perturbations during fitting.
const PROFILE_SEARCH_BOUND: f64 = 1e-3;

const MIN_POINTS: usize = 20;

/// Profile family fitted alongside the effective length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProfileKind {
    Uniform,
    /// Halves with perturbations `+d/2` and `-d/2`. Only `|d|` is identifiable
    /// from a power spectrum; the reported profile has `d ≥ 0`.
    #[default]
    TwoSegment,
    /// `δn(u) = Σ_{k=1..degree} c_k (2u - 1)^k`; the constant term is absorbed
    /// by the peak position.
    Polynomial { degree: usize },
}

/// Optional starting values; anything left `None` is estimated from the data.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ShgFitGuess {
    pub peak_nm: Option<f64>,
    pub effective_fraction: Option<f64>,
    pub profile_parameters: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct ShgFitResult {
    /// Effective length referred to 295 K, mm.
    pub effective_length_mm: f64,
    pub effective_fraction: f64,
    /// Wavelength of the fitted curve's maximum, nm.
    pub peak_wavelength_nm: f64,
    /// Fitted curve maximum in the input's power units.
    pub amplitude: f64,
    pub profile: IndexProfile,
    /// Overlap of the fitted curve with the closest ideal sinc² curve.
    pub overlap_with_ideal: f64,
    /// Root-mean-square weighted residual.
    pub residual: f64,
    /// Fitted curve on the measured abscissae, in the input's power units.
    pub fitted: SpectrumCurve,
    /// Fitted minus measured, in the input's power units.
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

struct Prepared<'a> {
    model: &'a DispersionModel,
    wg: &'a WaveguideSpec,
    temperature_k: f64,
    /// Contracted physical length at the measurement temperature, mm.
    length_mm: f64,
    x: Vec<f64>,
    dk: Vec<f64>,
    kappa: Vec<f64>,
}

impl<'a> Prepared<'a> {
    fn new(model: &'a DispersionModel, wg: &'a WaveguideSpec, temperature_k: f64, x: &[f64]) -> Result<Self> {
        let dk = x
            .iter()
            .map(|&l| mismatch_shg(model, wg, l, temperature_k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            model,
            wg,
            temperature_k,
            length_mm: model.thermal_scale(temperature_k)? * wg.length_mm,
            x: x.to_vec(),
            dk,
            kappa: x.iter().map(|&l| shg_kappa(l)).collect(),
        })
    }

    /// Model curve for `p = [λ0, amplitude, fraction, profile...]`.
    fn eval(&self, kind: ProfileKind, p: &[f64]) -> Result<Vec<f64>> {
        let dk0 = mismatch_shg(self.model, self.wg, p[0], self.temperature_k)?;
        let length_mm = p[2] * self.length_mm;
        let profile = profile_from(kind, &p[3..]);
        self.dk
            .iter()
            .zip(&self.kappa)
            .map(|(&dk, &kappa)| {
                let dk = dk - dk0;
                let phi2 = match &profile {
                    IndexProfile::Uniform => sinc(0.5 * dk * length_mm * 1e3).powi(2),
                    prof => nonuniform_amplitude_auto(prof, dk, kappa, length_mm)?.norm_sqr(),
                };
                Ok(p[1] * phi2)
            })
            .collect()
    }
}

fn profile_from(kind: ProfileKind, q: &[f64]) -> IndexProfile {
    match kind {
        ProfileKind::Uniform => IndexProfile::Uniform,
        ProfileKind::TwoSegment => IndexProfile::two_segment(0.5 * q[0], -0.5 * q[0]),
        ProfileKind::Polynomial { .. } => {
            IndexProfile::Polynomial(std::iter::once(0.0).chain(q.iter().copied()).collect())
        }
    }
}

fn n_profile_parameters(kind: ProfileKind) -> usize {
    match kind {
        ProfileKind::Uniform => 0,
        ProfileKind::TwoSegment => 1,
        ProfileKind::Polynomial { degree } => degree,
    }
}

/// Runs the damped least-squares fit from one starting point.
fn fit_from(
    prep: &Prepared,
    kind: ProfileKind,
    y: &[f64],
    weight: &[f64],
    start: &[f64],
    lambda_scale: f64,
) -> Result<lsq::Solution> {
    let mut params = vec![
        Parameter::free(start[0], lambda_scale),
        Parameter::bounded(start[1], 1e-2, 0.0, f64::INFINITY),
        Parameter::bounded(start[2], 1e-3, 1e-3, 1.0),
    ];
    params.extend(
        start[3..]
            .iter()
            .map(|&v| Parameter::bounded(v, 1e-6, -PROFILE_SEARCH_BOUND, PROFILE_SEARCH_BOUND)),
    );
    lsq::minimize(&params, &Settings::default(), |p| {
        let m = prep.eval(kind, p)?;
        Ok(m.iter().zip(y).zip(weight).map(|((mi, yi), wi)| (mi - yi) * wi).collect())
    })
}

fn check_shape(measured: &SpectrumCurve) -> Result<()> {
    if measured.len() < MIN_POINTS {
        return Err(Error::Precondition(format!(
            "SHG fit needs >= {MIN_POINTS} points, got {}",
            measured.len()
        )));
    }
    let (ip, peak) = measured.peak();
    if !(peak > 0.0) {
        return Err(Error::Precondition("measured spectrum has no positive peak".into()));
    }
    let left_min = measured.y[..ip].iter().copied().fold(f64::INFINITY, f64::min);
    let right_min = measured.y[ip + 1..].iter().copied().fold(f64::INFINITY, f64::min);
    if !(left_min < 0.5 * peak && right_min < 0.5 * peak) {
        return Err(Error::Precondition(
            "measured spectrum must fall below half maximum on both sides of the peak".into(),
        ));
    }
    if !(left_min.min(right_min) < 0.1 * peak) {
        return Err(Error::Precondition(
            "measured spectrum must reach the first side lobe on at least one side".into(),
        ));
    }
    Ok(())
}

/// Fits an SHG tuning curve with a sinc²-type model whose free parameters are
/// the peak position, an amplitude scale, the effective length fraction and
/// the profile parameters of `kind`.
///
/// The wavelength dependence of the mismatch comes from `model` at
/// `temperature_k`; the device length is `wg.length_mm` at 295 K. Power is
/// normalized to the measured maximum internally. Points are weighted by
/// `1/sigma`; points without a positive sigma take the median sigma, and a
/// curve without any sigma is fitted unweighted.
pub fn fit_shg_spectrum(
    model: &DispersionModel,
    measured: &SpectrumCurve,
    wg: &WaveguideSpec,
    temperature_k: f64,
    kind: ProfileKind,
    guess: &ShgFitGuess,
) -> Result<ShgFitResult> {
    check_shape(measured)?;
    if let ProfileKind::Polynomial { degree: 0 } = kind {
        return Err(Error::InvalidInput("polynomial profile needs degree >= 1".into()));
    }
    let (ip, peak) = measured.peak();
    let y: Vec<f64> = measured.y.iter().map(|v| v / peak).collect();
    let weight = point_weights(&measured.sigma, peak);
    let prep = Prepared::new(model, wg, temperature_k, &measured.x)?;

    let lambda0 = guess.peak_nm.unwrap_or(measured.x[ip]);
    let fraction0 = match guess.effective_fraction {
        Some(f) => f,
        None => {
            let fwhm = measured.fwhm().unwrap_or((measured.support().1 - measured.support().0) / 4.0);
            let h = 1e-3;
            let slope = (mismatch_shg(model, wg, lambda0 + h, temperature_k)?
                - mismatch_shg(model, wg, lambda0 - h, temperature_k)?)
                / (2.0 * h);
            let length_um = 4.0 * SINC2_HALF_POWER / (slope.abs() * fwhm);
            (length_um * 1e-3 / prep.length_mm).clamp(0.05, 1.0)
        }
    };
    let n_prof = n_profile_parameters(kind);
    let kappa = shg_kappa(lambda0);
    // perturbation that adds about one radian of phase across the device
    let unit = 2.0 / (kappa * fraction0 * prep.length_mm * 1e3);
    let starts: Vec<Vec<f64>> = match &guess.profile_parameters {
        Some(q) if q.len() == n_prof => vec![q.clone()],
        Some(q) => {
            return Err(Error::InvalidInput(format!(
                "profile guess has {} parameters, {kind:?} needs {n_prof}",
                q.len()
            )))
        }
        None if n_prof == 0 => vec![vec![]],
        None => [0.3, 1.0, 2.5]
            .iter()
            .map(|&s| {
                let mut q = vec![0.0; n_prof];
                q[0] = s * unit;
                q
            })
            .collect(),
    };
    let step = measured.x[1] - measured.x[0];
    let mut best: Option<lsq::Solution> = None;
    let mut last_err = None;
    for q in starts {
        let mut start = vec![lambda0, 1.0, fraction0];
        start.extend(q);
        match fit_from(&prep, kind, &y, &weight, &start, 0.1 * step.abs().max(1e-3)) {
            Ok(sol) => {
                if best.as_ref().is_none_or(|b| sol.cost < b.cost) {
                    best = Some(sol);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let sol = match best {
        Some(s) => s,
        None => return Err(last_err.expect("at least one start")),
    };

    let mut p = sol.parameters.clone();
    if kind == ProfileKind::TwoSegment {
        p[3] = p[3].abs();
    }
    let profile = profile_from(kind, &p[3..]);
    let model_y = prep.eval(kind, &p)?;
    let fitted_norm = SpectrumCurve::new(measured.x.clone(), model_y.clone())?;
    let overlap_with_ideal = if profile.is_uniform() {
        1.0
    } else {
        ideal_overlap(&prep, &fitted_norm, &p)?
    };
    let (peak_wavelength_nm, peak_value) = dense_peak(&prep, kind, &p)?;
    let fitted = fitted_norm.scaled(peak);
    let residuals: Vec<f64> = fitted.y.iter().zip(&measured.y).map(|(f, m)| f - m).collect();
    Ok(ShgFitResult {
        effective_length_mm: p[2] * wg.length_mm,
        effective_fraction: p[2],
        peak_wavelength_nm,
        amplitude: peak_value * peak,
        profile,
        overlap_with_ideal,
        residual: (sol.cost / measured.len() as f64).sqrt(),
        fitted,
        residuals,
        iterations: sol.iterations,
    })
}

fn point_weights(sigma: &[f64], peak: f64) -> Vec<f64> {
    let mut known: Vec<f64> = sigma.iter().copied().filter(|s| *s > 0.0).collect();
    if known.is_empty() {
        return vec![1.0; sigma.len()];
    }
    known.sort_by(f64::total_cmp);
    let median = known[known.len() / 2];
    sigma
        .iter()
        .map(|&s| peak / if s > 0.0 { s } else { median })
        .collect()
}

/// Overlap between the fitted curve and an ideal sinc² fitted to it.
fn ideal_overlap(prep: &Prepared, fitted: &SpectrumCurve, p: &[f64]) -> Result<f64> {
    let ones = vec![1.0; fitted.len()];
    let step = fitted.x[1] - fitted.x[0];
    let sol = fit_from(prep, ProfileKind::Uniform, &fitted.y, &ones, &p[..3], 0.1 * step.abs().max(1e-3))?;
    let ideal = SpectrumCurve::new(fitted.x.clone(), prep.eval(ProfileKind::Uniform, &sol.parameters)?)?;
    spectrum_overlap(fitted, &ideal)
}

/// Maximum of the fitted curve on a grid ten times finer than the data,
/// refined by a parabola through the three samples around it.
fn dense_peak(prep: &Prepared, kind: ProfileKind, p: &[f64]) -> Result<(f64, f64)> {
    let (lo, hi) = (prep.x[0], prep.x[prep.x.len() - 1]);
    let n = 10 * prep.x.len();
    let xs: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let dense = Prepared::new(prep.model, prep.wg, prep.temperature_k, &xs)?;
    let ys = dense.eval(kind, p)?;
    let (i, &ymax) = ys
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    if i == 0 || i + 1 == n {
        return Ok((xs[i], ymax));
    }
    let (y0, y1, y2) = (ys[i - 1], ys[i], ys[i + 1]);
    let denom = y0 - 2.0 * y1 + y2;
    if denom >= 0.0 {
        return Ok((xs[i], ymax));
    }
    let h = xs[1] - xs[0];
    let off = 0.5 * (y0 - y2) / denom;
    Ok((xs[i] + off * h, y1 - 0.25 * (y0 - y2) * off))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phasematch::{shg_power_spectrum, solve_phasematched_wavelength};

    fn device() -> (DispersionModel, WaveguideSpec) {
        (DispersionModel::lithium_niobate(), WaveguideSpec::new(8.81, 24.3).unwrap())
    }

    #[test]
    fn self_fit_of_ideal_curve() {
        let (m, wg) = device();
        let lam0 = solve_phasematched_wavelength(&m, &wg, 6.4, 1558.0).unwrap();
        let curve = shg_power_spectrum(&m, &wg, (lam0 - 0.6, lam0 + 0.6), 6.4, 121).unwrap();
        let fit = fit_shg_spectrum(&m, &curve, &wg, 6.4, ProfileKind::Uniform, &ShgFitGuess::default()).unwrap();
        assert!((fit.effective_length_mm - 24.3).abs() < 0.1, "{}", fit.effective_length_mm);
        assert!(fit.overlap_with_ideal >= 0.9999);
        assert!((fit.peak_wavelength_nm - lam0).abs() < 1e-3);
        assert!(fit.residual < 1e-6);
    }

    #[test]
    fn rejects_too_few_points() {
        let (m, wg) = device();
        let curve = shg_power_spectrum(&m, &wg, (1557.0, 1559.0), 6.4, 10).unwrap();
        assert!(matches!(
            fit_shg_spectrum(&m, &curve, &wg, 6.4, ProfileKind::Uniform, &ShgFitGuess::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn rejects_curve_without_flanks() {
        let (m, wg) = device();
        let lam0 = solve_phasematched_wavelength(&m, &wg, 6.4, 1558.0).unwrap();
        let curve = shg_power_spectrum(&m, &wg, (lam0 - 0.02, lam0 + 0.02), 6.4, 40).unwrap();
        assert!(fit_shg_spectrum(&m, &curve, &wg, 6.4, ProfileKind::Uniform, &ShgFitGuess::default()).is_err());
    }
}

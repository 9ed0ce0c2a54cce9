use num_complex::Complex64;

use super::amplitude::nonuniform_amplitude_auto;
use super::mismatch::{mismatch_shg, shg_kappa};
use super::{sinc, IndexProfile, WaveguideSpec};
use crate::curve::SpectrumCurve;
use crate::dispersion::DispersionModel;
use crate::error::{Error, Result};

/// SHG phase-matching amplitude Φ at fundamental `wavelength_nm`, using the
/// contracted length `L(T) = s(T) L`.
pub fn shg_amplitude(
    model: &DispersionModel,
    wg: &WaveguideSpec,
    wavelength_nm: f64,
    temperature_k: f64,
) -> Result<Complex64> {
    let dk = mismatch_shg(model, wg, wavelength_nm, temperature_k)?;
    let length_mm = model.thermal_scale(temperature_k)? * wg.length_mm;
    match &wg.profile {
        IndexProfile::Uniform => Ok(Complex64::new(sinc(0.5 * dk * length_mm * 1e3), 0.0)),
        profile => nonuniform_amplitude_auto(profile, dk, shg_kappa(wavelength_nm), length_mm),
    }
}

/// Normalized SHG tuning curve `|Φ|²` on `n_points` evenly spaced fundamental
/// wavelengths spanning `range_nm`.
///
/// A uniform profile gives `sinc²(Δk L(T) / 2)`, whose maximum is 1 at Δk = 0.
/// Other profiles are divided by their largest sample.
pub fn shg_power_spectrum(
    model: &DispersionModel,
    wg: &WaveguideSpec,
    range_nm: (f64, f64),
    temperature_k: f64,
    n_points: usize,
) -> Result<SpectrumCurve> {
    let (lo, hi) = range_nm;
    if n_points < 2 || !(hi > lo) {
        return Err(Error::InvalidInput(format!(
            "spectrum needs n_points >= 2 and an increasing range, got {n_points} on [{lo}, {hi}]"
        )));
    }
    let step = (hi - lo) / (n_points - 1) as f64;
    let x: Vec<f64> = (0..n_points)
        .map(|i| if i + 1 == n_points { hi } else { lo + i as f64 * step })
        .collect();
    let mut y = Vec::with_capacity(n_points);
    for &lam in &x {
        y.push(shg_amplitude(model, wg, lam, temperature_k)?.norm_sqr());
    }
    let peak = y.iter().copied().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::Degenerate("SHG spectrum is identically zero on the requested range".into()));
    }
    // the uniform sinc² already peaks at 1 when the range contains Δk = 0
    if !wg.profile.is_uniform() {
        y.iter_mut().for_each(|v| *v /= peak);
    }
    SpectrumCurve::new(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phasematch::{design_poling_period, solve_phasematched_wavelength};

    #[test]
    fn unit_peak_at_phase_matching() {
        let m = DispersionModel::lithium_niobate();
        let period = design_poling_period(&m, 1559.0, 6.4).unwrap();
        let wg = WaveguideSpec::new(period, 24.3).unwrap();
        let a = shg_amplitude(&m, &wg, 1559.0, 6.4).unwrap();
        assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_in_delta_k() {
        let m = DispersionModel::lithium_niobate();
        let wg = WaveguideSpec::new(8.81, 24.3).unwrap();
        let t = 6.4;
        let l_um = m.thermal_scale(t).unwrap() * 24.3e3;
        let lam0 = solve_phasematched_wavelength(&m, &wg, t, 1558.0).unwrap();
        // walk ±Δk around the root by solving for the wavelengths where Δk L/2 = ±x
        for x in [0.7, 1.39156, 2.5] {
            let target = 2.0 * x / l_um;
            let mut vals = Vec::new();
            for sign in [1.0, -1.0] {
                let (mut a, mut b) = (lam0 - 3.0, lam0 + 3.0);
                let g = |lam: f64| mismatch_shg(&m, &wg, lam, t).unwrap() - sign * target;
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if g(mid).signum() == g(a).signum() {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                vals.push(shg_amplitude(&m, &wg, 0.5 * (a + b), t).unwrap().norm_sqr());
            }
            assert!((vals[0] - vals[1]).abs() < 1e-9);
            assert!((vals[0] - sinc(x).powi(2)).abs() < 1e-9);
        }
    }

    #[test]
    fn nonuniform_curve_is_peak_normalized() {
        let m = DispersionModel::lithium_niobate();
        let wg = WaveguideSpec::with_profile(8.81, 24.3, IndexProfile::two_segment(2e-5, -2e-5)).unwrap();
        let c = shg_power_spectrum(&m, &wg, (1555.0, 1561.0), 6.4, 301).unwrap();
        assert_eq!(c.len(), 301);
        let peak = c.y.iter().copied().fold(0.0, f64::max);
        assert_eq!(peak, 1.0);
    }

    #[test]
    fn rejects_single_point() {
        let m = DispersionModel::lithium_niobate();
        let wg = WaveguideSpec::new(8.81, 24.3).unwrap();
        assert!(shg_power_spectrum(&m, &wg, (1555.0, 1561.0), 6.4, 1).is_err());
    }
}

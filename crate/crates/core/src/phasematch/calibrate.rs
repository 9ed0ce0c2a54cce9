use std::path::Path;

use super::mismatch::index_mismatch;
use super::solve::solve_phasematched_wavelength;
use super::WaveguideSpec;
use crate::csvio;
use crate::dispersion::{CorrectionPolynomial, DispersionModel, CORRECTION_DEGREE, CORRECTION_SANITY_BOUND};
use crate::error::{Error, Result};
use crate::lsq::{self, Parameter, Settings};

/// One observed phase-matched SHG wavelength during a cool-down.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationPoint {
    /// At 295 K, µm.
    pub poling_period_um: f64,
    pub temperature_k: f64,
    pub wavelength_nm: f64,
    /// Missing or non-positive values are replaced by the median of the set.
    pub sigma_nm: Option<f64>,
}

impl CalibrationPoint {
    /// Reads `poling_period_um, temperature_K, lambda_pm_nm[, sigma_nm]`.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<Self>> {
        let path = path.as_ref();
        let table = csvio::read_table(path)?;
        Self::from_table(&table, &path.display().to_string())
    }

    pub fn from_table(table: &csvio::Table, source: &str) -> Result<Vec<Self>> {
        let cols = table.require(source, &["poling_period_um", "temperature_K", "lambda_pm_nm"])?;
        let sigma = table.column("sigma_nm");
        Ok((0..table.n_rows())
            .map(|i| CalibrationPoint {
                poling_period_um: cols[0][i],
                temperature_k: cols[1][i],
                wavelength_nm: cols[2][i],
                sigma_nm: sigma.map(|s| s[i]),
            })
            .collect())
    }
}

#[derive(Debug, Clone)]
pub struct CalibrationResult {
    pub correction: CorrectionPolynomial,
    pub predicted_nm: Vec<f64>,
    /// Predicted minus observed, nm.
    pub residuals_nm: Vec<f64>,
    pub rms_nm: f64,
    pub iterations: usize,
}

fn effective_sigmas(points: &[CalibrationPoint]) -> Vec<f64> {
    let mut known: Vec<f64> = points
        .iter()
        .filter_map(|p| p.sigma_nm)
        .filter(|s| *s > 0.0 && s.is_finite())
        .collect();
    known.sort_by(f64::total_cmp);
    let median = match known.len() {
        0 => 1.0,
        n if n % 2 == 1 => known[n / 2],
        n => 0.5 * (known[n / 2 - 1] + known[n / 2]),
    };
    points
        .iter()
        .map(|p| match p.sigma_nm {
            Some(s) if s > 0.0 && s.is_finite() => s,
            _ => median,
        })
        .collect()
}

/// Fits the degree-5 correction δn(T) so that the predicted phase-matched
/// wavelengths reproduce the observations in the inverse-variance weighted
/// least-squares sense.
///
/// The fitted polynomial spans the temperature range of the data. The
/// starting point comes from inverting the phase-matching condition at each
/// observed wavelength, which is exact for noiseless data; the full
/// wavelength-space problem is then refined by damped least squares.
pub fn calibrate_correction(points: &[CalibrationPoint], model: &DispersionModel) -> Result<CalibrationResult> {
    if points.is_empty() {
        return Err(Error::InvalidInput("calibration needs data points".into()));
    }
    let sigmas = effective_sigmas(points);
    let t_min = points.iter().map(|p| p.temperature_k).fold(f64::INFINITY, f64::min);
    let t_max = points.iter().map(|p| p.temperature_k).fold(f64::NEG_INFINITY, f64::max);
    if !(t_max > t_min) {
        return Err(Error::InvalidInput(format!(
            "calibration needs >= {} distinct temperatures",
            CORRECTION_DEGREE + 1
        )));
    }
    let range = [t_min, t_max];
    let w = &model.correction_weights;
    // δn enters Δn through 2 n_TE(λ/2) - n_TE(λ) - n_TM(λ) plus the combined term
    let weight = w.te - w.tm + w.combined;
    if weight == 0.0 {
        return Err(Error::InvalidInput("correction weights cancel in the index mismatch".into()));
    }

    let base = model.clone().with_correction(CorrectionPolynomial::zero(range));
    let guides = points
        .iter()
        .map(|p| WaveguideSpec::new(p.poling_period_um, 1.0))
        .collect::<Result<Vec<_>>>()?;
    let mut implied = Vec::with_capacity(points.len());
    for p in points {
        let period_um = p.poling_period_um * base.thermal_scale(p.temperature_k)?;
        let dn = index_mismatch(&base, p.wavelength_nm, p.temperature_k)?;
        implied.push((p.wavelength_nm * 1e-3 / period_um - dn) / weight);
    }
    let temps: Vec<f64> = points.iter().map(|p| p.temperature_k).collect();
    let inv_var: Vec<f64> = sigmas.iter().map(|s| 1.0 / (s * s)).collect();
    let start = CorrectionPolynomial::fit_values(&temps, &implied, &inv_var, range)?;

    let predict = |coefficients: &[f64]| -> Result<Vec<f64>> {
        let mut c = [0.0; CORRECTION_DEGREE + 1];
        c.copy_from_slice(coefficients);
        let m = base.clone().with_correction(CorrectionPolynomial::new(c, range)?);
        points
            .iter()
            .zip(&guides)
            .map(|(p, wg)| solve_phasematched_wavelength(&m, wg, p.temperature_k, p.wavelength_nm))
            .collect()
    };
    let params: Vec<Parameter> = start.coefficients.iter().map(|&c| Parameter::free(c, 1e-4)).collect();
    let sol = lsq::minimize(&params, &Settings::default(), |c| {
        let pred = predict(c)?;
        Ok(pred
            .iter()
            .zip(points)
            .zip(&sigmas)
            .map(|((lp, p), s)| (lp - p.wavelength_nm) / s)
            .collect())
    })?;

    let mut coefficients = [0.0; CORRECTION_DEGREE + 1];
    coefficients.copy_from_slice(&sol.parameters);
    let correction = CorrectionPolynomial::new(coefficients, range)?;
    for i in 0..=100 {
        let t = t_min + (t_max - t_min) * i as f64 / 100.0;
        let v = correction.evaluate(t).delta_n;
        if !(v.abs() < CORRECTION_SANITY_BOUND) {
            return Err(Error::Degenerate(format!(
                "fitted correction reaches {v:e} at {t} K, beyond the sanity bound {CORRECTION_SANITY_BOUND}"
            )));
        }
    }
    let predicted_nm = predict(&sol.parameters)?;
    let residuals_nm: Vec<f64> = predicted_nm.iter().zip(points).map(|(lp, p)| lp - p.wavelength_nm).collect();
    let rms_nm = (residuals_nm.iter().map(|r| r * r).sum::<f64>() / residuals_nm.len() as f64).sqrt();
    Ok(CalibrationResult {
        correction,
        predicted_nm,
        residuals_nm,
        rms_nm,
        iterations: sol.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phasematch::design_poling_period;

    fn synthetic(truth: &CorrectionPolynomial) -> Vec<CalibrationPoint> {
        let m = DispersionModel::lithium_niobate().with_correction(truth.clone());
        let base = DispersionModel::lithium_niobate();
        let mut pts = Vec::new();
        for target in [1520.0, 1540.0, 1560.0] {
            let period = design_poling_period(&base, target, 295.0).unwrap();
            let wg = WaveguideSpec::new(period, 24.3).unwrap();
            for t in [10.0, 60.0, 110.0, 160.0, 210.0, 260.0, 295.0] {
                let lam = solve_phasematched_wavelength(&m, &wg, t, target).unwrap();
                pts.push(CalibrationPoint {
                    poling_period_um: period,
                    temperature_k: t,
                    wavelength_nm: lam,
                    sigma_nm: Some(0.02),
                });
            }
        }
        pts
    }

    #[test]
    fn zero_correction_is_recovered() {
        let truth = CorrectionPolynomial::zero([10.0, 295.0]);
        let res = calibrate_correction(&synthetic(&truth), &DispersionModel::lithium_niobate()).unwrap();
        assert!(res.correction.coefficients.iter().all(|c| c.abs() < 1e-9));
        assert!(res.rms_nm < 1e-6);
    }

    #[test]
    fn too_few_temperatures() {
        let mut pts = synthetic(&CorrectionPolynomial::zero([10.0, 295.0]));
        pts.retain(|p| p.temperature_k < 250.0);
        assert!(calibrate_correction(&pts, &DispersionModel::lithium_niobate()).is_err());
    }

    #[test]
    fn missing_sigma_takes_median() {
        let mk = |s| CalibrationPoint {
            poling_period_um: 8.8,
            temperature_k: 10.0,
            wavelength_nm: 1550.0,
            sigma_nm: s,
        };
        let s = effective_sigmas(&[mk(Some(0.1)), mk(None), mk(Some(0.3)), mk(Some(-1.0)), mk(Some(0.2))]);
        assert_eq!(s, vec![0.1, 0.2, 0.3, 0.2, 0.2]);
    }
}

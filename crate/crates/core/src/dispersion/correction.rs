use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use super::sellmeier::require_provenance;
use crate::error::{Error, Result};

pub const CORRECTION_DEGREE: usize = 5;
const N_COEFF: usize = CORRECTION_DEGREE + 1;

/// Magnitude above which a correction is taken to signal a diverged fit.
pub const CORRECTION_SANITY_BOUND: f64 = 1e-2;

/// Degree-5 empirical index correction δn(T).
///
/// Coefficients multiply powers of the scaled temperature
/// `t = (2T - (T_max + T_min)) / (T_max - T_min)`, which maps the fitted
/// range onto [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionPolynomial {
    pub coefficients: [f64; N_COEFF],
    pub temperature_range_k: [f64; 2],
}

/// Correction value plus a flag set when `T` lies outside the fitted range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionValue {
    pub delta_n: f64,
    pub extrapolated: bool,
}

impl CorrectionPolynomial {
    pub fn new(coefficients: [f64; N_COEFF], temperature_range_k: [f64; 2]) -> Result<Self> {
        let [lo, hi] = temperature_range_k;
        if !(lo.is_finite() && hi.is_finite() && lo < hi && lo >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "correction temperature range [{lo}, {hi}] K must be increasing and non-negative"
            )));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("correction coefficients must be finite".into()));
        }
        Ok(Self {
            coefficients,
            temperature_range_k,
        })
    }

    pub fn zero(temperature_range_k: [f64; 2]) -> Self {
        Self {
            coefficients: [0.0; N_COEFF],
            temperature_range_k,
        }
    }

    pub fn scaled_temperature(&self, temperature_k: f64) -> f64 {
        let [lo, hi] = self.temperature_range_k;
        (2.0 * temperature_k - (hi + lo)) / (hi - lo)
    }

    pub fn evaluate(&self, temperature_k: f64) -> CorrectionValue {
        let t = self.scaled_temperature(temperature_k);
        let delta_n = self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * t + c);
        let [lo, hi] = self.temperature_range_k;
        CorrectionValue {
            delta_n,
            extrapolated: !(temperature_k >= lo && temperature_k <= hi),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|&c| c == 0.0)
    }

    /// Weighted least-squares fit of δn samples; with six distinct
    /// temperatures this interpolates exactly.
    pub fn fit_values(
        temperatures_k: &[f64],
        values: &[f64],
        weights: &[f64],
        temperature_range_k: [f64; 2],
    ) -> Result<Self> {
        let n = temperatures_k.len();
        if values.len() != n || weights.len() != n {
            return Err(Error::InvalidInput("column lengths differ".into()));
        }
        let mut distinct: Vec<f64> = temperatures_k.to_vec();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        if distinct.len() < N_COEFF {
            return Err(Error::InvalidInput(format!(
                "degree-{CORRECTION_DEGREE} correction needs >= {N_COEFF} distinct temperatures, got {}",
                distinct.len()
            )));
        }
        let proto = Self::zero(temperature_range_k);
        let mut design = DMatrix::<f64>::zeros(n, N_COEFF);
        let mut rhs = DVector::<f64>::zeros(n);
        for (row, ((&temp, &v), &w)) in temperatures_k.iter().zip(values).zip(weights).enumerate() {
            let sw = w.sqrt();
            let t = proto.scaled_temperature(temp);
            let mut p = 1.0;
            for k in 0..N_COEFF {
                design[(row, k)] = sw * p;
                p *= t;
            }
            rhs[row] = sw * v;
        }
        let svd = design.svd(true, true);
        let sol = svd
            .solve(&rhs, 1e-14)
            .map_err(|e| Error::InvalidInput(format!("correction fit failed: {e}")))?;
        let mut coefficients = [0.0; N_COEFF];
        coefficients.copy_from_slice(sol.as_slice());
        Self::new(coefficients, temperature_range_k)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct CorrectionSection {
    pub provenance: String,
    pub temperature_range_k: [f64; 2],
    pub coefficients: [f64; N_COEFF],
    #[serde(default)]
    pub weights: Option<CorrectionWeights>,
}

impl CorrectionSection {
    pub fn into_parts(self) -> Result<(CorrectionPolynomial, CorrectionWeights)> {
        require_provenance("correction", &self.provenance)?;
        let poly = CorrectionPolynomial::new(self.coefficients, self.temperature_range_k)
            .map_err(|e| Error::Config(format!("[correction] {e}")))?;
        Ok((poly, self.weights.unwrap_or_default()))
    }
}

/// Where δn(T) enters the phase-matching condition.
///
/// `combined` multiplies δn added to the combined index mismatch
/// Δn = 2 n_TE(λ/2) - n_TE(λ) - n_TM(λ). `te` and `tm` multiply δn added to
/// every individual effective index of that polarization.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrectionWeights {
    pub te: f64,
    pub tm: f64,
    pub combined: f64,
}

impl Default for CorrectionWeights {
    fn default() -> Self {
        Self {
            te: 0.0,
            tm: 0.0,
            combined: 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_everywhere() {
        let p = CorrectionPolynomial::zero([4.0, 295.0]);
        for t in [0.0, 4.0, 100.0, 295.0, 400.0] {
            assert_eq!(p.evaluate(t).delta_n, 0.0);
        }
    }

    #[test]
    fn constant_term_only() {
        let p = CorrectionPolynomial::new([3e-4, 0.0, 0.0, 0.0, 0.0, 0.0], [4.0, 295.0]).unwrap();
        for t in [4.0, 17.0, 150.0, 295.0] {
            assert_eq!(p.evaluate(t).delta_n, 3e-4);
        }
    }

    #[test]
    fn matches_power_sum_at_chebyshev_nodes() {
        let c = [1.2e-4, -3.4e-4, 5.5e-5, 7.0e-6, -2.1e-4, 9.9e-5];
        let p = CorrectionPolynomial::new(c, [10.0, 290.0]).unwrap();
        for k in 0..5 {
            let node = ((2 * k + 1) as f64 * std::f64::consts::PI / 10.0).cos();
            let temp = 0.5 * (node * (290.0 - 10.0) + 290.0 + 10.0);
            let direct: f64 = c.iter().enumerate().map(|(i, ci)| ci * node.powi(i as i32)).sum();
            let got = p.evaluate(temp).delta_n;
            assert!((got - direct).abs() <= 1e-15 * direct.abs().max(1e-300) + 1e-19, "{got} {direct}");
        }
    }

    #[test]
    fn extrapolation_is_flagged() {
        let p = CorrectionPolynomial::zero([10.0, 290.0]);
        assert!(!p.evaluate(100.0).extrapolated);
        assert!(p.evaluate(5.0).extrapolated);
        assert!(p.evaluate(295.0).extrapolated);
    }

    #[test]
    fn fit_requires_six_temperatures() {
        let t = [10.0, 20.0, 30.0, 40.0, 50.0, 50.0];
        let r = CorrectionPolynomial::fit_values(&t, &[0.0; 6], &[1.0; 6], [10.0, 50.0]);
        assert!(r.is_err());
    }
}

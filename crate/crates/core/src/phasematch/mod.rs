//! Quasi-phase-matching: mismatch, tuning curves, forward and inverse
//! wavelength/period problems, spectrum fitting and correction calibration.
//!
//! Units: wavelengths in nm, poling periods in µm, lengths in mm,
//! temperatures in K, wavevector mismatch in rad/µm.
//!
//! `sinc(x) = sin(x) / x` throughout (not the normalized `sin(πx)/(πx)`);
//! the tuning curve is `sinc²(Δk L / 2)`.

mod amplitude;
mod calibrate;
mod mismatch;
mod shg_fit;
mod solve;
mod spectrum;

pub use amplitude::{nonuniform_amplitude, nonuniform_amplitude_auto, required_panels, PHASE_STEP_LIMIT};
pub use calibrate::{calibrate_correction, CalibrationPoint, CalibrationResult};
pub use mismatch::{index_mismatch, mismatch_shg, mismatch_spdc, pump_wavelength, shg_kappa};
pub use shg_fit::{fit_shg_spectrum, ProfileKind, ShgFitGuess, ShgFitResult};
pub use solve::{design_poling_period, solve_phasematched_wavelength, PhaseMatchScan};
pub use spectrum::{shg_amplitude, shg_power_spectrum};

use crate::error::{Error, Result};

/// Largest local index perturbation accepted in a profile.
pub const PROFILE_SANITY_BOUND: f64 = 1e-2;

/// `sin(x) / x`, with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Local index perturbation along the poled region, as a function of the
/// position fraction `u = z / L`.
#[derive(Debug, Clone, PartialEq)]
pub enum IndexProfile {
    Uniform,
    /// `(start fraction, δn)` segments; the first starts at 0 and starts increase.
    PiecewiseConstant(Vec<(f64, f64)>),
    /// `δn(u) = Σ c_k (2u - 1)^k`.
    Polynomial(Vec<f64>),
}

impl IndexProfile {
    /// Two halves with perturbations `first` and `second`.
    pub fn two_segment(first: f64, second: f64) -> Self {
        IndexProfile::PiecewiseConstant(vec![(0.0, first), (0.5, second)])
    }

    pub fn is_uniform(&self) -> bool {
        match self {
            IndexProfile::Uniform => true,
            IndexProfile::PiecewiseConstant(s) => s.iter().all(|&(_, d)| d == 0.0),
            IndexProfile::Polynomial(c) => c.iter().all(|&v| v == 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            IndexProfile::Uniform => Ok(()),
            IndexProfile::PiecewiseConstant(segments) => {
                if segments.is_empty() || segments[0].0 != 0.0 {
                    return Err(Error::InvalidInput("piecewise profile must start at z/L = 0".into()));
                }
                if segments.windows(2).any(|w| !(w[1].0 > w[0].0)) || segments.iter().any(|s| s.0 >= 1.0) {
                    return Err(Error::InvalidInput(
                        "segment starts must increase strictly within [0, 1)".into(),
                    ));
                }
                self.check_bound(segments.iter().map(|s| s.1))
            }
            IndexProfile::Polynomial(c) => {
                if c.is_empty() {
                    return Err(Error::InvalidInput("polynomial profile needs coefficients".into()));
                }
                self.check_bound((0..=200).map(|i| self.local(i as f64 / 200.0)))
            }
        }
    }

    fn check_bound(&self, values: impl Iterator<Item = f64>) -> Result<()> {
        for v in values {
            if !(v.abs() < PROFILE_SANITY_BOUND) {
                return Err(Error::InvalidInput(format!(
                    "profile perturbation {v} exceeds the sanity bound {PROFILE_SANITY_BOUND}"
                )));
            }
        }
        Ok(())
    }

    /// δn at position fraction `u`.
    pub fn local(&self, u: f64) -> f64 {
        match self {
            IndexProfile::Uniform => 0.0,
            IndexProfile::PiecewiseConstant(segments) => {
                let i = segments.partition_point(|s| s.0 <= u);
                segments[i.max(1) - 1].1
            }
            IndexProfile::Polynomial(c) => {
                let x = 2.0 * u - 1.0;
                c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
            }
        }
    }

    /// `∫₀ᵘ δn(u') du'`.
    pub fn cumulative(&self, u: f64) -> f64 {
        match self {
            IndexProfile::Uniform => 0.0,
            IndexProfile::PiecewiseConstant(segments) => {
                let mut acc = 0.0;
                for (k, &(start, dn)) in segments.iter().enumerate() {
                    if start >= u {
                        break;
                    }
                    let end = segments.get(k + 1).map_or(1.0, |s| s.0).min(u);
                    acc += dn * (end - start);
                }
                acc
            }
            IndexProfile::Polynomial(c) => {
                // ∫ (2u-1)^k du = (2u-1)^(k+1) / (2(k+1))
                let x = 2.0 * u - 1.0;
                c.iter()
                    .enumerate()
                    .map(|(k, &ck)| {
                        let p = (k + 1) as f64;
                        ck * (x.powi(k as i32 + 1) - (-1f64).powi(k as i32 + 1)) / (2.0 * p)
                    })
                    .sum()
            }
        }
    }

    /// Segment boundaries as position fractions, including 0 and 1.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            IndexProfile::PiecewiseConstant(segments) => {
                segments.iter().map(|s| s.0).chain(std::iter::once(1.0)).collect()
            }
            _ => vec![0.0, 1.0],
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            IndexProfile::Uniform => 0.0,
            IndexProfile::PiecewiseConstant(s) => s.iter().map(|v| v.1.abs()).fold(0.0, f64::max),
            IndexProfile::Polynomial(c) => c.iter().map(|v| v.abs()).sum(),
        }
    }
}

/// Poled waveguide geometry, specified at 295 K.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveguideSpec {
    pub poling_period_um: f64,
    pub length_mm: f64,
    pub profile: IndexProfile,
}

impl WaveguideSpec {
    pub fn new(poling_period_um: f64, length_mm: f64) -> Result<Self> {
        Self::with_profile(poling_period_um, length_mm, IndexProfile::Uniform)
    }

    pub fn with_profile(poling_period_um: f64, length_mm: f64, profile: IndexProfile) -> Result<Self> {
        if !(poling_period_um > 0.0 && poling_period_um.is_finite()) {
            return Err(Error::InvalidInput(format!("poling period {poling_period_um} um must be positive")));
        }
        if !(length_mm > 0.0 && length_mm.is_finite()) {
            return Err(Error::InvalidInput(format!("length {length_mm} mm must be positive")));
        }
        profile.validate()?;
        Ok(Self {
            poling_period_um,
            length_mm,
            profile,
        })
    }
}

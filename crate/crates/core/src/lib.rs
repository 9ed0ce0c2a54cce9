//! Quasi-phase-matching design and photon-pair source analysis for
//! temperature-tuned (including cryogenic) lithium niobate waveguides.
//!
//! Units throughout: wavelengths in nm, poling periods in µm, device lengths
//! in mm, temperatures in K, wavevector mismatch in rad/µm, delays in ps.
//!
//! - [`dispersion`]: effective indices and thermal contraction.
//! - [`phasematch`]: mismatch, tuning curves, period design, spectrum and calibration fits.
//! - [`jsa`]: joint spectral amplitude, marginals, filters and Schmidt decomposition.
//! - [`metrics`]: HOM dip and visibility, Klyshko efficiency, brightness and heralded g².

// `!(x > y)` comparisons also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod csvio;
pub mod curve;
pub mod dispersion;
pub mod error;
pub mod jsa;
pub mod lsq;
pub mod metrics;
pub mod phasematch;

pub use curve::{spectrum_overlap, SpectrumCurve};
pub use dispersion::{DispersionModel, Polarization};
pub use error::{Error, FitFailure, Result};
pub use phasematch::{IndexProfile, WaveguideSpec};

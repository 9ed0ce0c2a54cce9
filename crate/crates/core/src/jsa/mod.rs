//! Joint spectral amplitude of the down-converted pair.
//!
//! `A(λs, λi) = α(λp) Φ(Δk(λs, λi))` with `1/λp = 1/λs + 1/λi`, sampled on a
//! uniform signal × idler wavelength grid. Rows index the signal axis and
//! columns the idler axis. A normalized spectrum satisfies
//! `Σ |A|² Δλs Δλi = 1` (rectangle rule on the grid).
//!
//! All bandwidths are intensity FWHM; [`amplitude_sigma`] is the one place
//! where they are converted to amplitude widths.

mod filter;
mod fit;
mod grid;
mod io;
mod pump;
mod schmidt;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use filter::{apply_filter, BandpassFilter, FilterShape};
pub use fit::{gaussian_fit, GaussianFit};
pub use grid::SpectralGrid;
pub use io::JsiTable;
pub use pump::{PumpEnvelope, PumpShape};
pub use schmidt::{schmidt, SchmidtResult};

use crate::curve::SpectrumCurve;
use crate::dispersion::DispersionModel;
use crate::error::{Error, Result};
use crate::phasematch::{mismatch_spdc, nonuniform_amplitude_auto, pump_wavelength, shg_kappa, sinc};
use crate::phasematch::{IndexProfile, WaveguideSpec};

/// Allowed deviation of `Σ |A|² Δλs Δλi` from 1 for a normalized spectrum.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// σ of the Gaussian amplitude `exp(-x² / (2σ²))` whose intensity has full
/// width at half maximum `fwhm`.
pub fn amplitude_sigma(fwhm: f64) -> f64 {
    fwhm / (2.0 * std::f64::consts::LN_2.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointSpectrum {
    pub grid: SpectralGrid,
    /// `n_s × n_i`.
    pub amplitude: DMatrix<Complex64>,
    pub normalized: bool,
}

impl JointSpectrum {
    /// Unnormalized spectrum; shapes must match the grid.
    pub fn new(grid: SpectralGrid, amplitude: DMatrix<Complex64>) -> Result<Self> {
        if amplitude.nrows() != grid.signal_nm.len() || amplitude.ncols() != grid.idler_nm.len() {
            return Err(Error::InvalidInput(format!(
                "amplitude is {}x{} but the grid is {}x{}",
                amplitude.nrows(),
                amplitude.ncols(),
                grid.signal_nm.len(),
                grid.idler_nm.len()
            )));
        }
        if amplitude.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::InvalidInput("joint spectrum contains non-finite amplitudes".into()));
        }
        Ok(Self {
            grid,
            amplitude,
            normalized: false,
        })
    }

    /// Amplitude `√I` with flat phase from an intensity matrix.
    pub fn from_intensity(grid: SpectralGrid, intensity: &DMatrix<f64>) -> Result<Self> {
        if intensity.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidInput("joint spectral intensity must be non-negative".into()));
        }
        Self::new(grid, intensity.map(|v| Complex64::new(v.sqrt(), 0.0)))
    }

    /// `Σ |A|² Δλs Δλi`.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitude.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.cell_area()
    }

    pub fn normalize(mut self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if !(n2 > 0.0 && n2.is_finite()) {
            return Err(Error::Degenerate(format!("cannot normalize a joint spectrum with norm² {n2}")));
        }
        let s = 1.0 / n2.sqrt();
        self.amplitude.iter_mut().for_each(|a| *a *= s);
        self.normalized = true;
        Ok(self)
    }

    pub(crate) fn require_normalized(&self, what: &str) -> Result<()> {
        let n2 = self.norm_sqr();
        if !self.normalized || (n2 - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::Precondition(format!(
                "{what} needs a normalized joint spectrum (Σ|A|²ΔλsΔλi = {n2})"
            )));
        }
        Ok(())
    }

    pub fn intensity(&self) -> DMatrix<f64> {
        self.amplitude.map(|a| a.norm_sqr())
    }

    /// Exchanges the roles of signal and idler.
    pub fn transpose(&self) -> Self {
        Self {
            grid: SpectralGrid {
                signal_nm: self.grid.idler_nm.clone(),
                idler_nm: self.grid.signal_nm.clone(),
            },
            amplitude: self.amplitude.transpose(),
            normalized: self.normalized,
        }
    }
}

/// Builds the normalized joint spectrum of `wg` pumped by `pump` at `temperature_k`.
///
/// The phase matching uses the contracted length `s(T) L`; non-uniform
/// profiles enter through [`nonuniform_amplitude_auto`] with the
/// index-to-wavevector factor `2π / (2 λp)`.
pub fn build_jsa(
    model: &DispersionModel,
    wg: &WaveguideSpec,
    pump: &PumpEnvelope,
    grid: &SpectralGrid,
    temperature_k: f64,
) -> Result<JointSpectrum> {
    let length_mm = model.thermal_scale(temperature_k)? * wg.length_mm;
    assemble(pump, grid, |s, i| {
        let dk = mismatch_spdc(model, wg, s, i, temperature_k)?;
        match &wg.profile {
            IndexProfile::Uniform => Ok(Complex64::new(sinc(0.5 * dk * length_mm * 1e3), 0.0)),
            profile => {
                nonuniform_amplitude_auto(profile, dk, shg_kappa(2.0 * pump_wavelength(s, i)), length_mm)
            }
        }
    })
}

/// Joint spectrum with constant phase matching, `A = α(λp)`.
pub fn build_jsa_flat(pump: &PumpEnvelope, grid: &SpectralGrid) -> Result<JointSpectrum> {
    assemble(pump, grid, |_, _| Ok(Complex64::new(1.0, 0.0)))
}

fn assemble(
    pump: &PumpEnvelope,
    grid: &SpectralGrid,
    mut phase_matching: impl FnMut(f64, f64) -> Result<Complex64>,
) -> Result<JointSpectrum> {
    let (ns, ni) = (grid.signal_nm.len(), grid.idler_nm.len());
    let lp = |r: usize, c: usize| pump_wavelength(grid.signal_nm[r], grid.idler_nm[c]);
    let (lp_min, lp_max) = (lp(0, 0), lp(ns - 1, ni - 1));
    pump.check_overlap(lp_min, lp_max)?;
    // the pump is evaluated in the log domain and rescaled to a unit maximum
    // so that very narrow pumps still select the cells nearest the energy
    // conservation curve instead of underflowing
    let log_alpha = DMatrix::from_fn(ns, ni, |r, c| pump.log_amplitude(lp(r, c)));
    let top = log_alpha.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::Degenerate("pump envelope vanishes on the whole grid".into()));
    }
    let mut amp = DMatrix::<Complex64>::zeros(ns, ni);
    for c in 0..ni {
        for r in 0..ns {
            let alpha = (log_alpha[(r, c)] - top).exp();
            if alpha > 0.0 {
                amp[(r, c)] = alpha * phase_matching(grid.signal_nm[r], grid.idler_nm[c])?;
            }
        }
    }
    JointSpectrum::new(grid.clone(), amp)?.normalize()
}

/// Signal and idler marginal spectra, `∫ |A|² dλ` over the other axis.
pub fn marginals(js: &JointSpectrum) -> Result<(SpectrumCurve, SpectrumCurve)> {
    let i = js.intensity();
    let (ds, di) = (js.grid.signal_step(), js.grid.idler_step());
    let signal: Vec<f64> = i.row_iter().map(|r| r.sum() * di).collect();
    let idler: Vec<f64> = i.column_iter().map(|c| c.sum() * ds).collect();
    Ok((
        SpectrumCurve::new(js.grid.signal_nm.clone(), signal)?,
        SpectrumCurve::new(js.grid.idler_nm.clone(), idler)?,
    ))
}

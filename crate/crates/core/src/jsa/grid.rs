use super::PumpEnvelope;
use crate::dispersion::DispersionModel;
use crate::error::{Error, Result};
use crate::phasematch::{mismatch_spdc, WaveguideSpec};

const MIN_POINTS: usize = 8;

/// Relative tolerance on the spacing of a uniform axis.
const SPACING_TOLERANCE: f64 = 1e-6;

/// Default points per axis for [`SpectralGrid::auto`].
pub const AUTO_POINTS: usize = 201;

/// Half-span of the automatic grid in units of the larger bandwidth estimate.
pub const AUTO_SPAN_FACTOR: f64 = 3.0;

/// `sinc²(x) = 1/2` at this `x`.
const SINC2_HALF_POWER: f64 = 1.391_557_377_3;

/// Uniform signal and idler wavelength axes, nm.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    pub signal_nm: Vec<f64>,
    pub idler_nm: Vec<f64>,
}

fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.len() < MIN_POINTS {
        return Err(Error::InvalidInput(format!(
            "{name} axis needs >= {MIN_POINTS} points, got {}",
            axis.len()
        )));
    }
    if axis.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidInput(format!("{name} axis must hold positive finite wavelengths")));
    }
    let step = (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64;
    if !(step > 0.0) {
        return Err(Error::InvalidInput(format!("{name} axis must increase")));
    }
    for w in axis.windows(2) {
        if ((w[1] - w[0]) - step).abs() > SPACING_TOLERANCE * step {
            return Err(Error::InvalidInput(format!("{name} axis must be uniformly spaced")));
        }
    }
    Ok(())
}

fn linspace(center: f64, half_span: f64, n: usize) -> Vec<f64> {
    let lo = center - half_span;
    let step = 2.0 * half_span / (n.max(2) - 1) as f64;
    (0..n).map(|i| lo + i as f64 * step).collect()
}

impl SpectralGrid {
    pub fn new(signal_nm: Vec<f64>, idler_nm: Vec<f64>) -> Result<Self> {
        check_axis("signal", &signal_nm)?;
        check_axis("idler", &idler_nm)?;
        Ok(Self { signal_nm, idler_nm })
    }

    /// Axes `center ± half_span` with `n` points each.
    pub fn centered(
        signal_center: f64,
        signal_half_span: f64,
        n_signal: usize,
        idler_center: f64,
        idler_half_span: f64,
        n_idler: usize,
    ) -> Result<Self> {
        Self::new(
            linspace(signal_center, signal_half_span, n_signal),
            linspace(idler_center, idler_half_span, n_idler),
        )
    }

    /// Square grid around degeneracy `2 λp`, spanning
    /// [`AUTO_SPAN_FACTOR`] times the larger of the pump-driven and the
    /// phase-matching-driven bandwidth on each side, with [`AUTO_POINTS`] points.
    ///
    /// A pump of FWHM `Δλp` spreads each photon over `(λ/λp)² Δλp = 4 Δλp`
    /// at fixed partner wavelength. The phase-matching estimate is the sinc²
    /// FWHM `4 x½ / L` in Δk converted with the smaller of `|∂Δk/∂λs|` and
    /// `|∂Δk/∂λi|`.
    pub fn auto(
        model: &DispersionModel,
        wg: &WaveguideSpec,
        pump: &PumpEnvelope,
        temperature_k: f64,
    ) -> Result<Self> {
        let center = 2.0 * pump.center_nm;
        let pump_width = 4.0 * pump.fwhm_nm;
        let length_um = model.thermal_scale(temperature_k)? * wg.length_mm * 1e3;
        let h = 1e-3;
        let d = |ds: f64, di: f64| mismatch_spdc(model, wg, center + ds, center + di, temperature_k);
        let slope_s = (d(h, 0.0)? - d(-h, 0.0)?) / (2.0 * h);
        let slope_i = (d(0.0, h)? - d(0.0, -h)?) / (2.0 * h);
        let slope = slope_s.abs().min(slope_i.abs());
        let pm_width = if slope > 0.0 {
            4.0 * SINC2_HALF_POWER / (length_um * slope)
        } else {
            pump_width
        };
        let half = AUTO_SPAN_FACTOR * pump_width.max(pm_width);
        Self::centered(center, half, AUTO_POINTS, center, half, AUTO_POINTS)
    }

    pub fn signal_step(&self) -> f64 {
        step(&self.signal_nm)
    }

    pub fn idler_step(&self) -> f64 {
        step(&self.idler_nm)
    }

    pub fn cell_area(&self) -> f64 {
        self.signal_step() * self.idler_step()
    }
}

fn step(axis: &[f64]) -> f64 {
    (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64
}

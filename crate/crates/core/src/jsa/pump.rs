use super::amplitude_sigma;
use crate::curve::SpectrumCurve;
use crate::error::{Error, Result};

/// `sech²(x/τ)` has intensity FWHM `2 τ acosh(√2)`.
const SECH2_FWHM_PER_TAU: f64 = 1.762_747_174_039_086;

/// Pump amplitudes further than this many FWHM from the grid count as disjoint.
const OVERLAP_REACH_FWHM: f64 = 6.0;

#[derive(Debug, Clone, PartialEq)]
pub enum PumpShape {
    Gaussian,
    Sech2,
    /// Intensity versus absolute pump wavelength (nm); the amplitude is its
    /// square root and `center_nm` / `fwhm_nm` describe the table.
    Tabulated(SpectrumCurve),
}

/// Pump spectral envelope with intensity FWHM `fwhm_nm`.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpEnvelope {
    pub center_nm: f64,
    pub fwhm_nm: f64,
    pub shape: PumpShape,
}

impl PumpEnvelope {
    pub fn new(center_nm: f64, fwhm_nm: f64, shape: PumpShape) -> Result<Self> {
        if !(center_nm > 0.0 && center_nm.is_finite()) || !(fwhm_nm > 0.0 && fwhm_nm.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "pump needs a positive center and FWHM, got {center_nm} nm / {fwhm_nm} nm"
            )));
        }
        if let PumpShape::Tabulated(c) = &shape {
            if c.y.iter().any(|&v| v < 0.0) || !(c.y.iter().any(|&v| v > 0.0)) {
                return Err(Error::InvalidInput("tabulated pump must be non-negative and not all zero".into()));
            }
        }
        Ok(Self {
            center_nm,
            fwhm_nm,
            shape,
        })
    }

    pub fn gaussian(center_nm: f64, fwhm_nm: f64) -> Result<Self> {
        Self::new(center_nm, fwhm_nm, PumpShape::Gaussian)
    }

    pub fn sech2(center_nm: f64, fwhm_nm: f64) -> Result<Self> {
        Self::new(center_nm, fwhm_nm, PumpShape::Sech2)
    }

    /// Tabulated intensity; center and FWHM are taken from the table's peak.
    pub fn tabulated(curve: SpectrumCurve) -> Result<Self> {
        let (ip, _) = curve.peak();
        let center = curve.x[ip];
        let fwhm = curve
            .fwhm()
            .ok_or_else(|| Error::InvalidInput("tabulated pump must fall below half maximum on both sides".into()))?;
        Self::new(center, fwhm, PumpShape::Tabulated(curve))
    }

    /// `ln α(λp)` of the spectral amplitude, up to a constant.
    pub fn log_amplitude(&self, pump_nm: f64) -> f64 {
        let x = pump_nm - self.center_nm;
        match &self.shape {
            PumpShape::Gaussian => {
                let s = amplitude_sigma(self.fwhm_nm);
                -(x * x) / (2.0 * s * s)
            }
            PumpShape::Sech2 => {
                // ln sech(y) = ln 2 - |y| - ln(1 + e^{-2|y|})
                let y = (x / (self.fwhm_nm / SECH2_FWHM_PER_TAU)).abs();
                std::f64::consts::LN_2 - y - (-2.0 * y).exp().ln_1p()
            }
            PumpShape::Tabulated(c) => 0.5 * c.interpolate(pump_nm).ln(),
        }
    }

    pub fn amplitude(&self, pump_nm: f64) -> f64 {
        self.log_amplitude(pump_nm).exp()
    }

    pub(crate) fn check_overlap(&self, lo_nm: f64, hi_nm: f64) -> Result<()> {
        let (a, b) = match &self.shape {
            PumpShape::Tabulated(c) => c.support(),
            _ => {
                let reach = OVERLAP_REACH_FWHM * self.fwhm_nm;
                (self.center_nm - reach, self.center_nm + reach)
            }
        };
        if b < lo_nm || a > hi_nm {
            return Err(Error::Degenerate(format!(
                "pump band [{a}, {b}] nm misses the grid's pump wavelengths [{lo_nm}, {hi_nm}] nm"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sech2_half_maximum_at_half_fwhm() {
        let p = PumpEnvelope::sech2(779.0, 0.73).unwrap();
        let i = |x: f64| p.amplitude(779.0 + x).powi(2);
        assert!((i(0.0) - 1.0).abs() < 1e-15);
        assert!((i(0.365) - 0.5).abs() < 1e-12);
        assert!((i(-0.365) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn gaussian_half_maximum_at_half_fwhm() {
        let p = PumpEnvelope::gaussian(779.0, 0.73).unwrap();
        assert!((p.amplitude(779.365).powi(2) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tabulated_reads_center_and_width() {
        let x: Vec<f64> = (0..201).map(|i| 777.0 + i as f64 * 0.02).collect();
        let y: Vec<f64> = x.iter().map(|v| (-(v - 779.0f64).powi(2) / 0.1).exp()).collect();
        let p = PumpEnvelope::tabulated(SpectrumCurve::new(x, y).unwrap()).unwrap();
        assert!((p.center_nm - 779.0).abs() < 1e-9);
        // intensity exp(-x²/0.1) has FWHM 2 √(0.1 ln 2)
        assert!((p.fwhm_nm - 2.0 * (0.1 * std::f64::consts::LN_2).sqrt()).abs() < 2e-3);
        assert!((p.amplitude(779.1) - (-0.01f64 / 0.1 / 2.0).exp()).abs() < 1e-3);
        assert_eq!(p.amplitude(790.0), 0.0);
    }

    #[test]
    fn rejects_bad_width() {
        assert!(PumpEnvelope::gaussian(779.0, 0.0).is_err());
        assert!(PumpEnvelope::gaussian(779.0, f64::NAN).is_err());
    }
}

use super::{amplitude_sigma, JointSpectrum};
use crate::error::{Error, Result};

/// Post-filter to pre-filter norm ratio below which nothing is considered transmitted.
const ALL_FILTERED_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterShape {
    /// Intensity transmission with the given FWHM.
    Gaussian,
    /// Unit transmission on `center ± fwhm/2`, zero elsewhere.
    Rectangular,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandpassFilter {
    pub center_nm: f64,
    pub fwhm_nm: f64,
    pub shape: FilterShape,
}

impl BandpassFilter {
    pub fn new(center_nm: f64, fwhm_nm: f64, shape: FilterShape) -> Result<Self> {
        if !(fwhm_nm > 0.0 && fwhm_nm.is_finite() && center_nm.is_finite()) {
            return Err(Error::InvalidInput(format!("filter FWHM {fwhm_nm} nm must be positive")));
        }
        Ok(Self {
            center_nm,
            fwhm_nm,
            shape,
        })
    }

    /// Amplitude transmission at `wavelength_nm`.
    pub fn transmission(&self, wavelength_nm: f64) -> f64 {
        let x = wavelength_nm - self.center_nm;
        match self.shape {
            FilterShape::Gaussian => {
                let s = amplitude_sigma(self.fwhm_nm);
                (-(x * x) / (2.0 * s * s)).exp()
            }
            FilterShape::Rectangular => {
                if x.abs() <= 0.5 * self.fwhm_nm * (1.0 + 1e-12) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Multiplies the amplitude by the signal and idler filter transmissions and renormalizes.
pub fn apply_filter(js: &JointSpectrum, signal: &BandpassFilter, idler: &BandpassFilter) -> Result<JointSpectrum> {
    let before = js.norm_sqr().sqrt();
    let ts: Vec<f64> = js.grid.signal_nm.iter().map(|&l| signal.transmission(l)).collect();
    let ti: Vec<f64> = js.grid.idler_nm.iter().map(|&l| idler.transmission(l)).collect();
    let mut out = js.clone();
    for (c, &t_i) in ti.iter().enumerate() {
        for (r, &t_s) in ts.iter().enumerate() {
            out.amplitude[(r, c)] *= t_s * t_i;
        }
    }
    let after = out.norm_sqr().sqrt();
    let ratio = if before > 0.0 { after / before } else { 0.0 };
    if !(ratio >= ALL_FILTERED_RATIO) {
        return Err(Error::AllFiltered { ratio });
    }
    out.normalize()
}

use serde::Deserialize;

use crate::error::{Error, Result};

const CELSIUS_OFFSET: f64 = 273.15;

/// Temperature-dependent Sellmeier coefficient set.
///
/// The evaluated form, with the wavelength in µm and the temperature `t` in °C, is
///
/// ```text
/// F   = (t - t_ref) (t + t_shift)
/// n^2 = a1 + b1 F + (a2 + b2 F) / (λ² - (a3 + b3 F)²) + (a4 + b4 F) / (λ² - a5²) - a6 λ²
/// ```
///
/// which covers both the single-pole congruent lithium niobate form (set
/// `a4 = b4 = a5 = 0`) and the two-pole extraordinary-index form.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SellmeierCoefficients {
    pub provenance: String,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    #[serde(default)]
    pub a4: f64,
    #[serde(default)]
    pub a5: f64,
    pub a6: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    #[serde(default)]
    pub b4: f64,
    pub t_ref_c: f64,
    pub t_shift_c: f64,
    /// Hard evaluation limits.
    pub valid_wavelength_nm: [f64; 2],
    pub valid_temperature_k: [f64; 2],
    /// Range the coefficients were measured over; evaluation outside it is extrapolation.
    pub reference_temperature_k: [f64; 2],
}

impl SellmeierCoefficients {
    /// Wavelength- and temperature-independent index, for synthetic models.
    pub fn constant(n: f64) -> Self {
        Self {
            provenance: format!("constant index {n}"),
            a1: n * n,
            a2: 0.0,
            a3: 0.0,
            a4: 0.0,
            a5: 0.0,
            a6: 0.0,
            b1: 0.0,
            b2: 0.0,
            b3: 0.0,
            b4: 0.0,
            t_ref_c: 0.0,
            t_shift_c: 0.0,
            valid_wavelength_nm: [200.0, 5000.0],
            valid_temperature_k: [0.0, 500.0],
            reference_temperature_k: [0.0, 500.0],
        }
    }

    /// Squared index, no domain checks.
    pub fn index_squared(&self, wavelength_nm: f64, temperature_k: f64) -> f64 {
        let lambda_um = wavelength_nm * 1e-3;
        let t = temperature_k - CELSIUS_OFFSET;
        let f = (t - self.t_ref_c) * (t + self.t_shift_c);
        let l2 = lambda_um * lambda_um;
        let pole = self.a3 + self.b3 * f;
        let mut n2 = self.a1 + self.b1 * f + (self.a2 + self.b2 * f) / (l2 - pole * pole)
            - self.a6 * l2;
        if self.a4 != 0.0 || self.b4 != 0.0 {
            n2 += (self.a4 + self.b4 * f) / (l2 - self.a5 * self.a5);
        }
        n2
    }

    pub fn index(&self, wavelength_nm: f64, temperature_k: f64) -> Result<f64> {
        check_range("wavelength_nm", wavelength_nm, self.valid_wavelength_nm)?;
        check_range("temperature_k", temperature_k, self.valid_temperature_k)?;
        let n2 = self.index_squared(wavelength_nm, temperature_k);
        if !(n2.is_finite() && n2 > 1.0) {
            return Err(Error::InvalidInput(format!(
                "Sellmeier evaluation gave n^2 = {n2} at {wavelength_nm} nm, {temperature_k} K"
            )));
        }
        Ok(n2.sqrt())
    }

    pub fn is_extrapolated(&self, temperature_k: f64) -> bool {
        temperature_k < self.reference_temperature_k[0]
            || temperature_k > self.reference_temperature_k[1]
    }

    pub(crate) fn validate(&self, section: &str) -> Result<()> {
        require_provenance(section, &self.provenance)?;
        for (name, r) in [
            ("valid_wavelength_nm", self.valid_wavelength_nm),
            ("valid_temperature_k", self.valid_temperature_k),
            ("reference_temperature_k", self.reference_temperature_k),
        ] {
            if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
                return Err(Error::Config(format!(
                    "[{section}] {name} must be an increasing finite pair"
                )));
            }
        }
        if self.valid_wavelength_nm[0] <= 0.0 || self.valid_temperature_k[0] < 0.0 {
            return Err(Error::Config(format!(
                "[{section}] validity ranges must be physical (positive wavelengths, T >= 0 K)"
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_range(quantity: &'static str, value: f64, range: [f64; 2]) -> Result<()> {
    if value.is_finite() && value >= range[0] && value <= range[1] {
        Ok(())
    } else {
        Err(Error::domain(quantity, value, range))
    }
}

pub(crate) fn require_provenance(section: &str, provenance: &str) -> Result<()> {
    if provenance.trim().is_empty() {
        Err(Error::Config(format!(
            "[{section}] requires a non-empty provenance field"
        )))
    } else {
        Ok(())
    }
}

//! Temperature-dependent effective refractive indices of the waveguide.
//!
//! An effective index is the bulk Sellmeier index of the polarization, plus a
//! waveguide offset that accounts for the in-diffused guiding layer, plus an
//! optional share of the empirical correction δn(T). Models are loaded from
//! a sectioned key-value dataset file (TOML); see [`DispersionModel::from_toml_str`].

mod correction;
mod sellmeier;
mod thermal;

use std::path::Path;

use serde::Deserialize;

pub use correction::{
    CorrectionPolynomial, CorrectionValue, CorrectionWeights, CORRECTION_DEGREE,
    CORRECTION_SANITY_BOUND,
};
pub use sellmeier::SellmeierCoefficients;
pub use thermal::{ThermalExpansionTable, REFERENCE_TEMPERATURE_K};

use crate::error::{Error, Result};
use sellmeier::{check_range, require_provenance};

/// Bundled congruent lithium niobate dataset.
pub const DEFAULT_DATASET: &str = include_str!("../../data/lithium_niobate.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    /// Ordinary-polarized mode of the z-cut waveguide.
    Te,
    /// Extraordinary-polarized mode of the z-cut waveguide.
    Tm,
}

/// Index increment of the guided mode over the bulk index.
#[derive(Debug, Clone, PartialEq)]
pub enum WaveguideOffset {
    Zero,
    /// `Σ c_k x^k` with `x = (λ - reference_nm) / scale_nm`.
    Polynomial {
        reference_nm: f64,
        scale_nm: f64,
        te: Vec<f64>,
        tm: Vec<f64>,
    },
    /// Linear interpolation in wavelength, clamped at the table ends.
    Table {
        wavelength_nm: Vec<f64>,
        te: Vec<f64>,
        tm: Vec<f64>,
    },
}

impl WaveguideOffset {
    pub fn constant(te: f64, tm: f64) -> Self {
        WaveguideOffset::Polynomial {
            reference_nm: 0.0,
            scale_nm: 1.0,
            te: vec![te],
            tm: vec![tm],
        }
    }

    pub fn offset(&self, pol: Polarization, wavelength_nm: f64) -> f64 {
        match self {
            WaveguideOffset::Zero => 0.0,
            WaveguideOffset::Polynomial {
                reference_nm,
                scale_nm,
                te,
                tm,
            } => {
                let c = match pol {
                    Polarization::Te => te,
                    Polarization::Tm => tm,
                };
                let x = (wavelength_nm - reference_nm) / scale_nm;
                c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
            }
            WaveguideOffset::Table {
                wavelength_nm: grid,
                te,
                tm,
            } => {
                let v = match pol {
                    Polarization::Te => te,
                    Polarization::Tm => tm,
                };
                let i = grid.partition_point(|&x| x <= wavelength_nm);
                if i == 0 {
                    v[0]
                } else if i == grid.len() {
                    v[grid.len() - 1]
                } else {
                    let w = (wavelength_nm - grid[i - 1]) / (grid[i] - grid[i - 1]);
                    v[i - 1] + w * (v[i] - v[i - 1])
                }
            }
        }
    }
}

/// Refractive-index model for the two guided polarizations.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionModel {
    pub te: SellmeierCoefficients,
    pub tm: SellmeierCoefficients,
    pub offset: WaveguideOffset,
    pub correction: CorrectionPolynomial,
    pub correction_weights: CorrectionWeights,
    pub thermal: ThermalExpansionTable,
}

impl DispersionModel {
    /// Model with a zero correction, applied to the combined mismatch.
    pub fn new(
        te: SellmeierCoefficients,
        tm: SellmeierCoefficients,
        offset: WaveguideOffset,
        thermal: ThermalExpansionTable,
    ) -> Self {
        Self {
            te,
            tm,
            offset,
            correction: CorrectionPolynomial::zero([4.0, 295.0]),
            correction_weights: CorrectionWeights::default(),
            thermal,
        }
    }

    /// Parses the bundled lithium niobate dataset.
    pub fn lithium_niobate() -> Self {
        Self::from_toml_str(DEFAULT_DATASET).expect("bundled dataset parses")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display(), e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: DatasetFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("dataset: {e}")))?;
        file.sellmeier_te.validate("sellmeier_te")?;
        file.sellmeier_tm.validate("sellmeier_tm")?;
        file.thermal_expansion.validate()?;
        let offset = file.waveguide_offset.into_offset()?;
        let (correction, correction_weights) = file.correction.into_parts()?;
        Ok(Self {
            te: file.sellmeier_te,
            tm: file.sellmeier_tm,
            offset,
            correction,
            correction_weights,
            thermal: file.thermal_expansion,
        })
    }

    pub fn with_correction(mut self, correction: CorrectionPolynomial) -> Self {
        self.correction = correction;
        self
    }

    pub fn with_offset(mut self, offset: WaveguideOffset) -> Self {
        self.offset = offset;
        self
    }

    fn coefficients(&self, pol: Polarization) -> &SellmeierCoefficients {
        match pol {
            Polarization::Te => &self.te,
            Polarization::Tm => &self.tm,
        }
    }

    pub fn valid_wavelength_nm(&self) -> [f64; 2] {
        [
            self.te.valid_wavelength_nm[0].max(self.tm.valid_wavelength_nm[0]),
            self.te.valid_wavelength_nm[1].min(self.tm.valid_wavelength_nm[1]),
        ]
    }

    pub fn valid_temperature_k(&self) -> [f64; 2] {
        [
            self.te.valid_temperature_k[0].max(self.tm.valid_temperature_k[0]),
            self.te.valid_temperature_k[1].min(self.tm.valid_temperature_k[1]),
        ]
    }

    /// Checks a wavelength against the model's validity interval.
    pub fn check_wavelength(&self, wavelength_nm: f64) -> Result<()> {
        check_range("wavelength_nm", wavelength_nm, self.valid_wavelength_nm())
    }

    pub fn check_temperature(&self, temperature_k: f64) -> Result<()> {
        check_range("temperature_k", temperature_k, self.valid_temperature_k())
    }

    /// True when either Sellmeier set is evaluated outside its measured range.
    pub fn is_extrapolated(&self, temperature_k: f64) -> bool {
        self.te.is_extrapolated(temperature_k) || self.tm.is_extrapolated(temperature_k)
    }

    pub fn bulk_index(&self, pol: Polarization, wavelength_nm: f64, temperature_k: f64) -> Result<f64> {
        self.check_wavelength(wavelength_nm)?;
        self.check_temperature(temperature_k)?;
        self.coefficients(pol).index(wavelength_nm, temperature_k)
    }

    pub fn effective_index(
        &self,
        pol: Polarization,
        wavelength_nm: f64,
        temperature_k: f64,
        include_correction: bool,
    ) -> Result<f64> {
        let mut n = self.bulk_index(pol, wavelength_nm, temperature_k)?
            + self.offset.offset(pol, wavelength_nm);
        if include_correction {
            let w = match pol {
                Polarization::Te => self.correction_weights.te,
                Polarization::Tm => self.correction_weights.tm,
            };
            if w != 0.0 {
                n += w * self.correction.evaluate(temperature_k).delta_n;
            }
        }
        Ok(n)
    }

    pub fn correction_at(&self, temperature_k: f64) -> CorrectionValue {
        self.correction.evaluate(temperature_k)
    }

    /// Share of δn(T) that is added to the combined mismatch Δn.
    pub fn combined_correction(&self, temperature_k: f64) -> f64 {
        let w = self.correction_weights.combined;
        if w == 0.0 {
            0.0
        } else {
            w * self.correction.evaluate(temperature_k).delta_n
        }
    }

    pub fn thermal_scale(&self, temperature_k: f64) -> Result<f64> {
        self.thermal.scale(temperature_k)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetFile {
    sellmeier_te: SellmeierCoefficients,
    sellmeier_tm: SellmeierCoefficients,
    waveguide_offset: OffsetSection,
    thermal_expansion: ThermalExpansionTable,
    correction: correction::CorrectionSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OffsetSection {
    provenance: String,
    kind: String,
    #[serde(default)]
    reference_nm: Option<f64>,
    #[serde(default)]
    scale_nm: Option<f64>,
    #[serde(default)]
    wavelength_nm: Option<Vec<f64>>,
    #[serde(default)]
    te: Vec<f64>,
    #[serde(default)]
    tm: Vec<f64>,
}

impl OffsetSection {
    fn into_offset(self) -> Result<WaveguideOffset> {
        require_provenance("waveguide_offset", &self.provenance)?;
        let bad = |msg: &str| Error::Config(format!("[waveguide_offset] {msg}"));
        if self.te.iter().chain(&self.tm).any(|v| !v.is_finite()) {
            return Err(bad("values must be finite"));
        }
        match self.kind.as_str() {
            "zero" => Ok(WaveguideOffset::Zero),
            "polynomial" => {
                let scale_nm = self.scale_nm.unwrap_or(1.0);
                if scale_nm == 0.0 || !scale_nm.is_finite() {
                    return Err(bad("scale_nm must be non-zero"));
                }
                if self.te.is_empty() || self.tm.is_empty() {
                    return Err(bad("polynomial needs te and tm coefficient lists"));
                }
                Ok(WaveguideOffset::Polynomial {
                    reference_nm: self.reference_nm.unwrap_or(0.0),
                    scale_nm,
                    te: self.te,
                    tm: self.tm,
                })
            }
            "table" => {
                let grid = self.wavelength_nm.ok_or_else(|| bad("table needs wavelength_nm"))?;
                if grid.len() < 2 || grid.len() != self.te.len() || grid.len() != self.tm.len() {
                    return Err(bad("table columns must have equal length >= 2"));
                }
                if grid.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(bad("table wavelengths must be strictly increasing"));
                }
                Ok(WaveguideOffset::Table {
                    wavelength_nm: grid,
                    te: self.te,
                    tm: self.tm,
                })
            }
            other => Err(bad(&format!("unknown kind '{other}' (zero | polynomial | table)"))),
        }
    }
}

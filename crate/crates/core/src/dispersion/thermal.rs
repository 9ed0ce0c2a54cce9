use serde::Deserialize;

use super::sellmeier::require_provenance;
use crate::error::{Error, Result};

/// Temperature at which lengths and poling periods are specified.
pub const REFERENCE_TEMPERATURE_K: f64 = 295.0;

fn default_clamp() -> f64 {
    60.0
}

/// Relative length change of the crystal along the propagation axis.
///
/// Below `clamp_temperature_k` the length is held fixed.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalExpansionTable {
    pub provenance: String,
    #[serde(default = "default_clamp")]
    pub clamp_temperature_k: f64,
    pub temperature_k: Vec<f64>,
    /// ΔL/L relative to an arbitrary reference; normalized to 295 K on evaluation.
    pub relative_change: Vec<f64>,
}

impl ThermalExpansionTable {
    pub fn new(samples: &[(f64, f64)], clamp_temperature_k: f64) -> Result<Self> {
        let table = Self {
            provenance: "constructed in code".into(),
            clamp_temperature_k,
            temperature_k: samples.iter().map(|s| s.0).collect(),
            relative_change: samples.iter().map(|s| s.1).collect(),
        };
        table.validate()?;
        Ok(table)
    }

    /// A table with no contraction at all.
    pub fn rigid() -> Self {
        Self {
            provenance: "rigid crystal (no thermal contraction)".into(),
            clamp_temperature_k: default_clamp(),
            temperature_k: vec![default_clamp(), 300.0],
            relative_change: vec![0.0, 0.0],
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        require_provenance("thermal_expansion", &self.provenance)?;
        let t = &self.temperature_k;
        if t.len() != self.relative_change.len() || t.len() < 2 {
            return Err(Error::Config(
                "[thermal_expansion] needs >= 2 samples with matching column lengths".into(),
            ));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config(
                "[thermal_expansion] temperatures must be strictly increasing".into(),
            ));
        }
        if t[0] > self.clamp_temperature_k || *t.last().unwrap() < 300.0 {
            return Err(Error::Config(format!(
                "[thermal_expansion] samples must cover [{} K, 300 K]",
                self.clamp_temperature_k
            )));
        }
        if self.relative_change.iter().any(|v| !v.is_finite() || v.abs() > 0.1) {
            return Err(Error::Config(
                "[thermal_expansion] relative changes must be finite and small".into(),
            ));
        }
        Ok(())
    }

    fn max_temperature(&self) -> f64 {
        *self.temperature_k.last().unwrap()
    }

    fn interpolate(&self, temperature_k: f64) -> f64 {
        let t = &self.temperature_k;
        let v = &self.relative_change;
        let i = t.partition_point(|&x| x <= temperature_k);
        if i == 0 {
            return v[0];
        }
        if i == t.len() {
            return v[t.len() - 1];
        }
        let w = (temperature_k - t[i - 1]) / (t[i] - t[i - 1]);
        v[i - 1] + w * (v[i] - v[i - 1])
    }

    /// Length scale factor s(T) with s(295 K) = 1.
    pub fn scale(&self, temperature_k: f64) -> Result<f64> {
        let range = [0.0, self.max_temperature()];
        if !(temperature_k.is_finite() && temperature_k >= range[0] && temperature_k <= range[1]) {
            return Err(Error::domain("temperature_k", temperature_k, range));
        }
        let t = temperature_k.max(self.clamp_temperature_k);
        Ok((1.0 + self.interpolate(t)) / (1.0 + self.interpolate(REFERENCE_TEMPERATURE_K)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> ThermalExpansionTable {
        ThermalExpansionTable::new(
            &[(60.0, -2.5e-3), (100.0, -2.4e-3), (200.0, -1.4e-3), (295.0, 0.0), (300.0, 8e-5)],
            60.0,
        )
        .unwrap()
    }

    #[test]
    fn normalized_at_reference() {
        assert_eq!(table().scale(295.0).unwrap(), 1.0);
    }

    #[test]
    fn constant_below_clamp() {
        let t = table();
        let s60 = t.scale(60.0).unwrap();
        assert_eq!(t.scale(10.0).unwrap(), s60);
        assert_eq!(t.scale(0.0).unwrap(), s60);
        assert!((s60 - (1.0 - 2.5e-3)).abs() < 1e-15);
    }

    #[test]
    fn linear_between_samples() {
        let t = table();
        let mid = t.scale(150.0).unwrap();
        let expect = 1.0 + 0.5 * (-2.4e-3 + -1.4e-3);
        assert!((mid - expect).abs() < 1e-15);
    }

    #[test]
    fn above_table_is_domain_error() {
        assert!(matches!(table().scale(301.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn rejects_non_increasing() {
        assert!(ThermalExpansionTable::new(&[(60.0, 0.0), (60.0, 0.0), (300.0, 0.0)], 60.0).is_err());
    }
}

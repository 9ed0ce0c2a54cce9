use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Pre-binned count rates of a pair source, 1/s.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountSummary {
    #[serde(rename = "C_s")]
    pub c_s: f64,
    #[serde(rename = "C_i")]
    pub c_i: f64,
    #[serde(rename = "C_si")]
    pub c_si: f64,
    /// Heralded coincidences between the signal and idler detector 1.
    #[serde(rename = "C_i1s", default)]
    pub c_i1s: Option<f64>,
    #[serde(rename = "C_i2s", default)]
    pub c_i2s: Option<f64>,
    /// Heralded threefold coincidences.
    #[serde(rename = "C_i1i2s", default)]
    pub c_i1i2s: Option<f64>,
    /// Transmitted pump power, mW.
    #[serde(rename = "P_trans", default)]
    pub p_trans_mw: Option<f64>,
    /// s.
    pub integration_time: f64,
}

/// A value with its one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub value: f64,
    pub uncertainty: f64,
}

impl CountSummary {
    pub fn new(c_s: f64, c_i: f64, c_si: f64, integration_time: f64) -> Self {
        Self {
            c_s,
            c_i,
            c_si,
            c_i1s: None,
            c_i2s: None,
            c_i1i2s: None,
            p_trans_mw: None,
            integration_time,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| Error::Config(format!("count summary: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display(), e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [Some(self.c_s), Some(self.c_i), Some(self.c_si), self.c_i1s, self.c_i2s, self.c_i1i2s];
        if rates.iter().flatten().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(Error::InvalidInput("count rates must be finite and non-negative".into()));
        }
        if !(self.integration_time > 0.0 && self.integration_time.is_finite()) {
            return Err(Error::InvalidInput("integration time must be positive".into()));
        }
        Ok(())
    }

    /// True when the coincidence rate exceeds a singles rate, which only a
    /// misconfigured input produces.
    pub fn coincidences_exceed_singles(&self) -> bool {
        self.c_si > self.c_s.min(self.c_i)
    }

    fn counts(&self, rate: f64) -> f64 {
        rate * self.integration_time
    }

    /// Relative Poisson variance `1/N` of a rate, with at least one count.
    fn rel_var(&self, rate: f64) -> f64 {
        1.0 / self.counts(rate).max(1.0)
    }
}

/// Combined Klyshko efficiency `√(C_si² / (C_s C_i))`.
pub fn klyshko(c: &CountSummary) -> Result<Measurement> {
    c.validate()?;
    if !(c.c_s > 0.0 && c.c_i > 0.0) {
        return Err(Error::InvalidInput("Klyshko efficiency needs non-zero singles rates".into()));
    }
    let value = c.c_si / (c.c_s * c.c_i).sqrt();
    let rel = (c.rel_var(c.c_si) + 0.25 * c.rel_var(c.c_s) + 0.25 * c.rel_var(c.c_i)).sqrt();
    Ok(Measurement {
        value,
        uncertainty: value * rel,
    })
}

/// Brightness `C_si / P_trans`, pairs / (s mW).
pub fn brightness(c: &CountSummary) -> Result<Measurement> {
    c.validate()?;
    let p = c
        .p_trans_mw
        .ok_or_else(|| Error::InvalidInput("brightness needs P_trans".into()))?;
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidInput(format!("P_trans = {p} mW must be positive")));
    }
    Ok(Measurement {
        value: c.c_si / p,
        uncertainty: c.counts(c.c_si).sqrt() / c.integration_time / p,
    })
}

/// Heralded autocorrelation `C_i1i2s C_s / (C_i1s C_i2s)`.
///
/// With zero threefold counts the uncertainty is that of a single count.
pub fn g2_heralded(c: &CountSummary) -> Result<Measurement> {
    c.validate()?;
    let (Some(i1s), Some(i2s), Some(i1i2s)) = (c.c_i1s, c.c_i2s, c.c_i1i2s) else {
        return Err(Error::InvalidInput("heralded g2 needs C_i1s, C_i2s and C_i1i2s".into()));
    };
    if !(i1s > 0.0 && i2s > 0.0) {
        return Err(Error::InvalidInput("heralded g2 needs non-zero C_i1s and C_i2s".into()));
    }
    let scale = c.c_s / (i1s * i2s);
    let value = i1i2s * scale;
    let threefold = value.max(scale / c.integration_time);
    let rel = (c.rel_var(i1i2s) + c.rel_var(c.c_s) + c.rel_var(i1s) + c.rel_var(i2s)).sqrt();
    Ok(Measurement {
        value,
        uncertainty: threefold * rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn klyshko_unit_and_symmetric() {
        assert!((klyshko(&CountSummary::new(500.0, 500.0, 500.0, 1.0)).unwrap().value - 1.0).abs() < 1e-15);
        let a = klyshko(&CountSummary::new(9000.0, 11000.0, 1300.0, 10.0)).unwrap();
        let b = klyshko(&CountSummary::new(11000.0, 9000.0, 1300.0, 10.0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn klyshko_needs_singles() {
        assert!(klyshko(&CountSummary::new(0.0, 10.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn brightness_ratio_and_homogeneity() {
        let mut c = CountSummary::new(1e6, 1e6, 3.0e4, 1.0);
        assert!(brightness(&c).is_err());
        c.p_trans_mw = Some(0.05);
        assert!((brightness(&c).unwrap().value - 6.0e5).abs() < 1e-6);
        c.p_trans_mw = Some(0.1);
        assert!((brightness(&c).unwrap().value - 3.0e5).abs() < 1e-6);
        c.c_si = 0.0;
        assert_eq!(brightness(&c).unwrap().value, 0.0);
    }

    #[test]
    fn g2_identities() {
        let mut c = CountSummary::new(1e6, 1e6, 1e5, 10.0);
        c.c_i1s = Some(5e4);
        c.c_i2s = Some(5e4);
        c.c_i1i2s = Some(0.0);
        let g = g2_heralded(&c).unwrap();
        assert_eq!(g.value, 0.0);
        assert!(g.uncertainty > 0.0);
        c.c_i1i2s = Some(5e4 * 5e4 / 1e6);
        assert!((g2_heralded(&c).unwrap().value - 1.0).abs() < 1e-15);
        c.c_i1s = Some(0.0);
        assert!(g2_heralded(&c).is_err());
    }

    #[test]
    fn parses_key_value_file() {
        let c = CountSummary::from_toml_str(
            "C_s = 1e4\nC_i = 1e4\nC_si = 1362\nP_trans = 0.05\nintegration_time = 60\n",
        )
        .unwrap();
        assert_eq!(c.c_si, 1362.0);
        assert_eq!(c.p_trans_mw, Some(0.05));
        assert!(CountSummary::from_toml_str("C_s = 1\nC_i = 1\nC_si = 1\nintegration_time = 1\nbogus = 2\n").is_err());
        assert!(CountSummary::from_toml_str("C_s = -1\nC_i = 1\nC_si = 1\nintegration_time = 1\n").is_err());
    }
}

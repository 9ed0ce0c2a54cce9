use std::path::Path;

use nalgebra::DMatrix;

use super::{JointSpectrum, SpectralGrid};
use crate::csvio;
use crate::error::{Error, Result};

const CORNER_LABEL: &str = "signal_nm\\idler_nm";

/// Joint spectral intensity matrix file: the first row holds the idler axis
/// (nm) after a label cell, the first column the signal axis (nm), and the
/// body the intensity.
#[derive(Debug, Clone, PartialEq)]
pub struct JsiTable {
    pub signal_nm: Vec<f64>,
    pub idler_nm: Vec<f64>,
    /// `n_s × n_i`.
    pub intensity: DMatrix<f64>,
}

impl JsiTable {
    pub fn from_spectrum(js: &JointSpectrum) -> Self {
        Self {
            signal_nm: js.grid.signal_nm.clone(),
            idler_nm: js.grid.idler_nm.clone(),
            intensity: js.intensity(),
        }
    }

    /// Normalized spectrum with amplitude `√I` and flat phase. Measured
    /// intensities carry no phase, so purities derived from this are upper
    /// bounds when the true phase is structured.
    pub fn to_spectrum(&self) -> Result<JointSpectrum> {
        let grid = SpectralGrid::new(self.signal_nm.clone(), self.idler_nm.clone())?;
        JointSpectrum::from_intensity(grid, &self.intensity)?.normalize()
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display(), e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let table = csvio::parse_table(text, source)?;
        if table.header.len() < 2 || table.n_rows() == 0 {
            return Err(Error::Parse {
                path: source.to_string(),
                line: 1,
                message: "JSI file needs an idler axis row and at least one signal row".into(),
            });
        }
        let idler_nm = table.header[1..]
            .iter()
            .map(|h| {
                h.parse::<f64>().map_err(|_| Error::Parse {
                    path: source.to_string(),
                    line: 1,
                    message: format!("idler axis entry '{h}' is not a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        let signal_nm = table.columns[0].clone();
        let intensity = DMatrix::from_fn(signal_nm.len(), idler_nm.len(), |r, c| table.columns[c + 1][r]);
        if let Some(k) = intensity.iter().position(|v| *v < 0.0) {
            return Err(Error::Parse {
                path: source.to_string(),
                line: table.lines[k % signal_nm.len()],
                message: "intensity must be non-negative".into(),
            });
        }
        Ok(Self {
            signal_nm,
            idler_nm,
            intensity,
        })
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(CORNER_LABEL);
        for v in &self.idler_nm {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
        for (r, s) in self.signal_nm.iter().enumerate() {
            out.push_str(&format!("{s}"));
            for c in 0..self.idler_nm.len() {
                out.push_str(&format!(",{}", self.intensity[(r, c)]));
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        csvio::write_text(path, &self.to_csv_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jsa::{build_jsa_flat, PumpEnvelope};

    #[test]
    fn emit_parse_emit_is_idempotent() {
        let grid = SpectralGrid::centered(1558.0, 3.0, 9, 1558.0, 2.0, 11).unwrap();
        let js = build_jsa_flat(&PumpEnvelope::gaussian(779.0, 0.5).unwrap(), &grid).unwrap();
        let first = JsiTable::from_spectrum(&js).to_csv_string();
        let parsed = JsiTable::parse(&first, "mem").unwrap();
        assert_eq!(parsed.to_csv_string(), first);
        assert_eq!(parsed.intensity, js.intensity());
        let back = parsed.to_spectrum().unwrap();
        assert!((back.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_axis_entry_reports_line_one() {
        let err = JsiTable::parse("x,1550,abc\n1550,1,2\n", "mem").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }
}

//! Sampled one-dimensional curves and their comparison.

use std::path::Path;

use crate::csvio;
use crate::error::{Error, Result};

/// A curve sampled at strictly increasing abscissae, with a per-point
/// uncertainty column (0 where unknown).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumCurve {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl SpectrumCurve {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        Self::with_sigma(x, y, vec![0.0; n])
    }

    pub fn with_sigma(x: Vec<f64>, y: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() != sigma.len() {
            return Err(Error::InvalidInput(format!(
                "curve columns differ in length ({}, {}, {})",
                x.len(),
                y.len(),
                sigma.len()
            )));
        }
        if x.len() < 2 {
            return Err(Error::InvalidInput("a curve needs at least 2 samples".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("curve abscissae must be strictly increasing".into()));
        }
        if x.iter().chain(&y).chain(&sigma).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("curve contains non-finite values".into()));
        }
        Ok(Self { x, y, sigma })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn support(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// Linear interpolation; zero outside the support.
    pub fn interpolate(&self, at: f64) -> f64 {
        let (lo, hi) = self.support();
        if at < lo || at > hi {
            return 0.0;
        }
        let i = self.x.partition_point(|&v| v <= at);
        if i == self.x.len() {
            return self.y[i - 1];
        }
        if i == 0 {
            return self.y[0];
        }
        let w = (at - self.x[i - 1]) / (self.x[i] - self.x[i - 1]);
        self.y[i - 1] + w * (self.y[i] - self.y[i - 1])
    }

    pub fn trapezoid(&self) -> f64 {
        self.x
            .windows(2)
            .zip(self.y.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    }

    /// Index and value of the largest sample.
    pub fn peak(&self) -> (usize, f64) {
        self.y
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best })
    }

    /// Full width at half maximum of the dominant peak, by linear
    /// interpolation of the outermost half-maximum crossings around it.
    pub fn fwhm(&self) -> Option<f64> {
        let (ip, peak) = self.peak();
        if !(peak > 0.0) {
            return None;
        }
        let half = 0.5 * peak;
        let mut left = None;
        for i in (0..ip).rev() {
            if self.y[i] < half {
                let t = (half - self.y[i]) / (self.y[i + 1] - self.y[i]);
                left = Some(self.x[i] + t * (self.x[i + 1] - self.x[i]));
                break;
            }
        }
        let mut right = None;
        for i in ip + 1..self.len() {
            if self.y[i] < half {
                let t = (self.y[i - 1] - half) / (self.y[i - 1] - self.y[i]);
                right = Some(self.x[i - 1] + t * (self.x[i] - self.x[i - 1]));
                break;
            }
        }
        Some(right? - left?)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            x: self.x.clone(),
            y: self.y.iter().map(|v| v * factor).collect(),
            sigma: self.sigma.iter().map(|v| v * factor.abs()).collect(),
        }
    }

    /// Reads a three-column CSV (`x_name`, `y_name`, optional `sigma_name`).
    pub fn read_csv(path: impl AsRef<Path>, x_name: &str, y_name: &str, sigma_name: &str) -> Result<Self> {
        let path = path.as_ref();
        let table = csvio::read_table(path)?;
        Self::from_table(&table, &path.display().to_string(), x_name, y_name, sigma_name)
    }

    pub fn from_table(
        table: &csvio::Table,
        source: &str,
        x_name: &str,
        y_name: &str,
        sigma_name: &str,
    ) -> Result<Self> {
        let cols = table.require(source, &[x_name, y_name])?;
        let sigma = table
            .column(sigma_name)
            .map(<[f64]>::to_vec)
            .unwrap_or_else(|| vec![0.0; table.n_rows()]);
        for (i, w) in cols[0].windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::Parse {
                    path: source.to_string(),
                    line: table.lines[i + 1],
                    message: format!("column '{x_name}' must be strictly increasing"),
                });
            }
        }
        Self::with_sigma(cols[0].to_vec(), cols[1].to_vec(), sigma)
    }

    pub fn to_csv_string(&self, x_name: &str, y_name: &str, sigma_name: &str) -> String {
        csvio::format_table(&[x_name, y_name, sigma_name], &[&self.x, &self.y, &self.sigma])
    }

    pub fn write_csv(&self, path: impl AsRef<Path>, x_name: &str, y_name: &str, sigma_name: &str) -> Result<()> {
        csvio::write_text(path, &self.to_csv_string(x_name, y_name, sigma_name))
    }
}

/// Normalized inner product `<a, b> / (|a| |b|)` on the common support.
///
/// Both curves are linearly resampled onto the union of their abscissae
/// inside the common support and integrated with the trapezoid rule.
pub fn spectrum_overlap(a: &SpectrumCurve, b: &SpectrumCurve) -> Result<f64> {
    let lo = a.support().0.max(b.support().0);
    let hi = a.support().1.min(b.support().1);
    if !(hi > lo) {
        return Err(Error::InvalidInput(format!(
            "curves have disjoint supports ({:?} vs {:?})",
            a.support(),
            b.support()
        )));
    }
    if a.y.iter().chain(&b.y).any(|&v| v < 0.0) {
        return Err(Error::InvalidInput("overlap requires non-negative curves".into()));
    }
    let mut grid: Vec<f64> = a
        .x
        .iter()
        .chain(&b.x)
        .copied()
        .filter(|&x| x >= lo && x <= hi)
        .chain([lo, hi])
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let ya: Vec<f64> = grid.iter().map(|&x| a.interpolate(x)).collect();
    let yb: Vec<f64> = grid.iter().map(|&x| b.interpolate(x)).collect();
    let inner = |u: &[f64], v: &[f64]| -> f64 {
        grid.windows(2)
            .enumerate()
            .map(|(i, x)| 0.5 * (x[1] - x[0]) * (u[i] * v[i] + u[i + 1] * v[i + 1]))
            .sum()
    };
    let ab = inner(&ya, &yb);
    let aa = inner(&ya, &ya);
    let bb = inner(&yb, &yb);
    if !(aa > 0.0 && bb > 0.0) {
        return Err(Error::InvalidInput("a curve vanishes on the common support".into()));
    }
    Ok((ab / (aa.sqrt() * bb.sqrt())).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(center: f64, sigma: f64) -> SpectrumCurve {
        let x: Vec<f64> = (0..4001).map(|i| -40.0 + 0.02 * i as f64).collect();
        let y = x.iter().map(|&v| (-(v - center).powi(2) / (2.0 * sigma * sigma)).exp()).collect();
        SpectrumCurve::new(x, y).unwrap()
    }

    #[test]
    fn self_overlap_is_one() {
        let g = gaussian(0.3, 2.0);
        assert!((spectrum_overlap(&g, &g).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scale_invariant() {
        let g = gaussian(0.3, 2.0);
        assert!((spectrum_overlap(&g, &g.scaled(7.5)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussians_one_fwhm_apart() {
        // <g(x), g(x-d)> / |g|^2 = exp(-d^2 / (4 sigma^2)); at d = FWHM this is 1/4.
        let sigma = 2.0;
        let fwhm = sigma * (8.0 * 2f64.ln()).sqrt();
        let a = gaussian(-fwhm / 2.0, sigma);
        let b = gaussian(fwhm / 2.0, sigma);
        let expect = (-fwhm * fwhm / (4.0 * sigma * sigma)).exp();
        assert!((expect - 0.25).abs() < 1e-12);
        assert!((spectrum_overlap(&a, &b).unwrap() - expect).abs() < 1e-6);
    }

    #[test]
    fn disjoint_is_error() {
        let a = SpectrumCurve::new(vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
        let b = SpectrumCurve::new(vec![2.0, 3.0], vec![1.0, 1.0]).unwrap();
        assert!(spectrum_overlap(&a, &b).is_err());
    }

    #[test]
    fn fwhm_of_triangle() {
        let c = SpectrumCurve::new(vec![-1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert!((c.fwhm().unwrap() - 1.0).abs() < 1e-15);
    }
}

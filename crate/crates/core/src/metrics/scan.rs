use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::csvio;
use crate::curve::SpectrumCurve;
use crate::error::{Error, Result};
use crate::lsq::{self, Parameter, Settings};

/// Detector pairs in column order.
pub const PAIR_LABELS: [&str; 6] = ["c12", "c34", "c13", "c14", "c23", "c24"];
const SINGLES_LABELS: [&str; 4] = ["s1", "s2", "s3", "s4"];

/// Baseline points must lie further from the dip than this many fitted FWHM.
const BASELINE_CLEARANCE_WIDTHS: f64 = 3.0;

/// Delay scan of a four-detector HOM measurement. Detectors 1, 2 sit behind
/// one beam-splitter output and 3, 4 behind the other, so pairs 13, 14, 23
/// and 24 are cross-path coincidences.
#[derive(Debug, Clone, PartialEq)]
pub struct HomScan {
    /// ps, strictly increasing.
    pub delays_ps: Vec<f64>,
    /// Rates (1/s) per delay, ordered as [`PAIR_LABELS`].
    pub coincidences: Vec<[f64; 6]>,
    /// Singles rates (1/s) per delay.
    pub singles: Vec<[f64; 4]>,
    /// Integration time per delay point, s.
    pub integration_time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomVisibility {
    pub visibility: f64,
    pub uncertainty: f64,
    pub tau_min_ps: f64,
    /// Cross-path coincidence rate at the dip minimum, 1/s.
    pub minimum_rate: f64,
    pub baseline_rate: f64,
    /// FWHM of a Gaussian fitted to the dip, ps.
    pub dip_fwhm_ps: f64,
}

impl HomScan {
    pub fn new(
        delays_ps: Vec<f64>,
        coincidences: Vec<[f64; 6]>,
        singles: Vec<[f64; 4]>,
        integration_time_s: f64,
    ) -> Result<Self> {
        let n = delays_ps.len();
        if coincidences.len() != n || singles.len() != n {
            return Err(Error::InvalidInput("HOM scan columns differ in length".into()));
        }
        if delays_ps.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("HOM scan delays must increase strictly".into()));
        }
        let rates = coincidences.iter().flatten().chain(singles.iter().flatten());
        if rates.into_iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(Error::InvalidInput("HOM scan rates must be finite and non-negative".into()));
        }
        if !(integration_time_s > 0.0) {
            return Err(Error::InvalidInput("integration time must be positive".into()));
        }
        Ok(Self {
            delays_ps,
            coincidences,
            singles,
            integration_time_s,
        })
    }

    /// Sum of the four cross-path coincidence rates at each delay.
    pub fn cross_sum(&self) -> Vec<f64> {
        self.coincidences.iter().map(|c| c[2] + c[3] + c[4] + c[5]).collect()
    }

    /// Reads `delay_ps, c12, c34, c13, c14, c23, c24, s1, s2, s3, s4` (rates, 1/s).
    pub fn read_csv(path: impl AsRef<Path>, integration_time_s: f64) -> Result<Self> {
        let path = path.as_ref();
        let table = csvio::read_table(path)?;
        Self::from_table(&table, &path.display().to_string(), integration_time_s)
    }

    pub fn from_table(table: &csvio::Table, source: &str, integration_time_s: f64) -> Result<Self> {
        let mut names = vec!["delay_ps"];
        names.extend(PAIR_LABELS);
        names.extend(SINGLES_LABELS);
        let cols = table.require(source, &names)?;
        let n = table.n_rows();
        let coincidences = (0..n).map(|r| std::array::from_fn(|k| cols[1 + k][r])).collect();
        let singles = (0..n).map(|r| std::array::from_fn(|k| cols[7 + k][r])).collect();
        Self::new(cols[0].to_vec(), coincidences, singles, integration_time_s).map_err(|e| Error::Parse {
            path: source.to_string(),
            line: table.lines.first().copied().unwrap_or(1),
            message: e.to_string(),
        })
    }

    pub fn to_csv_string(&self) -> String {
        let mut header = vec!["delay_ps"];
        header.extend(PAIR_LABELS);
        header.extend(SINGLES_LABELS);
        let mut cols: Vec<Vec<f64>> = vec![self.delays_ps.clone()];
        for k in 0..6 {
            cols.push(self.coincidences.iter().map(|c| c[k]).collect());
        }
        for k in 0..4 {
            cols.push(self.singles.iter().map(|s| s[k]).collect());
        }
        let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
        csvio::format_table(&header, &refs)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        csvio::write_text(path, &self.to_csv_string())
    }

    /// Poisson-sampled scan of a normalized dip `d(τ)` (1 far from the dip).
    ///
    /// Each cross pair carries `baseline_rate/4 · d(τ)`. With `bunching` the
    /// same-output pairs 12 and 34 carry `baseline_rate/4 · (2 - d(τ))`,
    /// otherwise zero. Singles are constant at `singles_rate`.
    pub fn simulate<R: Rng + ?Sized>(
        dip: &SpectrumCurve,
        baseline_rate: f64,
        singles_rate: f64,
        integration_time_s: f64,
        bunching: bool,
        rng: &mut R,
    ) -> Result<Self> {
        if !(baseline_rate > 0.0 && singles_rate >= 0.0 && integration_time_s > 0.0) {
            return Err(Error::InvalidInput("simulation needs positive rates and integration time".into()));
        }
        let t = integration_time_s;
        let mut draw = |rate: f64| -> Result<f64> {
            let mean = rate.max(0.0) * t;
            if mean == 0.0 {
                return Ok(0.0);
            }
            let p = Poisson::new(mean).map_err(|e| Error::InvalidInput(format!("Poisson mean {mean}: {e}")))?;
            Ok(p.sample(rng) / t)
        };
        let mut coincidences = Vec::with_capacity(dip.len());
        let mut singles = Vec::with_capacity(dip.len());
        for &d in &dip.y {
            let cross = 0.25 * baseline_rate * d;
            let same = if bunching { 0.25 * baseline_rate * (2.0 - d) } else { 0.0 };
            coincidences.push([draw(same)?, draw(same)?, draw(cross)?, draw(cross)?, draw(cross)?, draw(cross)?]);
            singles.push([draw(singles_rate)?, draw(singles_rate)?, draw(singles_rate)?, draw(singles_rate)?]);
        }
        Self::new(dip.x.clone(), coincidences, singles, integration_time_s)
    }
}

/// `V = 1 - C(τ_min) / C̄_baseline` from the cross-path coincidence sum.
///
/// The minimum comes from a parabola through the lowest sample and its two
/// neighbours. The baseline averages the samples whose distance from `τ_min`
/// lies in `baseline_window = (near, far)` ps, on both sides of the dip. The
/// window must start beyond three FWHM of a Gaussian fitted to the dip.
pub fn hom_visibility_from_scan(scan: &HomScan, baseline_window: (f64, f64)) -> Result<HomVisibility> {
    let c = scan.cross_sum();
    let t = &scan.delays_ps;
    let n = c.len();
    if n < 5 {
        return Err(Error::Precondition("HOM scan needs at least five delays".into()));
    }
    let (near, far) = baseline_window;
    if !(near >= 0.0 && far > near) {
        return Err(Error::Config(format!("baseline window ({near}, {far}) ps must satisfy 0 <= near < far")));
    }
    let k = (0..n).min_by(|&a, &b| c[a].total_cmp(&c[b])).expect("non-empty");
    if k == 0 || k + 1 == n {
        return Err(Error::Precondition("the dip minimum lies at the edge of the scan".into()));
    }
    let (tau_min, c_min) = parabola_vertex([t[k - 1], t[k], t[k + 1]], [c[k - 1], c[k], c[k + 1]]);
    let c_min = c_min.clamp(0.0, c[k]);

    let in_window: Vec<usize> = (0..n)
        .filter(|&i| {
            let d = (t[i] - tau_min).abs();
            d >= near && d <= far
        })
        .collect();
    if in_window.len() < 3 {
        return Err(Error::Precondition(format!(
            "baseline window holds {} delays, needs >= 3",
            in_window.len()
        )));
    }
    let baseline = in_window.iter().map(|&i| c[i]).sum::<f64>() / in_window.len() as f64;
    if !(baseline > 0.0) {
        return Err(Error::Degenerate("baseline coincidence rate is zero".into()));
    }

    let fwhm = fit_dip_width(t, &c, tau_min, baseline, c_min)?;
    if near < BASELINE_CLEARANCE_WIDTHS * fwhm {
        return Err(Error::Config(format!(
            "baseline window starts {near} ps from the dip, inside {BASELINE_CLEARANCE_WIDTHS} x the fitted FWHM {fwhm:.4} ps"
        )));
    }

    let time = scan.integration_time_s;
    let ratio = c_min / baseline;
    let var_min = (c_min * time).max(1.0) / (time * time);
    let var_base = baseline / (time * in_window.len() as f64);
    let uncertainty = (var_min / (baseline * baseline) + ratio * ratio * var_base / (baseline * baseline)).sqrt();
    Ok(HomVisibility {
        visibility: 1.0 - ratio,
        uncertainty,
        tau_min_ps: tau_min,
        minimum_rate: c_min,
        baseline_rate: baseline,
        dip_fwhm_ps: fwhm,
    })
}

fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let (h1, h2) = (x[1] - x[0], x[2] - x[1]);
    let d1 = (y[1] - y[0]) / h1;
    let d2 = (y[2] - y[1]) / h2;
    let a = (d2 - d1) / (h1 + h2);
    if !(a > 0.0) {
        return (x[1], y[1]);
    }
    // y = y1 + b (x - x1) + a (x - x1)²
    let b = d1 + a * h1;
    let off = (-b / (2.0 * a)).clamp(-h1, h2);
    (x[1] + off, y[1] + b * off + a * off * off)
}

/// FWHM of `B (1 - V exp(-4 ln2 (τ - τ0)² / w²))` fitted to the scan.
fn fit_dip_width(t: &[f64], c: &[f64], tau0: f64, baseline: f64, c_min: f64) -> Result<f64> {
    let span = t[t.len() - 1] - t[0];
    let half = 0.5 * (baseline + c_min);
    let below: Vec<f64> = t.iter().zip(c).filter(|(_, &v)| v < half).map(|(&x, _)| x).collect();
    let w0 = match (below.first(), below.last()) {
        (Some(a), Some(b)) if b > a => b - a,
        _ => span / 20.0,
    };
    let depth0 = (1.0 - c_min / baseline).clamp(1e-3, 1.0);
    let params = [
        Parameter::free(baseline, 1e-3 * baseline),
        Parameter::bounded(depth0, 1e-3, 0.0, 1.5),
        Parameter::free(tau0, 1e-3 * w0),
        Parameter::bounded(w0, 1e-3 * w0, 1e-6 * span, span),
    ];
    let sol = lsq::minimize(&params, &Settings::default(), |p| {
        Ok(t.iter()
            .zip(c)
            .map(|(&x, &y)| {
                let u = (x - p[2]) / p[3];
                (p[0] * (1.0 - p[1] * (-4.0 * std::f64::consts::LN_2 * u * u).exp()) - y) / p[0].abs().max(1e-300).sqrt()
            })
            .collect())
    })?;
    Ok(sol.parameters[3])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_dip(v: f64, fwhm: f64) -> SpectrumCurve {
        let x: Vec<f64> = (-60..=60).map(|i| i as f64 * 0.25).collect();
        let y = x
            .iter()
            .map(|&t| 1.0 - v * (-4.0 * std::f64::consts::LN_2 * (t / fwhm).powi(2)).exp())
            .collect();
        SpectrumCurve::new(x, y).unwrap()
    }

    fn exact_scan(dip: &SpectrumCurve, baseline: f64) -> HomScan {
        let coincidences = dip.y.iter().map(|d| {
            let c = 0.25 * baseline * d;
            [0.0, 0.0, c, c, c, c]
        });
        HomScan::new(dip.x.clone(), coincidences.collect(), vec![[1e5; 4]; dip.len()], 1.0).unwrap()
    }

    #[test]
    fn full_and_half_visibility() {
        let s = exact_scan(&gaussian_dip(1.0, 2.0), 1000.0);
        let v = hom_visibility_from_scan(&s, (8.0, 15.0)).unwrap();
        assert!((v.visibility - 1.0).abs() < 1e-12);
        let s = exact_scan(&gaussian_dip(0.5, 2.0), 1000.0);
        let v = hom_visibility_from_scan(&s, (8.0, 15.0)).unwrap();
        assert!((v.visibility - 0.5).abs() < 1e-6);
        assert!((v.dip_fwhm_ps - 2.0).abs() < 1e-6);
    }

    #[test]
    fn baseline_inside_dip_is_a_configuration_error() {
        let s = exact_scan(&gaussian_dip(0.7, 2.0), 1000.0);
        assert!(matches!(hom_visibility_from_scan(&s, (3.0, 15.0)), Err(Error::Config(_))));
    }

    #[test]
    fn csv_round_trip() {
        let s = exact_scan(&gaussian_dip(0.7, 2.0), 1000.0);
        let text = s.to_csv_string();
        let back = HomScan::from_table(&csvio::parse_table(&text, "mem").unwrap(), "mem", 1.0).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_csv_string(), text);
    }

    #[test]
    fn simulated_scan_is_reproducible() {
        use rand::SeedableRng;
        let dip = gaussian_dip(0.663, 2.0);
        let a = HomScan::simulate(&dip, 2e4, 1e5, 10.0, true, &mut rand_chacha::ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = HomScan::simulate(&dip, 2e4, 1e5, 10.0, true, &mut rand_chacha::ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
        let v = hom_visibility_from_scan(&a, (8.0, 15.0)).unwrap();
        assert!((v.visibility - 0.663).abs() < 0.01);
    }
}

use super::mismatch::{index_mismatch, mismatch_shg};
use super::WaveguideSpec;
use crate::dispersion::DispersionModel;
use crate::error::{Error, Result};

/// Root search settings for [`solve_phasematched_wavelength`].
#[derive(Debug, Clone, Copy)]
pub struct PhaseMatchScan {
    /// Outward scan step from the seed, nm.
    pub step_nm: f64,
}

impl Default for PhaseMatchScan {
    fn default() -> Self {
        Self { step_nm: 1.0 }
    }
}

/// Fundamental wavelength range on which the SHG mismatch is defined (λ and λ/2 valid).
fn shg_range(model: &DispersionModel) -> [f64; 2] {
    let [lo, hi] = model.valid_wavelength_nm();
    [lo * 2.0, hi]
}

/// Phase-matched SHG fundamental wavelength nearest to `seed_nm`.
///
/// Brackets are found by stepping outward from the seed in 1 nm steps; the
/// first bracket found wins, and when a bracket appears on both sides at the
/// same step the nearer refined root is returned (the longer wavelength on a
/// tie). Brackets are refined with the Illinois variant of regula falsi.
pub fn solve_phasematched_wavelength(
    model: &DispersionModel,
    wg: &WaveguideSpec,
    temperature_k: f64,
    seed_nm: f64,
) -> Result<f64> {
    solve_with(model, wg, temperature_k, seed_nm, PhaseMatchScan::default())
}

pub(crate) fn solve_with(
    model: &DispersionModel,
    wg: &WaveguideSpec,
    temperature_k: f64,
    seed_nm: f64,
    scan: PhaseMatchScan,
) -> Result<f64> {
    model.check_temperature(temperature_k)?;
    model.thermal_scale(temperature_k)?;
    let [lo, hi] = shg_range(model);
    if !(seed_nm >= lo && seed_nm <= hi) {
        return Err(Error::domain("seed wavelength_nm", seed_nm, [lo, hi]));
    }
    let f = |lam: f64| mismatch_shg(model, wg, lam, temperature_k);
    let f_seed = f(seed_nm)?;
    if f_seed == 0.0 {
        return Ok(seed_nm);
    }

    let mut left = Some((seed_nm, f_seed));
    let mut right = Some((seed_nm, f_seed));
    let mut k = 1usize;
    loop {
        let mut found: Vec<(f64, f64, f64, f64)> = Vec::new();
        if let Some((x_prev, f_prev)) = right {
            let x = seed_nm + k as f64 * scan.step_nm;
            right = None;
            if x <= hi {
                let fx = f(x)?;
                if fx == 0.0 || fx.signum() != f_prev.signum() {
                    found.push((x_prev, f_prev, x, fx));
                } else {
                    right = Some((x, fx));
                }
            }
        }
        if let Some((x_prev, f_prev)) = left {
            let x = seed_nm - k as f64 * scan.step_nm;
            left = None;
            if x >= lo {
                let fx = f(x)?;
                if fx == 0.0 || fx.signum() != f_prev.signum() {
                    found.push((x, fx, x_prev, f_prev));
                } else {
                    left = Some((x, fx));
                }
            }
        }
        if !found.is_empty() {
            let mut roots = Vec::with_capacity(found.len());
            for (a, fa, b, fb) in found {
                roots.push(refine(&f, a, fa, b, fb)?);
            }
            roots.sort_by(|x, y| {
                (x - seed_nm)
                    .abs()
                    .total_cmp(&(y - seed_nm).abs())
                    .then(y.total_cmp(x))
            });
            return Ok(roots[0]);
        }
        if left.is_none() && right.is_none() {
            return Err(Error::NoSolution {
                from_nm: (seed_nm - (k - 1) as f64 * scan.step_nm).max(lo),
                to_nm: (seed_nm + (k - 1) as f64 * scan.step_nm).min(hi),
            });
        }
        k += 1;
    }
}

/// Illinois-modified regula falsi on a sign-changing bracket.
fn refine(
    f: &impl Fn(f64) -> Result<f64>,
    mut a: f64,
    mut fa: f64,
    mut b: f64,
    mut fb: f64,
) -> Result<f64> {
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let width = b - a;
        if width.abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
            break;
        }
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !(x > a.min(b) && x < a.max(b)) {
            x = 0.5 * (a + b);
        }
        let fx = f(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    let fa_true = f(a)?;
    let fb_true = f(b)?;
    Ok(if fa_true.abs() <= fb_true.abs() { a } else { b })
}

/// Poling period at 295 K that phase-matches SHG of `target_nm` at `temperature_k`
/// once the crystal has contracted, in µm.
pub fn design_poling_period(model: &DispersionModel, target_nm: f64, temperature_k: f64) -> Result<f64> {
    let delta_n = index_mismatch(model, target_nm, temperature_k)?;
    if !(delta_n > 0.0) {
        return Err(Error::NoQuasiPhaseMatching {
            delta_n,
            wavelength_nm: target_nm,
        });
    }
    let period_at_t_um = target_nm * 1e-3 / delta_n;
    Ok(period_at_t_um / model.thermal_scale(temperature_k)?)
}

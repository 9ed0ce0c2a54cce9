use num_complex::Complex64;

use super::{sinc, IndexProfile};
use crate::error::{Error, Result};

/// Largest phase advance allowed across one quadrature panel, in rad.
pub const PHASE_STEP_LIMIT: f64 = 0.1;

const MIN_PANELS: usize = 64;

/// Phase-matching amplitude of a poled region with a non-uniform index profile:
///
/// ```text
/// Φ = (1/L) ∫₀ᴸ exp(i [φ(z) - φ(L)/2]) dz,   φ(z) = ∫₀ᶻ (Δk + κ δn(z'/L)) dz'
/// ```
///
/// The phase is referenced to the middle of the device so that a uniform
/// profile gives the real value `sinc(Δk L / 2)`.
///
/// `delta_k` and `kappa` are in rad/µm (κ per unit index), `length_mm` in mm.
/// Panels are distributed over the profile's segments; on each panel the
/// integrand's phase is linearized about the panel midpoint and integrated
/// exactly, which is exact for piecewise-constant profiles. Fails with
/// [`Error::Resolution`] when a panel would advance the phase by more than
/// [`PHASE_STEP_LIMIT`].
pub fn nonuniform_amplitude(
    profile: &IndexProfile,
    delta_k: f64,
    kappa: f64,
    length_mm: f64,
    panels: usize,
) -> Result<Complex64> {
    if !(length_mm > 0.0) || !delta_k.is_finite() || !kappa.is_finite() {
        return Err(Error::InvalidInput("amplitude needs finite Δk, κ and a positive length".into()));
    }
    let length_um = length_mm * 1e3;
    if let IndexProfile::Uniform = profile {
        // closed form of the quadrature limit
        return Ok(Complex64::new(sinc(0.5 * delta_k * length_um), 0.0));
    }

    let phase = |u: f64| delta_k * u * length_um + kappa * length_um * profile.cumulative(u);
    let rate = |u: f64| delta_k + kappa * profile.local(u);
    let total_phase = phase(1.0);

    let breaks = profile.breakpoints();
    let n_segments = breaks.len() - 1;
    let panels = panels.max(n_segments);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut worst_advance = 0.0f64;
    let mut assigned = 0;
    for (k, w) in breaks.windows(2).enumerate() {
        let (u0, u1) = (w[0], w[1]);
        let count = if k + 1 == n_segments {
            panels - assigned
        } else {
            (((u1 - u0) * panels as f64).round() as usize).clamp(1, panels - assigned - (n_segments - k - 1))
        };
        assigned += count;
        let h = (u1 - u0) / count as f64;
        let h_um = h * length_um;
        for j in 0..count {
            let um = u0 + (j as f64 + 0.5) * h;
            let r = rate(um);
            worst_advance = worst_advance.max((r * h_um).abs());
            let arg = phase(um) - 0.5 * total_phase;
            acc += Complex64::from_polar(h * sinc(0.5 * r * h_um), arg);
        }
    }
    check_resolution(worst_advance, panels, worst_advance * panels as f64)?;
    Ok(acc)
}

fn check_resolution(advance: f64, panels: usize, total: f64) -> Result<()> {
    if advance < PHASE_STEP_LIMIT {
        Ok(())
    } else {
        Err(Error::Resolution {
            panels,
            advance,
            limit: PHASE_STEP_LIMIT,
            required: (total / PHASE_STEP_LIMIT).ceil() as usize + 1,
        })
    }
}

/// Panel count that keeps the per-panel phase advance at half the limit.
pub fn required_panels(profile: &IndexProfile, delta_k: f64, kappa: f64, length_mm: f64) -> usize {
    let max_rate = delta_k.abs() + kappa.abs() * profile.max_abs();
    let n = (max_rate * length_mm * 1e3 / (0.5 * PHASE_STEP_LIMIT)).ceil();
    (n as usize).max(MIN_PANELS)
}

pub fn nonuniform_amplitude_auto(
    profile: &IndexProfile,
    delta_k: f64,
    kappa: f64,
    length_mm: f64,
) -> Result<Complex64> {
    let panels = required_panels(profile, delta_k, kappa, length_mm);
    nonuniform_amplitude(profile, delta_k, kappa, length_mm, panels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_mismatch_uniform_is_one() {
        let phi = nonuniform_amplitude(&IndexProfile::Uniform, 0.0, 4.0, 24.3, 100).unwrap();
        assert_eq!(phi, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn flat_piecewise_matches_sinc() {
        // A piecewise profile with zero perturbation exercises the quadrature path.
        let p = IndexProfile::PiecewiseConstant(vec![(0.0, 0.0), (0.3, 0.0)]);
        let length_mm = 24.3;
        for x in [-20.0, -7.3, -1.0, 0.0, 0.4, 3.0, 19.99] {
            let dk = 2.0 * x / (length_mm * 1e3);
            let phi = nonuniform_amplitude(&p, dk, 4.0, length_mm, 10_000).unwrap();
            assert!((phi - Complex64::new(sinc(x), 0.0)).norm() < 1e-9, "x = {x}");
        }
    }

    #[test]
    fn under_resolved_is_refused() {
        let p = IndexProfile::two_segment(1e-4, -1e-4);
        let dk = 2.0 * 50.0 / 24300.0;
        match nonuniform_amplitude(&p, dk, 4.0, 24.3, 100) {
            Err(Error::Resolution { required, .. }) => assert!(required > 1000),
            other => panic!("unexpected {other:?}"),
        }
    }
}

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::curve::SpectrumCurve;
use crate::error::{Error, Result};
use crate::jsa::JointSpectrum;

/// Speed of light, nm/ps.
const C_NM_PER_PS: f64 = 299_792.458;

/// Predicted HOM coincidence probability versus delay.
#[derive(Debug, Clone)]
pub struct HomDip {
    /// `C(τ)`, with baseline ½.
    pub raw: SpectrumCurve,
    /// `2 C(τ)`, with baseline 1.
    pub rescaled: SpectrumCurve,
}

fn omega(wavelength_nm: f64) -> f64 {
    TAU * C_NM_PER_PS / wavelength_nm
}

/// `A(λi, λs)` on the `(λs, λi)` grid: a transpose when the axes coincide,
/// bilinear interpolation (zero outside the grid) otherwise.
fn exchanged(js: &JointSpectrum) -> DMatrix<Complex64> {
    let (s, i) = (&js.grid.signal_nm, &js.grid.idler_nm);
    let same = s.len() == i.len() && s.iter().zip(i).all(|(a, b)| (a - b).abs() <= 1e-9 * a.abs());
    if same {
        return js.amplitude.transpose();
    }
    let locate = |axis: &[f64], v: f64| -> Option<(usize, f64)> {
        let step = (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64;
        let t = (v - axis[0]) / step;
        if t < -1e-9 || t > (axis.len() - 1) as f64 + 1e-9 {
            return None;
        }
        let k = (t.floor().max(0.0) as usize).min(axis.len() - 2);
        Some((k, (t - k as f64).clamp(0.0, 1.0)))
    };
    DMatrix::from_fn(s.len(), i.len(), |r, c| {
        // value of A at signal = λi[c], idler = λs[r]
        match (locate(s, i[c]), locate(i, s[r])) {
            (Some((a, fa)), Some((b, fb))) => {
                let v = |x: usize, y: usize| js.amplitude[(x, y)];
                v(a, b) * ((1.0 - fa) * (1.0 - fb))
                    + v(a + 1, b) * (fa * (1.0 - fb))
                    + v(a, b + 1) * ((1.0 - fa) * fb)
                    + v(a + 1, b + 1) * (fa * fb)
            }
            _ => Complex64::new(0.0, 0.0),
        }
    })
}

/// `I(τ) = ∫∫ A(ωs, ωi) A*(ωi, ωs) e^{i (ωs - ωi) τ} dωs dωi`, evaluated on
/// the wavelength grid (the Jacobians of λ → ω cancel in the product).
fn interference(js: &JointSpectrum, delays_ps: &[f64]) -> Vec<f64> {
    let swapped = exchanged(js);
    let area = js.grid.cell_area();
    let p = js.amplitude.zip_map(&swapped, |a, b| a * b.conj() * area);
    let ws: Vec<f64> = js.grid.signal_nm.iter().map(|&l| omega(l)).collect();
    let wi: Vec<f64> = js.grid.idler_nm.iter().map(|&l| omega(l)).collect();
    delays_ps
        .iter()
        .map(|&tau| {
            let ei: Vec<Complex64> = wi.iter().map(|w| Complex64::from_polar(1.0, -w * tau)).collect();
            let mut total = Complex64::new(0.0, 0.0);
            for (r, w) in ws.iter().enumerate() {
                let mut row = Complex64::new(0.0, 0.0);
                for (c, e) in ei.iter().enumerate() {
                    row += p[(r, c)] * e;
                }
                total += row * Complex64::from_polar(1.0, w * tau);
            }
            total.re
        })
        .collect()
}

/// HOM dip `C(τ) = ½ [1 - Re I(τ)]` for strictly increasing delays in ps.
/// Positive delays retard the signal arm.
pub fn hom_dip(js: &JointSpectrum, delays_ps: &[f64]) -> Result<HomDip> {
    js.require_normalized("hom_dip")?;
    if delays_ps.len() < 2 {
        return Err(Error::InvalidInput("HOM dip needs at least two delays".into()));
    }
    let re = interference(js, delays_ps);
    let raw: Vec<f64> = re.iter().map(|v| 0.5 * (1.0 - v)).collect();
    let rescaled: Vec<f64> = raw.iter().map(|v| 2.0 * v).collect();
    Ok(HomDip {
        raw: SpectrumCurve::new(delays_ps.to_vec(), raw)?,
        rescaled: SpectrumCurve::new(delays_ps.to_vec(), rescaled)?,
    })
}

/// Model visibility `1 - C(0)/C(∞) = Re I(0)`.
pub fn hom_visibility_model(js: &JointSpectrum) -> Result<f64> {
    js.require_normalized("hom_visibility_model")?;
    Ok(interference(js, &[0.0])[0])
}

use super::JointSpectrum;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtResult {
    /// Normalized singular values, descending, `Σ σ² = 1`.
    pub coefficients: Vec<f64>,
    /// `K = 1 / Σ σ⁴`.
    pub schmidt_number: f64,
    /// `Σ σ⁴ = 1 / K`.
    pub purity: f64,
}

/// Schmidt decomposition of a normalized joint spectrum via the singular
/// values of `A √(Δλs Δλi)`.
pub fn schmidt(js: &JointSpectrum) -> Result<SchmidtResult> {
    js.require_normalized("schmidt")?;
    let scaled = js.amplitude.scale(js.grid.cell_area().sqrt());
    let svd = scaled
        .try_svd(false, false, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Degenerate("singular value decomposition did not converge".into()))?;
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = sv.iter().map(|s| s * s).sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Degenerate("joint spectrum has no weight".into()));
    }
    let coefficients: Vec<f64> = sv.iter().map(|s| s / total.sqrt()).collect();
    let purity: f64 = coefficients.iter().map(|c| c.powi(4)).sum();
    Ok(SchmidtResult {
        coefficients,
        schmidt_number: 1.0 / purity,
        purity,
    })
}

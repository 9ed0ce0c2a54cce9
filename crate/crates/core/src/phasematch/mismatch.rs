use std::f64::consts::TAU;

use super::WaveguideSpec;
use crate::dispersion::{DispersionModel, Polarization};
use crate::error::Result;

/// Pump wavelength fixed by energy conservation.
pub fn pump_wavelength(signal_nm: f64, idler_nm: f64) -> f64 {
    1.0 / (1.0 / signal_nm + 1.0 / idler_nm)
}

/// Index-to-wavevector factor for a combined-index perturbation at
/// fundamental wavelength `wavelength_nm`, in rad/µm per index unit.
pub fn shg_kappa(wavelength_nm: f64) -> f64 {
    TAU / (wavelength_nm * 1e-3)
}

/// Combined mismatch `Δn = 2 n_TE(λ/2) - n_TE(λ) - n_TM(λ)` of effective
/// indices, including the combined share of the correction.
pub fn index_mismatch(model: &DispersionModel, wavelength_nm: f64, temperature_k: f64) -> Result<f64> {
    let half = 0.5 * wavelength_nm;
    let n_te_half = model.effective_index(Polarization::Te, half, temperature_k, true)?;
    let n_te = model.effective_index(Polarization::Te, wavelength_nm, temperature_k, true)?;
    let n_tm = model.effective_index(Polarization::Tm, wavelength_nm, temperature_k, true)?;
    Ok(2.0 * n_te_half - n_te - n_tm + model.combined_correction(temperature_k))
}

fn period_at(model: &DispersionModel, wg: &WaveguideSpec, temperature_k: f64) -> Result<f64> {
    Ok(model.thermal_scale(temperature_k)? * wg.poling_period_um)
}

/// Type-II SHG mismatch `2π (Δn(λ, T) / λ - 1 / Λ(T))` for fundamental `λ`, in rad/µm.
pub fn mismatch_shg(
    model: &DispersionModel,
    wg: &WaveguideSpec,
    wavelength_nm: f64,
    temperature_k: f64,
) -> Result<f64> {
    let period_um = period_at(model, wg, temperature_k)?;
    let delta_n = index_mismatch(model, wavelength_nm, temperature_k)?;
    let lambda_um = wavelength_nm * 1e-3;
    Ok(TAU * (delta_n / lambda_um - 1.0 / period_um))
}

/// Non-degenerate SPDC mismatch with a TE signal, TM idler and TE pump, in rad/µm.
///
/// Reduces to [`mismatch_shg`] at `signal = idler = λ`.
pub fn mismatch_spdc(
    model: &DispersionModel,
    wg: &WaveguideSpec,
    signal_nm: f64,
    idler_nm: f64,
    temperature_k: f64,
) -> Result<f64> {
    let period_um = period_at(model, wg, temperature_k)?;
    let pump_nm = pump_wavelength(signal_nm, idler_nm);
    let n_p = model.effective_index(Polarization::Te, pump_nm, temperature_k, true)?;
    let n_s = model.effective_index(Polarization::Te, signal_nm, temperature_k, true)?;
    let n_i = model.effective_index(Polarization::Tm, idler_nm, temperature_k, true)?;
    let (lp, ls, li) = (pump_nm * 1e-3, signal_nm * 1e-3, idler_nm * 1e-3);
    // The combined correction is defined at the SHG fundamental 2 λ_p.
    let combined = model.combined_correction(temperature_k) / (2.0 * lp);
    Ok(TAU * (n_p / lp - n_s / ls - n_i / li + combined - 1.0 / period_um))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{CorrectionPolynomial, SellmeierCoefficients, ThermalExpansionTable, WaveguideOffset};

    fn synthetic() -> DispersionModel {
        // n_TE = 2.2 up to 775 nm and 2.15 from 776 nm on, n_TM = 2.10.
        DispersionModel::new(
            SellmeierCoefficients::constant(2.15),
            SellmeierCoefficients::constant(2.10),
            WaveguideOffset::Table {
                wavelength_nm: vec![775.0, 776.0],
                te: vec![0.05, 0.0],
                tm: vec![0.0, 0.0],
            },
            ThermalExpansionTable::rigid(),
        )
    }

    #[test]
    fn constant_index_hand_values() {
        let m = synthetic();
        let dn = index_mismatch(&m, 1550.0, 295.0).unwrap();
        assert!((dn - 0.15).abs() < 1e-12);
        let wg = WaveguideSpec::new(1.55 / 0.15, 10.0).unwrap();
        assert!(mismatch_shg(&m, &wg, 1550.0, 295.0).unwrap().abs() < 1e-12);
        let wg = WaveguideSpec::new(10.0, 10.0).unwrap();
        let expect = TAU * (0.15 / 1.55 - 0.1);
        assert!((mismatch_shg(&m, &wg, 1550.0, 295.0).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn spdc_hand_value() {
        // pump 1/(1/1500 + 1/1600) = 774.1935 nm sits on the short-wavelength plateau
        let m = synthetic();
        let wg = WaveguideSpec::new(10.0, 10.0).unwrap();
        let (s, i) = (1500.0, 1600.0);
        let p = 1.0 / (1.0 / s + 1.0 / i);
        let n_p = 2.2;
        let expect = TAU * (n_p / (p * 1e-3) - 2.15 / 1.5 - 2.10 / 1.6 - 0.1);
        let got = mismatch_spdc(&m, &wg, s, i, 295.0).unwrap();
        assert!((got - expect).abs() < 1e-12, "{got} {expect}");
    }

    #[test]
    fn degenerate_spdc_equals_shg() {
        let m = DispersionModel::lithium_niobate()
            .with_correction(CorrectionPolynomial::new([2e-4, 1e-4, 0.0, 0.0, 0.0, 0.0], [4.0, 295.0]).unwrap());
        let wg = WaveguideSpec::new(8.81, 24.3).unwrap();
        for (lam, t) in [(1559.0, 6.4), (1500.0, 150.0), (1620.0, 295.0)] {
            let a = mismatch_spdc(&m, &wg, lam, lam, t).unwrap();
            let b = mismatch_shg(&m, &wg, lam, t).unwrap();
            // relative to the pump term, the largest in the sum
            let scale = TAU * 2.2 / (0.5 * lam * 1e-3);
            assert!((a - b).abs() <= 1e-12 * scale, "{a} {b}");
        }
    }

    #[test]
    fn isotropic_swap_symmetry() {
        let m = DispersionModel::lithium_niobate();
        let iso = DispersionModel { tm: m.te.clone(), ..m };
        let iso = iso.with_offset(WaveguideOffset::Zero);
        let wg = WaveguideSpec::new(8.81, 24.3).unwrap();
        let a = mismatch_spdc(&iso, &wg, 1540.0, 1575.0, 20.0).unwrap();
        let b = mismatch_spdc(&iso, &wg, 1575.0, 1540.0, 20.0).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn monotone_in_inverse_period() {
        let m = DispersionModel::lithium_niobate();
        let mut last = f64::NEG_INFINITY;
        for period in [9.2, 9.0, 8.9, 8.81, 8.7] {
            let wg = WaveguideSpec::new(period, 24.3).unwrap();
            let dk = mismatch_shg(&m, &wg, 1559.0, 6.4).unwrap();
            // larger 1/Λ -> smaller Δk
            if last != f64::NEG_INFINITY {
                assert!(dk < last);
            }
            last = dk;
        }
    }
}

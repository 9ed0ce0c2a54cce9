//! Acceptance criteria AC1-AC8. Runs as a plain binary and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.
//!
//! `CRYOQPM_CALIBRATION_CSV` optionally points at measured cool-down data for
//! the dataset-gated part of AC5.

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use cryoqpm::dispersion::CorrectionPolynomial;
use cryoqpm::jsa::{build_jsa, marginals, schmidt, JointSpectrum, PumpEnvelope, SpectralGrid};
use cryoqpm::metrics::{
    brightness, g2_heralded, hom_visibility_from_scan, hom_visibility_model, klyshko, CountSummary, HomScan,
};
use cryoqpm::phasematch::{
    calibrate_correction, design_poling_period, fit_shg_spectrum, nonuniform_amplitude, nonuniform_amplitude_auto,
    shg_power_spectrum, sinc, solve_phasematched_wavelength, CalibrationPoint, ProfileKind, ShgFitGuess,
};
use cryoqpm::{DispersionModel, IndexProfile, SpectrumCurve, WaveguideSpec};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn ac1() -> Outcome {
    let mut c = CountSummary::new(1.0e4, 1.0e4, 1362.0, 60.0);
    let eta = klyshko(&c).unwrap().value;
    c.c_s = 1.0e6;
    c.c_i1s = Some(5.0e4);
    c.c_i2s = Some(5.0e4);
    c.c_i1i2s = Some(42.5);
    let g2 = g2_heralded(&c).unwrap().value;
    let mut b = CountSummary::new(1.0e6, 1.0e6, 3.0e4, 60.0);
    b.p_trans_mw = Some(0.05);
    let bright = brightness(&b).unwrap().value;
    check(
        within(eta, 0.1362, 1e-4) && within(g2, 0.017, 1e-3) && within(bright, 6.0e5, 0.3e5),
        format!("klyshko = {:.4}%, g2 = {g2:.4}, brightness = {bright:.3e} /(s mW)", 100.0 * eta),
    )
}

/// `exp(-(a x² + 2 c x y + b y²) / 2)` on a square grid; x, y in nm from the center.
fn gaussian_jsa(a: f64, b: f64, c: f64, half_span: f64, n: usize) -> JointSpectrum {
    let grid = SpectralGrid::centered(1558.0, half_span, n, 1558.0, half_span, n).unwrap();
    let amp = DMatrix::from_fn(n, n, |r, col| {
        let (x, y) = (grid.signal_nm[r] - 1558.0, grid.idler_nm[col] - 1558.0);
        Complex64::new((-(a * x * x + 2.0 * c * x * y + b * y * y) / 2.0).exp(), 0.0)
    });
    JointSpectrum::new(grid, amp).unwrap().normalize().unwrap()
}

/// Purity of the Gaussian above: `√(1 - c² / (a b))`.
fn gaussian_purity(a: f64, b: f64, c: f64) -> f64 {
    (1.0 - c * c / (a * b)).sqrt()
}

fn ac2() -> Outcome {
    // correlation chosen so that the closed form gives K = 2.72
    let p_target: f64 = 1.0 / 2.72;
    let c = -(1.0 - p_target * p_target).sqrt();
    let target = schmidt(&gaussian_jsa(1.0, 1.0, c, 20.0, 256)).unwrap();
    let pair_ok = within(target.schmidt_number, 2.72, 0.01) && within(target.purity, 0.368, 0.002);

    let (a, b, c2) = (0.8, 1.6, 0.7);
    let closed = 1.0 / gaussian_purity(a, b, c2);
    let numeric = schmidt(&gaussian_jsa(a, b, c2, 15.0, 256)).unwrap().schmidt_number;
    check(
        pair_ok && within(numeric, closed, 1e-3),
        format!(
            "K = {:.4}, purity = {:.4}; oracle K = {closed:.6} vs numeric {numeric:.6}",
            target.schmidt_number, target.purity
        ),
    )
}

fn ac3() -> Outcome {
    let model = DispersionModel::lithium_niobate();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..100 {
        let target = rng.random_range(1450.0..1650.0);
        let t = rng.random_range(4.0..300.0);
        let result = design_poling_period(&model, target, t).and_then(|period| {
            let wg = WaveguideSpec::new(period, 24.3)?;
            solve_phasematched_wavelength(&model, &wg, t, 1550.0)
        });
        match result {
            Ok(l) => worst = worst.max((l - target).abs()),
            Err(_) => failures += 1,
        }
    }
    check(
        failures == 0 && worst <= 1e-3,
        format!("100 pairs, worst |Δλ| = {worst:.3e} nm, solver failures = {failures}"),
    )
}

/// Closed form for halves with index perturbations `d1`, `d2`, phase referenced to the midpoint.
fn two_segment_oracle(dk: f64, kappa: f64, d1: f64, d2: f64, length_um: f64) -> Complex64 {
    let (a1, a2) = (dk + kappa * d1, dk + kappa * d2);
    let q = 0.25 * length_um;
    let i = Complex64::i();
    let raw = 0.5
        * ((i * a1 * q).exp() * sinc(a1 * q) + (i * a1 * 2.0 * q).exp() * (i * a2 * q).exp() * sinc(a2 * q));
    raw * (-i * (a1 + a2) * q).exp()
}

fn ac4() -> Outcome {
    let length_mm = 18.8;
    let length_um = length_mm * 1e3;
    let kappa = TAU / 1.5581;
    let zero = IndexProfile::two_segment(0.0, 0.0);
    let mut uniform_err = 0.0f64;
    for k in 0..=400 {
        let x = -20.0 + 0.1 * k as f64;
        let dk = 2.0 * x / length_um;
        let expect = sinc(x);
        let closed = nonuniform_amplitude(&IndexProfile::Uniform, dk, kappa, length_mm, 64).unwrap();
        let quad = nonuniform_amplitude_auto(&zero, dk, kappa, length_mm).unwrap();
        uniform_err = uniform_err.max((closed - expect).norm()).max((quad - expect).norm());
    }
    let mut two_err = 0.0f64;
    for &(d1, d2) in &[(2e-5, -2e-5), (5e-5, 1e-5), (-3e-5, 0.0)] {
        let profile = IndexProfile::two_segment(d1, d2);
        for k in 0..=200 {
            let dk = (-20.0 + 0.2 * k as f64) * 2.0 / length_um;
            let got = nonuniform_amplitude_auto(&profile, dk, kappa, length_mm).unwrap();
            two_err = two_err.max((got - two_segment_oracle(dk, kappa, d1, d2, length_um)).norm());
        }
    }
    check(
        uniform_err <= 1e-9 && two_err <= 1e-8,
        format!("uniform max error = {uniform_err:.2e}, two-segment max error = {two_err:.2e}"),
    )
}

fn calibration_points(
    truth: &DispersionModel,
    periods: &[f64],
    targets: &[f64],
    temps: &[f64],
    noise: Option<(&mut ChaCha8Rng, f64)>,
) -> Vec<CalibrationPoint> {
    let mut pts = Vec::new();
    let mut noise = noise;
    for (&period, &target) in periods.iter().zip(targets) {
        let wg = WaveguideSpec::new(period, 24.3).unwrap();
        for &t in temps {
            let mut l = solve_phasematched_wavelength(truth, &wg, t, target).unwrap();
            let mut sigma = None;
            if let Some((rng, s)) = noise.as_mut() {
                l += Normal::new(0.0, *s).unwrap().sample(*rng);
                sigma = Some(*s);
            }
            pts.push(CalibrationPoint {
                poling_period_um: period,
                temperature_k: t,
                wavelength_nm: l,
                sigma_nm: sigma,
            });
        }
    }
    pts
}

fn ac5() -> Outcome {
    let base = DispersionModel::lithium_niobate();
    let temps = [6.4, 50.0, 100.0, 150.0, 200.0, 250.0, 295.0];
    let truth_poly =
        CorrectionPolynomial::new([2.0e-4, -1.5e-4, 8.0e-5, -4.0e-5, 2.0e-5, -1.0e-5], [6.4, 295.0]).unwrap();
    let truth = base.clone().with_correction(truth_poly.clone());
    let targets = [1500.0, 1525.0, 1550.0, 1575.0, 1600.0];
    let periods: Vec<f64> = targets.iter().map(|&l| design_poling_period(&base, l, 295.0).unwrap()).collect();

    let clean = calibration_points(&truth, &periods, &targets, &temps, None);
    let fit = calibrate_correction(&clean, &base).unwrap();
    let coeff_err = fit
        .correction
        .coefficients
        .iter()
        .zip(truth_poly.coefficients)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let noisy = calibration_points(&truth, &periods, &targets, &temps, Some((&mut rng, 0.05)));
    let noisy_fit = calibrate_correction(&noisy, &base).unwrap();
    check(
        coeff_err <= 1e-7 && noisy_fit.rms_nm < 0.1,
        format!("noiseless max coefficient error = {coeff_err:.2e}, noisy residual RMS = {:.4} nm", noisy_fit.rms_nm),
    )
}

/// Dataset-gated part of AC5: `None` when no calibration data are supplied.
fn ac5_dataset() -> Option<Outcome> {
    let path = std::env::var_os("CRYOQPM_CALIBRATION_CSV")?;
    let outcome = (|| {
        let base = DispersionModel::lithium_niobate();
        let points = CalibrationPoint::read_csv(&path)?;
        let fit = calibrate_correction(&points, &base)?;
        let model = base.with_correction(fit.correction);
        let wg = WaveguideSpec::new(8.81, 24.3)?;
        solve_phasematched_wavelength(&model, &wg, 6.4, 1558.1)
    })();
    Some(match outcome {
        Ok(l) => check(within(l, 1558.1, 2.0), format!("predicted λ_pm(6.4 K, 8.81 µm) = {l:.3} nm")),
        Err(e) => check(false, format!("calibration data {}: {e}", path.to_string_lossy())),
    })
}

fn ac6() -> Outcome {
    let model = DispersionModel::lithium_niobate();
    let t = 6.4;
    let device = WaveguideSpec::new(8.81, 24.3).unwrap();
    let d = 1.0e-5;
    let generator = WaveguideSpec::with_profile(8.81, 18.8, IndexProfile::two_segment(0.5 * d, -0.5 * d)).unwrap();
    let center = solve_phasematched_wavelength(&model, &generator, t, 1558.0).unwrap();
    let probe = shg_power_spectrum(&model, &generator, (center - 5.0, center + 5.0), t, 2001).unwrap();
    let width = probe.fwhm().unwrap();
    let (peak_idx, _) = probe.peak();
    let mid = probe.x[peak_idx];
    let clean = shg_power_spectrum(&model, &generator, (mid - 2.5 * width, mid + 2.5 * width), t, 201).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let y: Vec<f64> = clean.y.iter().map(|v| v + noise.sample(&mut rng)).collect();
    let measured = SpectrumCurve::new(clean.x.clone(), y).unwrap();

    let fit = fit_shg_spectrum(&model, &measured, &device, t, ProfileKind::TwoSegment, &ShgFitGuess::default());
    match fit {
        Ok(f) => check(
            within(f.effective_fraction, 0.774, 0.01) && f.overlap_with_ideal >= 0.995,
            format!(
                "effective fraction = {:.4} (L_eff = {:.3} mm), overlap with ideal = {:.5}",
                f.effective_fraction, f.effective_length_mm, f.overlap_with_ideal
            ),
        ),
        Err(e) => check(false, format!("fit failed: {e}")),
    }
}

fn gaussian_dip(v: f64, fwhm_ps: f64) -> SpectrumCurve {
    let x: Vec<f64> = (-80..=80).map(|i| 0.25 * i as f64).collect();
    let y = x
        .iter()
        .map(|&t| 1.0 - v * (-4.0 * std::f64::consts::LN_2 * (t / fwhm_ps).powi(2)).exp())
        .collect();
    SpectrumCurve::new(x, y).unwrap()
}

fn ac7() -> Outcome {
    let symmetric = gaussian_jsa(1.0, 1.0, -0.6, 10.0, 96);
    let v_sym = hom_visibility_model(&symmetric).unwrap();

    let n = 64;
    let grid = SpectralGrid::centered(1558.0, 10.0, n, 1558.0, 10.0, n).unwrap();
    let amp = DMatrix::from_fn(n, n, |r, c| {
        let (x, y) = (grid.signal_nm[r] - 1553.0, grid.idler_nm[c] - 1563.0);
        Complex64::new((-(x * x + y * y) / 2.0).exp(), 0.0)
    });
    let disjoint = JointSpectrum::new(grid, amp).unwrap().normalize().unwrap();
    let v_dis = hom_visibility_model(&disjoint).unwrap();

    let planted = 0.663;
    let dip = gaussian_dip(planted, 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(663);
    let mut estimates = Vec::with_capacity(100);
    for _ in 0..100 {
        let scan = HomScan::simulate(&dip, 2.0e4, 1.0e5, 10.0, true, &mut rng).unwrap();
        estimates.push(hom_visibility_from_scan(&scan, (8.0, 20.0)).unwrap().visibility);
    }
    let worst = estimates.iter().map(|v| (v - planted).abs()).fold(0.0, f64::max);
    let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
    check(
        within(v_sym, 1.0, 1e-6) && within(v_dis, 0.0, 1e-6) && worst <= 0.01,
        format!("V(symmetric) = {v_sym:.8}, V(disjoint) = {v_dis:.2e}, planted 0.663: mean {mean:.4}, worst |ΔV| = {worst:.4}"),
    )
}

fn marginal_widths(
    model: &DispersionModel,
    wg: &WaveguideSpec,
    pump: &PumpEnvelope,
    grid: &SpectralGrid,
    t: f64,
) -> Option<(f64, f64)> {
    let js = build_jsa(model, wg, pump, grid, t).ok()?;
    let (s, i) = marginals(&js).ok()?;
    Some((s.fwhm()?, i.fwhm()?))
}

fn ac8() -> Outcome {
    let model = DispersionModel::lithium_niobate();
    let t = 6.4;
    let wg = WaveguideSpec::new(8.81, 18.8).unwrap();
    let pump = PumpEnvelope::gaussian(779.05, 0.73).unwrap();
    let grid = SpectralGrid::auto(&model, &wg, &pump, t).unwrap();
    // the sinc² tails reach past any finite grid; the widths must not depend on the span
    let n = grid.signal_nm.len();
    let (cs, span_s) = (0.5 * (grid.signal_nm[0] + grid.signal_nm[n - 1]), grid.signal_nm[n - 1] - grid.signal_nm[0]);
    let (ci, span_i) = (0.5 * (grid.idler_nm[0] + grid.idler_nm[n - 1]), grid.idler_nm[n - 1] - grid.idler_nm[0]);
    let wide = SpectralGrid::centered(cs, span_s, 2 * n - 1, ci, span_i, 2 * n - 1).unwrap();
    let (Some((ws, wi)), Some((ws2, wi2))) =
        (marginal_widths(&model, &wg, &pump, &grid, t), marginal_widths(&model, &wg, &pump, &wide, t))
    else {
        return check(false, "a marginal has no half-maximum crossing on the grid".into());
    };
    let ratio = ws.max(wi) / ws.min(wi);
    let drift = ((ws2 - ws) / ws).abs().max(((wi2 - wi) / wi).abs());
    check(
        (1.3..=2.9).contains(&ratio) && drift < 1e-2,
        format!("signal FWHM = {ws:.3} nm, idler FWHM = {wi:.3} nm, ratio = {ratio:.3}, width change on a 2x grid = {drift:.1e}"),
    )
}

fn run(name: &str, limit: Duration, f: fn() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let pass = out.pass && elapsed <= limit;
    println!(
        "{name} {} [{:.2} s / {:.0} s] {}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs_f64(),
        out.detail
    );
    pass
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        run("AC1", secs(1), ac1),
        run("AC2", secs(10), ac2),
        run("AC3", secs(10), ac3),
        run("AC4", secs(5), ac4),
        run("AC5", secs(60), ac5),
        run("AC6", secs(30), ac6),
        run("AC7", secs(60), ac7),
        run("AC8", secs(30), ac8),
    ];
    match ac5_dataset() {
        Some(out) => println!("AC5-dataset {} {}", if out.pass { "PASS" } else { "FAIL" }, out.detail),
        None => println!("AC5-dataset SKIP set CRYOQPM_CALIBRATION_CSV to check the 1558.1 nm prediction"),
    }
    let failed = results.iter().filter(|p| !**p).count();
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

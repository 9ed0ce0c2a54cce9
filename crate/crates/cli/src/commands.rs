use std::path::PathBuf;

use cryoqpm::csvio;
use cryoqpm::jsa::{
    apply_filter, build_jsa, build_jsa_flat, gaussian_fit, marginals, schmidt, JointSpectrum, JsiTable, SpectralGrid,
};
use cryoqpm::metrics::{
    brightness, g2_heralded, hom_dip, hom_visibility_from_scan, hom_visibility_model, klyshko, CountSummary, HomDip, HomScan,
};
use cryoqpm::phasematch::{
    calibrate_correction, design_poling_period, fit_shg_spectrum, index_mismatch, shg_power_spectrum,
    solve_phasematched_wavelength, CalibrationPoint, ProfileKind, ShgFitGuess,
};
use cryoqpm::{DispersionModel, Error, IndexProfile, Result, SpectrumCurve, WaveguideSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{self, require, RunConfig};
use crate::report::{Output, Report};
use crate::{Cli, Command, DesignArgs, DeviceArgs, FitArgs, FitMode, HomArgs, MetricsArgs, ProfileArg, ShgArgs};
use crate::{JsaArgs, SpectrumArgs};

const DEFAULT_TEMPERATURE_K: f64 = 295.0;
const DEFAULT_SEED_NM: f64 = 1550.0;
const DEFAULT_DELAY_HALF_SPAN_PS: f64 = 10.0;

struct Context {
    cfg: RunConfig,
    dataset: Option<PathBuf>,
    out: Output,
    seed: u64,
}

impl Context {
    fn model(&self) -> Result<DispersionModel> {
        match &self.dataset {
            Some(p) => DispersionModel::load(p),
            None => Ok(DispersionModel::lithium_niobate()),
        }
    }

    fn temperature(&self, d: &DeviceArgs) -> f64 {
        d.temperature_k.or(self.cfg.temperature_k).unwrap_or(DEFAULT_TEMPERATURE_K)
    }

    fn waveguide(&self, d: &DeviceArgs) -> Result<WaveguideSpec> {
        let w = &self.cfg.waveguide;
        config::waveguide(d.period_um.or(w.poling_period_um), d.length_mm.or(w.length_mm), w.profile.as_ref())
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let dataset = cli.dataset.clone().or_else(|| cfg.dataset.clone());
    let out_dir = cli.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("."));
    let seed = cli.seed.or(cfg.seed).unwrap_or(1);
    let ctx = Context {
        out: Output::new(out_dir, cli.plot)?,
        cfg,
        dataset,
        seed,
    };
    match &cli.command {
        Command::Design(a) => design(&ctx, a),
        Command::Shg(a) => shg(&ctx, a),
        Command::Fit(a) => fit(&ctx, a),
        Command::Jsa(a) => jsa(&ctx, a),
        Command::Hom(a) => hom(&ctx, a),
        Command::Metrics(a) => metrics(&ctx, a),
    }
}

fn design(ctx: &Context, a: &DesignArgs) -> Result<()> {
    let model = ctx.model()?;
    let t = ctx.temperature(&a.device);
    let target = require(a.target_nm.or(ctx.cfg.design.target_nm), "target wavelength (--target-nm)")?;
    let period = design_poling_period(&model, target, t)?;
    let scale = model.thermal_scale(t)?;
    let length = a.device.length_mm.or(ctx.cfg.waveguide.length_mm).unwrap_or(1.0);
    let wg = WaveguideSpec::new(period, length)?;
    let lambda = solve_phasematched_wavelength(&model, &wg, t, target)?;
    let mut r = Report::default();
    r.value("target_nm", target)
        .value("temperature_k", t)
        .value("thermal_scale", scale)
        .value("poling_period_295K_um", period)
        .value("poling_period_at_temperature_um", scale * period)
        .value("lambda_pm_nm", lambda)
        .value("delta_n", index_mismatch(&model, target, t)?)
        .value("extrapolated", model.is_extrapolated(t));
    r.finish(&ctx.out, "design_report.txt")
}

fn shg(ctx: &Context, a: &ShgArgs) -> Result<()> {
    let model = ctx.model()?;
    let t = ctx.temperature(&a.device);
    let wg = ctx.waveguide(&a.device)?;
    let range = match a.range_nm.as_deref().or(ctx.cfg.shg.range_nm.as_ref().map(|r| r.as_slice())) {
        Some(&[lo, hi]) => (lo, hi),
        _ => {
            let l = solve_phasematched_wavelength(&model, &wg, t, DEFAULT_SEED_NM)?;
            (l - 3.0, l + 3.0)
        }
    };
    let points = a.points.or(ctx.cfg.shg.points).unwrap_or(401);
    let curve = shg_power_spectrum(&model, &wg, range, t, points)?;
    write_curve(ctx, "shg_spectrum.csv", &["wavelength_nm", "power"], &[&curve.x, &curve.y])?;
    ctx.out.plot_curves("shg_spectrum.csv", "wavelength (nm)", "normalized SHG power", &[2])?;
    let (ip, peak) = curve.peak();
    let mut r = Report::default();
    r.value("temperature_k", t)
        .value("points", curve.len())
        .value("peak_wavelength_nm", curve.x[ip])
        .value("peak_power", peak);
    match curve.fwhm() {
        Some(w) => r.value("fwhm_nm", w),
        None => r.text("fwhm_nm", "not resolved in range"),
    };
    r.finish(&ctx.out, "shg_report.txt")
}

fn write_curve(ctx: &Context, name: &str, header: &[&str], cols: &[&[f64]]) -> Result<()> {
    ctx.out.write(name, &csvio::format_table(header, cols)).map(|_| ())
}

fn fit(ctx: &Context, a: &FitArgs) -> Result<()> {
    match a.mode {
        FitMode::Shg => fit_shg(ctx, a),
        FitMode::Calibration => fit_calibration(ctx, a),
        FitMode::Gaussian => fit_gaussian(ctx, a),
        FitMode::Hom => fit_hom(ctx, a),
    }
}

fn fit_shg(ctx: &Context, a: &FitArgs) -> Result<()> {
    let model = ctx.model()?;
    let t = ctx.temperature(&a.device);
    let wg = ctx.waveguide(&a.device)?;
    let measured = SpectrumCurve::read_csv(&a.input, "wavelength_nm", "power", "sigma")?;
    let kind = match a.profile {
        ProfileArg::Uniform => ProfileKind::Uniform,
        ProfileArg::TwoSegment => ProfileKind::TwoSegment,
        ProfileArg::Polynomial => ProfileKind::Polynomial { degree: a.degree },
    };
    let f = fit_shg_spectrum(&model, &measured, &wg, t, kind, &ShgFitGuess::default())?;
    write_curve(
        ctx,
        "fit_shg_residuals.csv",
        &["wavelength_nm", "measured", "fitted", "residual"],
        &[&measured.x, &measured.y, &f.fitted.y, &f.residuals],
    )?;
    ctx.out.plot_curves("fit_shg_residuals.csv", "wavelength (nm)", "SHG power", &[2, 3])?;
    let mut r = Report::default();
    r.value("effective_length_mm", f.effective_length_mm)
        .value("effective_fraction", f.effective_fraction)
        .value("peak_wavelength_nm", f.peak_wavelength_nm)
        .value("amplitude", f.amplitude)
        .text("profile", describe_profile(&f.profile))
        .value("overlap_with_ideal", f.overlap_with_ideal)
        .value("residual", f.residual)
        .value("iterations", f.iterations);
    r.finish(&ctx.out, "fit_shg_report.txt")
}

fn describe_profile(p: &IndexProfile) -> String {
    match p {
        IndexProfile::Uniform => "uniform".into(),
        IndexProfile::PiecewiseConstant(s) => {
            let parts: Vec<String> = s.iter().map(|(u, d)| format!("{u}:{d:e}")).collect();
            format!("piecewise {}", parts.join(" "))
        }
        IndexProfile::Polynomial(c) => {
            let parts: Vec<String> = c.iter().map(|v| format!("{v:e}")).collect();
            format!("polynomial {}", parts.join(" "))
        }
    }
}

fn fit_calibration(ctx: &Context, a: &FitArgs) -> Result<()> {
    let model = ctx.model()?;
    let points = CalibrationPoint::read_csv(&a.input)?;
    let res = calibrate_correction(&points, &model)?;
    let col = |f: fn(&CalibrationPoint) -> f64| points.iter().map(f).collect::<Vec<f64>>();
    write_curve(
        ctx,
        "fit_calibration_residuals.csv",
        &["poling_period_um", "temperature_K", "lambda_pm_nm", "predicted_nm", "residual_nm"],
        &[
            &col(|p| p.poling_period_um),
            &col(|p| p.temperature_k),
            &col(|p| p.wavelength_nm),
            &res.predicted_nm,
            &res.residuals_nm,
        ],
    )?;
    let c = &res.correction;
    let coeffs: Vec<String> = c.coefficients.iter().map(|v| format!("{v:e}")).collect();
    let snippet = format!(
        "[correction]\nprovenance = \"Fitted from {} ({} points)\"\ntemperature_range_k = [{}, {}]\ncoefficients = [{}]\n",
        a.input.display(),
        points.len(),
        c.temperature_range_k[0],
        c.temperature_range_k[1],
        coeffs.join(", ")
    );
    ctx.out.write("fit_calibration_correction.toml", &snippet)?;
    let mut r = Report::default();
    r.value("points", points.len())
        .value("temperature_range_k", format!("[{}, {}]", c.temperature_range_k[0], c.temperature_range_k[1]))
        .value("coefficients", format!("[{}]", coeffs.join(", ")))
        .value("rms_nm", res.rms_nm)
        .value("iterations", res.iterations);
    r.finish(&ctx.out, "fit_calibration_report.txt")
}

fn fit_gaussian(ctx: &Context, a: &FitArgs) -> Result<()> {
    let curve = SpectrumCurve::read_csv(&a.input, &a.x_column, &a.y_column, "sigma")?;
    let g = gaussian_fit(&curve)?;
    let fitted: Vec<f64> = curve.x.iter().map(|&x| g.value(x)).collect();
    let resid: Vec<f64> = fitted.iter().zip(&curve.y).map(|(f, y)| f - y).collect();
    write_curve(
        ctx,
        "fit_gaussian_residuals.csv",
        &[a.x_column.as_str(), "measured", "fitted", "residual"],
        &[&curve.x, &curve.y, &fitted, &resid],
    )?;
    ctx.out.plot_curves("fit_gaussian_residuals.csv", &a.x_column, &a.y_column, &[2, 3])?;
    let mut r = Report::default();
    r.value("center", g.center).value("fwhm", g.fwhm).value("amplitude", g.amplitude);
    if let Some([ec, ew, ea]) = g.errors {
        r.value("center_error", ec).value("fwhm_error", ew).value("amplitude_error", ea);
    }
    r.value("residual_rms", g.residual_rms);
    r.finish(&ctx.out, "fit_gaussian_report.txt")
}

fn fit_hom(ctx: &Context, a: &FitArgs) -> Result<()> {
    let h = &ctx.cfg.hom;
    let time = require(a.integration_time_s.or(h.integration_time_s), "integration time (--integration-time-s)")?;
    let scan = HomScan::read_csv(&a.input, time)?;
    let window = match a.baseline_window_ps.as_deref() {
        Some(&[near, far]) => (near, far),
        _ => match h.baseline_window_ps {
            Some(w) => (w[0], w[1]),
            None => {
                // the outer third of the scan on either side
                let d = &scan.delays_ps;
                let half = 0.5 * (d[d.len() - 1] - d[0]);
                (2.0 * half / 3.0, 2.0 * half)
            }
        },
    };
    let v = hom_visibility_from_scan(&scan, window)?;
    write_curve(ctx, "fit_hom_cross_sum.csv", &["delay_ps", "cross_sum"], &[&scan.delays_ps, &scan.cross_sum()])?;
    ctx.out.plot_curves("fit_hom_cross_sum.csv", "delay (ps)", "coincidence rate (1/s)", &[2])?;
    let mut r = Report::default();
    r.value("visibility", v.visibility)
        .value("visibility_uncertainty", v.uncertainty)
        .value("tau_min_ps", v.tau_min_ps)
        .value("minimum_rate", v.minimum_rate)
        .value("baseline_rate", v.baseline_rate)
        .value("dip_fwhm_ps", v.dip_fwhm_ps)
        .value("baseline_window_ps", format!("[{}, {}]", window.0, window.1));
    r.finish(&ctx.out, "fit_hom_report.txt")
}

/// Joint spectrum from a JSI file or the configured source, plus an optional
/// filtered copy.
fn spectrum(ctx: &Context, a: &SpectrumArgs) -> Result<(JointSpectrum, Option<JointSpectrum>)> {
    let c = &ctx.cfg;
    let js = match &a.input {
        Some(path) => JsiTable::read(path)?.to_spectrum()?,
        None => {
            let pump = config::pump(
                a.pump_nm.or(c.pump.center_nm),
                a.pump_fwhm_nm.or(c.pump.fwhm_nm),
                a.pump_shape.as_deref().or(c.pump.shape.as_deref()),
                c.pump.table.as_deref(),
            )?;
            let mut section = config::GridSection {
                signal_center_nm: c.grid.signal_center_nm,
                signal_half_span_nm: a.half_span_nm.or(c.grid.signal_half_span_nm),
                idler_center_nm: c.grid.idler_center_nm,
                idler_half_span_nm: a.half_span_nm.or(c.grid.idler_half_span_nm),
                points: a.grid_points.or(c.grid.points),
            };
            if a.flat && section.signal_half_span_nm.is_none() {
                section.signal_half_span_nm = Some(12.0 * pump.fwhm_nm);
            }
            let explicit = config::grid(&section, 2.0 * pump.center_nm)?;
            if a.flat {
                build_jsa_flat(&pump, &explicit.expect("flat spectra always get a grid"))?
            } else {
                let model = ctx.model()?;
                let t = ctx.temperature(&a.device);
                let wg = ctx.waveguide(&a.device)?;
                let grid = match explicit {
                    Some(g) => g,
                    None => SpectralGrid::auto(&model, &wg, &pump, t)?,
                };
                build_jsa(&model, &wg, &pump, &grid, t)?
            }
        }
    };
    let fs = a.signal_filter_nm.or(c.filters.signal_fwhm_nm);
    let fi = a.idler_filter_nm.or(c.filters.idler_fwhm_nm);
    let filtered = match (fs, fi) {
        (None, None) => None,
        (Some(ws), Some(wi)) => {
            let shape = config::filter_shape(a.filter_shape.as_deref().or(c.filters.shape.as_deref()))?;
            let (ms, mi) = marginals(&js)?;
            let sc = c.filters.signal_center_nm.unwrap_or_else(|| ms.x[ms.peak().0]);
            let ic = c.filters.idler_center_nm.unwrap_or_else(|| mi.x[mi.peak().0]);
            Some(apply_filter(&js, &config::filter(sc, ws, shape)?, &config::filter(ic, wi, shape)?)?)
        }
        _ => return Err(Error::Config("give both the signal and the idler filter width".into())),
    };
    Ok((js, filtered))
}

fn jsa(ctx: &Context, a: &JsaArgs) -> Result<()> {
    let (js, filtered) = spectrum(ctx, &a.spectrum)?;
    let mut r = Report::default();
    describe_spectrum(ctx, &js, "", &mut r)?;
    if let Some(f) = &filtered {
        describe_spectrum(ctx, f, "filtered_", &mut r)?;
    }
    r.finish(&ctx.out, "jsa_report.txt")
}

fn describe_spectrum(ctx: &Context, js: &JointSpectrum, prefix: &str, r: &mut Report) -> Result<()> {
    let jsi = format!("{prefix}jsi.csv");
    JsiTable::from_spectrum(js).write(ctx.out.path(&jsi))?;
    ctx.out.plot_matrix(&jsi)?;
    let (s, i) = marginals(js)?;
    for (name, m) in [("signal", &s), ("idler", &i)] {
        let file = format!("{prefix}marginal_{name}.csv");
        write_curve(ctx, &file, &["wavelength_nm", "intensity"], &[&m.x, &m.y])?;
        ctx.out.plot_curves(&file, "wavelength (nm)", "marginal intensity", &[2])?;
    }
    let sr = schmidt(js)?;
    r.value(&format!("{prefix}schmidt_number"), sr.schmidt_number)
        .value(&format!("{prefix}purity"), sr.purity)
        .value(&format!("{prefix}grid_points"), format!("{}x{}", js.grid.signal_nm.len(), js.grid.idler_nm.len()));
    for (name, m) in [("signal", &s), ("idler", &i)] {
        if let Some(w) = m.fwhm() {
            r.value(&format!("{prefix}{name}_fwhm_nm"), w);
        }
        if let Ok(g) = gaussian_fit(m) {
            r.value(&format!("{prefix}{name}_center_nm"), g.center)
                .value(&format!("{prefix}{name}_gaussian_fwhm_nm"), g.fwhm);
        }
    }
    if let (Some(ws), Some(wi)) = (s.fwhm(), i.fwhm()) {
        r.value(&format!("{prefix}marginal_ratio"), ws.max(wi) / ws.min(wi));
    }
    Ok(())
}

fn hom(ctx: &Context, a: &HomArgs) -> Result<()> {
    let h = &ctx.cfg.hom;
    let (js, filtered) = spectrum(ctx, &a.spectrum)?;
    let js = filtered.unwrap_or(js);
    let n = a.delay_points.or(h.points).unwrap_or(401);
    let explicit = match a.delay_range_ps.as_deref() {
        Some(&[f, t]) => Some((f, t)),
        _ => h.delay_range_ps.map(|r| (r[0], r[1])),
    };
    let mut range = explicit.unwrap_or((-DEFAULT_DELAY_HALF_SPAN_PS, DEFAULT_DELAY_HALF_SPAN_PS));
    let mut dip = dip_on(&js, range, n)?;
    if explicit.is_none() {
        // widen until the scan covers six dip widths on each side
        if let Some(w) = dip_width(&dip) {
            if 6.0 * w > range.1 {
                range = (-6.0 * w, 6.0 * w);
                dip = dip_on(&js, range, n)?;
            }
        }
    }
    let delays = dip.raw.x.clone();
    write_curve(ctx, "hom_dip.csv", &["delay_ps", "raw", "rescaled"], &[&delays, &dip.raw.y, &dip.rescaled.y])?;
    ctx.out.plot_curves("hom_dip.csv", "delay (ps)", "coincidence probability", &[2, 3])?;
    let mut r = Report::default();
    r.value("visibility_model", hom_visibility_model(&js)?);
    if let Some(w) = dip_width(&dip) {
        r.value("dip_fwhm_ps", w);
    }
    if a.simulate_scan {
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        let scan = HomScan::simulate(
            &dip.rescaled,
            a.baseline_rate.or(h.baseline_rate).unwrap_or(2.0e4),
            a.singles_rate.or(h.singles_rate).unwrap_or(1.0e5),
            a.integration_time_s.or(h.integration_time_s).unwrap_or(10.0),
            true,
            &mut rng,
        )?;
        scan.write_csv(ctx.out.path("hom_scan.csv"))?;
        r.value("simulated_scan_seed", ctx.seed)
            .value("simulated_integration_time_s", scan.integration_time_s);
    }
    r.finish(&ctx.out, "hom_report.txt")
}

fn dip_on(js: &JointSpectrum, (from, to): (f64, f64), n: usize) -> Result<HomDip> {
    if to.is_nan() || from.is_nan() || to <= from || n < 2 {
        return Err(Error::Config(format!("delay range [{from}, {to}] ps with {n} points is empty")));
    }
    let delays: Vec<f64> = (0..n).map(|k| from + (to - from) * k as f64 / (n - 1) as f64).collect();
    hom_dip(js, &delays)
}

/// FWHM of the dip depth `1 - 2C(τ)`, ps.
fn dip_width(dip: &HomDip) -> Option<f64> {
    let depth = SpectrumCurve::new(dip.rescaled.x.clone(), dip.rescaled.y.iter().map(|v| 1.0 - v).collect()).ok()?;
    depth.fwhm()
}

fn metrics(ctx: &Context, a: &MetricsArgs) -> Result<()> {
    let c = CountSummary::load(&a.input)?;
    if c.coincidences_exceed_singles() {
        eprintln!("cryoqpm: warning: coincidence rate exceeds a singles rate; check the input");
    }
    let mut r = Report::default();
    let k = klyshko(&c)?;
    r.value("klyshko", k.value).value("klyshko_uncertainty", k.uncertainty);
    if c.c_i1s.is_some() || c.c_i2s.is_some() || c.c_i1i2s.is_some() {
        let g = g2_heralded(&c)?;
        r.value("g2_heralded", g.value).value("g2_heralded_uncertainty", g.uncertainty);
    }
    if c.p_trans_mw.is_some() {
        let b = brightness(&c)?;
        r.value("brightness_per_s_mw", b.value).value("brightness_uncertainty", b.uncertainty);
    }
    r.finish(&ctx.out, "metrics_report.txt")
}

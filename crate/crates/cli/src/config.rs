//! Run configuration file. Command-line flags override file values, which
//! override built-in defaults. Relative paths in the file are resolved
//! against the file's directory.

use std::path::{Path, PathBuf};

use cryoqpm::jsa::{BandpassFilter, FilterShape, PumpEnvelope, SpectralGrid};
use cryoqpm::{Error, IndexProfile, Result, SpectrumCurve, WaveguideSpec};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub temperature_k: Option<f64>,
    #[serde(default)]
    pub waveguide: WaveguideSection,
    #[serde(default)]
    pub pump: PumpSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub filters: FilterSection,
    #[serde(default)]
    pub design: DesignSection,
    #[serde(default)]
    pub shg: ShgSection,
    #[serde(default)]
    pub hom: HomSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveguideSection {
    pub poling_period_um: Option<f64>,
    pub length_mm: Option<f64>,
    pub profile: Option<ProfileSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSection {
    Uniform,
    TwoSegment { first: f64, second: f64 },
    /// `[start fraction, δn]` pairs.
    Piecewise { segments: Vec<[f64; 2]> },
    Polynomial { coefficients: Vec<f64> },
}

impl ProfileSection {
    pub fn to_profile(&self) -> IndexProfile {
        match self {
            ProfileSection::Uniform => IndexProfile::Uniform,
            ProfileSection::TwoSegment { first, second } => IndexProfile::two_segment(*first, *second),
            ProfileSection::Piecewise { segments } => {
                IndexProfile::PiecewiseConstant(segments.iter().map(|s| (s[0], s[1])).collect())
            }
            ProfileSection::Polynomial { coefficients } => IndexProfile::Polynomial(coefficients.clone()),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSection {
    pub center_nm: Option<f64>,
    pub fwhm_nm: Option<f64>,
    /// `gaussian` or `sech2`.
    pub shape: Option<String>,
    /// CSV with `wavelength_nm, intensity`; replaces the analytic shape.
    pub table: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub signal_center_nm: Option<f64>,
    pub signal_half_span_nm: Option<f64>,
    pub idler_center_nm: Option<f64>,
    pub idler_half_span_nm: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSection {
    pub signal_center_nm: Option<f64>,
    pub signal_fwhm_nm: Option<f64>,
    pub idler_center_nm: Option<f64>,
    pub idler_fwhm_nm: Option<f64>,
    /// `gaussian` or `rectangular`.
    pub shape: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSection {
    pub target_nm: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShgSection {
    pub range_nm: Option<[f64; 2]>,
    pub points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomSection {
    pub delay_range_ps: Option<[f64; 2]>,
    pub points: Option<usize>,
    pub baseline_window_ps: Option<[f64; 2]>,
    pub integration_time_s: Option<f64>,
    pub baseline_rate: Option<f64>,
    pub singles_rate: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let mut cfg: Self =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut Option<PathBuf>| {
            if let Some(v) = p.as_mut() {
                if v.is_relative() {
                    *v = base.join(&*v);
                }
            }
        };
        resolve(&mut cfg.dataset);
        resolve(&mut cfg.out);
        resolve(&mut cfg.pump.table);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Unit and existence checks that do not depend on the command.
    fn validate(&self) -> Result<()> {
        for p in [&self.dataset, &self.pump.table].into_iter().flatten() {
            if !p.is_file() {
                return Err(Error::Config(format!("referenced file {} does not exist", p.display())));
            }
        }
        let positive = [
            ("waveguide.poling_period_um", self.waveguide.poling_period_um),
            ("waveguide.length_mm", self.waveguide.length_mm),
            ("pump.center_nm", self.pump.center_nm),
            ("pump.fwhm_nm", self.pump.fwhm_nm),
            ("filters.signal_fwhm_nm", self.filters.signal_fwhm_nm),
            ("filters.idler_fwhm_nm", self.filters.idler_fwhm_nm),
            ("design.target_nm", self.design.target_nm),
            ("hom.integration_time_s", self.hom.integration_time_s),
        ];
        for (name, v) in positive {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Config(format!("{name} = {v} must be positive")));
                }
            }
        }
        if let Some(t) = self.temperature_k {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("temperature_k = {t} must be non-negative")));
            }
        }
        Ok(())
    }
}

pub fn require<T>(value: Option<T>, what: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("{what} is required (flag or configuration file)")))
}

pub fn waveguide(
    period_um: Option<f64>,
    length_mm: Option<f64>,
    profile: Option<&ProfileSection>,
) -> Result<WaveguideSpec> {
    let period = require(period_um, "poling period (--period-um / waveguide.poling_period_um)")?;
    let length = require(length_mm, "device length (--length-mm / waveguide.length_mm)")?;
    let profile = profile.map(ProfileSection::to_profile).unwrap_or(IndexProfile::Uniform);
    WaveguideSpec::with_profile(period, length, profile)
}

pub fn pump(center_nm: Option<f64>, fwhm_nm: Option<f64>, shape: Option<&str>, table: Option<&Path>) -> Result<PumpEnvelope> {
    if let Some(path) = table {
        let curve = SpectrumCurve::read_csv(path, "wavelength_nm", "intensity", "sigma")?;
        return PumpEnvelope::tabulated(curve);
    }
    let center = require(center_nm, "pump center (--pump-nm / pump.center_nm)")?;
    let fwhm = require(fwhm_nm, "pump FWHM (--pump-fwhm-nm / pump.fwhm_nm)")?;
    match shape.unwrap_or("gaussian") {
        "gaussian" => PumpEnvelope::gaussian(center, fwhm),
        "sech2" => PumpEnvelope::sech2(center, fwhm),
        other => Err(Error::Config(format!("unknown pump shape '{other}' (gaussian, sech2)"))),
    }
}

pub fn filter_shape(name: Option<&str>) -> Result<FilterShape> {
    match name.unwrap_or("gaussian") {
        "gaussian" => Ok(FilterShape::Gaussian),
        "rectangular" => Ok(FilterShape::Rectangular),
        other => Err(Error::Config(format!("unknown filter shape '{other}' (gaussian, rectangular)"))),
    }
}

pub fn filter(center_nm: f64, fwhm_nm: f64, shape: FilterShape) -> Result<BandpassFilter> {
    BandpassFilter::new(center_nm, fwhm_nm, shape)
}

/// Explicit grid when a span is given, otherwise `None` (automatic grid).
pub fn grid(section: &GridSection, default_center_nm: f64) -> Result<Option<SpectralGrid>> {
    let (Some(hs), points) = (section.signal_half_span_nm, section.points.unwrap_or(201)) else {
        return Ok(None);
    };
    let hi = section.idler_half_span_nm.unwrap_or(hs);
    SpectralGrid::centered(
        section.signal_center_nm.unwrap_or(default_center_nm),
        hs,
        points,
        section.idler_center_nm.unwrap_or(default_center_nm),
        hi,
        points,
    )
    .map(Some)
}

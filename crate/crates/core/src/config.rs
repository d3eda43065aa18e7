//! JSON run configuration. Every field has a default; the defaults describe
//! a centimeter-scale cavity with a picosecond excitation ramp.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coupling::Tolerance;
use crate::direct::{DriveSource, KModel, Reduction};
use crate::drive::{fourier_numeric, fourier_ramp, DriveProfile, FourierSeries};
use crate::error::{DceError, Result};
use crate::msa::tuned_period;
use crate::spectrum::{CavityConfig, ModeCut, ModeIndex, ModeSpectrum};
use crate::units::{meters_to_seconds, seconds_to_meters};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CavityBlock {
    pub lx: f64,
    pub ly: f64,
    pub lz: f64,
    pub v0: f64,
    pub vmax: f64,
}

impl Default for CavityBlock {
    fn default() -> Self {
        CavityBlock {
            lx: 1e-2,
            ly: 1e-1,
            lz: 1e-1,
            v0: 1e12,
            vmax: 1e16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    LinearRamp,
    /// Two-column CSV `t_seconds,f`, relative paths resolved against the
    /// config file.
    Sampled {
        path: PathBuf,
    },
}

/// Choose the period so that harmonic `harmonic` hits `2ω̃` of `mode`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tune {
    pub harmonic: u32,
    pub mode: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriveBlock {
    pub shape: ShapeSpec,
    pub tau_e_s: f64,
    /// Explicit period; exclusive with `tune`.
    pub period_s: Option<f64>,
    pub tune: Option<Tune>,
    pub j_max: u32,
    /// Keep only this harmonic of the series.
    pub single_harmonic: Option<u32>,
}

impl Default for DriveBlock {
    fn default() -> Self {
        DriveBlock {
            shape: ShapeSpec::LinearRamp,
            tau_e_s: 1e-12,
            period_s: None,
            tune: Some(Tune {
                harmonic: 6,
                mode: "1,1,1".into(),
            }),
            j_max: 10,
            single_harmonic: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Msa,
    Direct,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionBlock {
    pub method: Method,
    /// Observed and seeded mode.
    pub target: String,
    /// End of the slow-time grid `τ = ε t` of the target mode.
    pub tau_end: f64,
    pub samples: usize,
    /// When the target is parametrically resonant, extend the grid to
    /// `κτ = fit_kappa_tau` so the rate fit sees the exponential regime.
    /// 0 disables.
    pub fit_kappa_tau: f64,
    /// Absolute resonance tolerance in m⁻¹; `null` means `ε ω̃ / 10`.
    pub tolerance: Option<f64>,
    /// Direct integration step in seconds; `null` for the default.
    pub dt_s: Option<f64>,
    pub reduction: Reduction,
    pub k_model: KModel,
    /// Drive the direct integrator with the C¹-smoothed ramp (kink width
    /// `τe/10`) instead of the truncated Fourier series.
    pub smoothing: bool,
    pub step_audit: bool,
    pub max_steps: u64,
}

impl Default for EvolutionBlock {
    fn default() -> Self {
        EvolutionBlock {
            method: Method::Msa,
            target: "1,1,1".into(),
            tau_end: 3.0,
            samples: 61,
            fit_kappa_tau: 10.0,
            tolerance: None,
            dt_s: None,
            reduction: Reduction::Full,
            k_model: KModel::Linear,
            smoothing: false,
            step_audit: false,
            max_steps: crate::direct::DEFAULT_MAX_STEPS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    TauES,
    PeriodS,
    V0,
    Vmax,
    Harmonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub param: SweepParam,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default)]
    pub scale: Scale,
}

impl SweepBlock {
    pub fn points(&self) -> Result<Vec<f64>> {
        if let Some(v) = &self.values {
            if v.is_empty() {
                return Err(DceError::Config("sweep.values is empty".into()));
            }
            return Ok(v.clone());
        }
        let (start, stop, steps) = match (self.start, self.stop, self.steps) {
            (Some(a), Some(b), Some(n)) if n >= 1 => (a, b, n),
            _ => {
                return Err(DceError::Config(
                    "sweep needs either values or start, stop and steps >= 1".into(),
                ))
            }
        };
        if steps == 1 {
            return Ok(vec![start]);
        }
        let frac = |i: usize| i as f64 / (steps - 1) as f64;
        match self.scale {
            Scale::Linear => Ok((0..steps).map(|i| start + (stop - start) * frac(i)).collect()),
            Scale::Log => {
                if !(start > 0.0 && stop > 0.0) {
                    return Err(DceError::Config("log sweep needs positive start and stop".into()));
                }
                let (a, b) = (start.ln(), stop.ln());
                Ok((0..steps).map(|i| (a + (b - a) * frac(i)).exp()).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub dir: PathBuf,
    pub prefix: String,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock {
            dir: PathBuf::from("out"),
            prefix: "run".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub cavity: CavityBlock,
    pub modes: ModeCut,
    pub drive: DriveBlock,
    pub evolution: EvolutionBlock,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    pub output: OutputBlock,
}

/// 1-based line of the first occurrence of `"key"` in `text`.
fn line_of(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

impl RunConfig {
    /// Parse and validate. Errors name the source and line.
    pub fn from_json(text: &str, source: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| DceError::Config(format!("{source}:{}:{}: {e}", e.line(), e.column())))?;
        cfg.validate().map_err(|(key, msg)| match line_of(text, key) {
            Some(line) => DceError::Config(format!("{source}:{line}: {msg}")),
            None => DceError::Config(format!("{source}: {msg}")),
        })?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| DceError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text, &path.display().to_string())?;
        if let ShapeSpec::Sampled { path: p } = &mut cfg.drive.shape {
            if p.is_relative() {
                if let Some(parent) = path.parent() {
                    *p = parent.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// Field-level checks; the error carries the offending key.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        let c = &self.cavity;
        for (key, v) in [("lx", c.lx), ("ly", c.ly), ("lz", c.lz), ("v0", c.v0), ("vmax", c.vmax)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err((key, format!("cavity.{key} must be positive and finite, got {v}")));
            }
        }
        if c.vmax < c.v0 {
            return Err((
                "vmax",
                format!("cavity.vmax ({}) must be >= cavity.v0 ({})", c.vmax, c.v0),
            ));
        }
        if self.modes.nx == 0 || self.modes.ny == 0 || self.modes.nz == 0 {
            return Err(("modes", "modes.nx, ny and nz must be >= 1".into()));
        }
        let d = &self.drive;
        if matches!(d.shape, ShapeSpec::LinearRamp) && !(d.tau_e_s > 0.0 && d.tau_e_s.is_finite()) {
            return Err(("tau_e_s", format!("drive.tau_e_s must be positive, got {}", d.tau_e_s)));
        }
        match (&d.period_s, &d.tune) {
            (Some(_), Some(_)) => return Err(("period_s", "drive.period_s and drive.tune are exclusive".into())),
            (None, None) if matches!(d.shape, ShapeSpec::LinearRamp) => {
                return Err(("drive", "drive needs period_s or tune".into()))
            }
            (Some(t), None) if matches!(d.shape, ShapeSpec::LinearRamp) && !(*t > d.tau_e_s && t.is_finite()) => {
                return Err((
                    "period_s",
                    format!("drive.period_s ({t}) must exceed tau_e_s ({})", d.tau_e_s),
                ));
            }
            _ => {}
        }
        if let Some(t) = &d.tune {
            if t.harmonic == 0 {
                return Err(("harmonic", "drive.tune.harmonic must be >= 1".into()));
            }
            if t.mode.parse::<ModeIndex>().is_err() {
                return Err(("mode", format!("drive.tune.mode '{}' is not a mode triple", t.mode)));
            }
        }
        if d.j_max == 0 {
            return Err(("j_max", "drive.j_max must be >= 1".into()));
        }
        if let Some(j) = d.single_harmonic {
            if j == 0 || j > d.j_max {
                return Err((
                    "single_harmonic",
                    format!("drive.single_harmonic must be in 1..={}", d.j_max),
                ));
            }
        }
        let e = &self.evolution;
        if e.target.parse::<ModeIndex>().is_err() {
            return Err((
                "target",
                format!("evolution.target '{}' is not a mode triple", e.target),
            ));
        }
        if !(e.tau_end >= 0.0 && e.tau_end.is_finite()) {
            return Err(("tau_end", format!("evolution.tau_end must be >= 0, got {}", e.tau_end)));
        }
        if e.samples == 0 {
            return Err(("samples", "evolution.samples must be >= 1".into()));
        }
        if !(e.fit_kappa_tau >= 0.0 && e.fit_kappa_tau <= crate::msa::COSH_GUARD) {
            return Err(("fit_kappa_tau", "evolution.fit_kappa_tau must be in [0, 700]".into()));
        }
        if let Some(t) = e.tolerance {
            if !(t >= 0.0 && t.is_finite()) {
                return Err((
                    "tolerance",
                    format!("evolution.tolerance must be finite and >= 0, got {t}"),
                ));
            }
        }
        if let Some(dt) = e.dt_s {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(("dt_s", format!("evolution.dt_s must be positive, got {dt}")));
            }
        }
        if let Some(s) = &self.sweep {
            s.points().map_err(|e| ("sweep", e.to_string()))?;
        }
        if self.output.prefix.is_empty() {
            return Err(("prefix", "output.prefix must not be empty".into()));
        }
        Ok(())
    }

    pub fn cavity(&self) -> Result<CavityConfig> {
        let c = &self.cavity;
        CavityConfig::new(c.lx, c.ly, c.lz, c.v0, c.vmax)
    }

    pub fn tolerance(&self) -> Tolerance {
        match self.evolution.tolerance {
            Some(t) => Tolerance::Absolute(t),
            None => Tolerance::Default,
        }
    }

    pub fn target(&self) -> Result<ModeIndex> {
        self.evolution.target.parse()
    }
}

/// Everything derived from a configuration before evolution.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub spectrum: ModeSpectrum,
    pub profile: DriveProfile,
    pub series: FourierSeries,
    /// Natural units.
    pub period: f64,
    pub tau_e: f64,
}

impl Prepared {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let cavity = cfg.cavity()?;
        let d = &cfg.drive;
        let (profile, mean) = match &d.shape {
            ShapeSpec::LinearRamp => {
                let tau_e = seconds_to_meters(d.tau_e_s);
                let period = match (&d.tune, d.period_s) {
                    (Some(t), _) => {
                        let mode: ModeIndex = t.mode.parse()?;
                        let base = ModeSpectrum::build(&cavity, 0.5, cfg.modes)?;
                        tuned_period(base.mode(mode)?, t.harmonic)
                    }
                    (None, Some(p)) => seconds_to_meters(p),
                    (None, None) => return Err(DceError::Config("drive needs period_s or tune".into())),
                };
                (DriveProfile::linear_ramp(period, tau_e)?, 0.5)
            }
            ShapeSpec::Sampled { path } => {
                let p = DriveProfile::from_csv_path(path)?;
                let mean = fourier_numeric(&p, 1)?.f0;
                (p, mean)
            }
        };
        let spectrum = ModeSpectrum::build(&cavity, mean, cfg.modes)?;
        let mut series = match &d.shape {
            ShapeSpec::LinearRamp => fourier_ramp(profile.period, profile.tau_e, d.j_max)?,
            ShapeSpec::Sampled { .. } => {
                let mut s = fourier_numeric(&profile, d.j_max)?;
                if let Some(t) = &d.tune {
                    let mode: ModeIndex = t.mode.parse()?;
                    let w = 2.0 * spectrum.mode(mode)?.omega_tilde / t.harmonic as f64;
                    s = s.retuned(w);
                }
                s
            }
        };
        if let Some(j) = d.single_harmonic {
            series = series.single(j)?;
        }
        let period = series.period();
        Ok(Prepared {
            spectrum,
            tau_e: profile.tau_e * period / profile.period,
            profile,
            series,
            period,
        })
    }

    pub fn period_seconds(&self) -> f64 {
        meters_to_seconds(self.period)
    }

    pub fn drive_source(&self, cfg: &RunConfig) -> Result<DriveSource> {
        if cfg.evolution.smoothing {
            if !matches!(cfg.drive.shape, ShapeSpec::LinearRamp) {
                return Err(DceError::Config(
                    "evolution.smoothing applies to the linear ramp only".into(),
                ));
            }
            Ok(DriveSource::SmoothedRamp {
                profile: self.profile.clone(),
                width: self.profile.tau_e / 10.0,
            })
        } else {
            Ok(DriveSource::Fourier(self.series.clone()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        let back = RunConfig::from_json(&cfg.to_json(), "mem").unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(RunConfig::from_json("{}", "mem").unwrap(), RunConfig::default());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "{\n  \"drive\": {\n    \"tau_e_s\": -1.0\n  }\n}";
        let err = RunConfig::from_json(text, "c.json").unwrap_err().to_string();
        assert!(err.contains("c.json:3:"), "{err}");
        let text = "{\n  \"cavity\": {\n    \"lx\": \"wide\"\n  }\n}";
        let err = RunConfig::from_json(text, "c.json").unwrap_err().to_string();
        assert!(err.contains("c.json:3:"), "{err}");
        let err = RunConfig::from_json("{\"bogus\": 1}", "c.json").unwrap_err();
        assert!(err.is_config());
    }

    #[test]
    fn tuned_default_hits_parametric_resonance() {
        let cfg = RunConfig::default();
        let p = Prepared::new(&cfg).unwrap();
        let m = p.spectrum.mode(ModeIndex { mx: 1, my: 1, mz: 1 }).unwrap();
        let w6 = 6.0 * p.series.omega;
        assert!((w6 - 2.0 * m.omega_tilde).abs() < 1e-9 * w6);
        let ghz = crate::units::omega_to_ghz(m.omega_tilde);
        assert!(ghz > 1.0 && ghz < 100.0, "{ghz}");
    }

    #[test]
    fn sweep_points() {
        let s = SweepBlock {
            param: SweepParam::V0,
            values: None,
            start: Some(1e10),
            stop: Some(1e13),
            steps: Some(4),
            scale: Scale::Log,
        };
        let p = s.points().unwrap();
        assert_eq!(p.len(), 4);
        assert!((p[1] / 1e11 - 1.0).abs() < 1e-12);
    }
}

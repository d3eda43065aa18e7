//! Batch front end: `spectrum`, `resonances`, `evolve` and `sweep`.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::config::{Method, Prepared, RunConfig, ShapeSpec, SweepParam};
use crate::coupling::{coupling_coeffs, scan_resonances, Tolerance};
use crate::direct::{extract_slow, integrate_full, phi_mode_check, step_audit, DirectOptions, FastTrajectory};
use crate::error::{DceError, Result};
use crate::msa::{kappa, msa_general_record, uniform_grid};
use crate::photons::{fmt_sci, photon_number, PhotonRecord};
use crate::spectrum::ModeIndex;
use crate::units::{meters_to_seconds, omega_to_ghz, rate_to_hz, seconds_to_meters};

/// Share of sweep points that must succeed for exit code 0.
pub const SWEEP_SUCCESS_FRACTION: f64 = 0.9;

#[derive(Debug, Parser)]
#[command(
    name = "cavity-dce",
    version,
    about = "Resonant photon creation in a cavity with a driven conducting film"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration; defaults apply to omitted fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps and table construction.
    #[arg(long, global = true, env = "CAVITY_DCE_WORKERS")]
    pub workers: Option<usize>,
    /// Observed and seeded mode as "mx,my,mz", overriding `evolution.target`.
    #[arg(long, global = true)]
    pub seed_mode: Option<String>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Mode table at V0.
    Spectrum,
    /// Parametric and intermode resonance conditions met by the drive.
    Resonances {
        /// Absolute frequency tolerance in m⁻¹.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Photon numbers for the target mode's block.
    Evolve,
    /// One summary row per point of the configured sweep.
    Sweep,
}

/// Process entry point; returns the exit code.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                2
            } else {
                3
            }
        }
    }
}

/// Load the configuration and apply command-line overrides.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_path(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    if let Some(seed) = &cli.seed_mode {
        seed.parse::<ModeIndex>()
            .map_err(|e| DceError::Config(format!("--seed-mode: {e}")))?;
        cfg.evolution.target = seed.clone();
    }
    if let Command::Resonances { tol: Some(t) } = cli.command {
        Tolerance::Absolute(t).validate()?;
        cfg.evolution.tolerance = Some(t);
    }
    cfg.validate().map_err(|(_, msg)| DceError::Config(msg))?;
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = resolve_config(cli)?;
    if cli.workers == Some(0) {
        return Err(DceError::Config("--workers must be >= 1".into()));
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| DceError::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| execute(&cfg, &cli.command)).map(|_| ())
}

fn out_path(cfg: &RunConfig, suffix: &str) -> PathBuf {
    cfg.output.dir.join(format!("{}_{suffix}", cfg.output.prefix))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Run one subcommand, returning the files written.
pub fn execute(cfg: &RunConfig, command: &Command) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&cfg.output.dir)?;
    let effective = out_path(cfg, "effective_config.json");
    std::fs::write(&effective, cfg.to_json())?;
    let mut written = vec![effective];
    match command {
        Command::Spectrum => written.extend(cmd_spectrum(cfg)?),
        Command::Resonances { .. } => written.extend(cmd_resonances(cfg)?),
        Command::Evolve => written.extend(cmd_evolve(cfg)?),
        Command::Sweep => written.extend(cmd_sweep(cfg)?),
    }
    Ok(written)
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let prep = Prepared::new(cfg)?;
    let spec = &prep.spectrum;
    let path = out_path(cfg, "spectrum.csv");
    let mut wtr = csv::Writer::from_writer(create(&path)?);
    wtr.write_record([
        "mx",
        "my",
        "mz",
        "k0",
        "epsilon",
        "omega_bar",
        "omega_tilde",
        "freq_ghz",
        "clamped",
    ])?;
    for m in &spec.psi {
        wtr.write_record([
            m.index.mx.to_string(),
            m.index.my.to_string(),
            m.index.mz.to_string(),
            fmt_sci(m.k0),
            fmt_sci(m.epsilon),
            fmt_sci(m.omega_bar),
            fmt_sci(m.omega_tilde),
            fmt_sci(omega_to_ghz(m.omega_tilde)),
            m.clamped.to_string(),
        ])?;
    }
    wtr.flush()?;

    let phi_path = out_path(cfg, "phi_modes.csv");
    let mut wtr = csv::Writer::from_writer(create(&phi_path)?);
    wtr.write_record([
        "mx",
        "my",
        "mz",
        "omega",
        "freq_ghz",
        "film_value",
        "max_overlap",
        "inert",
    ])?;
    for r in phi_mode_check(spec, 1e-10)? {
        wtr.write_record([
            r.mode.mx.to_string(),
            r.mode.my.to_string(),
            r.mode.mz.to_string(),
            fmt_sci(r.omega),
            fmt_sci(omega_to_ghz(r.omega)),
            fmt_sci(r.film_value),
            fmt_sci(r.max_overlap),
            r.inert.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(vec![path, phi_path])
}

pub fn cmd_resonances(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let prep = Prepared::new(cfg)?;
    let report = scan_resonances(&prep.spectrum, prep.series.omega, prep.series.j_max(), cfg.tolerance())?;
    let path = out_path(cfg, "resonances.csv");
    report.write_csv(create(&path)?)?;
    Ok(vec![path])
}

/// Outcome of evolving one configuration.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub prepared: Prepared,
    pub target: ModeIndex,
    /// Harmonic on the target's parametric resonance, if any.
    pub resonant_harmonic: Option<u32>,
    pub msa: Option<PhotonRecord>,
    pub direct: Option<(PhotonRecord, FastTrajectory)>,
    pub audit: Option<f64>,
}

impl Evolution {
    /// Record used for summaries: direct when it ran alone, else MSA.
    pub fn primary(&self) -> &PhotonRecord {
        match (&self.msa, &self.direct) {
            (Some(m), _) => m,
            (None, Some((d, _))) => d,
            (None, None) => unreachable!("evolution runs at least one method"),
        }
    }
}

/// Slow-time grid for the target, extended to `κτ = fit_kappa_tau` when
/// the target is parametrically resonant.
fn slow_grid(cfg: &RunConfig, prep: &Prepared, target: ModeIndex, j: Option<u32>) -> Result<Vec<f64>> {
    let e = &cfg.evolution;
    let mut tau_end = e.tau_end;
    if let (Some(j), true) = (j, e.fit_kappa_tau > 0.0 && e.tau_end > 0.0) {
        let mode = prep.spectrum.mode(target)?;
        if let Some(h) = prep.series.harmonic(j) {
            let k = kappa(mode, h.amplitude, j as f64 * prep.series.omega);
            if k > 0.0 {
                tau_end = tau_end.max(e.fit_kappa_tau / k);
            }
        }
    }
    Ok(uniform_grid(tau_end, e.samples))
}

pub fn evolve(cfg: &RunConfig) -> Result<Evolution> {
    let prep = Prepared::new(cfg)?;
    let target = cfg.target()?;
    let tol = cfg.tolerance();
    let spec = &prep.spectrum;
    let mode = *spec.mode(target)?;
    if mode.epsilon <= 0.0 {
        return Err(DceError::Precondition(format!(
            "mode {target} has eps = 0 (Vmax = V0); there is no drive to evolve under"
        )));
    }
    let report = scan_resonances(spec, prep.series.omega, prep.series.j_max(), tol)?;
    let hit = report.parametric(target).next().cloned();
    match &hit {
        None => log::warn!("mode {target} is not parametrically resonant with any retained harmonic"),
        Some(h) if h.decoupled == Some(false) => {
            log::warn!("mode {target} is resonant at j={} but couples to other modes", h.j)
        }
        _ => {}
    }
    let j = hit.as_ref().map(|h| h.j);
    let grid = slow_grid(cfg, &prep, target, j)?;
    let table = coupling_coeffs(spec)?;

    let method = cfg.evolution.method;
    let msa = if matches!(method, Method::Msa | Method::Both) {
        Some(msa_general_record(spec, &table, &prep.series, &grid, tol, Some(mode.epsilon))?.1)
    } else {
        None
    };

    let mut audit = None;
    let direct = if matches!(method, Method::Direct | Method::Both) {
        let times: Vec<f64> = grid.iter().map(|t| t / mode.epsilon).collect();
        let source = prep.drive_source(cfg)?;
        let opts = DirectOptions {
            reduction: cfg.evolution.reduction,
            k_model: cfg.evolution.k_model,
            dt: cfg.evolution.dt_s.map(seconds_to_meters),
            max_steps: cfg.evolution.max_steps,
        };
        if cfg.evolution.step_audit {
            audit = Some(step_audit(spec, &table, &source, target, &times, opts)?);
        }
        let fast = integrate_full(spec, &table, &source, target, &times, opts)?;
        let drift = fast.wronskian_drift();
        if drift > 1e-2 {
            log::warn!("Wronskian drift {drift:.3e} over the run");
        }
        let slow = extract_slow(&fast, spec, mode.epsilon)?;
        let eps: Vec<f64> = slow
            .modes
            .iter()
            .map(|m| spec.mode(*m).map(|p| p.epsilon))
            .collect::<Result<_>>()?;
        Some((photon_number(&slow, &eps), fast))
    } else {
        None
    };

    Ok(Evolution {
        prepared: prep,
        target,
        resonant_harmonic: j,
        msa,
        direct,
        audit,
    })
}

pub fn cmd_evolve(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let ev = evolve(cfg)?;
    let path = out_path(cfg, "photons.csv");
    let mut written = vec![path.clone()];
    match (&ev.msa, &ev.direct) {
        (Some(m), Some((d, _))) => m.write_csv(create(&path)?, Some(d))?,
        (Some(m), None) => m.write_csv(create(&path)?, None)?,
        (None, Some((d, _))) => d.write_csv(create(&path)?, None)?,
        (None, None) => unreachable!("evolution runs at least one method"),
    }
    if let Some((_, fast)) = &ev.direct {
        let tpath = out_path(cfg, "trajectory.csv");
        fast.write_csv(create(&tpath)?, &ev.prepared.spectrum)?;
        written.push(tpath);
    }
    Ok(written)
}

/// Sweep-point summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub target: ModeIndex,
    pub epsilon: f64,
    pub period_s: f64,
    pub tau_e_s: f64,
    pub harmonic: Option<u32>,
    pub omega_j_tau_e: Option<f64>,
    pub f_j: Option<f64>,
    /// Per second.
    pub r_cond: Option<f64>,
    /// Per second; 0 unless growing.
    pub fitted_rate: f64,
    /// `ε/T` per second.
    pub eps_over_t: f64,
    pub status: String,
}

/// Configuration for one sweep point.
pub fn apply_sweep_value(cfg: &RunConfig, param: SweepParam, value: f64) -> Result<RunConfig> {
    let mut c = cfg.clone();
    c.sweep = None;
    match param {
        SweepParam::TauES => c.drive.tau_e_s = value,
        SweepParam::PeriodS => {
            c.drive.period_s = Some(value);
            c.drive.tune = None;
        }
        SweepParam::V0 => c.cavity.v0 = value,
        SweepParam::Vmax => c.cavity.vmax = value,
        SweepParam::Harmonic => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(DceError::Config(format!(
                    "harmonic sweep value {value} is not a positive integer"
                )));
            }
            match c.drive.tune.as_mut() {
                Some(t) => t.harmonic = value as u32,
                None => return Err(DceError::Config("harmonic sweep needs drive.tune".into())),
            }
            c.drive.j_max = c.drive.j_max.max(value as u32);
        }
    }
    c.validate().map_err(|(_, msg)| DceError::Config(msg))?;
    Ok(c)
}

pub fn sweep_point(cfg: &RunConfig, param: SweepParam, value: f64) -> Result<SweepRow> {
    let c = apply_sweep_value(cfg, param, value)?;
    let ev = evolve(&c)?;
    let prep = &ev.prepared;
    let mode = prep.spectrum.mode(ev.target)?;
    let rec = ev.primary();
    let harmonic = ev.resonant_harmonic;
    let h = harmonic.and_then(|j| prep.series.harmonic(j));
    let omega_j = harmonic.map(|j| j as f64 * prep.series.omega);
    let fit = rec.fit(ev.target);
    let ramp = matches!(c.drive.shape, ShapeSpec::LinearRamp);
    Ok(SweepRow {
        value,
        target: ev.target,
        epsilon: mode.epsilon,
        period_s: prep.period_seconds(),
        tau_e_s: meters_to_seconds(prep.tau_e),
        harmonic,
        omega_j_tau_e: omega_j.filter(|_| ramp).map(|w| w * prep.tau_e),
        f_j: h.map(|h| h.amplitude),
        r_cond: rec
            .mode_position(ev.target)
            .and_then(|i| rec.predicted[i])
            .map(rate_to_hz),
        fitted_rate: rate_to_hz(rec.fitted_rate(ev.target)),
        eps_over_t: rate_to_hz(mode.epsilon / prep.period),
        status: fit.map(|f| f.label()).unwrap_or("refused").to_string(),
    })
}

/// Evaluate every sweep point in parallel; results keep input order.
pub fn run_sweep(cfg: &RunConfig) -> Result<Vec<(f64, Result<SweepRow>)>> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| DceError::Config("sweep subcommand needs a sweep block".into()))?;
    let points = sweep.points()?;
    Ok(points
        .par_iter()
        .map(|&v| (v, sweep_point(cfg, sweep.param, v)))
        .collect())
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let results = run_sweep(cfg)?;
    let path = out_path(cfg, "sweep.csv");
    let mut wtr = csv::Writer::from_writer(create(&path)?);
    wtr.write_record([
        "value",
        "mx",
        "my",
        "mz",
        "epsilon",
        "period_s",
        "tau_e_s",
        "harmonic",
        "omega_j_tau_e",
        "f_j",
        "r_cond",
        "fitted_rate",
        "eps_over_t",
        "status",
        "error",
    ])?;
    let opt = |v: Option<f64>| v.map(fmt_sci).unwrap_or_default();
    let mut ok = 0usize;
    for (value, r) in &results {
        match r {
            Ok(row) => {
                ok += 1;
                wtr.write_record([
                    fmt_sci(*value),
                    row.target.mx.to_string(),
                    row.target.my.to_string(),
                    row.target.mz.to_string(),
                    fmt_sci(row.epsilon),
                    fmt_sci(row.period_s),
                    fmt_sci(row.tau_e_s),
                    row.harmonic.map(|j| j.to_string()).unwrap_or_default(),
                    opt(row.omega_j_tau_e),
                    opt(row.f_j),
                    opt(row.r_cond),
                    fmt_sci(row.fitted_rate),
                    fmt_sci(row.eps_over_t),
                    row.status.clone(),
                    String::new(),
                ])?;
            }
            Err(e) => {
                let mut rec = vec![fmt_sci(*value)];
                rec.extend(std::iter::repeat_n(String::new(), 12));
                rec.push("error".into());
                rec.push(e.to_string());
                wtr.write_record(&rec)?;
            }
        }
    }
    wtr.flush()?;
    let total = results.len();
    if (ok as f64) < SWEEP_SUCCESS_FRACTION * total as f64 {
        return Err(DceError::Precondition(format!(
            "sweep: only {ok} of {total} points succeeded (see {})",
            path.display()
        )));
    }
    Ok(vec![path])
}

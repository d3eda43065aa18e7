//! Real-time integration of the coupled mode equations
//!
//! `P̈_n + ω_n(t)² P_n = −Σ_m [(2Ṗ_m k̇_m + P_m k̈_m) gA_mn + P_m k̇_m² gB_mn]`
//!
//! and of their first-order-in-ε reduction. This is the independent check on
//! every slow-flow prediction.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::coupling::{inner_product, longitudinal, psi_norm, CouplingTable, FieldKind};
use crate::drive::{DriveProfile, FourierSeries};
use crate::error::{DceError, Result};
use crate::msa::{AmplitudeState, AmplitudeTrajectory};
use crate::ode::Rk4;
use crate::photons::fmt_sci;
use crate::spectrum::{d2k_dv2, dk_dv, solve_k, ModeIndex, ModeSpectrum, PsiMode};
use crate::units::meters_to_seconds;

/// Steps per period of the fastest retained frequency.
pub const STEPS_PER_PERIOD: f64 = 40.0;
pub const DEFAULT_MAX_STEPS: u64 = 50_000_000;
/// Largest relative change in `N` tolerated when `dt` is halved.
pub const AUDIT_LIMIT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    /// Time-dependent `ω_n(t)`, `k̇`, `k̈` and the `gB` term.
    Full,
    /// `ω̃_n` plus terms linear in `ε`.
    FirstOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KModel {
    /// `k0(1 + ε f)`.
    Linear,
    /// Root of the eigenvalue equation at `V(t)` each evaluation.
    Exact,
}

/// Source of `(f, ḟ, f̈)`.
#[derive(Debug, Clone)]
pub enum DriveSource {
    Fourier(FourierSeries),
    /// Linear ramp with quadratic blends of the given width at the kinks.
    SmoothedRamp {
        profile: DriveProfile,
        width: f64,
    },
}

impl DriveSource {
    pub fn eval(&self, t: f64) -> Result<(f64, f64, f64)> {
        match self {
            DriveSource::Fourier(s) => Ok(s.eval_with_derivatives(t)),
            DriveSource::SmoothedRamp { profile, width } => profile.eval_smoothed(t, *width),
        }
    }

    /// Highest angular frequency present in the drive, for step selection.
    pub fn max_frequency(&self) -> f64 {
        match self {
            DriveSource::Fourier(s) => s.j_max() as f64 * s.omega,
            DriveSource::SmoothedRamp { width, .. } => 2.0 * PI / width,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectOptions {
    pub reduction: Reduction,
    pub k_model: KModel,
    /// Fixed step; default `2π/(40·max(ω̃_max, drive frequency))`.
    pub dt: Option<f64>,
    pub max_steps: u64,
}

impl Default for DirectOptions {
    fn default() -> Self {
        DirectOptions {
            reduction: Reduction::Full,
            k_model: KModel::Linear,
            dt: None,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

/// `P` and `Ṗ` for one transverse block, stored `[mode * seeds + seed]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FastTrajectory {
    pub modes: Vec<ModeIndex>,
    pub t: Vec<f64>,
    pub p: Vec<Vec<Complex64>>,
    pub dp: Vec<Vec<Complex64>>,
    /// Per sample and seed, `i Σ_n N_n(k_n)(P_n* Ṗ_n − P_n Ṗ_n*)`.
    pub wronskian: Vec<Vec<f64>>,
    pub dt: f64,
    pub steps: u64,
}

impl FastTrajectory {
    /// Largest `|W(t)/W(0) − 1|` over samples and seeds.
    pub fn wronskian_drift(&self) -> f64 {
        let w0 = &self.wronskian[0];
        self.wronskian
            .iter()
            .flat_map(|w| w.iter().zip(w0).map(|(a, b)| (a / b - 1.0).abs()))
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, w: W, spectrum: &ModeSpectrum) -> Result<()> {
        let slow = extract_slow(self, spectrum, 1.0)?;
        let ns = self.modes.len();
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["t_seconds", "mx", "my", "mz", "re_p", "im_p", "re_dp", "im_dp", "N"])?;
        for (i, &t) in self.t.iter().enumerate() {
            for (n, mode) in self.modes.iter().enumerate() {
                let pos = spectrum.mode(*mode)?;
                let nval: f64 = (0..ns)
                    .map(|s| 2.0 * pos.omega_bar * slow.states[i].a[n * ns + s].norm_sqr())
                    .sum();
                // rows carry the self-seeded component; N sums all seeds
                let p = self.p[i][n * ns + n];
                let dp = self.dp[i][n * ns + n];
                wtr.write_record([
                    fmt_sci(meters_to_seconds(t)),
                    mode.mx.to_string(),
                    mode.my.to_string(),
                    mode.mz.to_string(),
                    fmt_sci(p.re),
                    fmt_sci(p.im),
                    fmt_sci(dp.re),
                    fmt_sci(dp.im),
                    fmt_sci(nval),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

struct BlockModel<'a> {
    modes: Vec<&'a PsiMode>,
    g_a: Vec<Vec<f64>>,
    g_b: Vec<Vec<f64>>,
    lx: f64,
    v0: f64,
    dv: f64,
    opts: DirectOptions,
}

/// Per-mode `(ω², k̇, k̈, k)` at one instant.
struct Coeffs {
    omega_sq: Vec<f64>,
    kdot: Vec<f64>,
    kddot: Vec<f64>,
    k: Vec<f64>,
    f: f64,
}

impl BlockModel<'_> {
    fn coeffs(&self, drive: &DriveSource, t: f64) -> Result<Coeffs> {
        let (f, df, d2f) = drive.eval(t)?;
        let nb = self.modes.len();
        let mut c = Coeffs {
            omega_sq: vec![0.0; nb],
            kdot: vec![0.0; nb],
            kddot: vec![0.0; nb],
            k: vec![0.0; nb],
            f,
        };
        for (i, m) in self.modes.iter().enumerate() {
            let (k, kd, kdd) = match self.opts.k_model {
                KModel::Linear => (m.k_at(f), m.k0 * m.epsilon * df, m.k0 * m.epsilon * d2f),
                KModel::Exact => {
                    let v = self.v0 + self.dv * f;
                    let k = solve_k(v, self.lx, m.index.mx)?;
                    let d1 = dk_dv(k, v, self.lx);
                    let d2 = d2k_dv2(k, v, self.lx);
                    let vd = self.dv * df;
                    (k, d1 * vd, d2 * vd * vd + d1 * self.dv * d2f)
                }
            };
            c.k[i] = k;
            c.kdot[i] = kd;
            c.kddot[i] = kdd;
            c.omega_sq[i] = match self.opts.reduction {
                Reduction::Full => k * k + m.transverse_sq,
                Reduction::FirstOrder => m.omega_tilde * m.omega_tilde,
            };
        }
        Ok(c)
    }

    /// `P̈` for every (mode, seed) given `P`, `Ṗ` laid out as
    /// `y = [P (nb·ns) | Ṗ (nb·ns)]`.
    fn accel(&self, c: &Coeffs, y: &[Complex64], dy: &mut [Complex64], f0: f64) {
        let nb = self.modes.len();
        let ns = nb;
        let half = nb * ns;
        let (p, dp) = y.split_at(half);
        for n in 0..nb {
            for s in 0..ns {
                let idx = n * ns + s;
                let mut acc = -c.omega_sq[n] * p[idx];
                match self.opts.reduction {
                    Reduction::Full => {
                        for m in 0..nb {
                            let mi = m * ns + s;
                            acc -= (dp[mi] * (2.0 * c.kdot[m]) + p[mi] * c.kddot[m]) * self.g_a[m][n]
                                + p[mi] * (c.kdot[m] * c.kdot[m] * self.g_b[m][n]);
                        }
                    }
                    Reduction::FirstOrder => {
                        let mn = self.modes[n];
                        acc -= p[idx] * (2.0 * mn.epsilon * mn.k0 * mn.k0 * (c.f - f0));
                        for m in 0..nb {
                            let mi = m * ns + s;
                            acc -= (dp[mi] * (2.0 * c.kdot[m]) + p[mi] * c.kddot[m]) * self.g_a[m][n];
                        }
                    }
                }
                dy[idx] = dp[idx];
                dy[half + idx] = acc;
            }
        }
    }

    fn wronskian(&self, c: &Coeffs, y: &[Complex64]) -> Vec<f64> {
        let nb = self.modes.len();
        let half = nb * nb;
        (0..nb)
            .map(|s| {
                (0..nb)
                    .map(|n| {
                        let idx = n * nb + s;
                        let (p, dp) = (y[idx], y[half + idx]);
                        let cross = p.conj() * dp - p * dp.conj();
                        psi_norm(c.k[n], self.lx) * (Complex64::i() * cross).re
                    })
                    .sum()
            })
            .collect()
    }
}

/// Mean of the drive used for the first-order reduction.
fn drive_mean(drive: &DriveSource) -> f64 {
    match drive {
        DriveSource::Fourier(s) => s.f0,
        DriveSource::SmoothedRamp { .. } => 0.5,
    }
}

/// Default fixed step for a block.
pub fn default_dt(modes: &[&PsiMode], drive: &DriveSource) -> f64 {
    let w = modes
        .iter()
        .map(|m| m.omega_tilde)
        .fold(drive.max_frequency(), f64::max);
    2.0 * PI / (STEPS_PER_PERIOD * w)
}

/// Integrate the block containing `target`, all block modes seeded, and
/// sample at natural times `times`.
pub fn integrate_full(
    spectrum: &ModeSpectrum,
    table: &CouplingTable,
    drive: &DriveSource,
    target: ModeIndex,
    times: &[f64],
    opts: DirectOptions,
) -> Result<FastTrajectory> {
    if times.is_empty() || times[0] < 0.0 || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(DceError::Config(
            "sample times must be non-negative and non-decreasing".into(),
        ));
    }
    spectrum.mode(target)?;
    let block = spectrum.block(target);
    let modes: Vec<&PsiMode> = block.iter().map(|&i| &spectrum.psi[i]).collect();
    let nb = modes.len();
    let g_a = modes
        .iter()
        .map(|m| modes.iter().map(|n| table.g_a(m.index, n.index)).collect())
        .collect();
    let g_b = modes
        .iter()
        .map(|m| modes.iter().map(|n| table.g_b(m.index, n.index)).collect())
        .collect();
    let model = BlockModel {
        modes: modes.clone(),
        g_a,
        g_b,
        lx: spectrum.cfg.lx,
        v0: spectrum.cfg.v0,
        dv: spectrum.cfg.vmax - spectrum.cfg.v0,
        opts,
    };
    let dt = opts.dt.unwrap_or_else(|| default_dt(&modes, drive));
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(DceError::Config(format!("time step must be positive, got {dt}")));
    }
    let t_end = *times.last().unwrap_or(&0.0);
    let total = (t_end / dt).ceil() as u64 + times.len() as u64;
    if total > opts.max_steps {
        return Err(DceError::StepBudget {
            steps: total,
            limit: opts.max_steps,
        });
    }

    let zero = Complex64::new(0.0, 0.0);
    let half = nb * nb;
    let mut y = vec![zero; 2 * half];
    for (n, m) in modes.iter().enumerate() {
        y[n * nb + n] = Complex64::new(1.0 / (2.0 * m.omega_bar).sqrt(), 0.0);
        y[half + n * nb + n] = Complex64::new(0.0, -(m.omega_bar / 2.0).sqrt());
    }
    let f0 = drive_mean(drive);
    let err: RefCell<Option<DceError>> = RefCell::new(None);
    let mut rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| match model.coeffs(drive, t) {
        Ok(c) => model.accel(&c, y, dy, f0),
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            dy.iter_mut().for_each(|v| *v = zero);
        }
    };

    let mut out = FastTrajectory {
        modes: modes.iter().map(|m| m.index).collect(),
        t: Vec::with_capacity(times.len()),
        p: Vec::with_capacity(times.len()),
        dp: Vec::with_capacity(times.len()),
        wronskian: Vec::with_capacity(times.len()),
        dt,
        steps: 0,
    };
    let mut rk = Rk4::new(2 * half);
    let mut prev = 0.0;
    for &t in times {
        if t > prev {
            let steps = ((t - prev) / dt).ceil() as u64;
            rk.advance(&mut rhs, prev, t, steps, &mut y);
            out.steps += steps;
            prev = t;
        }
        if let Some(e) = err.borrow_mut().take() {
            return Err(e);
        }
        let c = model.coeffs(drive, t)?;
        out.t.push(t);
        out.p.push(y[..half].to_vec());
        out.dp.push(y[half..].to_vec());
        out.wronskian.push(model.wronskian(&c, &y));
    }
    Ok(out)
}

/// Slow amplitudes `A = ½(P + Ṗ/(iω̃))e^{−iω̃t}`, `B = ½(P − Ṗ/(iω̃))e^{iω̃t}`,
/// with slow time `τ = eps_ref·t`.
pub fn extract_slow(fast: &FastTrajectory, spectrum: &ModeSpectrum, eps_ref: f64) -> Result<AmplitudeTrajectory> {
    let modes: Vec<&PsiMode> = fast.modes.iter().map(|m| spectrum.mode(*m)).collect::<Result<_>>()?;
    let nb = modes.len();
    let mut states = Vec::with_capacity(fast.t.len());
    for (i, &t) in fast.t.iter().enumerate() {
        let mut a = Vec::with_capacity(nb * nb);
        let mut b = Vec::with_capacity(nb * nb);
        for (n, m) in modes.iter().enumerate() {
            let w = m.omega_tilde;
            let rot = Complex64::from_polar(1.0, -w * t);
            for s in 0..nb {
                let p = fast.p[i][n * nb + s];
                let q = fast.dp[i][n * nb + s] / (Complex64::i() * w);
                a.push(0.5 * (p + q) * rot);
                b.push(0.5 * (p - q) * rot.conj());
            }
        }
        states.push(AmplitudeState { a, b });
    }
    Ok(AmplitudeTrajectory {
        eps_ref,
        tau: fast.t.iter().map(|t| eps_ref * t).collect(),
        modes: fast.modes.clone(),
        omega_bar: modes.iter().map(|m| m.omega_bar).collect(),
        seeds: fast.modes.clone(),
        states,
        truncated: false,
    })
}

/// Relative change in final `N` of `target` when `dt` is halved. Errors
/// when it exceeds [`AUDIT_LIMIT`].
pub fn step_audit(
    spectrum: &ModeSpectrum,
    table: &CouplingTable,
    drive: &DriveSource,
    target: ModeIndex,
    times: &[f64],
    opts: DirectOptions,
) -> Result<f64> {
    let coarse = integrate_full(spectrum, table, drive, target, times, opts)?;
    let fine_opts = DirectOptions {
        dt: Some(coarse.dt / 2.0),
        ..opts
    };
    let fine = integrate_full(spectrum, table, drive, target, times, fine_opts)?;
    let n_final = |f: &FastTrajectory| -> Result<f64> {
        let slow = extract_slow(f, spectrum, 1.0)?;
        let rec = crate::photons::photon_number(&slow, &vec![0.0; slow.modes.len()]);
        let last = rec.t.len() - 1;
        Ok(rec.series(target).map(|s| s[last]).unwrap_or(0.0))
    };
    let (a, b) = (n_final(&coarse)?, n_final(&fine)?);
    let change = if b != 0.0 {
        (a - b).abs() / b.abs()
    } else {
        (a - b).abs()
    };
    if change > AUDIT_LIMIT {
        return Err(DceError::StepAudit {
            relative_change: change,
            limit: AUDIT_LIMIT,
        });
    }
    Ok(change)
}

/// Film-node mode inertness.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PhiCheck {
    pub mode: ModeIndex,
    pub omega: f64,
    /// `Φ(Lx/2)` relative to the mode amplitude `√(2/Lx)`; the film couples
    /// through `V |Φ(Lx/2)|²`.
    pub film_value: f64,
    /// Largest `|(Φ, Ψ)|` and `|(Φ, ∂Ψ/∂k)|` over ψ modes of the block.
    pub max_overlap: f64,
    pub inert: bool,
}

pub fn phi_mode_check(spectrum: &ModeSpectrum, tol: f64) -> Result<Vec<PhiCheck>> {
    let cfg = &spectrum.cfg;
    let mut out = Vec::with_capacity(spectrum.phi.len());
    for phi in &spectrum.phi {
        let film_value =
            longitudinal(FieldKind::Phi, phi.index.mx, phi.k, cfg.lx, 0.5 * cfg.lx) * (0.5 * cfg.lx).sqrt();
        let mut max_overlap: f64 = 0.0;
        for &i in &spectrum.block(phi.index) {
            let psi = spectrum.psi[i].index;
            for kind in [FieldKind::Psi, FieldKind::DPsiDk] {
                let v = inner_product(cfg, cfg.v0, (FieldKind::Phi, phi.index), (kind, psi))?;
                max_overlap = max_overlap.max(v.abs());
            }
        }
        out.push(PhiCheck {
            mode: phi.index,
            omega: phi.omega,
            film_value,
            max_overlap,
            inert: film_value.abs() <= tol && max_overlap <= tol,
        });
    }
    Ok(out)
}

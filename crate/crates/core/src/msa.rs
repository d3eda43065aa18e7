//! Slow-amplitude evolution from multiple-scale analysis.
//!
//! Each mode is written as `P = A(τ) e^{iω̃t} + B(τ) e^{−iω̃t}` with
//! `τ = ε t`. Removing secular terms at first order leaves a linear system
//! for `(A, B)` whose couplings are switched on by frequency matches between
//! drive harmonics and mode frequencies:
//!
//! - parametric, `Ω_j = 2ω̃_n`, couples `A_n` to `B_n`;
//! - difference, `ω̃_n − ω̃_m = ±Ω_j`, couples `A_n` to `A_m` and `B_n` to `B_m`;
//! - sum, `ω̃_n + ω̃_m = Ω_j`, couples `A_n` to `B_m`.
//!
//! Modes with different `ε` share one slow clock `τ = ε_ref t`; each mode's
//! right-hand side is scaled by `ε_n/ε_ref`.

use num_complex::Complex64;

use crate::coupling::{scan_resonances, CouplingTable, Tolerance};
use crate::drive::{FourierSeries, Harmonic};
use crate::error::{DceError, Result};
use crate::ode::Rk4;
use crate::photons::{photon_number, PhotonRecord};
use crate::spectrum::{ModeIndex, ModeSpectrum, PsiMode};

/// Largest `cosh`/`sinh` argument evaluated before truncating.
pub const COSH_GUARD: f64 = 700.0;
/// Slow-time steps are at most this fraction of `1/‖M‖`.
pub const STEP_FRACTION: f64 = 0.01;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Slow amplitudes for every (observed mode, seed) pair, stored
/// `[mode * seeds + seed]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeState {
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrajectory {
    pub eps_ref: f64,
    pub tau: Vec<f64>,
    pub modes: Vec<ModeIndex>,
    pub omega_bar: Vec<f64>,
    pub seeds: Vec<ModeIndex>,
    pub states: Vec<AmplitudeState>,
    pub truncated: bool,
}

impl AmplitudeTrajectory {
    fn empty(eps_ref: f64, modes: &[&PsiMode], seeds: Vec<ModeIndex>) -> Self {
        AmplitudeTrajectory {
            eps_ref,
            tau: Vec::new(),
            modes: modes.iter().map(|m| m.index).collect(),
            omega_bar: modes.iter().map(|m| m.omega_bar).collect(),
            seeds,
            states: Vec::new(),
            truncated: false,
        }
    }

    /// `Σ_s 2ω̄(|B|² − |A|²)` for mode position `mi` at sample `i`.
    pub fn bogoliubov_norm(&self, mi: usize, i: usize) -> f64 {
        let ns = self.seeds.len();
        let st = &self.states[i];
        (0..ns)
            .map(|s| 2.0 * self.omega_bar[mi] * (st.b[mi * ns + s].norm_sqr() - st.a[mi * ns + s].norm_sqr()))
            .sum()
    }
}

/// `(A(0), B(0))` for a mode seeded by itself.
pub fn initial_amplitudes(mode: &PsiMode) -> (Complex64, Complex64) {
    let r = mode.omega_bar / mode.omega_tilde;
    let norm = (8.0 * mode.omega_bar).sqrt();
    (
        Complex64::new((1.0 - r) / norm, 0.0),
        Complex64::new((1.0 + r) / norm, 0.0),
    )
}

/// Slow-time growth constant `κ = k0² f_j / Ω_j`.
pub fn kappa(mode: &PsiMode, amplitude: f64, omega_j: f64) -> f64 {
    mode.k0 * mode.k0 * amplitude / omega_j
}

/// Predicted photon-number growth rate per natural time unit,
/// `2 k0² f_j ε / Ω_j`.
pub fn r_cond(mode: &PsiMode, amplitude: f64, omega_j: f64) -> f64 {
    2.0 * kappa(mode, amplitude, omega_j) * mode.epsilon
}

/// Drive period that puts harmonic `j` on the parametric resonance of
/// `mode`.
pub fn tuned_period(mode: &PsiMode, j: u32) -> f64 {
    std::f64::consts::PI * j as f64 / mode.omega_tilde
}

/// `r_cond/r_mov ≈ (ε_n/ε_mov)(T_mov/T)`.
pub fn rate_ratio(eps_n: f64, period: f64, eps_mov: f64, period_mov: f64) -> Result<f64> {
    for (name, v) in [
        ("eps_n", eps_n),
        ("T", period),
        ("eps_mov", eps_mov),
        ("T_mov", period_mov),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(DceError::Precondition(format!("{name} must be positive, got {v}")));
        }
    }
    Ok((eps_n / eps_mov) * (period_mov / period))
}

fn check_grid(tau: &[f64]) -> Result<()> {
    if tau.is_empty() {
        return Err(DceError::Config("time grid is empty".into()));
    }
    if tau[0] < 0.0 || tau.windows(2).any(|w| w[1] < w[0]) || tau.iter().any(|t| !t.is_finite()) {
        return Err(DceError::Config(
            "time grid must be finite, non-negative and non-decreasing".into(),
        ));
    }
    Ok(())
}

fn harmonic(series: &FourierSeries, j: u32) -> Result<Harmonic> {
    series
        .harmonic(j)
        .copied()
        .ok_or_else(|| DceError::Precondition(format!("drive has no harmonic j={j}")))
}

/// Closed-form single-mode parametric solution. Refuses unless harmonic `j`
/// meets `Ω_j = 2ω̃_n` within `tol` and no harmonic couples mode `n` to
/// another mode.
pub fn msa_parametric(
    spectrum: &ModeSpectrum,
    series: &FourierSeries,
    mode: ModeIndex,
    j: u32,
    tau: &[f64],
    tol: Tolerance,
) -> Result<(AmplitudeTrajectory, PhotonRecord)> {
    check_grid(tau)?;
    let h = harmonic(series, j)?;
    let report = scan_resonances(spectrum, series.omega, series.j_max(), tol)?;
    let hit = report.parametric(mode).find(|hit| hit.j == j).ok_or_else(|| {
        DceError::Precondition(format!(
            "parametric condition Omega_j = 2*omega_tilde not met for mode {mode} at j={j}"
        ))
    })?;
    if hit.decoupled != Some(true) {
        return Err(DceError::Precondition(format!(
            "intermode coupling condition holds for mode {mode}; the decoupled solution does not apply"
        )));
    }
    Ok(parametric_closed_form(
        spectrum.mode(mode)?,
        h,
        j as f64 * series.omega,
        tau,
    ))
}

/// Closed form with no precondition checks.
pub fn parametric_closed_form(
    mode: &PsiMode,
    h: Harmonic,
    omega_j: f64,
    tau: &[f64],
) -> (AmplitudeTrajectory, PhotonRecord) {
    let k = kappa(mode, h.amplitude, omega_j);
    let r = mode.omega_bar / mode.omega_tilde;
    let norm = (8.0 * mode.omega_bar).sqrt();
    let e = Complex64::from_polar(1.0, h.phase);
    let mut traj = AmplitudeTrajectory::empty(mode.epsilon, &[mode], vec![mode.index]);
    let mut approx = Vec::new();
    for &t in tau {
        let x = k * t;
        if x > COSH_GUARD {
            traj.truncated = true;
            break;
        }
        let (c, s) = (x.cosh(), x.sinh());
        let a = ((1.0 - r) * c + (1.0 + r) * I * e * s) / norm;
        let b = ((1.0 + r) * c - (1.0 - r) * I * e.conj() * s) / norm;
        if !(a.norm_sqr().is_finite() && b.norm_sqr().is_finite()) {
            traj.truncated = true;
            break;
        }
        traj.tau.push(t);
        traj.states.push(AmplitudeState { a: vec![a], b: vec![b] });
        approx.push(s * s);
    }
    let mut record = photon_number(&traj, &[mode.epsilon]);
    record.approx[0] = Some(approx);
    record.predicted[0] = Some(r_cond(mode, h.amplitude, omega_j));
    (traj, record)
}

/// Constant slow-flow matrix of one transverse block, acting on
/// `(A_0, B_0, A_1, B_1, …)` in block order.
pub fn slow_matrix(
    modes: &[&PsiMode],
    table: &CouplingTable,
    series: &FourierSeries,
    tol: Tolerance,
    eps_ref: f64,
) -> Vec<Vec<Complex64>> {
    let nb = modes.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut m = vec![vec![zero; 2 * nb]; 2 * nb];
    for h in &series.harmonics {
        let w = h.j as f64 * series.omega;
        let f = h.amplitude;
        let ep = Complex64::from_polar(1.0, h.phase);
        let em = ep.conj();
        for (n, mn) in modes.iter().enumerate() {
            let (an, bn) = (2 * n, 2 * n + 1);
            let sn = mn.epsilon / eps_ref;
            let inv = 1.0 / (2.0 * I * mn.omega_tilde);
            if (w - 2.0 * mn.omega_tilde).abs() < tol.for_mode(mn.epsilon, mn.omega_tilde) {
                let c = sn * mn.k0 * mn.k0 * f * inv;
                m[an][bn] += -c * ep;
                m[bn][an] += c * em;
            }
            for (mm_i, mm) in modes.iter().enumerate() {
                let (am, bm) = (2 * mm_i, 2 * mm_i + 1);
                let t = if mm_i == n {
                    tol.for_mode(mn.epsilon, mn.omega_tilde)
                } else {
                    tol.for_pair((mn.epsilon, mn.omega_tilde), (mm.epsilon, mm.omega_tilde))
                };
                let common = (mm.epsilon / eps_ref) * f * w * table.g_a(mm.index, mn.index) * mm.k0 * inv;
                let (wn, wm) = (mn.omega_tilde, mm.omega_tilde);
                if (wn - wm - w).abs() < t {
                    let c = common * (-0.5 * w - wm);
                    m[an][am] += -c * ep;
                    m[bn][bm] += c * em;
                }
                if (wn - wm + w).abs() < t {
                    let c = common * (-0.5 * w + wm);
                    m[an][am] += -c * em;
                    m[bn][bm] += c * ep;
                }
                if (wn + wm - w).abs() < t {
                    let c = common * (-0.5 * w + wm);
                    m[an][bm] += -c * ep;
                    m[bn][am] += c * em;
                }
            }
        }
    }
    m
}

/// Largest absolute row sum, an upper bound on the eigenvalue moduli.
pub fn gershgorin_bound(m: &[Vec<Complex64>]) -> f64 {
    m.iter()
        .map(|row| row.iter().map(|c| c.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Reference `ε` for the shared slow clock: the largest `ε` among modes
/// with a parametric hit, else the largest `ε` overall.
pub fn default_eps_ref(spectrum: &ModeSpectrum, series: &FourierSeries, tol: Tolerance) -> f64 {
    let resonant = spectrum
        .psi
        .iter()
        .filter(|m| {
            series.harmonics.iter().any(|h| {
                (h.j as f64 * series.omega - 2.0 * m.omega_tilde).abs() < tol.for_mode(m.epsilon, m.omega_tilde)
            })
        })
        .map(|m| m.epsilon)
        .fold(0.0, f64::max);
    if resonant > 0.0 {
        resonant
    } else {
        spectrum.psi.iter().map(|m| m.epsilon).fold(0.0, f64::max)
    }
}

/// Coupled slow flow for every retained mode and seed, integrated with RK4
/// in `τ = ε_ref t`.
pub fn msa_general(
    spectrum: &ModeSpectrum,
    table: &CouplingTable,
    series: &FourierSeries,
    tau: &[f64],
    tol: Tolerance,
    eps_ref: Option<f64>,
) -> Result<AmplitudeTrajectory> {
    check_grid(tau)?;
    tol.validate()?;
    let eps_ref = eps_ref.unwrap_or_else(|| default_eps_ref(spectrum, series, tol));
    if !(eps_ref > 0.0 && eps_ref.is_finite()) {
        return Err(DceError::Precondition(
            "reference epsilon must be positive (Vmax = V0 leaves nothing to evolve)".into(),
        ));
    }
    let all: Vec<&PsiMode> = spectrum.psi.iter().collect();
    let seeds: Vec<ModeIndex> = all.iter().map(|m| m.index).collect();
    let nm = all.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut states: Vec<AmplitudeState> = (0..tau.len())
        .map(|_| AmplitudeState {
            a: vec![zero; nm * nm],
            b: vec![zero; nm * nm],
        })
        .collect();
    let mut valid = tau.len();

    for block in spectrum.blocks() {
        let modes: Vec<&PsiMode> = block.iter().map(|&i| &spectrum.psi[i]).collect();
        let nb = modes.len();
        let mat = slow_matrix(&modes, table, series, tol, eps_ref);
        let bound = gershgorin_bound(&mat);
        let mut rhs = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| {
            for r in 0..2 * nb {
                dy[r] = mat[r].iter().zip(y).map(|(c, v)| c * v).sum();
            }
        };
        for (local_s, &seed_pos) in block.iter().enumerate() {
            let mut y = vec![zero; 2 * nb];
            let (a0, b0) = initial_amplitudes(modes[local_s]);
            y[2 * local_s] = a0;
            y[2 * local_s + 1] = b0;
            let mut rk = Rk4::new(2 * nb);
            let mut prev = 0.0;
            for (i, &t) in tau.iter().enumerate() {
                if i >= valid {
                    break;
                }
                if bound > 0.0 && t > prev {
                    let steps = ((t - prev) * bound / STEP_FRACTION).ceil() as u64;
                    rk.advance(&mut rhs, prev, t, steps.max(1), &mut y);
                }
                prev = t;
                let peak = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
                if !peak.is_finite() || peak.ln() > COSH_GUARD - 10.0 {
                    valid = i;
                    break;
                }
                for (local_n, &mode_pos) in block.iter().enumerate() {
                    states[i].a[mode_pos * nm + seed_pos] = y[2 * local_n];
                    states[i].b[mode_pos * nm + seed_pos] = y[2 * local_n + 1];
                }
            }
        }
    }

    let mut traj = AmplitudeTrajectory::empty(eps_ref, &all, seeds);
    traj.truncated = valid < tau.len();
    traj.tau = tau[..valid].to_vec();
    states.truncate(valid);
    traj.states = states;
    Ok(traj)
}

/// [`msa_general`] followed by [`photon_number`], with each parametric
/// hit's `r_cond` and `sinh²` approximant attached.
pub fn msa_general_record(
    spectrum: &ModeSpectrum,
    table: &CouplingTable,
    series: &FourierSeries,
    tau: &[f64],
    tol: Tolerance,
    eps_ref: Option<f64>,
) -> Result<(AmplitudeTrajectory, PhotonRecord)> {
    let traj = msa_general(spectrum, table, series, tau, tol, eps_ref)?;
    let eps: Vec<f64> = spectrum.psi.iter().map(|m| m.epsilon).collect();
    let mut record = photon_number(&traj, &eps);
    for (mi, mode) in spectrum.psi.iter().enumerate() {
        let hit = series.harmonics.iter().find(|h| {
            (h.j as f64 * series.omega - 2.0 * mode.omega_tilde).abs() < tol.for_mode(mode.epsilon, mode.omega_tilde)
        });
        if let Some(h) = hit {
            let omega_j = h.j as f64 * series.omega;
            let k = kappa(mode, h.amplitude, omega_j) * mode.epsilon / traj.eps_ref;
            record.predicted[mi] = Some(r_cond(mode, h.amplitude, omega_j));
            record.approx[mi] = Some(traj.tau.iter().map(|t| (k * t).sinh().powi(2)).collect());
        }
    }
    Ok((traj, record))
}

/// Single-mode slow flow with the drive harmonic offset from resonance by
/// `delta`, i.e. `Ω_j = 2ω̃_n + delta`. The oscillating factor
/// `e^{±i delta t}` is kept in the parametric channel.
pub fn detuned_parametric(
    spectrum: &ModeSpectrum,
    series: &FourierSeries,
    mode: ModeIndex,
    j: u32,
    delta: f64,
    tau: &[f64],
) -> Result<(AmplitudeTrajectory, PhotonRecord)> {
    check_grid(tau)?;
    let h = harmonic(series, j)?;
    let m = spectrum.mode(mode)?;
    let omega_j = 2.0 * m.omega_tilde + delta;
    if !(delta.abs() / omega_j <= 10.0 * m.epsilon) {
        return Err(DceError::Precondition(format!(
            "detuning |delta|/Omega_j = {:e} exceeds 10*eps = {:e}; slow flow does not apply",
            delta.abs() / omega_j,
            10.0 * m.epsilon
        )));
    }
    if m.epsilon <= 0.0 {
        return Err(DceError::Precondition(format!("mode {mode} has eps = 0")));
    }
    Ok(detuned_flow(m, h, delta, tau))
}

/// Detuned two-amplitude flow with no precondition checks.
pub fn detuned_flow(m: &PsiMode, h: Harmonic, delta: f64, tau: &[f64]) -> (AmplitudeTrajectory, PhotonRecord) {
    let coef = m.k0 * m.k0 * h.amplitude / (2.0 * m.omega_tilde);
    let d = delta / m.epsilon;
    let ep = Complex64::from_polar(1.0, h.phase);
    let mut rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        let rot = Complex64::from_polar(1.0, d * t);
        dy[0] = I * coef * ep * rot * y[1];
        dy[1] = -I * coef * ep.conj() * rot.conj() * y[0];
    };
    let bound = coef.max(d.abs());
    let (a0, b0) = initial_amplitudes(m);
    let mut y = vec![a0, b0];
    let mut rk = Rk4::new(2);
    let mut traj = AmplitudeTrajectory::empty(m.epsilon, &[m], vec![m.index]);
    let mut prev = 0.0;
    for &t in tau {
        if t > prev && bound > 0.0 {
            let steps = ((t - prev) * bound / STEP_FRACTION).ceil() as u64;
            rk.advance(&mut rhs, prev, t, steps.max(1), &mut y);
        }
        prev = t;
        let peak = y[0].norm().max(y[1].norm());
        if !peak.is_finite() || peak.ln() > COSH_GUARD - 10.0 {
            traj.truncated = true;
            break;
        }
        traj.tau.push(t);
        traj.states.push(AmplitudeState {
            a: vec![y[0]],
            b: vec![y[1]],
        });
    }
    let mut record = photon_number(&traj, &[m.epsilon]);
    record.predicted[0] = Some(r_cond(m, h.amplitude, 2.0 * m.omega_tilde + delta));
    (traj, record)
}

/// Uniform grid `0, τ_end/(n−1), …, τ_end`.
pub fn uniform_grid(tau_end: f64, samples: usize) -> Vec<f64> {
    if samples <= 1 || tau_end == 0.0 {
        return vec![0.0];
    }
    (0..samples)
        .map(|i| tau_end * i as f64 / (samples - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::coupling_coeffs;
    use crate::spectrum::{CavityConfig, ModeCut};
    use std::f64::consts::PI;

    fn unit_mode(eps: f64) -> PsiMode {
        PsiMode::from_parts(ModeIndex { mx: 1, my: 1, mz: 1 }, 1.0, eps, 0.0, 0.0)
    }

    #[test]
    fn rate_ratio_values() {
        assert_eq!(rate_ratio(1e-2, 1.0, 1e-8, 1.0).unwrap(), 1e6);
        assert_eq!(rate_ratio(3e-3, 2.0, 3e-3, 2.0).unwrap(), 1.0);
        assert!((rate_ratio(1e-2, 100.0, 1e-8, 1.0).unwrap() - 1e4).abs() < 1e-9);
        assert!(rate_ratio(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn closed_form_unit_example() {
        // k0 = ω̃ = 1, Ω_j = 2, f_j = 1/π, ε = 1e-2
        let m = unit_mode(1e-2);
        let h = Harmonic {
            j: 1,
            amplitude: 1.0 / PI,
            phase: 0.3,
        };
        let tau: Vec<f64> = (0..=50).map(|i| i as f64 * 0.1).collect();
        let (_, rec) = parametric_closed_form(&m, h, 2.0, &tau);
        assert_eq!(rec.n[0][0], 0.0);
        for (i, &t) in tau.iter().enumerate() {
            let tn = t / 1e-2;
            let expect = (tn * (1.0 / PI) * 1e-2 / 2.0).sinh().powi(2);
            assert!((rec.n[0][i] - expect).abs() <= 1e-12 * (1.0 + expect));
        }
        assert!((rec.predicted[0].unwrap() - 1e-2 / PI).abs() < 1e-15);
    }

    #[test]
    fn fitted_rate_matches_r_cond() {
        let m = unit_mode(1e-2);
        let h = Harmonic {
            j: 1,
            amplitude: 1.0 / PI,
            phase: 0.0,
        };
        let kap = 1.0 / (2.0 * PI);
        let tau = uniform_grid(8.0 / kap, 201);
        let (_, rec) = parametric_closed_form(&m, h, 2.0, &tau);
        let fit = rec.fit(m.index).unwrap();
        let rel = (fit.rate() - 1e-2 / PI).abs() / (1e-2 / PI);
        assert!(rel < 0.02, "rel {rel}");
    }

    #[test]
    fn closed_form_satisfies_slow_flow_and_unitarity() {
        let m = PsiMode::from_parts(ModeIndex { mx: 1, my: 1, mz: 1 }, 1.3, 1e-3, 0.2, 0.5);
        let h = Harmonic {
            j: 2,
            amplitude: 0.4,
            phase: -1.1,
        };
        let omega_j = 2.0 * m.omega_tilde;
        let tau = uniform_grid(3.0, 31);
        let (closed, _) = parametric_closed_form(&m, h, omega_j, &tau);
        let (flow, _) = detuned_flow(&m, h, 0.0, &tau);
        for i in 0..tau.len() {
            assert!((closed.states[i].a[0] - flow.states[i].a[0]).norm() < 1e-9);
            assert!((closed.states[i].b[0] - flow.states[i].b[0]).norm() < 1e-9);
            let u = closed.bogoliubov_norm(0, i);
            assert!((u - 1.0).abs() < 10.0 * m.epsilon, "{u}");
        }
    }

    #[test]
    fn initial_photon_number_is_order_eps_squared() {
        let m = PsiMode::from_parts(ModeIndex { mx: 1, my: 1, mz: 1 }, 2.0, 1e-3, 0.5, 0.5);
        let (a, _) = initial_amplitudes(&m);
        let n0 = 2.0 * m.omega_bar * a.norm_sqr();
        assert!(n0 > 0.0 && n0 < 1e-6);
        let approx = m.k0 * m.k0 * 0.5 * m.epsilon / (2.0 * m.omega_bar * m.omega_bar) / (2.0 * m.omega_bar).sqrt();
        assert!((a.re - approx).abs() < 1e-3 * approx);
    }

    #[test]
    fn off_resonance_general_flow_is_frozen() {
        let cfg = CavityConfig::new(2.0 * PI, 4.0 * PI, 4.0 * PI, 100.0, 120.0).unwrap();
        let spec = ModeSpectrum::build(&cfg, 0.5, ModeCut { nx: 3, ny: 1, nz: 1 }).unwrap();
        let table = coupling_coeffs(&spec).unwrap();
        let series = FourierSeries {
            omega: 0.37,
            f0: 0.5,
            harmonics: vec![Harmonic {
                j: 1,
                amplitude: 0.5,
                phase: PI,
            }],
        };
        let tau = uniform_grid(3.0, 7);
        let traj = msa_general(&spec, &table, &series, &tau, Tolerance::Default, None).unwrap();
        for st in &traj.states {
            assert_eq!(st.a, traj.states[0].a);
        }
    }

    #[test]
    fn detuning_beyond_validity_is_refused() {
        let cfg = CavityConfig::new(2.0 * PI, 100.0, 100.0, 100.0, 120.0).unwrap();
        let spec = ModeSpectrum::build(&cfg, 0.5, ModeCut { nx: 1, ny: 1, nz: 1 }).unwrap();
        let m = spec.psi[0];
        let series = FourierSeries {
            omega: 2.0 * m.omega_tilde,
            f0: 0.5,
            harmonics: vec![Harmonic {
                j: 1,
                amplitude: 0.5,
                phase: PI,
            }],
        };
        let big = 20.0 * m.epsilon * 2.0 * m.omega_tilde;
        assert!(detuned_parametric(&spec, &series, m.index, 1, big, &[0.0, 1.0]).is_err());
    }
}

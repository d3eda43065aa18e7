//! Mode overlaps, intermode coupling coefficients and the resonance scan.
//!
//! Along `x` the film-node modes are `Φ ∝ sin(2πmx/Lx)` and the ψ modes are
//! `sin(kx)` on `[0, Lx/2]` continued as `−sin(k(x−Lx))` on `[Lx/2, Lx]`.
//! Transverse factors are orthonormal sines, so overlaps between modes with
//! different `(my, mz)` vanish identically.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{DceError, Result};
use crate::quadrature::{integrate_from, DEFAULT_TOL};
use crate::spectrum::{solve_k, CavityConfig, ModeIndex, ModeSpectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FieldKind {
    Phi,
    Psi,
    DPsiDk,
    D2PsiDk2,
}

impl FieldKind {
    /// Parity under `x → Lx − x`.
    fn parity(self) -> f64 {
        match self {
            FieldKind::Phi => -1.0,
            _ => 1.0,
        }
    }

    fn uses_root(self) -> bool {
        !matches!(self, FieldKind::Phi)
    }
}

/// Longitudinal factor of a mode function, region by region.
pub fn longitudinal(kind: FieldKind, mx: u32, k: f64, lx: f64, x: f64) -> f64 {
    let norm = (2.0 / lx).sqrt();
    let first = x <= 0.5 * lx;
    match kind {
        FieldKind::Phi => {
            let arg = if first { x } else { x - lx };
            norm * (2.0 * PI * mx as f64 * arg / lx).sin()
        }
        FieldKind::Psi => {
            if first {
                norm * (k * x).sin()
            } else {
                -norm * (k * (x - lx)).sin()
            }
        }
        FieldKind::DPsiDk => {
            if first {
                norm * x * (k * x).cos()
            } else {
                let y = x - lx;
                -norm * y * (k * y).cos()
            }
        }
        FieldKind::D2PsiDk2 => {
            if first {
                -norm * x * x * (k * x).sin()
            } else {
                let y = x - lx;
                norm * y * y * (k * y).sin()
            }
        }
    }
}

/// Panels to start from so each one spans at most about a wavelength.
fn start_panels(ka: f64, kb: f64, span: f64) -> usize {
    let waves = (ka.abs() + kb.abs()) * span / (2.0 * PI);
    (waves.ceil() as usize).clamp(1, 4096)
}

fn root_for(kind: FieldKind, mx: u32, v: f64, lx: f64) -> Result<f64> {
    if kind.uses_root() {
        solve_k(v, lx, mx)
    } else {
        Ok(2.0 * PI * mx as f64 / lx)
    }
}

/// Longitudinal overlap from the half-cell `[0, Lx/2]` and the parity of
/// both factors.
pub fn longitudinal_overlap(a: (FieldKind, u32, f64), b: (FieldKind, u32, f64), lx: f64) -> Result<f64> {
    let sym = 1.0 + a.0.parity() * b.0.parity();
    if sym == 0.0 {
        return Ok(0.0);
    }
    let half = 0.5 * lx;
    let panels = start_panels(a.2, b.2, half);
    let integrand = |x: f64| longitudinal(a.0, a.1, a.2, lx, x) * longitudinal(b.0, b.1, b.2, lx, x);
    Ok(sym * integrate_from(integrand, 0.0, half, DEFAULT_TOL, panels)?)
}

/// Longitudinal overlap by quadrature over both regions, with no symmetry
/// argument.
pub fn longitudinal_overlap_full(a: (FieldKind, u32, f64), b: (FieldKind, u32, f64), lx: f64) -> Result<f64> {
    let half = 0.5 * lx;
    let panels = start_panels(a.2, b.2, half);
    let integrand = |x: f64| longitudinal(a.0, a.1, a.2, lx, x) * longitudinal(b.0, b.1, b.2, lx, x);
    let left = integrate_from(integrand, 0.0, half, DEFAULT_TOL, panels)?;
    // the region-II definitions take over strictly above the midpoint
    let right = integrate_from(
        |x: f64| {
            if x <= half {
                integrand(half + f64::EPSILON * lx)
            } else {
                integrand(x)
            }
        },
        half,
        lx,
        DEFAULT_TOL,
        panels,
    )?;
    Ok(left + right)
}

fn overlap_with(
    cfg: &CavityConfig,
    v: f64,
    a: (FieldKind, ModeIndex),
    b: (FieldKind, ModeIndex),
    full: bool,
) -> Result<f64> {
    if !a.1.same_transverse(&b.1) {
        return Ok(0.0);
    }
    let ka = root_for(a.0, a.1.mx, v, cfg.lx)?;
    let kb = root_for(b.0, b.1.mx, v, cfg.lx)?;
    let fa = (a.0, a.1.mx, ka);
    let fb = (b.0, b.1.mx, kb);
    if full {
        longitudinal_overlap_full(fa, fb, cfg.lx)
    } else {
        longitudinal_overlap(fa, fb, cfg.lx)
    }
}

/// `(a, b)` over the cavity with ψ wavenumbers solved at conductivity `v`.
pub fn inner_product(cfg: &CavityConfig, v: f64, a: (FieldKind, ModeIndex), b: (FieldKind, ModeIndex)) -> Result<f64> {
    overlap_with(cfg, v, a, b, false)
}

/// Same as [`inner_product`] but integrating both halves explicitly.
pub fn inner_product_full(
    cfg: &CavityConfig,
    v: f64,
    a: (FieldKind, ModeIndex),
    b: (FieldKind, ModeIndex),
) -> Result<f64> {
    overlap_with(cfg, v, a, b, true)
}

/// `(Ψ, Ψ) = 1 − sin(kLx)/(kLx)`.
pub fn psi_norm(k: f64, lx: f64) -> f64 {
    1.0 - (k * lx).sin() / (k * lx)
}

/// Coupling coefficients at `V0` between branches `mx, nx = 1..=cut`.
#[derive(Debug, Clone)]
pub struct CouplingTable {
    pub nx: usize,
    pub k0: Vec<f64>,
    pub norms: Vec<f64>,
    /// `gA[m][n] = (∂Ψ_m/∂k, Ψ_n) / (Ψ_n, Ψ_n)`, row-major.
    g_a: Vec<f64>,
    /// `gB[m][n] = (∂²Ψ_m/∂k², Ψ_n) / (Ψ_n, Ψ_n)`, row-major.
    g_b: Vec<f64>,
}

impl CouplingTable {
    pub fn g_a(&self, m: ModeIndex, n: ModeIndex) -> f64 {
        if !m.same_transverse(&n) {
            return 0.0;
        }
        self.g_a[(m.mx as usize - 1) * self.nx + (n.mx as usize - 1)]
    }

    pub fn g_b(&self, m: ModeIndex, n: ModeIndex) -> f64 {
        if !m.same_transverse(&n) {
            return 0.0;
        }
        self.g_b[(m.mx as usize - 1) * self.nx + (n.mx as usize - 1)]
    }

    pub fn norm(&self, mx: u32) -> f64 {
        self.norms[mx as usize - 1]
    }
}

/// Coupling coefficients at zeroth order in ε, using the spectrum's `k0`.
pub fn coupling_coeffs(spectrum: &ModeSpectrum) -> Result<CouplingTable> {
    let lx = spectrum.cfg.lx;
    let nx = spectrum.cut.nx as usize;
    let mut k0 = vec![0.0; nx];
    for m in &spectrum.psi {
        k0[m.index.mx as usize - 1] = m.k0;
    }
    if k0.contains(&0.0) {
        return Err(DceError::Domain("spectrum is missing a longitudinal branch".into()));
    }
    let norms: Vec<f64> = k0.iter().map(|&k| psi_norm(k, lx)).collect();
    let pairs: Vec<(usize, usize)> = (0..nx).flat_map(|m| (0..nx).map(move |n| (m, n))).collect();
    let entries: Vec<(f64, f64)> = pairs
        .par_iter()
        .map(|&(m, n)| {
            let psi_n = (FieldKind::Psi, n as u32 + 1, k0[n]);
            let a = longitudinal_overlap((FieldKind::DPsiDk, m as u32 + 1, k0[m]), psi_n, lx)?;
            let b = longitudinal_overlap((FieldKind::D2PsiDk2, m as u32 + 1, k0[m]), psi_n, lx)?;
            Ok((a / norms[n], b / norms[n]))
        })
        .collect::<Result<_>>()?;
    Ok(CouplingTable {
        nx,
        k0,
        norms,
        g_a: entries.iter().map(|e| e.0).collect(),
        g_b: entries.iter().map(|e| e.1).collect(),
    })
}

/// Frequency tolerance for treating a resonance condition as met.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// `ε ω̃ / 10` of the mode (the smaller of the two for a pair).
    Default,
    /// Fixed tolerance in m⁻¹.
    Absolute(f64),
}

impl Tolerance {
    pub fn validate(&self) -> Result<()> {
        if let Tolerance::Absolute(t) = self {
            if !(t.is_finite() && *t >= 0.0) {
                return Err(DceError::Config(format!(
                    "resonance tolerance must be finite and >= 0, got {t}"
                )));
            }
        }
        Ok(())
    }

    pub fn for_mode(&self, eps: f64, omega: f64) -> f64 {
        match *self {
            Tolerance::Default => eps * omega / 10.0,
            Tolerance::Absolute(t) => t,
        }
    }

    pub fn for_pair(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        match *self {
            Tolerance::Default => (a.0 * a.1).min(b.0 * b.1) / 10.0,
            Tolerance::Absolute(t) => t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResonanceKind {
    /// `Ω_j = 2ω̃_n`
    Parametric,
    /// `Ω_j = ω̃_n + ω̃_m`
    CouplingSum,
    /// `Ω_j = |ω̃_n − ω̃_m|`
    CouplingDifference,
}

impl ResonanceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ResonanceKind::Parametric => "parametric",
            ResonanceKind::CouplingSum => "coupling_sum",
            ResonanceKind::CouplingDifference => "coupling_difference",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceHit {
    pub kind: ResonanceKind,
    pub j: u32,
    pub mode: ModeIndex,
    pub partner: Option<ModeIndex>,
    /// `|Ω_j − condition|` in m⁻¹.
    pub mismatch: f64,
    pub tolerance: f64,
    /// For parametric hits: no harmonic couples the mode to another mode of
    /// its transverse block, so the single-mode solution applies.
    pub decoupled: Option<bool>,
    /// For two-mode hits: both modes share transverse indices, so the
    /// coupling coefficient can be nonzero.
    pub same_block: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceReport {
    pub omega: f64,
    pub j_max: u32,
    pub hits: Vec<ResonanceHit>,
}

impl ResonanceReport {
    pub fn parametric(&self, mode: ModeIndex) -> impl Iterator<Item = &ResonanceHit> {
        self.hits
            .iter()
            .filter(move |h| h.kind == ResonanceKind::Parametric && h.mode == mode)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record([
            "kind",
            "j",
            "mode",
            "partner",
            "mismatch",
            "tolerance",
            "decoupled",
            "same_block",
        ])?;
        for h in &self.hits {
            wtr.write_record([
                h.kind.as_str().to_string(),
                h.j.to_string(),
                h.mode.to_string(),
                h.partner.map(|p| p.to_string()).unwrap_or_default(),
                crate::photons::fmt_sci(h.mismatch),
                crate::photons::fmt_sci(h.tolerance),
                h.decoupled.map(|d| d.to_string()).unwrap_or_default(),
                h.same_block.map(|d| d.to_string()).unwrap_or_default(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Whether some harmonic `j' ≤ j_max` opens a coupling channel between mode
/// `n` (parametrically resonant) and another mode of its block.
pub fn intermode_coupling_present(spectrum: &ModeSpectrum, n: usize, omega: f64, j_max: u32, tol: Tolerance) -> bool {
    let mode_n = &spectrum.psi[n];
    spectrum.block(mode_n.index).into_iter().filter(|&m| m != n).any(|m| {
        let mode_m = &spectrum.psi[m];
        let t = tol.for_pair(
            (mode_n.epsilon, mode_n.omega_tilde),
            (mode_m.epsilon, mode_m.omega_tilde),
        );
        (1..=j_max).any(|jp| {
            let w = jp as f64 * omega;
            let (wn, wm) = (mode_n.omega_tilde, mode_m.omega_tilde);
            (wm - (wn + w)).abs() < t || (wm - (wn - w)).abs() < t || (wm - (w - wn)).abs() < t
        })
    })
}

/// All parametric and two-mode conditions met by harmonics `1..=j_max` of
/// base frequency `omega`.
pub fn scan_resonances(spectrum: &ModeSpectrum, omega: f64, j_max: u32, tol: Tolerance) -> Result<ResonanceReport> {
    tol.validate()?;
    if !(omega.is_finite() && omega > 0.0) {
        return Err(DceError::Config(format!(
            "drive frequency must be positive, got {omega}"
        )));
    }
    let mut hits = Vec::new();
    let modes = &spectrum.psi;
    for j in 1..=j_max {
        let w = j as f64 * omega;
        for (n, mode) in modes.iter().enumerate() {
            let t = tol.for_mode(mode.epsilon, mode.omega_tilde);
            let mismatch = (w - 2.0 * mode.omega_tilde).abs();
            if mismatch < t {
                hits.push(ResonanceHit {
                    kind: ResonanceKind::Parametric,
                    j,
                    mode: mode.index,
                    partner: None,
                    mismatch,
                    tolerance: t,
                    decoupled: Some(!intermode_coupling_present(spectrum, n, omega, j_max, tol)),
                    same_block: None,
                });
            }
        }
        for (n, a) in modes.iter().enumerate() {
            for b in &modes[n + 1..] {
                let t = tol.for_pair((a.epsilon, a.omega_tilde), (b.epsilon, b.omega_tilde));
                let sum = (w - (a.omega_tilde + b.omega_tilde)).abs();
                if sum < t {
                    hits.push(ResonanceHit {
                        kind: ResonanceKind::CouplingSum,
                        j,
                        mode: a.index,
                        partner: Some(b.index),
                        mismatch: sum,
                        tolerance: t,
                        decoupled: None,
                        same_block: Some(a.index.same_transverse(&b.index)),
                    });
                }
                let diff = (w - (a.omega_tilde - b.omega_tilde).abs()).abs();
                if diff < t {
                    hits.push(ResonanceHit {
                        kind: ResonanceKind::CouplingDifference,
                        j,
                        mode: a.index,
                        partner: Some(b.index),
                        mismatch: diff,
                        tolerance: t,
                        decoupled: None,
                        same_block: Some(a.index.same_transverse(&b.index)),
                    });
                }
            }
        }
    }
    Ok(ResonanceReport { omega, j_max, hits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::ModeCut;

    fn mi(mx: u32, my: u32, mz: u32) -> ModeIndex {
        ModeIndex { mx, my, mz }
    }

    #[test]
    fn phi_orthonormal_and_orthogonal_to_psi() {
        let cfg = CavityConfig::new(0.8, 1.1, 1.7, 30.0, 60.0).unwrap();
        for m in 1..4 {
            for n in 1..4 {
                let pp = inner_product_full(&cfg, 30.0, (FieldKind::Phi, mi(m, 1, 1)), (FieldKind::Phi, mi(n, 1, 1)))
                    .unwrap();
                let expect = if m == n { 1.0 } else { 0.0 };
                assert!((pp - expect).abs() < 1e-10, "({m},{n}) {pp}");
                let ps = inner_product_full(&cfg, 30.0, (FieldKind::Phi, mi(m, 1, 1)), (FieldKind::Psi, mi(n, 1, 1)))
                    .unwrap();
                assert!(ps.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn psi_norm_closed_form() {
        let cfg = CavityConfig::new(1.3, 1.0, 1.0, 7.0, 9.0).unwrap();
        for m in 1..5 {
            let k = solve_k(7.0, 1.3, m).unwrap();
            let v = inner_product(&cfg, 7.0, (FieldKind::Psi, mi(m, 2, 1)), (FieldKind::Psi, mi(m, 2, 1))).unwrap();
            assert!((v - psi_norm(k, 1.3)).abs() < 1e-10);
            assert!(psi_norm(k, 1.3) > 0.0 && psi_norm(k, 1.3) < 2.0);
        }
    }

    #[test]
    fn different_transverse_indices_do_not_overlap() {
        let cfg = CavityConfig::new(1.0, 1.0, 1.0, 7.0, 9.0).unwrap();
        let v = inner_product(
            &cfg,
            7.0,
            (FieldKind::DPsiDk, mi(1, 1, 1)),
            (FieldKind::Psi, mi(1, 2, 1)),
        )
        .unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn diagonal_ga_matches_derivative_of_norm() {
        // (∂Ψ/∂k, Ψ) = ½ d/dk (Ψ, Ψ)
        let cfg = CavityConfig::new(1.0, 2.0, 2.0, 25.0, 50.0).unwrap();
        let spec = ModeSpectrum::build(&cfg, 0.5, ModeCut { nx: 3, ny: 1, nz: 1 }).unwrap();
        let table = coupling_coeffs(&spec).unwrap();
        for m in &spec.psi {
            let k = m.k0;
            let h = 1e-6 * k;
            let n = |kk: f64| {
                longitudinal_overlap(
                    (FieldKind::Psi, m.index.mx, kk),
                    (FieldKind::Psi, m.index.mx, kk),
                    cfg.lx,
                )
                .unwrap()
            };
            let fd = 0.5 * (n(k + h) - n(k - h)) / (2.0 * h);
            let ga = table.g_a(m.index, m.index) * table.norm(m.index.mx);
            assert!((ga - fd).abs() < 1e-6 * fd.abs(), "{ga} vs {fd}");
        }
    }

    #[test]
    fn scan_finds_tuned_parametric_resonance() {
        let cfg = CavityConfig::new(1e-2, 1.0, 1.0, 1e12, 1e16).unwrap();
        let spec = ModeSpectrum::build(&cfg, 0.5, ModeCut::default()).unwrap();
        let target = spec.mode(mi(1, 1, 1)).unwrap();
        let rep = scan_resonances(&spec, 2.0 * target.omega_tilde, 1, Tolerance::Default).unwrap();
        let para: Vec<_> = rep
            .hits
            .iter()
            .filter(|h| h.kind == ResonanceKind::Parametric)
            .collect();
        assert_eq!(para.len(), 1);
        assert_eq!(para[0].mode, mi(1, 1, 1));
    }

    #[test]
    fn zero_tolerance_gives_empty_report_and_infinite_is_rejected() {
        let cfg = CavityConfig::new(1.0, 2f64.sqrt(), 3f64.sqrt(), 1e3, 1e5).unwrap();
        let spec = ModeSpectrum::build(&cfg, 0.5, ModeCut::default()).unwrap();
        let rep = scan_resonances(&spec, 1.2345, 10, Tolerance::Absolute(0.0)).unwrap();
        assert!(rep.hits.is_empty());
        assert!(scan_resonances(&spec, 1.0, 10, Tolerance::Absolute(f64::INFINITY)).is_err());
    }
}

//! Longitudinal mode spectrum of the cavity with a conducting film at the
//! midplane.
//!
//! The ψ-family wavenumbers solve `2k·cot(k·Lx/2) = −V`. The relation is
//! sometimes written with `tan⁻¹`; it must be read as the reciprocal of the
//! tangent. Only that reading has the right limits: `V → 0` gives the odd
//! free-cavity modes `k = (2m−1)π/Lx`, and `V → ∞` gives `k = 2mπ/Lx`, the
//! wavenumbers of the film-node (φ) family. The arctangent reading has
//! neither limit and is not supported.
//!
//! On branch `m` the root is written as `k = 2(mπ − δ)/Lx` with
//! `δ ∈ [0, π/2]`, which turns the equation into `V·sin δ = 2k·cos δ`. The
//! left side minus the right side is strictly increasing in `δ`, so the root
//! is unique and can be bracketed analytically without ever evaluating the
//! cotangent near its pole.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{DceError, Result};

/// Relative distance to the branch end below which a root is clamped.
pub const ENDPOINT_CLAMP: f64 = 1e-13;
/// Relative residual accepted by [`solve_k`].
pub const RESIDUAL_TOL: f64 = 1e-8;
const MAX_ITER: usize = 200;

/// Static problem definition: box dimensions and film conductivity range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityConfig {
    pub lx: f64,
    pub ly: f64,
    pub lz: f64,
    pub v0: f64,
    pub vmax: f64,
}

impl CavityConfig {
    pub fn new(lx: f64, ly: f64, lz: f64, v0: f64, vmax: f64) -> Result<Self> {
        let cfg = CavityConfig { lx, ly, lz, v0, vmax };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lx", self.lx), ("ly", self.ly), ("lz", self.lz)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(DceError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.v0.is_finite() && self.v0 > 0.0) {
            return Err(DceError::Config(format!("v0 must be positive, got {}", self.v0)));
        }
        if !(self.vmax.is_finite() && self.vmax >= self.v0) {
            return Err(DceError::Config(format!(
                "vmax must be finite and >= v0, got vmax={} v0={}",
                self.vmax, self.v0
            )));
        }
        Ok(())
    }

    /// `(V0·Lx) / (Vmax/V0)`; the linearized treatment needs this ≫ 1 and
    /// `Vmax/V0 > 1`.
    pub fn perturbative_ratio(&self) -> f64 {
        (self.v0 * self.lx) / (self.vmax / self.v0)
    }

    pub fn is_perturbative(&self) -> bool {
        self.v0 * self.lx > self.vmax / self.v0
    }

    /// Squared transverse wavenumber `(π my/Ly)² + (π mz/Lz)²`.
    pub fn transverse_sq(&self, my: u32, mz: u32) -> f64 {
        let qy = PI * my as f64 / self.ly;
        let qz = PI * mz as f64 / self.lz;
        qy * qy + qz * qz
    }

    /// Conductivity at drive level `f`: `V0 + (Vmax − V0)·f`.
    pub fn conductivity(&self, f: f64) -> f64 {
        self.v0 + (self.vmax - self.v0) * f
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeIndex {
    pub mx: u32,
    pub my: u32,
    pub mz: u32,
}

impl ModeIndex {
    pub fn new(mx: u32, my: u32, mz: u32) -> Result<Self> {
        if mx == 0 || my == 0 || mz == 0 {
            return Err(DceError::Domain(format!(
                "mode indices must be >= 1, got ({mx},{my},{mz})"
            )));
        }
        Ok(ModeIndex { mx, my, mz })
    }

    pub fn same_transverse(&self, other: &ModeIndex) -> bool {
        self.my == other.my && self.mz == other.mz
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.mx, self.my, self.mz)
    }
}

impl FromStr for ModeIndex {
    type Err = DceError;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s
            .trim()
            .trim_start_matches('(')
            .trim_end_matches(')')
            .split(',')
            .map(str::trim)
            .collect();
        if parts.len() != 3 {
            return Err(DceError::Config(format!("expected \"mx,my,mz\", got {s:?}")));
        }
        let mut v = [0u32; 3];
        for (slot, p) in v.iter_mut().zip(&parts) {
            *slot = p
                .parse()
                .map_err(|_| DceError::Config(format!("bad mode component {p:?} in {s:?}")))?;
        }
        ModeIndex::new(v[0], v[1], v[2]).map_err(|e| DceError::Config(e.to_string()))
    }
}

/// Highest retained index along each direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeCut {
    pub nx: u32,
    pub ny: u32,
    pub nz: u32,
}

impl Default for ModeCut {
    fn default() -> Self {
        ModeCut { nx: 5, ny: 3, nz: 3 }
    }
}

impl ModeCut {
    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 || self.nz == 0 {
            return Err(DceError::Config(format!(
                "mode cut must be >= 1 in each direction, got {}x{}x{}",
                self.nx, self.ny, self.nz
            )));
        }
        Ok(())
    }
}

/// Result of a single branch solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSolution {
    pub k: f64,
    /// Distance `δ = mπ − k·Lx/2` from the upper branch end.
    pub delta: f64,
    /// Relative residual of `V·sin δ − 2k·cos δ`.
    pub residual: f64,
    pub iterations: usize,
    /// Root was within [`ENDPOINT_CLAMP`] of `2mπ/Lx` and was clamped there.
    pub clamped: bool,
}

/// Root `k_m` of `2k·cot(k·Lx/2) = −V` on branch `m`, inside
/// `((2m−1)π/Lx, 2mπ/Lx]`.
pub fn solve_k(v: f64, lx: f64, m: u32) -> Result<f64> {
    solve_k_detailed(v, lx, m).map(|r| r.k)
}

pub fn solve_k_detailed(v: f64, lx: f64, m: u32) -> Result<RootSolution> {
    if v.is_nan() || v < 0.0 {
        return Err(DceError::Domain(format!("conductivity must be >= 0, got {v}")));
    }
    if !(lx.is_finite() && lx > 0.0) {
        return Err(DceError::Domain(format!("lx must be positive, got {lx}")));
    }
    if m == 0 {
        return Err(DceError::Domain("branch index must be >= 1".into()));
    }
    let m_pi = m as f64 * PI;
    let k_of = |delta: f64| 2.0 * (m_pi - delta) / lx;
    let k_top = 2.0 * m_pi / lx;

    if v == 0.0 {
        return Ok(RootSolution {
            k: k_of(PI / 2.0),
            delta: PI / 2.0,
            residual: 0.0,
            iterations: 0,
            clamped: false,
        });
    }
    if v.is_infinite() {
        return Ok(RootSolution {
            k: k_top,
            delta: 0.0,
            residual: 0.0,
            iterations: 0,
            clamped: true,
        });
    }

    // tan δ = 2k/V with k between the branch ends brackets δ tightly.
    let lo = (2.0 * k_of(PI / 2.0) / v).atan();
    let hi = (2.0 * k_top / v).atan();
    if hi / m_pi < ENDPOINT_CLAMP {
        return Ok(RootSolution {
            k: k_top,
            delta: hi,
            residual: 0.0,
            iterations: 0,
            clamped: true,
        });
    }

    // Below π/4 the root is measured from the closed end by δ; above it,
    // from the open end by u = π/2 − δ. Either way the small offset keeps
    // full relative precision.
    let from_open = lo > PI / 4.0;
    let k_open = |u: f64| 2.0 * ((m as f64 - 0.5) * PI + u) / lx;
    let (s, iterations, converged, residual) = if from_open {
        let h = |u: f64| 2.0 * k_open(u) * u.sin() - v * u.cos();
        let dh = |u: f64| 2.0 * k_open(u) * u.cos() + 4.0 / lx * u.sin() + v * u.sin();
        let (u, it, ok) = bracketed_newton(h, dh, PI / 2.0 - hi, PI / 2.0 - lo);
        (u, it, ok, h(u).abs() / (2.0 * k_open(u) * u.sin() + v * u.cos()))
    } else {
        let h = |d: f64| v * d.sin() - 2.0 * k_of(d) * d.cos();
        let dh = |d: f64| v * d.cos() + 2.0 * k_of(d) * d.sin() + 4.0 / lx * d.cos();
        let (d, it, ok) = bracketed_newton(h, dh, lo, hi);
        (d, it, ok, h(d).abs() / (v * d.sin() + 2.0 * k_of(d) * d.cos()))
    };
    let (k, delta) = if from_open {
        (k_open(s), PI / 2.0 - s)
    } else {
        (k_of(s), s)
    };
    if !converged || !(residual <= RESIDUAL_TOL) {
        return Err(DceError::NoConvergence {
            branch: m,
            lo: k_of(hi),
            hi: k_of(lo),
            residual,
        });
    }
    let clamped = !from_open && delta / m_pi < ENDPOINT_CLAMP;
    Ok(RootSolution {
        k: if clamped { k_top } else { k },
        delta,
        residual,
        iterations,
        clamped,
    })
}

/// Safeguarded Newton for an increasing `h` with a sign change on
/// `[lo, hi]`, `0 < lo`. Returns the root, iterations and convergence.
fn bracketed_newton<H, D>(h: H, dh: D, mut lo: f64, mut hi: f64) -> (f64, usize, bool)
where
    H: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut s = 0.5 * (lo + hi);
    for iterations in 1..=MAX_ITER {
        let hs = h(s);
        if hs == 0.0 {
            return (s, iterations, true);
        }
        if hs > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let newton = s - hs / dh(s);
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - s).abs();
        s = next;
        if step <= 1e-15 * s || hi - lo <= 1e-16 * hi {
            return (s, iterations, true);
        }
    }
    (s, MAX_ITER, false)
}

/// `dk/dV` along a branch, from implicit differentiation of the
/// eigenvalue equation.
pub fn dk_dv(k: f64, v: f64, lx: f64) -> f64 {
    k / (v + lx * v * v / 4.0 + lx * k * k)
}

/// `d²k/dV²` along a branch.
pub fn d2k_dv2(k: f64, v: f64, lx: f64) -> f64 {
    let d = v + lx * v * v / 4.0 + lx * k * k;
    let k1 = k / d;
    let d1 = 1.0 + lx * v / 2.0 + 2.0 * lx * k * k1;
    (k1 * d - k * d1) / (d * d)
}

/// Linearized relative modulation amplitude `ε_n` of the wavenumber over the
/// conductivity swing `V0 → Vmax`.
pub fn epsilon_n(cfg: &CavityConfig, k0: f64) -> f64 {
    if !cfg.is_perturbative() {
        log::warn!(
            "perturbative treatment questionable: V0*Lx = {:e} is not >> Vmax/V0 = {:e}",
            cfg.v0 * cfg.lx,
            cfg.vmax / cfg.v0
        );
    }
    (cfg.vmax - cfg.v0) / (cfg.lx * k0 * k0 + cfg.v0 * (1.0 + cfg.v0 * cfg.lx / 4.0))
}

/// A drive-coupled (ψ-family) mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiMode {
    pub index: ModeIndex,
    pub k0: f64,
    pub epsilon: f64,
    pub omega_bar: f64,
    pub omega_tilde: f64,
    /// `(π my/Ly)² + (π mz/Lz)²`.
    pub transverse_sq: f64,
    pub clamped: bool,
}

impl PsiMode {
    /// Linearized wavenumber at drive level `f`.
    pub fn k_at(&self, f: f64) -> f64 {
        self.k0 * (1.0 + self.epsilon * f)
    }

    /// Mode from an explicit wavenumber, modulation depth and transverse
    /// part; `f0` renormalizes the frequency.
    pub fn from_parts(index: ModeIndex, k0: f64, epsilon: f64, transverse_sq: f64, f0: f64) -> Self {
        let kt = k0 * (1.0 + epsilon * f0);
        PsiMode {
            index,
            k0,
            epsilon,
            omega_bar: (k0 * k0 + transverse_sq).sqrt(),
            omega_tilde: (kt * kt + transverse_sq).sqrt(),
            transverse_sq,
            clamped: false,
        }
    }
}

/// A film-node (φ-family) mode; never couples to the drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiMode {
    pub index: ModeIndex,
    pub k: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Psi,
    Phi,
}

/// Mode table at conductivity `V0` with drive mean `f0`.
#[derive(Debug, Clone)]
pub struct ModeSpectrum {
    pub cfg: CavityConfig,
    pub f0: f64,
    pub cut: ModeCut,
    pub psi: Vec<PsiMode>,
    pub phi: Vec<PhiMode>,
}

impl ModeSpectrum {
    pub fn build(cfg: &CavityConfig, f0: f64, cut: ModeCut) -> Result<Self> {
        cfg.validate()?;
        cut.validate()?;
        let mut roots = Vec::with_capacity(cut.nx as usize);
        for mx in 1..=cut.nx {
            roots.push(solve_k_detailed(cfg.v0, cfg.lx, mx)?);
        }
        let mut psi = Vec::new();
        let mut phi = Vec::new();
        for mx in 1..=cut.nx {
            let root = roots[mx as usize - 1];
            let eps = epsilon_n(cfg, root.k);
            for my in 1..=cut.ny {
                for mz in 1..=cut.nz {
                    let index = ModeIndex { mx, my, mz };
                    let q2 = cfg.transverse_sq(my, mz);
                    let mut mode = PsiMode::from_parts(index, root.k, eps, q2, f0);
                    mode.clamped = root.clamped;
                    psi.push(mode);
                    let kphi = 2.0 * PI * mx as f64 / cfg.lx;
                    phi.push(PhiMode {
                        index,
                        k: kphi,
                        omega: (kphi * kphi + q2).sqrt(),
                    });
                }
            }
        }
        Ok(ModeSpectrum {
            cfg: *cfg,
            f0,
            cut,
            psi,
            phi,
        })
    }

    /// Spectrum from explicit ψ modes, for synthetic studies. φ modes are
    /// left empty.
    pub fn from_parts(cfg: CavityConfig, f0: f64, psi: Vec<PsiMode>) -> Self {
        let cut = ModeCut {
            nx: psi.iter().map(|m| m.index.mx).max().unwrap_or(1),
            ny: psi.iter().map(|m| m.index.my).max().unwrap_or(1),
            nz: psi.iter().map(|m| m.index.mz).max().unwrap_or(1),
        };
        ModeSpectrum {
            cfg,
            f0,
            cut,
            psi,
            phi: Vec::new(),
        }
    }

    pub fn position(&self, index: ModeIndex) -> Option<usize> {
        self.psi.iter().position(|m| m.index == index)
    }

    pub fn mode(&self, index: ModeIndex) -> Result<&PsiMode> {
        self.position(index)
            .map(|i| &self.psi[i])
            .ok_or_else(|| DceError::Domain(format!("mode {index} is outside the spectrum cut")))
    }

    /// Positions of the ψ modes sharing the transverse indices of `index`,
    /// ordered by `mx`.
    pub fn block(&self, index: ModeIndex) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.psi.len())
            .filter(|&i| self.psi[i].index.same_transverse(&index))
            .collect();
        out.sort_by_key(|&i| self.psi[i].index.mx);
        out
    }

    /// Groups of positions with equal transverse indices.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut keys: Vec<(u32, u32)> = self.psi.iter().map(|m| (m.index.my, m.index.mz)).collect();
        keys.sort_unstable();
        keys.dedup();
        keys.into_iter()
            .map(|(my, mz)| self.block(ModeIndex { mx: 1, my, mz }))
            .collect()
    }

    pub fn omega_max(&self) -> f64 {
        self.psi.iter().map(|m| m.omega_tilde).fold(0.0, f64::max)
    }
}

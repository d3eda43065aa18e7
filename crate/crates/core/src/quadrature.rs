//! Composite Gauss–Legendre quadrature with panel doubling.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{DceError, Result};

/// Nodes per panel.
pub const ORDER: usize = 16;
/// Default agreement required between successive panel doublings,
/// relative to `∫|f|`.
pub const DEFAULT_TOL: f64 = 1e-12;
const MAX_LEVEL: u32 = 14;

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn standard() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(ORDER))
    }

    /// Composite rule over `panels` equal panels, returning `(∫f, ∫|f|)`.
    pub fn composite<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64, panels: usize) -> (f64, f64) {
        let width = (b - a) / panels as f64;
        let half = 0.5 * width;
        let mut sum = 0.0;
        let mut abs = 0.0;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * width;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                let v = f(mid + half * x);
                sum += w * v;
                abs += w * v.abs();
            }
        }
        (sum * half, abs * half)
    }
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `∫_a^b f` to relative tolerance `tol` (against `∫|f|`), doubling panels
/// until two successive estimates agree.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    integrate_from(f, a, b, tol, 1)
}

/// As [`integrate`], starting from `panels` panels.
pub fn integrate_from<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, panels: usize) -> Result<f64> {
    let rule = GaussLegendre::standard();
    let mut panels = panels.max(1);
    let (mut prev, _) = rule.composite(&f, a, b, panels);
    let mut change = f64::INFINITY;
    for _ in 0..MAX_LEVEL {
        panels *= 2;
        let (cur, abs) = rule.composite(&f, a, b, panels);
        change = (cur - prev).abs();
        if change <= tol * abs.max(f64::MIN_POSITIVE) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(DceError::Quadrature { estimate: prev, change })
}

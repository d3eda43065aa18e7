//! Photon numbers from slow amplitudes and exponential-rate fits.

use std::io::Write;

use serde::Serialize;

use crate::error::{DceError, Result};
use crate::msa::AmplitudeTrajectory;
use crate::spectrum::ModeIndex;
use crate::units::{meters_to_seconds, rate_to_hz};

/// Scientific notation with 12 significant digits.
pub fn fmt_sci(x: f64) -> String {
    format!("{x:.11e}")
}

/// Fewest e-folds of `N` over the fit window for growth to be claimed.
pub const MIN_EFOLDS: f64 = 1.0;
/// Coefficient of determination required of a growth fit.
pub const MIN_R_SQUARED: f64 = 0.98;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FitOutcome {
    /// `N ∝ exp(rate·t)` over the final half of the grid.
    Growing { rate: f64, r_squared: f64 },
    /// No exponential growth; reported rate is 0.
    Bounded { max_n: f64 },
    /// `N < 10ε²` everywhere.
    Refused { max_n: f64 },
}

impl FitOutcome {
    pub fn rate(&self) -> f64 {
        match self {
            FitOutcome::Growing { rate, .. } => *rate,
            _ => 0.0,
        }
    }

    pub fn is_growing(&self) -> bool {
        matches!(self, FitOutcome::Growing { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            FitOutcome::Growing { .. } => "growing",
            FitOutcome::Bounded { .. } => "bounded",
            FitOutcome::Refused { .. } => "refused",
        }
    }
}

/// Least-squares slope of `ln n` against `t` over the final half of the
/// samples. Errors when `n < 10ε²` at every sample.
pub fn fit_rate(t: &[f64], n: &[f64], eps: f64) -> Result<FitOutcome> {
    let max_n = n.iter().copied().fold(0.0, f64::max);
    if !(max_n >= 10.0 * eps * eps) {
        return Err(DceError::Precondition(format!(
            "photon number never reaches 10*eps^2 = {:e} (max {:e}); nothing to fit",
            10.0 * eps * eps,
            max_n
        )));
    }
    let start = t.len() / 2;
    let (ts, ns) = (&t[start..], &n[start..]);
    if ts.len() < 3 || ns.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Ok(FitOutcome::Bounded { max_n });
    }
    let m = ts.len() as f64;
    let ys: Vec<f64> = ns.iter().map(|v| v.ln()).collect();
    let tm = ts.iter().sum::<f64>() / m;
    let ym = ys.iter().sum::<f64>() / m;
    let mut stt = 0.0;
    let mut sty = 0.0;
    let mut syy = 0.0;
    for (x, y) in ts.iter().zip(&ys) {
        stt += (x - tm) * (x - tm);
        sty += (x - tm) * (y - ym);
        syy += (y - ym) * (y - ym);
    }
    let slope = sty / stt;
    let r_squared = if syy > 0.0 { sty * sty / (stt * syy) } else { 0.0 };
    let window = ts[ts.len() - 1] - ts[0];
    if slope > 0.0 && slope * window >= MIN_EFOLDS && r_squared >= MIN_R_SQUARED {
        Ok(FitOutcome::Growing { rate: slope, r_squared })
    } else {
        Ok(FitOutcome::Bounded { max_n })
    }
}

/// `⟨N⟩` per observed mode over a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonRecord {
    pub eps_ref: f64,
    /// Slow time `τ = ε_ref t`.
    pub tau: Vec<f64>,
    /// Natural time `t` (m).
    pub t: Vec<f64>,
    pub modes: Vec<ModeIndex>,
    /// `n[mode][sample]`.
    pub n: Vec<Vec<f64>>,
    /// `sinh²` approximant, where a parametric closed form applies.
    pub approx: Vec<Option<Vec<f64>>>,
    /// Predicted `r_cond` per mode (per natural time), where known.
    pub predicted: Vec<Option<f64>>,
    /// Fit per mode; `Err` text when refused.
    pub fits: Vec<std::result::Result<FitOutcome, String>>,
    /// Evolution stopped early at the overflow guard.
    pub truncated: bool,
}

impl PhotonRecord {
    pub fn mode_position(&self, index: ModeIndex) -> Option<usize> {
        self.modes.iter().position(|m| *m == index)
    }

    pub fn series(&self, index: ModeIndex) -> Option<&[f64]> {
        self.mode_position(index).map(|i| self.n[i].as_slice())
    }

    pub fn fit(&self, index: ModeIndex) -> Option<FitOutcome> {
        self.mode_position(index)
            .and_then(|i| self.fits[i].as_ref().ok().copied())
    }

    /// Fitted rate of `index`, 0 unless growing.
    pub fn fitted_rate(&self, index: ModeIndex) -> f64 {
        self.fit(index).map(|f| f.rate()).unwrap_or(0.0)
    }

    pub fn max_n(&self, index: ModeIndex) -> Option<f64> {
        self.series(index).map(|s| s.iter().copied().fold(0.0, f64::max))
    }

    /// Long-format CSV. With `other`, adds that record's `N` and
    /// `|N − N_other|/N_other` on matching samples.
    pub fn write_csv<W: Write>(&self, w: W, other: Option<&PhotonRecord>) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec![
            "t_seconds",
            "tau",
            "mx",
            "my",
            "mz",
            "N",
            "N_sinh2_approx",
            "fitted_rate",
            "fit_status",
        ];
        if other.is_some() {
            header.extend(["N_direct", "rel_diff"]);
        }
        wtr.write_record(&header)?;
        for (mi, mode) in self.modes.iter().enumerate() {
            let fit = &self.fits[mi];
            let (rate, status) = match fit {
                Ok(f) => (rate_to_hz(f.rate()), f.label()),
                Err(_) => (0.0, "refused"),
            };
            let other_series = other.and_then(|o| o.series(*mode));
            for (i, (&t, &tau)) in self.t.iter().zip(&self.tau).enumerate() {
                let mut row = vec![
                    fmt_sci(meters_to_seconds(t)),
                    fmt_sci(tau),
                    mode.mx.to_string(),
                    mode.my.to_string(),
                    mode.mz.to_string(),
                    fmt_sci(self.n[mi][i]),
                    self.approx[mi].as_ref().map(|a| fmt_sci(a[i])).unwrap_or_default(),
                    fmt_sci(rate),
                    status.to_string(),
                ];
                if other.is_some() {
                    match other_series.and_then(|s| s.get(i)) {
                        Some(&nd) => {
                            row.push(fmt_sci(nd));
                            row.push(fmt_sci((self.n[mi][i] - nd).abs() / nd));
                        }
                        None => {
                            row.push(String::new());
                            row.push(String::new());
                        }
                    }
                }
                wtr.write_record(&row)?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

/// `⟨N_n⟩ = Σ_s 2ω̄_n |A_n^(s)|²` with a rate fit per mode, using each
/// mode's own `ε` for the refusal threshold.
pub fn photon_number(traj: &AmplitudeTrajectory, eps: &[f64]) -> PhotonRecord {
    let nm = traj.modes.len();
    let ns = traj.seeds.len();
    let mut n = vec![Vec::with_capacity(traj.tau.len()); nm];
    for state in &traj.states {
        for (mi, series) in n.iter_mut().enumerate() {
            let sum: f64 = (0..ns).map(|s| state.a[mi * ns + s].norm_sqr()).sum();
            series.push(2.0 * traj.omega_bar[mi] * sum);
        }
    }
    let t: Vec<f64> = traj.tau.iter().map(|tau| tau / traj.eps_ref).collect();
    let fits = n
        .iter()
        .zip(eps)
        .map(|(series, &e)| fit_rate(&t, series, e).map_err(|err| err.to_string()))
        .collect();
    PhotonRecord {
        eps_ref: traj.eps_ref,
        tau: traj.tau.clone(),
        t,
        modes: traj.modes.clone(),
        n,
        approx: vec![None; nm],
        predicted: vec![None; nm],
        fits,
        truncated: traj.truncated,
    }
}

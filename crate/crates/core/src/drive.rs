//! Periodic excitation profile `f(t)` of the film and its Fourier data.
//!
//! Harmonics follow `f(t) = f0 + Σ_j f_j·cos(jΩt + c_j)` with `f_j ≥ 0` and
//! `c_j ∈ (−π, π]`. In terms of the cosine/sine coefficients,
//! `l_j = f_j cos c_j` and `h_j = −f_j sin c_j`.

use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{DceError, Result};
use crate::spectrum::{solve_k, ModeSpectrum};
use crate::units::seconds_to_meters;

/// Minimum samples per period of the highest retained harmonic.
pub const MIN_SAMPLES_PER_HARMONIC: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// Rise `t/τe` on `(0, τe]`, fall `(T−t)/(T−τe)` on `(τe, T]`.
    LinearRamp,
    /// `(t, f)` samples over one period starting at `t = 0`, linearly
    /// interpolated.
    Sampled(Vec<(f64, f64)>),
}

/// One period of the excitation-relaxation cycle. Times are natural units
/// (meters).
#[derive(Debug, Clone, PartialEq)]
pub struct DriveProfile {
    pub period: f64,
    pub tau_e: f64,
    pub shape: Shape,
}

impl DriveProfile {
    pub fn linear_ramp(period: f64, tau_e: f64) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(DceError::Config(format!("period must be positive, got {period}")));
        }
        if !(tau_e > 0.0 && tau_e < period) {
            return Err(DceError::Config(format!(
                "excitation time must satisfy 0 < tau_e < T, got tau_e={tau_e} T={period}"
            )));
        }
        Ok(DriveProfile {
            period,
            tau_e,
            shape: Shape::LinearRamp,
        })
    }

    /// Profile from samples in natural time. The first sample must be at
    /// `t = 0`; the last one closes the period.
    pub fn sampled(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(DceError::Config("sampled profile needs at least 2 samples".into()));
        }
        if samples[0].0 != 0.0 {
            return Err(DceError::Config(format!(
                "sampled profile must start at t=0, got t={}",
                samples[0].0
            )));
        }
        for (i, w) in samples.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(DceError::Config(format!(
                    "sample times must increase strictly (row {})",
                    i + 2
                )));
            }
        }
        for (i, &(_, f)) in samples.iter().enumerate() {
            if !(f.is_finite() && f >= 0.0) {
                return Err(DceError::Config(format!(
                    "drive level must be finite and non-negative (row {}), got {f}",
                    i + 1
                )));
            }
        }
        let period = samples.last().map(|s| s.0).unwrap_or(0.0);
        let tau_e = samples
            .iter()
            .fold(
                (0.0, f64::NEG_INFINITY),
                |acc, &(t, f)| if f > acc.1 { (t, f) } else { acc },
            )
            .0;
        let first = samples[0].1;
        let last = samples[samples.len() - 1].1;
        if (first - last).abs() > 1e-9 {
            log::warn!("sampled profile is not periodic: f(0)={first}, f(T)={last}");
        }
        if first.abs() > 1e-9 {
            log::warn!("sampled profile does not vanish at t=0 (f={first})");
        }
        Ok(DriveProfile {
            period,
            tau_e,
            shape: Shape::Sampled(samples),
        })
    }

    /// Two-column CSV `(t_seconds, f)` with a header row.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            t_seconds: f64,
            f: f64,
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut samples = Vec::new();
        for row in rdr.deserialize() {
            let row: Row = row?;
            samples.push((seconds_to_meters(row.t_seconds), row.f));
        }
        Self::sampled(samples)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file =
            std::fs::File::open(path).map_err(|e| DceError::Config(format!("cannot open {}: {e}", path.display())))?;
        Self::from_csv_reader(file)
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// `f(t)` with periodic extension.
    pub fn eval_f(&self, t: f64) -> f64 {
        let s = t.rem_euclid(self.period);
        match &self.shape {
            Shape::LinearRamp => {
                if s <= self.tau_e {
                    s / self.tau_e
                } else {
                    (self.period - s) / (self.period - self.tau_e)
                }
            }
            Shape::Sampled(samples) => interpolate(samples, s),
        }
    }

    /// Ramp with both kinks replaced by quadratic blends of total width
    /// `width`, returning `(f, ḟ, f̈)`. The result is C¹ with a bounded
    /// second derivative. Only defined for the linear ramp.
    pub fn eval_smoothed(&self, t: f64, width: f64) -> Result<(f64, f64, f64)> {
        if self.shape != Shape::LinearRamp {
            return Err(DceError::Precondition(
                "kink smoothing is only available for the linear ramp".into(),
            ));
        }
        let half = 0.5 * width;
        if !(width > 0.0 && half < self.tau_e && half < self.period - self.tau_e) {
            return Err(DceError::Precondition(format!(
                "smoothing width {width} must be positive and fit inside both ramps"
            )));
        }
        let rise = 1.0 / self.tau_e;
        let fall = -1.0 / (self.period - self.tau_e);
        let s = t.rem_euclid(self.period);
        // kink at t = 0 (mod T): fall → rise
        let d0 = if s < 0.5 * self.period { s } else { s - self.period };
        if d0.abs() < half {
            let u = d0 + half;
            let f = fall * d0 + (rise - fall) * u * u / (2.0 * width);
            let df = fall + (rise - fall) * u / width;
            return Ok((f, df, (rise - fall) / width));
        }
        // kink at τe: rise → fall
        let d1 = s - self.tau_e;
        if d1.abs() < half {
            let u = d1 + half;
            let f = 1.0 + rise * d1 + (fall - rise) * u * u / (2.0 * width);
            let df = rise + (fall - rise) * u / width;
            return Ok((f, df, (fall - rise) / width));
        }
        if s <= self.tau_e {
            Ok((s * rise, rise, 0.0))
        } else {
            Ok(((self.period - s) / (self.period - self.tau_e), fall, 0.0))
        }
    }

    /// Breakpoints of the piecewise-linear profile over one period.
    fn breakpoints(&self) -> Vec<(f64, f64)> {
        match &self.shape {
            Shape::LinearRamp => vec![(0.0, 0.0), (self.tau_e, 1.0), (self.period, 0.0)],
            Shape::Sampled(samples) => samples.clone(),
        }
    }

    /// Mean of `f²` over one period, exact for the piecewise-linear profile.
    pub fn mean_square(&self) -> f64 {
        let pts = self.breakpoints();
        let integral: f64 = pts
            .windows(2)
            .map(|w| {
                let (t0, a) = w[0];
                let (t1, b) = w[1];
                (t1 - t0) * (a * a + a * b + b * b) / 3.0
            })
            .sum();
        integral / self.period
    }
}

fn interpolate(samples: &[(f64, f64)], s: f64) -> f64 {
    let idx = samples.partition_point(|p| p.0 <= s);
    if idx == 0 {
        return samples[0].1;
    }
    if idx >= samples.len() {
        return samples[samples.len() - 1].1;
    }
    let (t0, f0) = samples[idx - 1];
    let (t1, f1) = samples[idx];
    f0 + (f1 - f0) * (s - t0) / (t1 - t0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub j: u32,
    pub amplitude: f64,
    pub phase: f64,
}

impl Harmonic {
    /// Amplitude/phase form from the cosine and sine coefficients.
    pub fn from_cos_sin(j: u32, l: f64, h: f64) -> Self {
        let amplitude = l.hypot(h);
        let mut phase = (-h).atan2(l);
        if phase <= -PI {
            phase += 2.0 * PI;
        }
        Harmonic { j, amplitude, phase }
    }
}

/// Truncated Fourier series of a drive profile.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    /// Base angular frequency `Ω = 2π/T` (m⁻¹).
    pub omega: f64,
    pub f0: f64,
    pub harmonics: Vec<Harmonic>,
}

impl FourierSeries {
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn j_max(&self) -> u32 {
        self.harmonics.iter().map(|h| h.j).max().unwrap_or(0)
    }

    pub fn harmonic(&self, j: u32) -> Option<&Harmonic> {
        self.harmonics.iter().find(|h| h.j == j)
    }

    /// Same mean, only harmonic `j` kept.
    pub fn single(&self, j: u32) -> Result<Self> {
        let h = *self
            .harmonic(j)
            .ok_or_else(|| DceError::Domain(format!("harmonic {j} is not in the series")))?;
        Ok(FourierSeries {
            omega: self.omega,
            f0: self.f0,
            harmonics: vec![h],
        })
    }

    pub fn truncated(&self, j_max: u32) -> Self {
        FourierSeries {
            omega: self.omega,
            f0: self.f0,
            harmonics: self.harmonics.iter().copied().filter(|h| h.j <= j_max).collect(),
        }
    }

    /// Same coefficients at a different base frequency.
    pub fn retuned(&self, omega: f64) -> Self {
        FourierSeries { omega, ..self.clone() }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_with_derivatives(t).0
    }

    /// `(f, ḟ, f̈)` of the partial sum.
    pub fn eval_with_derivatives(&self, t: f64) -> (f64, f64, f64) {
        let mut f = self.f0;
        let mut df = 0.0;
        let mut d2f = 0.0;
        for h in &self.harmonics {
            let w = h.j as f64 * self.omega;
            let (s, c) = (w * t + h.phase).sin_cos();
            f += h.amplitude * c;
            df -= h.amplitude * w * s;
            d2f -= h.amplitude * w * w * c;
        }
        (f, df, d2f)
    }

    /// `f0² + ½Σ f_j²`, which equals the period mean of the partial sum
    /// squared.
    pub fn parseval_sum(&self) -> f64 {
        self.f0 * self.f0 + 0.5 * self.harmonics.iter().map(|h| h.amplitude * h.amplitude).sum::<f64>()
    }
}

/// Closed-form Fourier data of the linear ramp (natural time units).
pub fn fourier_ramp(period: f64, tau_e: f64, j_max: u32) -> Result<FourierSeries> {
    DriveProfile::linear_ramp(period, tau_e)?;
    let r = tau_e / period;
    let harmonics = (1..=j_max)
        .map(|j| {
            let jf = j as f64;
            let denom = 2.0 * PI * PI * jf * jf * r * (1.0 - r);
            let l = ((2.0 * PI * jf * r).cos() - 1.0) / denom;
            let h = (2.0 * PI * jf * r).sin() / denom;
            let x = PI * jf * r;
            let amplitude = (x.sin() / x).abs() / (PI * jf * (1.0 - r));
            let mut phase = (-h).atan2(l);
            if phase <= -PI {
                phase += 2.0 * PI;
            }
            Harmonic { j, amplitude, phase }
        })
        .collect();
    Ok(FourierSeries {
        omega: 2.0 * PI / period,
        f0: 0.5,
        harmonics,
    })
}

/// Fourier data of any profile by exact integration of its piecewise-linear
/// interpolant against `cos(jΩt)` and `sin(jΩt)`.
pub fn fourier_numeric(profile: &DriveProfile, j_max: u32) -> Result<FourierSeries> {
    let pts = profile.breakpoints();
    if let Shape::Sampled(_) = profile.shape {
        let needed = MIN_SAMPLES_PER_HARMONIC * j_max as usize;
        if pts.len() < needed {
            return Err(DceError::Resolution {
                samples: pts.len(),
                harmonic: j_max,
                needed,
            });
        }
    }
    let period = profile.period;
    let omega = 2.0 * PI / period;
    let mean: f64 = pts
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum::<f64>()
        / period;
    let harmonics = (1..=j_max)
        .map(|j| {
            let w = j as f64 * omega;
            let integral: Complex64 = pts.windows(2).map(|seg| segment_integral(seg[0], seg[1], w)).sum();
            // ∫ f e^{iωt} = ∫ f cos + i ∫ f sin
            let l = 2.0 / period * integral.re;
            let h = 2.0 / period * integral.im;
            Harmonic::from_cos_sin(j, l, h)
        })
        .collect();
    Ok(FourierSeries {
        omega,
        f0: mean,
        harmonics,
    })
}

/// `∫_{t0}^{t1} f(t) e^{iwt} dt` for `f` linear between the endpoints.
fn segment_integral((t0, fa): (f64, f64), (t1, fb): (f64, f64), w: f64) -> Complex64 {
    let h = t1 - t0;
    let slope = (fb - fa) / h;
    let theta = w * h;
    // E1 = ∫_0^h e^{iwτ} dτ, E2 = ∫_0^h τ e^{iwτ} dτ
    let (e1, e2) = if theta.abs() < 1e-2 {
        let mut e1 = Complex64::new(0.0, 0.0);
        let mut e2 = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        let mut fact1 = 1.0;
        let mut fact2 = 2.0;
        for n in 0..10 {
            e1 += term / fact1;
            e2 += term / fact2;
            term *= Complex64::new(0.0, theta);
            fact1 *= (n + 2) as f64;
            fact2 *= (n + 3) as f64;
        }
        (e1 * h, e2 * h * h)
    } else {
        let (s, c) = theta.sin_cos();
        let em1 = Complex64::new(c - 1.0, s);
        let iw = Complex64::new(0.0, w);
        let e1 = em1 / iw;
        let e2 = Complex64::new(c, s) * h / iw - em1 / (iw * iw);
        (e1, e2)
    };
    Complex64::from_polar(1.0, w * t0) * (e1 * fa + e2 * slope)
}

/// Conductivity and wavenumbers at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ConductivityAt {
    pub f: f64,
    pub v: f64,
    /// Linearized `k0(1 + ε f)` per branch `mx = 1..=nx`.
    pub k_linear: Vec<f64>,
    /// Exact roots at `V(t)` per branch, when requested.
    pub k_exact: Option<Vec<f64>>,
}

pub fn conductivity_at(spectrum: &ModeSpectrum, profile: &DriveProfile, t: f64, exact: bool) -> Result<ConductivityAt> {
    let f = profile.eval_f(t);
    let v = spectrum.cfg.conductivity(f);
    let mut k_linear = Vec::new();
    let mut k_exact = exact.then(Vec::new);
    for mx in 1..=spectrum.cut.nx {
        let mode = spectrum
            .psi
            .iter()
            .find(|m| m.index.mx == mx)
            .ok_or_else(|| DceError::Domain(format!("branch {mx} missing from spectrum")))?;
        k_linear.push(mode.k_at(f));
        if let Some(ks) = k_exact.as_mut() {
            ks.push(solve_k(v, spectrum.cfg.lx, mx)?);
        }
    }
    Ok(ConductivityAt {
        f,
        v,
        k_linear,
        k_exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{CavityConfig, ModeCut};

    #[test]
    fn ramp_values() {
        let p = DriveProfile::linear_ramp(10.0, 1.0).unwrap();
        assert_eq!(p.eval_f(1.0), 1.0);
        assert_eq!(p.eval_f(0.0), 0.0);
        assert!((p.eval_f(10.5) - 0.5).abs() < 1e-15);
        assert!((p.eval_f(5.5) - 0.5).abs() < 1e-15);
        assert!((p.mean_square() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ramp_rejects_bad_excitation_time() {
        assert!(DriveProfile::linear_ramp(1.0, 1.0).is_err());
        assert!(DriveProfile::linear_ramp(1.0, 0.0).is_err());
        assert!(DriveProfile::linear_ramp(-1.0, 0.5).is_err());
    }

    #[test]
    fn short_pulse_limit_of_first_harmonic() {
        let s = fourier_ramp(1.0, 1e-6, 3).unwrap();
        assert_eq!(s.f0, 0.5);
        assert!((s.harmonics[0].amplitude - 1.0 / PI).abs() < 1e-5);
    }

    #[test]
    fn closed_form_amplitude_matches_cos_sin_pair() {
        let s = fourier_ramp(3.0, 0.4, 40).unwrap();
        let r: f64 = 0.4 / 3.0;
        for h in &s.harmonics {
            let j = h.j as f64;
            let denom = 2.0 * PI * PI * j * j * r * (1.0 - r);
            let l = ((2.0 * PI * j * r).cos() - 1.0) / denom;
            let hs = (2.0 * PI * j * r).sin() / denom;
            assert!((h.amplitude - l.hypot(hs)).abs() < 1e-14);
            assert!((h.amplitude * h.phase.cos() - l).abs() < 1e-14);
            assert!((-h.amplitude * h.phase.sin() - hs).abs() < 1e-14);
            assert!(h.phase > -PI && h.phase <= PI);
        }
    }

    #[test]
    fn numeric_ramp_matches_closed_form() {
        let (period, tau_e) = (2.0, 0.2);
        let n = 10_000;
        let p = DriveProfile::linear_ramp(period, tau_e).unwrap();
        let samples: Vec<(f64, f64)> = (0..=n)
            .map(|i| period * i as f64 / n as f64)
            .map(|t| (t, p.eval_f(t)))
            .collect();
        let sp = DriveProfile::sampled(samples).unwrap();
        let num = fourier_numeric(&sp, 10).unwrap();
        let exact = fourier_ramp(period, tau_e, 10).unwrap();
        assert!((num.f0 - 0.5).abs() < 1e-6);
        for (a, b) in num.harmonics.iter().zip(&exact.harmonics) {
            let za = Complex64::from_polar(a.amplitude, a.phase);
            let zb = Complex64::from_polar(b.amplitude, b.phase);
            assert!((za - zb).norm() < 1e-6, "j={}", a.j);
        }
    }

    #[test]
    fn numeric_handles_zero_and_cosine() {
        let n = 4000;
        let zero: Vec<(f64, f64)> = (0..=n).map(|i| (i as f64 / n as f64, 0.0)).collect();
        let s = fourier_numeric(&DriveProfile::sampled(zero).unwrap(), 5).unwrap();
        assert_eq!(s.f0, 0.0);
        assert!(s.harmonics.iter().all(|h| h.amplitude == 0.0));

        let cosine: Vec<(f64, f64)> = (0..=n)
            .map(|i| i as f64 / n as f64)
            .map(|t| (t, 0.5 * (1.0 + (2.0 * PI * t).cos())))
            .collect();
        let s = fourier_numeric(&DriveProfile::sampled(cosine).unwrap(), 5).unwrap();
        assert!((s.f0 - 0.5).abs() < 1e-6);
        assert!((s.harmonics[0].amplitude - 0.5).abs() < 1e-6);
        assert!(s.harmonics[0].phase.abs() < 1e-6);
        for h in &s.harmonics[1..] {
            assert!(h.amplitude < 1e-6, "j={} a={}", h.j, h.amplitude);
        }
    }

    #[test]
    fn too_few_samples_is_a_resolution_error() {
        let samples: Vec<(f64, f64)> = (0..=20).map(|i| (i as f64, 0.0)).collect();
        let p = DriveProfile::sampled(samples).unwrap();
        assert!(matches!(fourier_numeric(&p, 3), Err(DceError::Resolution { .. })));
    }

    #[test]
    fn smoothed_ramp_is_c1() {
        let p = DriveProfile::linear_ramp(1.0, 0.1).unwrap();
        let w = 0.01;
        let h = 1e-9;
        for &t in &[-0.005, 0.005, 0.095, 0.105, 0.0, 0.1, 0.5, 0.999] {
            let (a, da, _) = p.eval_smoothed(t - h, w).unwrap();
            let (b, db, _) = p.eval_smoothed(t + h, w).unwrap();
            assert!((a - b).abs() < 1e-6, "t={t}");
            assert!((da - db).abs() < 1e-4 * da.abs().max(1.0), "t={t}");
        }
        assert_eq!(p.eval_smoothed(0.5, w).unwrap().0, p.eval_f(0.5));
    }

    #[test]
    fn conductivity_limits() {
        let cfg = CavityConfig::new(1.0, 1.0, 1.0, 100.0, 200.0).unwrap();
        let spec = ModeSpectrum::build(&cfg, 0.5, ModeCut { nx: 2, ny: 1, nz: 1 }).unwrap();
        let p = DriveProfile::linear_ramp(4.0, 1.0).unwrap();
        let at0 = conductivity_at(&spec, &p, 0.0, true).unwrap();
        assert_eq!(at0.v, 100.0);
        assert_eq!(at0.k_linear[0], spec.psi[0].k0);
        assert!((at0.k_exact.unwrap()[0] - spec.psi[0].k0).abs() < 1e-12);
        assert_eq!(conductivity_at(&spec, &p, 1.0, false).unwrap().v, 200.0);
        assert_eq!(conductivity_at(&spec, &p, 0.5, false).unwrap().v, 150.0);
    }

    #[test]
    fn csv_ingest() {
        let text = "t_seconds,f\n0,0\n1e-10,1\n4e-10,0\n";
        let p = DriveProfile::from_csv_reader(text.as_bytes()).unwrap();
        assert!((p.period - seconds_to_meters(4e-10)).abs() < 1e-15);
        assert!((p.eval_f(seconds_to_meters(0.5e-10)) - 0.5).abs() < 1e-12);
        assert!(DriveProfile::from_csv_reader("t_seconds,f\n0,0\n0,1\n".as_bytes()).is_err());
    }
}

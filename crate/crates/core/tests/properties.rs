use std::f64::consts::PI;

use cavity_dce::coupling::scan_resonances;
use cavity_dce::msa::uniform_grid;
use cavity_dce::*;
use proptest::prelude::*;

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.log10()..hi.log10()).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn root_lies_on_its_branch(v in log_uniform(1e-3, 1e17), lx in log_uniform(1e-3, 10.0), m in 1u32..8) {
        let k = solve_k(v, lx, m).unwrap();
        let lo = (2 * m - 1) as f64 * PI / lx;
        let hi = 2.0 * m as f64 * PI / lx;
        prop_assert!(k > lo && k <= hi, "k={k} not in ({lo}, {hi}]");
    }

    #[test]
    fn root_grows_with_conductivity(v in log_uniform(1e-2, 1e12), lx in log_uniform(1e-3, 10.0), m in 1u32..6) {
        let a = solve_k(v, lx, m).unwrap();
        let b = solve_k(2.0 * v, lx, m).unwrap();
        prop_assert!(b >= a);
        prop_assert!(solve_k(v, lx, m + 1).unwrap() > a);
    }

    #[test]
    fn modulation_depth_is_nonnegative(v0 in log_uniform(1.0, 1e14), ratio in 1.0f64..1e4, lx in log_uniform(1e-3, 1.0)) {
        let cfg = CavityConfig::new(lx, 0.1, 0.1, v0, v0 * ratio).unwrap();
        let k0 = solve_k(v0, lx, 1).unwrap();
        let eps = epsilon_n(&cfg, k0);
        prop_assert!(eps >= 0.0);
        if ratio == 1.0 {
            prop_assert_eq!(eps, 0.0);
        }
    }

    #[test]
    fn ramp_partial_sums_increase_toward_mean_square(r in 1e-4f64..0.999, j in 1u32..400) {
        let s = fourier_ramp(1.0, r, j).unwrap();
        let next = fourier_ramp(1.0, r, j + 1).unwrap();
        prop_assert!(s.parseval_sum() <= next.parseval_sum());
        prop_assert!(next.parseval_sum() <= 1.0 / 3.0 + 1e-12);
        for h in &s.harmonics {
            prop_assert!(h.amplitude <= 1.0 / (PI * h.j as f64 * (1.0 - r)) + 1e-15);
            prop_assert!(h.phase > -PI && h.phase <= PI);
        }
    }

    #[test]
    fn numeric_and_closed_form_ramp_agree(r in 0.01f64..0.99, period in log_uniform(1e-3, 1e3)) {
        let profile = DriveProfile::linear_ramp(period, r * period).unwrap();
        let a = fourier_ramp(period, r * period, 12).unwrap();
        let b = fourier_numeric(&profile, 12).unwrap();
        prop_assert!((a.f0 - b.f0).abs() < 1e-12);
        for (x, y) in a.harmonics.iter().zip(&b.harmonics) {
            prop_assert!((x.amplitude - y.amplitude).abs() < 1e-10);
        }
    }

    #[test]
    fn wider_tolerance_finds_a_superset(j in 1u32..8, detune in -1e-3f64..1e-3, tol in 1e-6f64..1e-2) {
        let cfg = CavityConfig::new(1e-2, 0.1, 0.13, 1e12, 1e16).unwrap();
        let spec = ModeSpectrum::build(&cfg, 0.5, ModeCut { nx: 2, ny: 2, nz: 2 }).unwrap();
        let omega = 2.0 * spec.psi[0].omega_tilde * (1.0 + detune) / j as f64;
        let narrow = scan_resonances(&spec, omega, 8, Tolerance::Absolute(tol)).unwrap();
        let wide = scan_resonances(&spec, omega, 8, Tolerance::Absolute(2.0 * tol)).unwrap();
        for h in &narrow.hits {
            prop_assert!(wide.hits.iter().any(|w| w.kind == h.kind && w.j == h.j && w.mode == h.mode && w.partner == h.partner));
        }
    }

    #[test]
    fn parametric_flow_conserves_bogoliubov_norm(eps in 1e-6f64..1e-2, phase in -3.1f64..3.1, amp in 0.01f64..0.5) {
        let (lx, v0) = (2.0 * PI, 100.0);
        let k1 = solve_k(v0, lx, 1).unwrap();
        let vmax = v0 + eps * (lx * k1 * k1 + v0 * (1.0 + v0 * lx / 4.0));
        let cfg = CavityConfig::new(lx, 50.0, 50.0, v0, vmax).unwrap();
        let spec = ModeSpectrum::build(&cfg, 0.5, ModeCut { nx: 1, ny: 1, nz: 1 }).unwrap();
        let m = spec.psi[0];
        let series = FourierSeries {
            omega: 2.0 * m.omega_tilde,
            f0: 0.5,
            harmonics: vec![Harmonic { j: 1, amplitude: amp, phase }],
        };
        let tau = uniform_grid(2.0, 9);
        let (traj, rec) = msa_parametric(&spec, &series, m.index, 1, &tau, Tolerance::Default).unwrap();
        let n0 = traj.bogoliubov_norm(0, 0);
        for i in 0..traj.tau.len() {
            prop_assert!((traj.bogoliubov_norm(0, i) - n0).abs() <= 1e-9 * n0);
            prop_assert!(rec.n[0][i] >= 0.0);
        }
    }
}

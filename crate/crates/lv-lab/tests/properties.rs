use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use lv_lab::entire_solutions::{gauge_identity_check, TimeGauge};
use lv_lab::front_metrics::{fit_decay, track_level_set, Component};
use lv_lab::grid::GridSpec;
use lv_lab::rd_integrator::{integrate, k_leq, BcPair, IntegratorConfig, StatePair};
use lv_lab::spectral_classifier::{characteristic_roots, classify_mu, polar_shoot, Region};
use lv_lab::wave_profiles::{solve_kpp_wave_normalized, Normalization, WaveProfile};
use lv_lab::ModelParams;
use num_complex::Complex64;
use proptest::prelude::*;

fn p0() -> ModelParams {
    ModelParams::new(0.5, 0.5, 1.0, 1.0).unwrap()
}

fn wave() -> &'static WaveProfile {
    static W: OnceLock<WaveProfile> = OnceLock::new();
    W.get_or_init(|| {
        solve_kpp_wave_normalized(2.5, 1.0, 1.0, GridSpec::new(-60.0, 60.0, 2401).unwrap(), Normalization::TailUnit).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn index_is_minus_minus_plus(re in -2.0f64..3.0, im in -5.0f64..5.0, b in 0.1f64..0.9) {
        let p = ModelParams::new(0.5, b, 1.0, 1.0).unwrap();
        let v = classify_mu(&p, 2.5, Complex64::new(re, im));
        prop_assert_eq!(v.index, v.i_minus - v.i_plus);
    }

    #[test]
    fn omega3_matches_root_signs(mu in -1.0f64..2.0) {
        let p = p0();
        let v = classify_mu(&p, 2.5, Complex64::new(mu, 0.0));
        prop_assume!(v.region != Region::OnBoundary);
        let r = characteristic_roots(&p, 2.5, Complex64::new(mu, 0.0));
        let (tp, tm) = r.lambda_tilde;
        let stable_plus = r.lambda.0.re < 0.0 && r.lambda.1.re < 0.0;
        let split = tp.im == 0.0 && tp.re > 0.0 && tm.re < 0.0;
        prop_assert_eq!(v.region == Region::Omega3, split && stable_plus);
    }

    #[test]
    fn gauge_identity(mu in 0.1f64..2.0, frac in 0.05f64..0.95, t in -20.0f64..0.0) {
        let g = TimeGauge::new(mu, frac * mu, 1.0).unwrap();
        prop_assert!(gauge_identity_check(&g, t).unwrap() < 1e-12);
        prop_assert!(g.p(t).unwrap() >= g.q(t));
    }

    #[test]
    fn polar_angle_stays_in_interval(u in 0.001f64..0.999) {
        let floor = (-0.2f64).atan();
        let theta0 = floor + u * (FRAC_PI_2 - floor);
        let tr = polar_shoot(&p0(), 2.5, 0.54, wave(), theta0, -20.0).unwrap();
        prop_assert!(tr.min_margin > -1e-9);
    }

    #[test]
    fn planted_exponential(rate in 0.05f64..2.0, amp in 0.01f64..10.0) {
        let g = GridSpec::new(0.0, 10.0, 201).unwrap();
        let v: Vec<f64> = g.nodes().iter().map(|x| amp * (-rate * x).exp()).collect();
        let s = StatePair::new(g, v.clone(), v, 0.0, 0.0);
        let f = fit_decay(&s, Component::U, (0.0, 10.0)).unwrap();
        prop_assert!(f.r_squared > 0.9999);
        prop_assert!((f.rate - rate).abs() < 1e-9 && (f.prefactor / amp - 1.0).abs() < 1e-9);
    }

    #[test]
    fn translate_speed(speed in -3.0f64..3.0) {
        let w = wave();
        let g = GridSpec::new(-40.0, 40.0, 801).unwrap();
        let traj: Vec<StatePair> = (0..6)
            .map(|k| {
                let t = k as f64;
                let u: Vec<f64> = g.nodes().iter().map(|x| w.at_clamped(x - speed * t)).collect();
                StatePair::new(g, u, vec![0.0; g.n], 0.0, t)
            })
            .collect();
        let tr = track_level_set(&traj, Component::U, 0.5).unwrap();
        prop_assert!((tr.fitted_speed - speed).abs() < 1e-3);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn comparison_and_bounds(
        a in 0.1f64..2.5,
        b in 0.1f64..2.5,
        c in 0.0f64..3.0,
        seed in proptest::collection::vec(0.0f64..1.0, 162),
    ) {
        let p = ModelParams::unchecked(a, b, 1.0, 1.0);
        let g = GridSpec::new(-10.0, 10.0, 81).unwrap();
        let (lo, hi) = seed.split_at(81);
        let x = StatePair::new(g, lo.to_vec(), hi.to_vec(), c, 0.0);
        let y = StatePair::new(g, lo.iter().map(|v| (v + 0.2).min(1.0)).collect(), hi.iter().map(|v| (v - 0.2).max(0.0)).collect(), c, 0.0);
        let cfg = IntegratorConfig::new(0.01, BcPair::neumann(), BcPair::neumann());
        let tx = integrate(&x, &cfg, &p, 2.0, &[1.0]).unwrap();
        let ty = integrate(&y, &cfg, &p, 2.0, &[1.0]).unwrap();
        for (s, t) in tx.iter().zip(&ty) {
            prop_assert!(k_leq(s, t, 1e-8).unwrap().holds);
            prop_assert!(s.u.iter().chain(&s.v).all(|&z| (-1e-12..=1.0 + 1e-12).contains(&z)));
        }
    }
}

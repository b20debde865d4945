mod common;

use nonsmooth_plast::analysis::BranchKind;
use nonsmooth_plast::io::{config_echo, parse_config, read_trajectory, write_trajectory};
use nonsmooth_plast::{
    audit_trajectory, dissipation, hysteresis, kkt_check, project_return_map, simulate,
    viscoplastic_step, LoadingProgram, MaterialModel, MaterialState, Regime, Sample, SimConfig,
    Trajectory, YieldCriterion,
};
use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;

use common::oracle;

fn case_strategy() -> impl Strategy<Value = (Regime, oracle::Case)> {
    any::<u64>()
        .prop_map(|seed| common::draw_case(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn return_map_satisfies_kkt_and_matches_oracle((regime, c) in case_strategy()) {
        let crit = common::criterion(regime, &c);
        let (flow, z) = project_return_map(&crit, &common::trial(&c), &common::moduli(&c), 1e-9).unwrap();
        prop_assert!(kkt_check(&crit, &z, &flow, 1e-9).unwrap().satisfied());
        let reference = oracle::project(&c);
        prop_assert!((flow.lambda - reference.lambda).abs() <= 1e-10);
        prop_assert!((z.sigma - reference.sigma).abs() <= 1e-8);
        prop_assert!((z.beta_i - reference.beta_i).abs() <= 1e-8);
        prop_assert!((z.beta_k - reference.beta_k).abs() <= 1e-8);
    }

    #[test]
    fn return_map_is_idempotent((regime, c) in case_strategy()) {
        let crit = common::criterion(regime, &c);
        let m = common::moduli(&c);
        let (_, z) = project_return_map(&crit, &common::trial(&c), &m, 1e-9).unwrap();
        let (again, z2) = project_return_map(&crit, &z, &m, 1e-9).unwrap();
        prop_assert_eq!(again.lambda, 0.0);
        prop_assert_eq!(z, z2);
    }

    #[test]
    fn dissipation_is_nonnegative((regime, c) in case_strategy()) {
        let crit = common::criterion(regime, &c);
        let (flow, z) = project_return_map(&crit, &common::trial(&c), &common::moduli(&c), 1e-9).unwrap();
        prop_assert!(dissipation(&z, &flow) >= -1e-9);
        // the jump-average pairing is the released energy and exceeds it
        let mid = common::trial(&c).midpoint(&z);
        prop_assert!(dissipation(&mid, &flow) >= dissipation(&z, &flow) - 1e-9);
    }

    #[test]
    fn viscous_step_tends_to_return_map((regime, c) in case_strategy(), exp in 1.0f64..8.0) {
        let crit = common::criterion(regime, &c);
        let m = common::moduli(&c);
        let eta = 10f64.powf(-exp);
        let dt = 1e-3;
        let (plastic, _) = project_return_map(&crit, &common::trial(&c), &m, 1e-9).unwrap();
        let (viscous, _) = viscoplastic_step(&crit, &common::trial(&c), &m, eta, dt, 1e-9).unwrap();
        prop_assert!(viscous.lambda <= plastic.lambda + 1e-12);
        prop_assert!(plastic.lambda - viscous.lambda <= plastic.lambda * eta / (dt * m.young) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hardening_tangents_hold_for_any_moduli(e in 1.0f64..100.0, k in 1.0f64..100.0, h in 1.0f64..100.0) {
        let amp = 5.0 / e;
        let loading = LoadingProgram::PrescribedStrain {
            knots: vec![(0.0, 0.0), (1.0, amp), (3.0, -amp), (5.0, amp)],
        };
        for (regime, expected) in [
            (Regime::Perfect, 0.0),
            (Regime::Isotropic, e * k / (e + k)),
            (Regime::Kinematic, e * h / (e + h)),
        ] {
            let crit = YieldCriterion::new(regime, 1.0).unwrap();
            let mut model = MaterialModel::new(crit, e, 1.0).unwrap();
            if regime == Regime::Isotropic {
                model = model.with_isotropic_hardening(k).unwrap();
            }
            if regime == Regime::Kinematic {
                model = model.with_kinematic_hardening(h).unwrap();
            }
            let config = SimConfig::new(model, 1e-3, 5.0).with_loading(loading.clone());
            let traj = simulate(&config).unwrap();
            prop_assert!(audit_trajectory(&traj, &config).passed());
            let hyst = hysteresis(&traj).unwrap();
            let plastic = hyst.slopes(BranchKind::Plastic);
            prop_assert!(!plastic.is_empty());
            for s in plastic {
                prop_assert!((s - expected).abs() <= 1e-6 * expected.max(1.0), "{} {} vs {}", regime, s, expected);
            }
            for s in hyst.slopes(BranchKind::Elastic) {
                prop_assert!(((s - e) / e).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn free_runs_keep_ledger_and_momentum(
        regime_ix in 0usize..8,
        eps0 in -2.0f64..2.0,
        v0 in -5.0f64..5.0,
    ) {
        let regime = Regime::ALL[regime_ix];
        let config = SimConfig::new(common::model(regime, 1.0, 0.82), 1e-4, 0.5)
            .with_initial(MaterialState::new(eps0, v0));
        let traj = simulate(&config).unwrap();
        let report = audit_trajectory(&traj, &config);
        prop_assert!(report.passed(), "{}", report.to_text());
        for ev in &traj.events {
            prop_assert_eq!(ev.momentum_before, ev.momentum_after);
            prop_assert!(ev.dissipated >= 0.0);
            if regime.is_thermo() {
                prop_assert!(ev.gamma() >= 0.0);
            }
        }
        for pair in traj.samples.windows(2) {
            prop_assert!(pair[1].t() > pair[0].t());
            prop_assert!(pair[1].d_cum >= pair[0].d_cum);
        }
    }

    #[test]
    fn csv_round_trips_any_finite_values(values in prop::collection::vec(
        any::<f64>().prop_filter("finite", |x| x.is_finite()), 14)) {
        let v = &values;
        let sample = Sample {
            state: MaterialState { t: v[0], eps: v[1], v: v[2], eps_p: v[3], xi_i: v[4], xi_k: v[5], s_e: v[11], s_p: v[12] },
            sigma: v[6], beta_i: v[7], beta_k: v[8], e_tot: v[9], d_cum: v[10], gamma_cum: v[13],
        };
        let traj = Trajectory { samples: vec![sample], events: vec![] };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trajectory.csv");
        write_trajectory(&traj, &path).unwrap();
        let back = read_trajectory(&path).unwrap();
        prop_assert_eq!(back.samples.len(), 1);
        let b = &back.samples[0];
        let got = [b.state.t, b.state.eps, b.state.v, b.state.eps_p, b.state.xi_i, b.state.xi_k, b.sigma,
            b.beta_i, b.beta_k, b.e_tot, b.d_cum, b.state.s_e, b.state.s_p, b.gamma_cum];
        for (x, y) in values.iter().zip(got) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn config_echo_reproduces_config(
        regime_ix in 0usize..8,
        dt in 1e-5f64..1e-2,
        stride in 1usize..50,
        eta in prop_oneof![Just(0.0), 1e-4f64..1.0],
    ) {
        let regime = Regime::ALL[regime_ix];
        let mut doc: serde_json::Value = serde_json::from_str(&common::config_json(regime, 1.0)).unwrap();
        doc["dt"] = dt.into();
        doc["stride"] = stride.into();
        doc["eta"] = eta.into();
        let config = parse_config(&doc.to_string()).unwrap();
        let echo = config_echo(&config);
        prop_assert_eq!(parse_config(&echo.to_string()).unwrap(), config);
    }
}

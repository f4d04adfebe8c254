use ehcr_core::{
    delay_s1, estimate_boundary, optimize_s1, optimize_sf1, run, AccessPolicy, BoundaryAxis,
    Dominance, EnergyModel, Preset, SimConfig, SolverOptions, Traffic,
};

fn fig4_traffic(lambda_p: f64, lambda_s: f64) -> Traffic {
    Traffic {
        lambda_p,
        lambda_s,
        ..Preset::Fig4.traffic()
    }
}

#[test]
fn littles_law_holds_for_the_primary_queue() {
    let probs = Preset::Fig4.probs();
    let traffic = fig4_traffic(0.3, 0.05);
    let policy = AccessPolicy {
        p_s: 0.5,
        p_t: 0.6,
        p_f: 0.4,
        p_b: 0.0,
        p_r: 0.0,
    };
    let r = run(&SimConfig::new(1_000_000, 5), &policy, &probs, &traffic).unwrap();
    let l = r.mean_queue_p.mean;
    let w = r.mean_delay_p.mean;
    let tp = r.throughput_p.mean;
    assert!((tp - 0.3).abs() < 0.01, "throughput {tp}");
    assert!(
        (l - tp * w).abs() < 0.03 * l.max(0.05),
        "L = {l}, lambda W = {}",
        tp * w
    );
}

#[test]
fn simulated_delay_tracks_the_saturated_formula() {
    let probs = Preset::Fig4.probs();
    let traffic = fig4_traffic(0.3, 0.0);
    let policy = AccessPolicy {
        p_s: 0.0,
        p_t: 0.5,
        p_f: 0.0,
        p_b: 0.0,
        p_r: 0.0,
    };
    let mut cfg = SimConfig::new(1_000_000, 9);
    cfg.dominance = Dominance::SaturateSecondary;
    cfg.energy_model = EnergyModel::Md1Approx;
    let r = run(&cfg, &policy, &probs, &traffic).unwrap();
    let d = delay_s1(&policy, &probs, &traffic).d_p;
    let sim = r.mean_delay_p.mean;
    assert!((sim - d).abs() < 0.03 * d, "sim {sim} vs closed form {d}");
}

#[test]
fn feedback_boundary_is_not_below_the_plain_one() {
    let probs = Preset::Fig3.probs();
    let traffic = Traffic {
        lambda_p: 0.3,
        ..Preset::Fig3.traffic()
    };
    let opts = SolverOptions::default();
    let plain = optimize_s1(&probs, &traffic, 0.3, &opts).unwrap();
    let fb = optimize_sf1(&probs, &traffic, 0.3, &opts).unwrap();
    let mut cfg = SimConfig::new(400_000, 21);
    let b_plain = estimate_boundary(
        &cfg,
        &probs,
        &traffic,
        &plain.best_policy,
        BoundaryAxis::Secondary,
    )
    .unwrap();
    cfg.feedback_enabled = true;
    let b_fb = estimate_boundary(
        &cfg,
        &probs,
        &traffic,
        &fb.best_policy,
        BoundaryAxis::Secondary,
    )
    .unwrap();
    assert!(b_fb.upper >= b_plain.lower, "{b_fb:?} vs {b_plain:?}");
    assert!(
        (b_plain.boundary - plain.best_value).abs() < 0.03,
        "{b_plain:?} vs {}",
        plain.best_value
    );
    assert!(
        (b_fb.boundary - fb.best_value).abs() < 0.03,
        "{b_fb:?} vs {}",
        fb.best_value
    );
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    fn any_policy() -> impl Strategy<Value = AccessPolicy> {
        (
            0.0..=1.0f64,
            0.0..=1.0f64,
            0.0..=1.0f64,
            0.0..=1.0f64,
            0.0..=1.0f64,
        )
            .prop_map(|(p_s, p_t, p_f, p_b, p_r)| AccessPolicy {
                p_s,
                p_t,
                p_f,
                p_b,
                p_r,
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn identical_inputs_give_identical_reports(
            policy in any_policy(),
            seed in any::<u64>(),
            lambda_p in 0.0..0.6f64,
            lambda_s in 0.0..0.3f64,
            feedback in any::<bool>(),
        ) {
            let probs = Preset::Fig4.probs();
            let traffic = fig4_traffic(lambda_p, lambda_s);
            let mut cfg = SimConfig::new(20_000, seed);
            cfg.feedback_enabled = feedback;
            let a = run(&cfg, &policy, &probs, &traffic).unwrap();
            let b = run(&cfg, &policy, &probs, &traffic).unwrap();
            prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
        }
    }
}

use proptest::prelude::*;

use varexp::harness::{estimate_operator_norm, maximal_power_config, refinement_study, StudyOutcome};
use varexp::operators::OperatorSpec;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn larger_corpus_never_lowers_the_estimate(
        beta in -0.4..0.4f64,
        small in 1usize..60,
        extra in 0usize..60,
        seed in any::<u64>(),
    ) {
        let mut cfg = maximal_power_config(beta, 2.0, &[65]);
        cfg.corpus.seed = seed;
        cfg.corpus.budget = small;
        let a = estimate_operator_norm(&cfg, 0).unwrap().value;
        cfg.corpus.budget = small + extra;
        let b = estimate_operator_norm(&cfg, 0).unwrap().value;
        prop_assert!(b >= a, "{} → {}", a, b);
    }

    #[test]
    fn estimates_are_deterministic(beta in -0.4..0.4f64, seed in any::<u64>()) {
        let mut cfg = maximal_power_config(beta, 2.0, &[65]);
        cfg.corpus.seed = seed;
        let a = estimate_operator_norm(&cfg, 0).unwrap();
        let b = estimate_operator_norm(&cfg, 0).unwrap();
        prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
        prop_assert_eq!(a.argmax_id, b.argmax_id);
    }

    #[test]
    fn weight_scale_changes_no_ratio(beta in -0.4..0.4f64, c in 1e-3..1e3f64) {
        let mut cfg = maximal_power_config(beta, 2.0, &[33, 65]);
        let base = refinement_study(&cfg).unwrap();
        cfg.weight.scale = c;
        let scaled = refinement_study(&cfg).unwrap();
        for (a, b) in base.values().iter().zip(scaled.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * a, "{} vs {}", a, b);
        }
        prop_assert_eq!(base.outcome(), scaled.outcome());
    }

    #[test]
    fn identity_studies_are_stable_at_one(beta in -0.6..0.6f64, p in 1.2..4.0f64) {
        let mut cfg = maximal_power_config(beta, p, &[17, 33, 65]);
        cfg.operator = OperatorSpec::Identity;
        let study = refinement_study(&cfg).unwrap();
        prop_assert_eq!(study.outcome(), StudyOutcome::Stable);
        prop_assert!(study.values().iter().all(|&v| v == 1.0), "{:?}", study.values());
    }
}

use proptest::prelude::*;

use varexp::criteria::Status;
use varexp::weight::{mo_indices, mo_indices_numeric, phi_class_check, psi_class_check, WeightModel};

fn power_log() -> impl Strategy<Value = WeightModel> {
    (-1.0..1.0f64, -2.0..2.0f64).prop_map(|(a, b)| WeightModel::power_log(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn index_shift(w in power_log(), shift in -1.0..1.0f64, at_infinity in any::<bool>()) {
        let (m, big_m) = mo_indices_numeric(&w, at_infinity).unwrap();
        let (ms, bs) = mo_indices_numeric(&w.clone().shifted(shift), at_infinity).unwrap();
        prop_assert!((ms - m - shift).abs() <= 0.01 && (bs - big_m - shift).abs() <= 0.01);
        let exact = mo_indices(&w.clone().shifted(shift)).unwrap();
        let base = mo_indices(&w).unwrap();
        prop_assert!((exact.m - base.m - shift).abs() <= 1e-12);
    }

    #[test]
    fn index_scaling(w in power_log(), lambda in prop::sample::select(vec![0.5, 1.0, 2.0, 3.0])) {
        let (m, big_m) = mo_indices_numeric(&w, false).unwrap();
        let (ml, bl) = mo_indices_numeric(&w.clone().powered(lambda), false).unwrap();
        prop_assert!((ml - lambda * m).abs() <= 0.01 * lambda && (bl - lambda * big_m).abs() <= 0.01 * lambda);
    }

    #[test]
    fn indices_are_ordered_and_nonnegative_on_increasing_weights(a in 0.0..2.0f64, b in -2.0..0.0f64) {
        // t^a (ln(e/t))^b with a ≥ 0 and b ≤ 0 vanishes at 0 and increases
        let (m, big_m) = mo_indices_numeric(&WeightModel::power_log(a, b), false).unwrap();
        prop_assert!(m >= -1e-9 && m <= big_m + 1e-12, "({}, {})", m, big_m);
    }

    #[test]
    fn phi_class_agrees_with_index_interval(
        a in -1.0..1.5f64,
        b in -2.0..2.0f64,
        alpha in -1.5..1.5f64,
        width in 0.0..2.0f64,
    ) {
        let beta = alpha + width;
        prop_assume!((a - alpha).abs() >= 0.05 && (a - beta).abs() >= 0.05);
        let v = phi_class_check(&WeightModel::power_log(a, b), alpha, beta, 1.0).unwrap();
        let expected = if alpha < a && a < beta { Status::Pass } else { Status::Fail };
        prop_assert_eq!(v.status, expected);
    }

    #[test]
    fn psi_routes_agree(w in power_log(), alpha in -1.5..1.5f64, width in 0.05..2.0f64) {
        let v = psi_class_check(&w, alpha, alpha + width, 1.0).unwrap();
        prop_assert_eq!(v.flags.get("routes_agree").map(String::as_str), Some("true"));
    }
}

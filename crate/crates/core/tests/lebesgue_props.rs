use num_complex::Complex64;
use proptest::prelude::*;

use varexp::exponent::{ExponentDescriptor, ExponentField};
use varexp::lebesgue::{luxemburg_norm, modular, SampledFunction};
use varexp::space::{build_grid, MetricMeasureSpace};

const N: usize = 48;

fn space() -> MetricMeasureSpace {
    build_grid(&[(0.0, 1.0)], &[N], None).unwrap()
}

fn exponent(s: &MetricMeasureSpace, base: f64, slope: f64) -> ExponentField {
    ExponentDescriptor::Affine { base, slope }.field(s).unwrap()
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, N)
}

fn norm(f: &[f64], p: &ExponentField, s: &MetricMeasureSpace) -> f64 {
    luxemburg_norm(&SampledFunction::real(f.to_vec()).unwrap(), p, s).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homogeneity(f in values(), c in -10.0..10.0f64, base in 1.05..3.0f64, slope in 0.0..4.0f64) {
        let s = space();
        let p = exponent(&s, base, slope);
        let g = SampledFunction::real(f.clone()).unwrap();
        let a = luxemburg_norm(&g.scale(Complex64::new(c, 0.0)), &p, &s).unwrap().value;
        let b = c.abs() * luxemburg_norm(&g, &p, &s).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-12 * b.max(f64::MIN_POSITIVE) || (a == 0.0 && b == 0.0), "{} vs {}", a, b);
    }

    #[test]
    fn triangle_inequality(f in values(), g in values(), base in 1.05..3.0f64, slope in 0.0..4.0f64) {
        let s = space();
        let p = exponent(&s, base, slope);
        let sum: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a + b).collect();
        prop_assert!(norm(&sum, &p, &s) <= (norm(&f, &p, &s) + norm(&g, &p, &s)) * (1.0 + 1e-10));
    }

    #[test]
    fn definiteness(k in 0usize..N, v in 0.001..5.0f64, base in 1.05..3.0f64) {
        let s = space();
        let p = exponent(&s, base, 1.0);
        prop_assert_eq!(norm(&[0.0; N], &p, &s), 0.0);
        let mut f = vec![0.0; N];
        f[k] = v;
        prop_assert!(norm(&f, &p, &s) > 0.0);
    }

    #[test]
    fn unit_ball_matches_modular(f in values(), c in 0.2..3.0f64, base in 1.05..3.0f64, slope in 0.0..4.0f64) {
        let s = space();
        let p = exponent(&s, base, slope);
        let g = SampledFunction::real(f).unwrap();
        let lambda = luxemburg_norm(&g, &p, &s).unwrap().value;
        prop_assume!(lambda > 0.0);
        // straddle the unit sphere from both sides
        let h = g.scale(Complex64::new(c / lambda, 0.0));
        let n = luxemburg_norm(&h, &p, &s).unwrap().value;
        prop_assume!((n - 1.0).abs() > 1e-8);
        prop_assert_eq!(modular(&h, &p, &s).unwrap() <= 1.0, n <= 1.0);
    }

    #[test]
    fn monotone_in_modulus(f in values(), shrink in prop::collection::vec(0.0..1.0f64, N), base in 1.05..3.0f64) {
        let s = space();
        let p = exponent(&s, base, 2.0);
        let smaller: Vec<f64> = f.iter().zip(&shrink).map(|(a, t)| a * t).collect();
        prop_assert!(norm(&smaller, &p, &s) <= norm(&f, &p, &s) * (1.0 + 1e-12));
    }

    #[test]
    fn constant_exponent_closed_form(f in values(), p in 1.0..8.0f64) {
        let s = space();
        let field = ExponentField::constant(p, N).unwrap();
        let closed: f64 = f.iter().zip(s.masses()).map(|(a, m)| a.abs().powf(p) * m).sum::<f64>().powf(1.0 / p);
        let got = norm(&f, &field, &s);
        prop_assert!((got - closed).abs() <= 1e-9 * closed.max(f64::MIN_POSITIVE));
    }
}

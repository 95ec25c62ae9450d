//! Weight functions of the distance, their Matuszewska–Orlicz indices, and the
//! Zygmund–Bary–Stechkin and Ψ-class tests.

mod radial;
mod zygmund;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use radial::{
    evaluate_weight, CellWeight, InfinityFactor, RadialProductWeight, SampledWeight, UnitWeight, WeightEval,
};
pub use zygmund::{phi_class_check, psi_class_check, radial_power_average, zygmund_check_lower, zygmund_check_upper};

/// Dyadic exponents `j` of the probe scales `h = 2^{∓j}`; the last quarter stands in for the limit.
const INDEX_J: std::ops::RangeInclusive<i32> = 4..=40;
const INDEX_LIMIT_J: std::ops::RangeInclusive<i32> = 31..=40;
/// Limit band for closed-form models, which evaluate in log space at any depth. Slowly varying
/// factors such as `ln(e/t)^b` bias the ratios by about `b / |ln h|`, so the band sits far out.
const DEEP_LIMIT_J: std::ops::RangeInclusive<i32> = 3991..=4000;
/// Dilations `t = 2^k`.
const INDEX_K: std::ops::RangeInclusive<i32> = 1..=10;
/// Almost-increasing constant accepted by the shift search.
const ALMOST_INCREASING_C: f64 = 2.0;

/// User-supplied weight `t ↦ w(t)`.
#[derive(Clone)]
pub struct CustomWeight {
    pub name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl CustomWeight {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        CustomWeight { name: name.into(), f: Arc::new(f) }
    }
}

impl fmt::Debug for CustomWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Custom({})", self.name)
    }
}

impl PartialEq for CustomWeight {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && Arc::ptr_eq(&self.f, &other.f)
    }
}

/// Positive function on `(0, ∞)` used as a radial weight factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WeightModel {
    /// `t^a`
    PowerLaw { a: f64 },
    /// `t^a (1 + |ln t|)^b`, which is `t^a (ln(e/t))^b` on `(0, 1]`.
    PowerLog { a: f64, b: f64 },
    /// `t^a w(t)`
    Shifted { a: f64, inner: Box<WeightModel> },
    /// `w(t)^λ`
    Power { lambda: f64, inner: Box<WeightModel> },
    /// `w(1/t)`
    Reflected { inner: Box<WeightModel> },
    /// Log-log interpolation of samples, with linear extrapolation of the end slopes.
    Sampled { t: Vec<f64>, w: Vec<f64> },
    #[serde(skip)]
    Custom(CustomWeight),
}

/// Estimated lower and upper indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexPair {
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    /// Range of `h` used by the numeric estimator (the whole probe band).
    pub band: (f64, f64),
    /// Exponent `a` making `t^a w(t)` almost increasing on the samples, if one was found.
    pub shift: Option<f64>,
    /// Closed form rather than estimate.
    pub exact: bool,
}

impl WeightModel {
    pub fn power(a: f64) -> Self {
        WeightModel::PowerLaw { a }
    }

    pub fn power_log(a: f64, b: f64) -> Self {
        WeightModel::PowerLog { a, b }
    }

    pub fn custom(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        WeightModel::Custom(CustomWeight::new(name, f))
    }

    pub fn shifted(self, a: f64) -> Self {
        WeightModel::Shifted { a, inner: Box::new(self) }
    }

    pub fn powered(self, lambda: f64) -> Self {
        WeightModel::Power { lambda, inner: Box::new(self) }
    }

    pub fn reflected(self) -> Self {
        WeightModel::Reflected { inner: Box::new(self) }
    }

    pub fn sampled(t: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        if t.len() != w.len() {
            return Err(Error::LengthMismatch { expected: t.len(), got: w.len() });
        }
        if t.len() < 2 {
            return Err(Error::InvalidWeight("sampled weight needs at least 2 samples".into()));
        }
        if t.windows(2).any(|p| !(p[1] > p[0])) || t[0] <= 0.0 {
            return Err(Error::InvalidWeight("sample abscissae must be positive and increasing".into()));
        }
        if w.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidWeight("sampled weight values must be positive".into()));
        }
        Ok(WeightModel::Sampled { t, w })
    }

    /// `ln w(e^s)`, evaluated in log space where the family allows it.
    pub fn ln_eval(&self, s: f64) -> f64 {
        match self {
            WeightModel::PowerLaw { a } => {
                if *a == 0.0 {
                    0.0
                } else {
                    a * s
                }
            }
            WeightModel::PowerLog { a, b } => {
                let pa = if *a == 0.0 { 0.0 } else { a * s };
                let pb = if *b == 0.0 { 0.0 } else { b * (1.0 + s.abs()).ln() };
                pa + pb
            }
            WeightModel::Shifted { a, inner } => {
                let pa = if *a == 0.0 { 0.0 } else { a * s };
                pa + inner.ln_eval(s)
            }
            WeightModel::Power { lambda, inner } => {
                if *lambda == 0.0 {
                    0.0
                } else {
                    lambda * inner.ln_eval(s)
                }
            }
            WeightModel::Reflected { inner } => inner.ln_eval(-s),
            WeightModel::Sampled { t, w } => sampled_ln(t, w, s),
            WeightModel::Custom(c) => (c.f)(s.exp()).ln(),
        }
    }

    /// `w(t)` for `t > 0`; `t = 0` gives the limit at 0 (0, 1 or ∞ for the analytic families).
    pub fn eval(&self, t: f64) -> f64 {
        if t > 0.0 {
            return self.ln_eval(t.ln()).exp();
        }
        if let WeightModel::Custom(c) = self {
            return (c.f)(0.0);
        }
        if let Some((m, big_m)) = self.exact_indices() {
            if m > 0.0 {
                return 0.0;
            }
            if big_m < 0.0 {
                return f64::INFINITY;
            }
        }
        let l = self.ln_eval(-1e12);
        if l > 20.0 {
            f64::INFINITY
        } else if l < -20.0 {
            0.0
        } else {
            l.exp()
        }
    }

    pub fn is_analytic(&self) -> bool {
        self.exact_indices().is_some()
    }

    /// Closed-form `(m(w), M(w))` for the analytic families.
    pub fn exact_indices(&self) -> Option<(f64, f64)> {
        match self {
            WeightModel::PowerLaw { a } | WeightModel::PowerLog { a, .. } => Some((*a, *a)),
            WeightModel::Shifted { a, inner } => inner.exact_indices().map(|(m, big_m)| (m + a, big_m + a)),
            WeightModel::Power { lambda, inner } => inner.exact_indices().map(|(m, big_m)| scale(*lambda, m, big_m)),
            WeightModel::Reflected { inner } => inner.exact_indices_at_infinity().map(|(m, big_m)| (-big_m, -m)),
            WeightModel::Sampled { .. } | WeightModel::Custom(_) => None,
        }
    }

    /// Closed-form `(m_∞(w), M_∞(w))` for the analytic families.
    pub fn exact_indices_at_infinity(&self) -> Option<(f64, f64)> {
        match self {
            WeightModel::PowerLaw { a } | WeightModel::PowerLog { a, .. } => Some((*a, *a)),
            WeightModel::Shifted { a, inner } => inner.exact_indices_at_infinity().map(|(m, big_m)| (m + a, big_m + a)),
            WeightModel::Power { lambda, inner } => {
                inner.exact_indices_at_infinity().map(|(m, big_m)| scale(*lambda, m, big_m))
            }
            WeightModel::Reflected { inner } => inner.exact_indices().map(|(m, big_m)| (-big_m, -m)),
            WeightModel::Sampled { .. } | WeightModel::Custom(_) => None,
        }
    }

    fn check_positive(&self, s: f64) -> Result<f64> {
        let v = self.ln_eval(s);
        if v.is_nan() || v == f64::NEG_INFINITY || v == f64::INFINITY {
            Err(Error::InvalidWeight(format!("weight is not positive and finite at t = {:e}", s.exp())))
        } else {
            Ok(v)
        }
    }
}

fn scale(lambda: f64, m: f64, big_m: f64) -> (f64, f64) {
    if lambda >= 0.0 {
        (lambda * m, lambda * big_m)
    } else {
        (lambda * big_m, lambda * m)
    }
}

fn sampled_ln(t: &[f64], w: &[f64], s: f64) -> f64 {
    let ls = |i: usize| t[i].ln();
    let lw = |i: usize| w[i].ln();
    let n = t.len();
    let k = (1..n - 1).find(|&i| s < ls(i)).unwrap_or(n - 1);
    let (s0, s1) = (ls(k - 1), ls(k));
    lw(k - 1) + (lw(k) - lw(k - 1)) * (s - s0) / (s1 - s0)
}

/// Shift exponent `a` on `[−5, 5]` (tried in the order 0, ±0.25, ±0.5, …) making
/// `t^a w(t)` almost increasing on the log-spaced samples `ln t ∈ samples`.
fn find_shift(w: &WeightModel, samples: &[f64]) -> Option<f64> {
    let lw: Vec<f64> = samples.iter().map(|&s| w.ln_eval(s)).collect();
    let ok = |a: f64| {
        let mut run = f64::NEG_INFINITY;
        let mut worst = f64::NEG_INFINITY;
        for (s, l) in samples.iter().zip(&lw) {
            let v = a * s + l;
            run = run.max(v);
            worst = worst.max(run - v);
        }
        worst <= ALMOST_INCREASING_C.ln()
    };
    std::iter::once(0.0).chain((1..=20).flat_map(|k| [0.25 * k as f64, -0.25 * k as f64])).find(|&a| ok(a))
}

fn shift_samples(ell: f64, at_infinity: bool) -> Vec<f64> {
    let mut s: Vec<f64> = (0..=160)
        .map(|j| ell.ln() + if at_infinity { 1.0 } else { -1.0 } * j as f64 * 0.25 * std::f64::consts::LN_2)
        .collect();
    s.sort_by(f64::total_cmp);
    s
}

/// Limsup/liminf proxy: extreme ratios `w(ht)/w(h)` over the limit quarter of the band,
/// combined over dilations `t = 2^k` into sup/inf of log-ratios.
fn numeric_indices(w: &WeightModel, at_infinity: bool) -> Result<(f64, f64)> {
    let sign = if at_infinity { 1.0 } else { -1.0 };
    let ln2 = std::f64::consts::LN_2;
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    let mut last = (0.0, 0.0);
    let closed_form = if at_infinity { w.exact_indices_at_infinity().is_some() } else { w.exact_indices().is_some() };
    let limit = if closed_form { DEEP_LIMIT_J } else { INDEX_LIMIT_J };
    for k in INDEX_K {
        let lt = k as f64 * ln2;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in limit.clone() {
            let lh = sign * j as f64 * ln2;
            let r = w.check_positive(lh + lt)? - w.check_positive(lh)?;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        lower = lower.max(lo / lt);
        upper = upper.min(hi / lt);
        last = (lo / lt, hi / lt);
    }
    if lower > upper {
        // the sup/inf crossed: keep the largest dilation, where ratio noise is smallest
        Ok(last)
    } else {
        Ok((lower, upper))
    }
}

fn band(at_infinity: bool) -> (f64, f64) {
    let (a, b) = (*INDEX_J.start(), *INDEX_J.end());
    if at_infinity {
        (2f64.powi(a), 2f64.powi(b))
    } else {
        (2f64.powi(-b), 2f64.powi(-a))
    }
}

/// Lower and upper Matuszewska–Orlicz indices at 0.
pub fn mo_indices(w: &WeightModel) -> Result<IndexPair> {
    let (m, big_m, exact) = match w.exact_indices() {
        Some((m, big_m)) => (m, big_m, true),
        None => {
            let (m, big_m) = numeric_indices(w, false)?;
            (m, big_m, false)
        }
    };
    Ok(IndexPair { m, big_m, band: band(false), shift: find_shift(w, &shift_samples(1.0, false)), exact })
}

/// Lower and upper indices at infinity.
pub fn mo_indices_at_infinity(w: &WeightModel) -> Result<IndexPair> {
    let (m, big_m, exact) = match w.exact_indices_at_infinity() {
        Some((m, big_m)) => (m, big_m, true),
        None => {
            let (m, big_m) = numeric_indices(w, true)?;
            (m, big_m, false)
        }
    };
    Ok(IndexPair { m, big_m, band: band(true), shift: find_shift(w, &shift_samples(1.0, true)), exact })
}

/// Indices by the numeric estimator even for analytic families (for cross-checks).
pub fn mo_indices_numeric(w: &WeightModel, at_infinity: bool) -> Result<(f64, f64)> {
    numeric_indices(w, at_infinity)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let p = mo_indices(&WeightModel::power(0.5)).unwrap();
        assert_eq!((p.m, p.big_m), (0.5, 0.5));
        assert!(p.exact);
        let sq = mo_indices(&WeightModel::power(0.3).powered(2.0)).unwrap();
        assert!((sq.m - 0.6).abs() < 1e-15);
        let pl = mo_indices(&WeightModel::power_log(0.5, 2.0)).unwrap();
        assert_eq!((pl.m, pl.big_m), (0.5, 0.5));
        let r = mo_indices(&WeightModel::power(0.4).reflected()).unwrap();
        assert_eq!((r.m, r.big_m), (-0.4, -0.4));
    }

    #[test]
    fn power_log_is_ln_e_over_t_on_unit_interval() {
        let w = WeightModel::power_log(0.5, 2.0);
        for t in [1e-6f64, 0.01, 0.5, 1.0] {
            let direct = t.powf(0.5) * (std::f64::consts::E / t).ln().powi(2);
            assert!((w.eval(t) - direct).abs() <= 1e-12 * direct);
        }
        let refl = w.clone().reflected();
        let mirror = WeightModel::power_log(-0.5, 2.0);
        for s in [-3.0, -0.2, 0.7, 5.0] {
            assert!((refl.ln_eval(s) - mirror.ln_eval(s)).abs() < 1e-12);
        }
    }

    #[test]
    fn numeric_estimator_on_power_laws() {
        for a in [-0.7, 0.0, 0.3, 2.0] {
            let (m, big_m) = mo_indices_numeric(&WeightModel::power(a), false).unwrap();
            assert!((m - a).abs() < 1e-9 && (big_m - a).abs() < 1e-9);
            let (m, big_m) = mo_indices_numeric(&WeightModel::power(a), true).unwrap();
            assert!((m - a).abs() < 1e-9 && (big_m - a).abs() < 1e-9);
        }
    }

    #[test]
    fn oscillating_factor_at_infinity() {
        let w = WeightModel::custom("osc", |t: f64| t.powf(0.4) * (2.0 + t.ln().ln().sin()));
        let p = mo_indices_at_infinity(&w).unwrap();
        assert!(!p.exact);
        assert!((p.m - 0.4).abs() < 0.05 && (p.big_m - 0.4).abs() < 0.05, "{p:?}");
        let c = mo_indices_at_infinity(&WeightModel::custom("one", |_| 1.0)).unwrap();
        assert_eq!((c.m, c.big_m), (0.0, 0.0));
    }

    #[test]
    fn shift_search() {
        assert_eq!(mo_indices(&WeightModel::power(0.3)).unwrap().shift, Some(0.0));
        let s = mo_indices(&WeightModel::power(-1.1)).unwrap().shift.unwrap();
        assert!(s >= 1.0, "shift {s}");
    }

    #[test]
    fn rejects_nonpositive_weights() {
        let w = WeightModel::custom("neg", |t: f64| t - 1e-3);
        assert!(mo_indices(&w).is_err());
        assert!(WeightModel::sampled(vec![1.0, 2.0], vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn sampled_interpolation() {
        let t: Vec<f64> = (0..20).map(|k| 2f64.powi(-k)).rev().collect();
        let w: Vec<f64> = t.iter().map(|x| x.powf(0.7)).collect();
        let m = WeightModel::sampled(t, w).unwrap();
        assert!((m.eval(0.3) - 0.3f64.powf(0.7)).abs() < 1e-12);
        let (lo, hi) = mo_indices_numeric(&m, false).unwrap();
        assert!((lo - 0.7).abs() < 1e-9 && (hi - 0.7).abs() < 1e-9);
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(WeightModel::power(0.5).eval(0.0), 0.0);
        assert_eq!(WeightModel::power(-0.5).eval(0.0), f64::INFINITY);
        assert_eq!(WeightModel::power(0.0).eval(0.0), 1.0);
    }
}

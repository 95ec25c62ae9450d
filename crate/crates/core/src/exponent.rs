//! Variable exponents `p(x)` on a space: class membership, conjugates, log-regularity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{CriterionVerdict, Status};
use crate::error::{Error, Result};
use crate::space::{least_squares_slope as slope, MetricMeasureSpace};

/// Relative growth of the log-Hölder witness under one refinement still read as stable.
const STABILITY_GROWTH: f64 = 1.05;

/// Analytic exponent families, as written in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ExponentDescriptor {
    Constant {
        p: f64,
    },
    /// `base + slope·x₁`
    Affine {
        base: f64,
        slope: f64,
    },
    /// `base + amp / ln(2 + |x|)`; tends to `base` at infinity.
    LogDecay {
        base: f64,
        amp: f64,
    },
    /// `base + amp / ln(e + 1/x₁)`; tends to `base` at 0.
    LogZero {
        base: f64,
        amp: f64,
    },
    /// `left` for `x₁ < at`, `right` otherwise.
    Jump {
        left: f64,
        right: f64,
        at: f64,
    },
    /// `inner` inside the ball `|x| < radius`, `outer` outside.
    Step {
        inner: f64,
        outer: f64,
        radius: f64,
    },
}

impl ExponentDescriptor {
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let x1 = x.first().copied().unwrap_or(0.0);
        let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        match *self {
            ExponentDescriptor::Constant { p } => p,
            ExponentDescriptor::Affine { base, slope } => base + slope * x1,
            ExponentDescriptor::LogDecay { base, amp } => base + amp / (2.0 + norm).ln(),
            ExponentDescriptor::LogZero { base, amp } => base + amp / (std::f64::consts::E + 1.0 / x1.abs()).ln(),
            ExponentDescriptor::Jump { left, right, at } => {
                if x1 < at {
                    left
                } else {
                    right
                }
            }
            ExponentDescriptor::Step { inner, outer, radius } => {
                if norm < radius {
                    inner
                } else {
                    outer
                }
            }
        }
    }

    /// Limit at infinity when the family has one.
    pub fn p_infinity(&self) -> Option<f64> {
        match *self {
            ExponentDescriptor::Constant { p } => Some(p),
            ExponentDescriptor::LogDecay { base, .. } => Some(base),
            ExponentDescriptor::Step { outer, .. } => Some(outer),
            ExponentDescriptor::LogZero { base, amp } => Some(base + amp / std::f64::consts::E.ln()),
            ExponentDescriptor::Jump { right, .. } => Some(right),
            ExponentDescriptor::Affine { slope, base } => (slope == 0.0).then_some(base),
        }
    }

    /// Raw per-point values, with no class restriction.
    pub fn sample(&self, space: &MetricMeasureSpace) -> Vec<f64> {
        (0..space.len()).map(|i| self.evaluate(space.coords(i))).collect()
    }

    pub fn field(&self, space: &MetricMeasureSpace) -> Result<ExponentField> {
        let mut p = ExponentField::new(self.sample(space))?;
        p.p_inf = self.p_infinity();
        p.source = Some(self.clone());
        Ok(p)
    }
}

/// Per-point exponent with `1 < p₋ ≤ p(x) ≤ p⁺ < ∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentField {
    values: Vec<f64>,
    p_minus: f64,
    p_plus: f64,
    p_inf: Option<f64>,
    const_outside: Option<f64>,
    source: Option<ExponentDescriptor>,
}

impl ExponentField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidExponent("exponent field is empty".into()));
        }
        for (i, &p) in values.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::InvalidExponent(format!("p = {p} at point {i} is not finite")));
            }
            if p <= 1.0 {
                return Err(Error::InvalidExponent(format!("p = {p} at point {i} must exceed 1")));
            }
        }
        let p_minus = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let p_plus = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(ExponentField { values, p_minus, p_plus, p_inf: None, const_outside: None, source: None })
    }

    pub fn constant(p: f64, n: usize) -> Result<Self> {
        let mut f = Self::new(vec![p; n])?;
        f.p_inf = Some(p);
        f.source = Some(ExponentDescriptor::Constant { p });
        Ok(f)
    }

    pub fn from_fn(space: &MetricMeasureSpace, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        Self::new((0..space.len()).map(|i| f(space.coords(i))).collect())
    }

    pub fn with_p_inf(mut self, p_inf: f64) -> Self {
        self.p_inf = Some(p_inf);
        self
    }

    /// Declares that `p` is constant outside the ball of this radius about the space origin.
    pub fn with_const_outside(mut self, radius: f64) -> Self {
        self.const_outside = Some(radius);
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    pub fn p_inf(&self) -> Option<f64> {
        self.p_inf
    }

    pub fn const_outside(&self) -> Option<f64> {
        self.const_outside
    }

    pub fn source(&self) -> Option<&ExponentDescriptor> {
        self.source.as_ref()
    }

    pub fn is_constant(&self) -> bool {
        self.p_minus == self.p_plus
    }

    /// `p′(x) = p(x)/(p(x) − 1)` at one point.
    pub fn conj_at(&self, i: usize) -> f64 {
        conj(self.values[i])
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.values.len() == n {
            Ok(())
        } else {
            Err(Error::LengthMismatch { expected: n, got: self.values.len() })
        }
    }
}

/// Scalar conjugate exponent.
pub fn conj(p: f64) -> f64 {
    p / (p - 1.0)
}

/// Pointwise conjugate exponent field.
pub fn conjugate(p: &ExponentField) -> Result<ExponentField> {
    let mut q = ExponentField::new(p.values.iter().map(|&v| conj(v)).collect())?;
    q.p_inf = p.p_inf.map(conj);
    q.const_outside = p.const_outside;
    Ok(q)
}

pub(crate) fn log_holder_witness(values: &[f64], space: &MetricMeasureSpace) -> (f64, usize) {
    (0..space.len())
        .into_par_iter()
        .map(|i| {
            let mut best = 0.0f64;
            let mut pairs = 0usize;
            for j in i + 1..space.len() {
                let d = space.dist(i, j);
                if d <= 0.5 {
                    pairs += 1;
                    best = best.max((values[i] - values[j]).abs() * (1.0 / d).ln());
                }
            }
            (best, pairs)
        })
        .reduce(|| (0.0, 0), |a, b| (a.0.max(b.0), a.1 + b.1))
}

/// Log-Hölder witness `A_est = max |p(x) − p(y)|·ln(1/d(x,y))` over pairs with `d ≤ 1/2`.
///
/// When `p` was built from an analytic family and the space is a refinable grid, the
/// witness is recomputed one refinement deeper and the verdict carries a stability flag.
pub fn log_holder_constant(p: &ExponentField, space: &MetricMeasureSpace) -> Result<(f64, CriterionVerdict)> {
    p.check_len(space.len())?;
    let (a, pairs) = log_holder_witness(&p.values, space);
    let mut v = CriterionVerdict::new("log_holder", "|p(x) − p(y)| ≤ A / ln(1/d(x,y)) for d(x,y) ≤ 1/2");
    v.witness("A_est", a).witness("pairs", pairs as f64);
    if pairs == 0 {
        v.require(Status::Unknown);
        v.note("no pair of points within distance 1/2");
        return Ok((a, v));
    }
    if let (Some(src), Some(fine)) = (p.source(), space.refined()) {
        let fine = fine?;
        let (a_fine, _) = log_holder_witness(&src.sample(&fine), &fine);
        let stable = a_fine <= STABILITY_GROWTH * a + 1e-12;
        v.witness("A_est_refined", a_fine).flag("stable", stable);
        if !stable {
            v.require(Status::Fail);
            v.note("witness grows under refinement: p is not log-Hölder continuous");
        }
    }
    Ok((a, v))
}

/// Mass-weighted mean of `p` over the outermost decile of points by `|x|`.
fn outer_decile_mean(values: &[f64], space: &MetricMeasureSpace) -> f64 {
    let mut order: Vec<usize> = (0..space.len()).collect();
    order.sort_by(|&a, &b| space.norm_of(b).total_cmp(&space.norm_of(a)).then(a.cmp(&b)));
    let k = (space.len() / 10).max(1);
    let (mut num, mut den) = (0.0, 0.0);
    for &i in &order[..k] {
        num += values[i] * space.mass(i);
        den += space.mass(i);
    }
    if den > 0.0 {
        num / den
    } else {
        order[..k].iter().map(|&i| values[i]).sum::<f64>() / k as f64
    }
}

/// Decay witness `A_est = max |p(x) − p(∞)|·ln(2 + |x|)` on a truncated unbounded space.
pub fn decay_constant_at_infinity(p: &ExponentField, space: &MetricMeasureSpace) -> Result<(f64, CriterionVerdict)> {
    p.check_len(space.len())?;
    if space.is_bounded() {
        return Err(Error::BoundedSpace);
    }
    let (p_inf, estimated) = match p.p_inf {
        Some(v) => (v, false),
        None => (outer_decile_mean(&p.values, space), true),
    };
    let a = (0..space.len()).map(|i| (p.values[i] - p_inf).abs() * (2.0 + space.norm_of(i)).ln()).fold(0.0, f64::max);
    let mut v = CriterionVerdict::new("decay_at_infinity", "|p(x) − p(∞)| ≤ A / ln(2 + |x|)");
    v.witness("A_est", a).witness("p_inf", p_inf).flag("p_inf_estimated", estimated);
    Ok((a, v))
}

/// Radius about the space origin beyond which `p` is constant, if that happens inside the space.
pub fn constancy_radius(p: &ExponentField, space: &MetricMeasureSpace) -> Option<f64> {
    let o = space.origin();
    let mut order: Vec<usize> = (0..space.len()).collect();
    order.sort_by(|&a, &b| space.dist(o, b).total_cmp(&space.dist(o, a)).then(a.cmp(&b)));
    let outer = p.values[order[0]];
    let mut radius = None;
    for &i in &order {
        if (p.values[i] - outer).abs() > 1e-12 {
            break;
        }
        radius = Some(space.dist(o, i));
    }
    radius
}

/// Limit of `p` at an end of the half-line, fitted as `p ≈ p_lim + A·u` with `u = 1/ln(scale)`.
fn log_limit(xs: &[f64], ps: &[f64], at_zero: bool) -> Option<(f64, f64)> {
    let sel: Vec<(f64, f64)> = xs
        .iter()
        .zip(ps)
        .filter(|(x, _)| if at_zero { **x <= 0.5 } else { **x >= 2.0 })
        .map(|(&x, &p)| (if at_zero { 1.0 / (1.0 / x).ln() } else { 1.0 / x.ln() }, p))
        .collect();
    if sel.len() < 3 {
        return None;
    }
    // fit on the tenth of the points closest to the end (at least 3)
    let mut sel = sel;
    sel.sort_by(|a, b| a.0.total_cmp(&b.0));
    let k = (sel.len() / 10).max(3);
    let near = &sel[..k];
    let us: Vec<f64> = near.iter().map(|s| s.0).collect();
    let vs: Vec<f64> = near.iter().map(|s| s.1).collect();
    let b = slope(&us, &vs);
    let mu = us.iter().sum::<f64>() / k as f64;
    let mv = vs.iter().sum::<f64>() / k as f64;
    let limit = mv - b * mu;
    let a = sel.iter().map(|(u, p)| (p - limit).abs() / u).fold(0.0, f64::max);
    Some((limit, a))
}

/// Membership of raw exponent values on a half-line grid in the Hardy-operator class:
/// `inf p ≥ 1`, a limit at 0 approached at log rate on `(0, 1/2]`, and a limit at infinity
/// approached at log rate on `[2, ∞)`.
pub fn hardy_class_check(p: &[f64], space: &MetricMeasureSpace) -> Result<CriterionVerdict> {
    if p.len() != space.len() {
        return Err(Error::LengthMismatch { expected: space.len(), got: p.len() });
    }
    let xs: Vec<f64> = (0..space.len()).map(|i| space.coords(i).first().copied().unwrap_or(0.0)).collect();
    let mut v =
        CriterionVerdict::new("hardy_exponent_class", "inf p ≥ 1 with log-rate limits of p at 0 and at infinity");
    let p_min = p.iter().cloned().fold(f64::INFINITY, f64::min);
    let p_max = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    v.witness("p_min", p_min).witness("p_max", p_max);
    if p_min < 1.0 {
        v.require(Status::Fail);
        v.note("p drops below 1");
    }
    match log_limit(&xs, p, true) {
        Some((p0, a0)) => {
            v.witness("p0", p0).witness("A0", a0);
        }
        None => {
            v.require(Status::Unknown);
            v.note("fewer than 3 points in (0, 1/2]");
        }
    }
    match log_limit(&xs, p, false) {
        Some((pinf, ainf)) => {
            v.witness("p_inf", pinf).witness("A_inf", ainf);
        }
        None => {
            v.require(Status::Unknown);
            v.note("fewer than 3 points in [2, ∞)");
        }
    }
    Ok(v)
}

//! Modular and Luxemburg norm of sampled functions in `L^{p(·)}(X, ρ)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::{conj, ExponentField};
use crate::space::MetricMeasureSpace;
use crate::weight::CellWeight;

const REL_WIDTH: f64 = 1e-12;
const MAX_ITER: usize = 200;

/// Complex values aligned with the point ids of a space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite { point: i, value: if v.re.is_finite() { v.im } else { v.re } });
        }
        Ok(SampledFunction { values })
    }

    pub fn real(values: Vec<f64>) -> Result<Self> {
        Self::new(values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    }

    pub fn constant(c: f64, n: usize) -> Self {
        SampledFunction { values: vec![Complex64::new(c, 0.0); n] }
    }

    pub fn zeros(n: usize) -> Self {
        Self::constant(0.0, n)
    }

    pub fn from_fn(space: &MetricMeasureSpace, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        Self::real((0..space.len()).map(|i| f(space.coords(i))).collect())
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> Complex64 {
        self.values[i]
    }

    pub fn abs(&self, i: usize) -> f64 {
        self.values[i].norm()
    }

    pub fn abs_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn re_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        SampledFunction { values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &SampledFunction) -> Result<Self> {
        check_len(other.len(), self.len())?;
        Ok(SampledFunction { values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect() })
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        check_len(self.len(), n)
    }
}

fn check_len(got: usize, expected: usize) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, got })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    /// `|modular(f/value) − 1|`; zero for the zero function.
    pub residual: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
}

/// `Σ (a_i/λ)^{p_i} μ_i` over positive-mass points.
fn scaled_modular(a: &[f64], p: &[f64], mass: &[f64], lambda: f64) -> f64 {
    a.iter()
        .zip(p)
        .zip(mass)
        .filter(|((a, _), m)| **m > 0.0 && **a > 0.0)
        .map(|((a, p), m)| (a / lambda).powf(*p) * m)
        .sum()
}

/// Luxemburg norm of nonnegative magnitudes `a` with raw exponents `p ≥ 1`.
pub(crate) fn luxemburg_raw(a: &[f64], p: &[f64], mass: &[f64]) -> Result<NormResult> {
    for (i, &v) in a.iter().enumerate() {
        if !v.is_finite() && mass[i] > 0.0 {
            return Err(Error::NonFinite { point: i, value: v });
        }
    }
    let m = scaled_modular(a, p, mass, 1.0);
    if m == 0.0 {
        return Ok(NormResult { value: 0.0, residual: 0.0, iterations: 0, bracket: (0.0, 0.0) });
    }
    if !m.is_finite() {
        return Err(Error::Bracket(format!("modular overflows (= {m}) at λ = 1")));
    }
    // exponents on the support only
    let (mut p_lo, mut p_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for ((v, q), mu) in a.iter().zip(p).zip(mass) {
        if *v > 0.0 && *mu > 0.0 {
            p_lo = p_lo.min(*q);
            p_hi = p_hi.max(*q);
        }
    }
    // modular(f/λ) lies between m λ^{−p_hi} and m λ^{−p_lo} on either side of λ = 1
    let x = m.powf(1.0 / p_lo);
    let y = m.powf(1.0 / p_hi);
    let (mut lo, mut hi) = (x.min(y), x.max(y));
    let check = |lambda: f64| scaled_modular(a, p, mass, lambda);
    if check(hi) > 1.0 * (1.0 + 1e-12) || check(lo) < 1.0 * (1.0 - 1e-12) {
        return Err(Error::Bracket(format!(
            "modular {m} with exponents in [{p_lo}, {p_hi}] does not straddle 1 on [{lo}, {hi}]"
        )));
    }
    let mut iterations = 0;
    while hi - lo > REL_WIDTH * hi && iterations < MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if check(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(NormResult { value: hi, residual: (check(hi) - 1.0).abs(), iterations, bracket: (lo, hi) })
}

fn finite_abs(f: &SampledFunction, space: &MetricMeasureSpace) -> Result<Vec<f64>> {
    f.check_len(space.len())?;
    Ok(f.abs_values())
}

/// `Σ |f(x)|^{p(x)} μ(x)`.
pub fn modular(f: &SampledFunction, p: &ExponentField, space: &MetricMeasureSpace) -> Result<f64> {
    p.check_len(space.len())?;
    let a = finite_abs(f, space)?;
    Ok(scaled_modular(&a, p.values(), space.masses(), 1.0))
}

pub fn luxemburg_norm(f: &SampledFunction, p: &ExponentField, space: &MetricMeasureSpace) -> Result<NormResult> {
    p.check_len(space.len())?;
    let a = finite_abs(f, space)?;
    luxemburg_raw(&a, p.values(), space.masses())
}

/// Magnitudes `|ρ f|` with the weight taken as its `L^{p(x)}` cell average.
pub fn weighted_magnitudes(
    f: &SampledFunction,
    rho: &dyn CellWeight,
    p: &ExponentField,
    space: &MetricMeasureSpace,
) -> Result<Vec<f64>> {
    p.check_len(space.len())?;
    let a = finite_abs(f, space)?;
    a.iter()
        .enumerate()
        .map(|(i, &v)| {
            if v == 0.0 || space.mass(i) == 0.0 {
                return Ok(0.0);
            }
            let r = rho.effective(space, i, p.value(i));
            if !r.is_finite() {
                return Err(Error::NonFinite { point: i, value: r });
            }
            Ok(r * v)
        })
        .collect()
}

/// `‖ρ f‖_{p(·)}`.
pub fn weighted_norm(
    f: &SampledFunction,
    rho: &dyn CellWeight,
    p: &ExponentField,
    space: &MetricMeasureSpace,
) -> Result<NormResult> {
    let a = weighted_magnitudes(f, rho, p, space)?;
    luxemburg_raw(&a, p.values(), space.masses())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderResult {
    pub lhs: f64,
    pub rhs: f64,
    pub k: f64,
    pub pass: bool,
}

/// `Σ|fg|μ ≤ k‖f‖_{p(·)}‖g‖_{p′(·)}` with `k = 1/p₋ + 1/p′₋`.
pub fn holder_check(
    f: &SampledFunction,
    g: &SampledFunction,
    p: &ExponentField,
    space: &MetricMeasureSpace,
) -> Result<HolderResult> {
    let a = finite_abs(f, space)?;
    let b = finite_abs(g, space)?;
    let lhs: f64 = a.iter().zip(&b).zip(space.masses()).map(|((x, y), m)| x * y * m).sum();
    let q: Vec<f64> = p.values().iter().map(|&v| conj(v)).collect();
    let q_minus = conj(p.p_plus());
    let k = 1.0 / p.p_minus() + 1.0 / q_minus;
    let nf = luxemburg_raw(&a, p.values(), space.masses())?.value;
    let ng = luxemburg_raw(&b, &q, space.masses())?.value;
    let rhs = k * nf * ng;
    Ok(HolderResult { lhs, rhs, k, pass: lhs <= rhs + 1e-12 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingResult {
    pub norm_s: f64,
    pub norm_p: f64,
    pub ratio: f64,
}

/// `‖f‖_{s(·)} / ‖f‖_{p(·)}` for raw exponents `1 ≤ s(x) ≤ p(x)`.
pub fn embedding_check(
    f: &SampledFunction,
    s: &[f64],
    p: &ExponentField,
    space: &MetricMeasureSpace,
) -> Result<EmbeddingResult> {
    check_len(s.len(), space.len())?;
    p.check_len(space.len())?;
    for (i, (&si, &pi)) in s.iter().zip(p.values()).enumerate() {
        if !(si >= 1.0 && si <= pi) {
            return Err(Error::InvalidExponent(format!("need 1 ≤ s ≤ p, got s = {si}, p = {pi} at point {i}")));
        }
    }
    let a = finite_abs(f, space)?;
    let norm_s = luxemburg_raw(&a, s, space.masses())?.value;
    let norm_p = luxemburg_raw(&a, p.values(), space.masses())?.value;
    let ratio = if norm_p > 0.0 { norm_s / norm_p } else { 0.0 };
    Ok(EmbeddingResult { norm_s, norm_p, ratio })
}

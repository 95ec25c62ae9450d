//! Hardy operators on a half-line grid `0 < x_0 < … < x_{N−1} = R` by product integration:
//! `f` is linear between nodes and the power weight is integrated exactly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lebesgue::SampledFunction;
use crate::space::MetricMeasureSpace;

/// Contribution of `(R, ∞)` to the upper Hardy operator.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Tail {
    /// `f = 0` beyond the grid.
    #[default]
    Zero,
    /// `f(y) = coef·y^exponent` beyond the grid.
    Power { coef: f64, exponent: f64 },
    /// Power law fitted through the last two nodes.
    Extrapolate,
}

/// `∫_u^v y^s dy`, stable for `s` near `−1`.
fn power_integral(u: f64, v: f64, s: f64) -> f64 {
    let l = (v / u).ln();
    let k = s + 1.0;
    if k.abs() < 1e-12 {
        u.powf(k) * l
    } else {
        u.powf(k) * (k * l).exp_m1() / k
    }
}

/// `∫_u^v f(y) y^s dy` with `f` linear between `(u, fu)` and `(v, fv)`.
fn segment_integral(u: f64, v: f64, fu: f64, fv: f64, s: f64) -> f64 {
    let b = (fv - fu) / (v - u);
    let a = fu - b * u;
    a * power_integral(u, v, s) + b * power_integral(u, v, s + 1.0)
}

/// Sorted node positions, all positive; returns `(order, x)`.
fn half_line_nodes(space: &MetricMeasureSpace) -> Result<(Vec<usize>, Vec<f64>)> {
    if !space.has_coords() || space.coords(0).len() != 1 {
        return Err(Error::InvalidOperator("Hardy operators need a one-dimensional grid".into()));
    }
    let mut order: Vec<usize> = (0..space.len()).collect();
    order.sort_by(|&a, &b| space.coords(a)[0].total_cmp(&space.coords(b)[0]));
    let x: Vec<f64> = order.iter().map(|&i| space.coords(i)[0]).collect();
    if x.len() < 2 || !(x[0] > 0.0) {
        return Err(Error::InvalidOperator("Hardy operators need at least two grid points in (0, R]".into()));
    }
    Ok((order, x))
}

/// Exponent `κ` of a power law through two same-sign samples; `0` otherwise.
fn power_fit(x0: f64, x1: f64, f0: f64, f1: f64) -> f64 {
    if f0 != 0.0 && f1 != 0.0 && f0.signum() == f1.signum() {
        (f1 / f0).ln() / (x1 / x0).ln()
    } else {
        0.0
    }
}

fn lower_component(x: &[f64], f: &[f64], alpha: f64) -> Result<Vec<f64>> {
    let s = -alpha;
    // first cell (0, x_0]: the first linear piece extended to 0, f ≈ a + b·y
    let b = (f[1] - f[0]) / (x[1] - x[0]);
    let a = f[0] - b * x[0];
    let mut cum = 0.0;
    for (coef, k) in [(a, 1.0 + s), (b, 2.0 + s)] {
        if coef == 0.0 {
            continue;
        }
        if k <= 0.0 {
            return Err(Error::Divergent(format!(
                "y^{{{}}}·y^{{−α}} is not integrable at 0 for α = {alpha}",
                k - 1.0 - s
            )));
        }
        cum += coef * x[0].powf(k) / k;
    }
    let mut out = Vec::with_capacity(x.len());
    out.push(x[0].powf(alpha - 1.0) * cum);
    for i in 1..x.len() {
        cum += segment_integral(x[i - 1], x[i], f[i - 1], f[i], s);
        out.push(x[i].powf(alpha - 1.0) * cum);
    }
    Ok(out)
}

fn upper_component(x: &[f64], f: &[f64], beta: f64, tail: Tail) -> Result<Vec<f64>> {
    let s = -beta - 1.0;
    let n = x.len();
    let r = x[n - 1];
    let power_tail = |coef: f64, e: f64| {
        if coef == 0.0 {
            Ok(0.0)
        } else if e < beta {
            Ok(coef * r.powf(e - beta) / (beta - e))
        } else {
            Err(Error::Divergent(format!("tail y^{e} is not integrable against y^{{−β−1}} for β = {beta}")))
        }
    };
    let mut cum = match tail {
        Tail::Zero => 0.0,
        Tail::Power { coef, exponent } => power_tail(coef, exponent)?,
        Tail::Extrapolate => {
            let e = power_fit(x[n - 2], x[n - 1], f[n - 2], f[n - 1]);
            power_tail(f[n - 1] / r.powf(e), e)?
        }
    };
    let mut out = vec![0.0; n];
    out[n - 1] = r.powf(beta) * cum;
    for i in (0..n - 1).rev() {
        cum += segment_integral(x[i], x[i + 1], f[i], f[i + 1], s);
        out[i] = x[i].powf(beta) * cum;
    }
    Ok(out)
}

fn by_components(
    f: &SampledFunction,
    space: &MetricMeasureSpace,
    op: impl Fn(&[f64], &[f64]) -> Result<Vec<f64>>,
) -> Result<SampledFunction> {
    f.check_len(space.len())?;
    let (order, x) = half_line_nodes(space)?;
    let re: Vec<f64> = order.iter().map(|&i| f.value(i).re).collect();
    let im: Vec<f64> = order.iter().map(|&i| f.value(i).im).collect();
    let out_re = op(&x, &re)?;
    let out_im = if im.iter().any(|&v| v != 0.0) { op(&x, &im)? } else { vec![0.0; x.len()] };
    let mut values = vec![Complex64::new(0.0, 0.0); space.len()];
    for (k, &i) in order.iter().enumerate() {
        values[i] = Complex64::new(out_re[k], out_im[k]);
    }
    SampledFunction::new(values)
}

/// `H^α f(x) = x^{α−1} ∫_0^x f(y) y^{−α} dy`.
pub fn hardy_lower(f: &SampledFunction, alpha: f64, space: &MetricMeasureSpace) -> Result<SampledFunction> {
    by_components(f, space, |x, v| lower_component(x, v, alpha))
}

/// `H_β f(x) = x^β ∫_x^∞ f(y) y^{−β−1} dy`, truncated at the last node plus `tail`.
pub fn hardy_upper(f: &SampledFunction, beta: f64, space: &MetricMeasureSpace, tail: Tail) -> Result<SampledFunction> {
    by_components(f, space, |x, v| upper_component(x, v, beta, tail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::build_graded_interval;

    fn grid() -> MetricMeasureSpace {
        build_graded_interval(0.0, 10.0, 1e-6, 0.9, false).unwrap()
    }

    #[test]
    fn lower_closed_forms() {
        let s = grid();
        let one = SampledFunction::constant(1.0, s.len());
        for alpha in [0.0, 0.4, -0.7] {
            let h = hardy_lower(&one, alpha, &s).unwrap();
            assert!(h.values().iter().all(|v| (v.re - 1.0 / (1.0 - alpha)).abs() < 1e-10));
        }
        let y = SampledFunction::from_fn(&s, |x| x[0]).unwrap();
        let h = hardy_lower(&y, 0.0, &s).unwrap();
        for i in 0..s.len() {
            assert!((h.value(i).re - s.coords(i)[0] / 2.0).abs() < 1e-10 * s.coords(i)[0]);
        }
        assert!(matches!(hardy_lower(&one, 1.0, &s), Err(Error::Divergent(_))));
        let f = SampledFunction::from_fn(&s, |x| x[0].powf(-0.3)).unwrap();
        let h = hardy_lower(&f, 0.2, &s).unwrap();
        for i in (0..s.len()).filter(|&i| s.coords(i)[0] > 0.1) {
            let x = s.coords(i)[0];
            assert!((h.value(i).re - x.powf(-0.3) / 0.5).abs() < 2e-3 * x.powf(-0.3));
        }
    }

    #[test]
    fn upper_closed_forms() {
        let s = grid();
        let one = SampledFunction::constant(1.0, s.len());
        let h = hardy_upper(&one, 0.6, &s, Tail::Power { coef: 1.0, exponent: 0.0 }).unwrap();
        assert!(h.values().iter().all(|v| (v.re - 1.0 / 0.6).abs() < 1e-10));
        let inv = SampledFunction::from_fn(&s, |x| 1.0 / x[0]).unwrap();
        let h = hardy_upper(&inv, 1.0, &s, Tail::Extrapolate).unwrap();
        for i in (0..s.len()).step_by(17) {
            let x = s.coords(i)[0];
            assert!((h.value(i).re * 2.0 * x - 1.0).abs() < 5e-3);
        }
        let bump = SampledFunction::from_fn(&s, |x| if x[0] < 1.0 { 1.0 } else { 0.0 }).unwrap();
        let h = hardy_upper(&bump, 0.6, &s, Tail::Zero).unwrap();
        assert!((0..s.len()).filter(|&i| s.coords(i)[0] > 1.5).all(|i| h.value(i).re == 0.0));
        assert!(hardy_upper(&one, 0.6, &s, Tail::Extrapolate).is_ok());
        assert!(hardy_upper(&one, -0.1, &s, Tail::Extrapolate).is_err());
    }
}

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::maximal::check_alpha;
use crate::error::{Error, Result};
use crate::lebesgue::SampledFunction;
use crate::space::{CurveSpace, MetricMeasureSpace};

/// Treatment of the `y = x` term of a discretized potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalMode {
    /// Integrate the kernel exactly over a ball-shaped cell of the same mass.
    #[default]
    SelfCell,
    Drop,
}

/// `Σ_{y≠x} f(y) d(x,y)^{α(x)−n} μ(y)` plus the diagonal term chosen by `mode`.
///
/// With `SelfCell` the diagonal contributes `f(x)·r^{α−n}·μ(x)·n/α` where
/// `r = μ(x)^{1/n}/2`.
pub fn riesz_potential(
    f: &SampledFunction,
    alpha: &[f64],
    space: &MetricMeasureSpace,
    mode: DiagonalMode,
) -> Result<SampledFunction> {
    potential_with_dim(f, alpha, space, space.dim_hint(), mode)
}

/// Potential on a curve: chordal distances, arc-length masses, `n = 1`.
pub fn curve_potential(
    f: &SampledFunction,
    alpha: &[f64],
    curve: &CurveSpace,
    mode: DiagonalMode,
) -> Result<SampledFunction> {
    potential_with_dim(f, alpha, curve.space(), 1.0, mode)
}

fn potential_with_dim(
    f: &SampledFunction,
    alpha: &[f64],
    space: &MetricMeasureSpace,
    n: f64,
    mode: DiagonalMode,
) -> Result<SampledFunction> {
    let len = space.len();
    f.check_len(len)?;
    check_alpha(alpha, len, n)?;
    let values = f.values();
    let mass = space.masses();
    let out: Result<Vec<Complex64>> = (0..len)
        .into_par_iter()
        .map(|x| {
            let e = alpha[x] - n;
            let mut acc = Complex64::new(0.0, 0.0);
            for y in 0..len {
                if y == x || mass[y] == 0.0 {
                    continue;
                }
                let d = space.dist(x, y);
                if d == 0.0 {
                    return Err(Error::InvalidSpace(format!("points {x} and {y} coincide")));
                }
                acc += values[y] * (d.powf(e) * mass[y]);
            }
            if mode == DiagonalMode::SelfCell && mass[x] > 0.0 {
                let r = mass[x].powf(1.0 / n) / 2.0;
                acc += values[x] * (r.powf(e) * mass[x] * n / alpha[x]);
            }
            Ok(acc)
        })
        .collect();
    SampledFunction::new(out?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::build_grid;

    #[test]
    fn point_mass_is_a_single_term() {
        let s = build_grid(&[(0.0, 1.0)], &[11], None).unwrap();
        let mut v = vec![0.0; 11];
        v[3] = 1.0;
        let f = SampledFunction::real(v).unwrap();
        let out = riesz_potential(&f, &[0.5; 11], &s, DiagonalMode::SelfCell).unwrap();
        for x in [0, 5, 10] {
            let want = s.dist(x, 3).powf(-0.5) * s.mass(3);
            assert!((out.value(x).re - want).abs() < 1e-14);
        }
        let zero = riesz_potential(&SampledFunction::zeros(11), &[0.5; 11], &s, DiagonalMode::Drop).unwrap();
        assert!(zero.values().iter().all(|v| v.norm() == 0.0));
        assert!(riesz_potential(&f, &[1.0; 11], &s, DiagonalMode::Drop).is_err());
    }

    #[test]
    fn unit_function_at_midpoint() {
        let s = build_grid(&[(0.0, 1.0)], &[513], None).unwrap();
        let one = SampledFunction::constant(1.0, s.len());
        let out = riesz_potential(&one, &vec![0.5; s.len()], &s, DiagonalMode::SelfCell).unwrap();
        let want = 2.0 * 2f64.sqrt();
        assert!((out.value(256).re - want).abs() < 0.05 * want);
    }

    #[test]
    fn circle_is_rotation_invariant() {
        let c = CurveSpace::circle(128, 1.0).unwrap();
        let one = SampledFunction::constant(1.0, c.len());
        let out = curve_potential(&one, &vec![0.5; c.len()], &c, DiagonalMode::SelfCell).unwrap();
        let v0 = out.value(0).re;
        assert!(out.values().iter().all(|v| (v.re - v0).abs() < 1e-10));
    }
}

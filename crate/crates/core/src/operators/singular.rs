use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lebesgue::SampledFunction;
use crate::space::CurveSpace;

/// Half-width of the excluded arc around the evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EpsRule {
    Fixed {
        eps: f64,
    },
    /// `ε = c·h` with `h` the longest segment.
    MeshProportional {
        c: f64,
    },
}

impl Default for EpsRule {
    fn default() -> Self {
        EpsRule::MeshProportional { c: 2.0 }
    }
}

impl EpsRule {
    pub fn resolve(self, curve: &CurveSpace) -> Result<f64> {
        let h = curve.mesh();
        let eps = match self {
            EpsRule::Fixed { eps } => eps,
            EpsRule::MeshProportional { c } => c * h,
        };
        if !(eps >= h) || !eps.is_finite() {
            return Err(Error::InvalidOperator(format!("exclusion radius {eps} is below the mesh {h}")));
        }
        Ok(eps)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularOutput {
    pub values: SampledFunction,
    pub eps: f64,
    /// Endpoints of an open curve, where the output is set to 0 and not meaningful.
    pub excluded: Vec<usize>,
}

/// Complex line element `dτ` carried by each vertex (half the two adjacent chords).
fn line_elements(curve: &CurveSpace) -> Vec<Complex64> {
    let v = curve.vertices();
    let n = v.len();
    (0..n)
        .map(|k| {
            if curve.is_closed() {
                (v[(k + 1) % n] - v[(k + n - 1) % n]) * 0.5
            } else if k == 0 {
                (v[1] - v[0]) * 0.5
            } else if k == n - 1 {
                (v[n - 1] - v[n - 2]) * 0.5
            } else {
                (v[k + 1] - v[k - 1]) * 0.5
            }
        })
        .collect()
}

/// `S_Γ f(t) = (1/πi) Σ f(τ) dτ/(τ − t)` over vertices farther than `ε` from `t` in arc length.
pub fn cauchy_singular(f: &SampledFunction, curve: &CurveSpace, rule: EpsRule) -> Result<SingularOutput> {
    let n = curve.len();
    f.check_len(n)?;
    let eps = rule.resolve(curve)?;
    let v = curve.vertices();
    let dtau = line_elements(curve);
    let s = curve.arc_positions();
    let length = curve.length();
    let closed = curve.is_closed();
    let excluded: Vec<usize> = if closed { Vec::new() } else { vec![0, n - 1] };
    let factor = Complex64::new(0.0, std::f64::consts::PI).inv();
    let values: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|j| {
            if excluded.contains(&j) {
                return Complex64::new(0.0, 0.0);
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                let mut gap = (s[k] - s[j]).abs();
                if closed {
                    gap = gap.min(length - gap);
                }
                // vertices exactly on the window edge must drop out on both sides alike
                if gap <= eps * (1.0 + 1e-9) {
                    continue;
                }
                acc += f.value(k) * dtau[k] / (v[k] - v[j]);
            }
            acc * factor
        })
        .collect();
    Ok(SingularOutput { values: SampledFunction::new(values)?, eps, excluded })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_identities() {
        let c = CurveSpace::circle(512, 1.0).unwrap();
        let one = SampledFunction::constant(1.0, c.len());
        let out = cauchy_singular(&one, &c, EpsRule::default()).unwrap();
        assert!(out.values.values().iter().all(|v| (v - 1.0).norm() < 0.05));
        let tau = SampledFunction::new(c.vertices().to_vec()).unwrap();
        let out = cauchy_singular(&tau, &c, EpsRule::default()).unwrap();
        assert!(out.values.values().iter().zip(c.vertices()).all(|(s, t)| (s - t).norm() < 0.05));
        let zero = cauchy_singular(&SampledFunction::zeros(c.len()), &c, EpsRule::default()).unwrap();
        assert!(zero.values.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn reversal_flips_sign() {
        let c = CurveSpace::circle(64, 2.0).unwrap();
        let f = SampledFunction::real((0..64).map(|k| (k as f64 * 0.3).sin()).collect()).unwrap();
        let a = cauchy_singular(&f, &c, EpsRule::default()).unwrap().values;
        let r = c.reversed();
        let mut rv = f.values().to_vec();
        rv.reverse();
        let b = cauchy_singular(&SampledFunction::new(rv).unwrap(), &r, EpsRule::default()).unwrap().values;
        for k in 0..64 {
            assert!((a.value(k) + b.value(63 - k)).norm() < 1e-12);
        }
    }

    #[test]
    fn rules_and_endpoints() {
        let c = CurveSpace::segment(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), 21).unwrap();
        assert!(cauchy_singular(&SampledFunction::zeros(21), &c, EpsRule::Fixed { eps: 0.01 }).is_err());
        let out = cauchy_singular(&SampledFunction::constant(1.0, 21), &c, EpsRule::Fixed { eps: 0.1 }).unwrap();
        assert_eq!(out.excluded, vec![0, 20]);
    }
}

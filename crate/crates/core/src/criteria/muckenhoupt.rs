use rayon::prelude::*;

use super::{CriterionVerdict, Status};
use crate::error::{Error, Result};
use crate::exponent::ExponentField;
use crate::space::{MetricMeasureSpace, RadiusGrid};
use crate::weight::CellWeight;

/// Growth of the small-radius witness over the rest that makes a finite witness doubtful.
const SMALL_RADIUS_GROWTH: f64 = 1.25;

struct Sweep {
    value: f64,
    center: usize,
    radius: f64,
    per_radius: Vec<f64>,
}

/// `max_{x,r} (1/μB)Σ_B a · ((1/μB)Σ_B b)^e` where `a`, `b` already carry the masses.
fn sweep(space: &MetricMeasureSpace, radii: &[f64], a: &[f64], b: &[f64], e: f64) -> Sweep {
    let per_center: Vec<Vec<f64>> = (0..space.len())
        .into_par_iter()
        .map(|x| {
            let k = radii.len();
            let (mut sa, mut sb, mut sm) = (vec![0.0; k + 1], vec![0.0; k + 1], vec![0.0; k + 1]);
            for y in 0..space.len() {
                let j = radii.partition_point(|&r| r <= space.dist(x, y));
                sa[j] += a[y];
                sb[j] += b[y];
                sm[j] += space.mass(y);
            }
            let (mut ca, mut cb, mut cm) = (0.0, 0.0, 0.0);
            (0..k)
                .map(|j| {
                    ca += sa[j];
                    cb += sb[j];
                    cm += sm[j];
                    if cm <= 0.0 {
                        0.0
                    } else if cb.is_infinite() || ca.is_infinite() {
                        f64::INFINITY
                    } else {
                        (ca / cm) * (cb / cm).powf(e)
                    }
                })
                .collect()
        })
        .collect();
    let mut best = Sweep { value: 0.0, center: 0, radius: radii[0], per_radius: vec![0.0; radii.len()] };
    for (x, row) in per_center.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            best.per_radius[j] = best.per_radius[j].max(v);
            if v > best.value {
                best.value = v;
                best.center = x;
                best.radius = radii[j];
            }
        }
    }
    best
}

fn cell_sums(rho: &dyn CellWeight, space: &MetricMeasureSpace, s: impl Fn(usize) -> f64) -> Vec<f64> {
    (0..space.len())
        .map(|i| {
            let m = space.mass(i);
            if m == 0.0 {
                0.0
            } else {
                rho.cell_power_avg(space, i, s(i)) * m
            }
        })
        .collect()
}

fn verdict_from(name: &str, citation: &str, s: Sweep) -> CriterionVerdict {
    let mut v = CriterionVerdict::new(name, citation);
    v.witness("A_est", s.value).witness("center", s.center as f64).witness("radius", s.radius);
    if !s.value.is_finite() {
        v.require(Status::Fail);
        v.note(format!("infinite ball product at center {} radius {:.3e}", s.center, s.radius));
        return v;
    }
    let k = s.per_radius.len();
    if k >= 3 {
        let third = (k / 3).max(1);
        let small = s.per_radius[..third].iter().cloned().fold(0.0, f64::max);
        let rest = s.per_radius[third..].iter().cloned().fold(0.0, f64::max);
        v.witness("A_small_radii", small).witness("A_other_radii", rest);
        if small > SMALL_RADIUS_GROWTH * rest {
            v.require(Status::Unknown);
            v.note("ball products grow toward the smallest radii");
        }
    }
    v
}

/// Classical `A_p` witness `max (avg ρ^p)(avg ρ^{−p′})^{p−1}` over centers and grid radii.
pub fn muckenhoupt_classical(
    rho: &dyn CellWeight,
    p: f64,
    space: &MetricMeasureSpace,
    grid: &RadiusGrid,
) -> Result<CriterionVerdict> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidExponent(format!("constant exponent {p} must lie in (1, ∞)")));
    }
    let q = p / (p - 1.0);
    let a = cell_sums(rho, space, |_| p);
    let b = cell_sums(rho, space, |_| -q);
    let mut v = verdict_from(
        "muckenhoupt_classical",
        "sup_B (avg_B ρ^p)(avg_B ρ^(−p′))^(p−1) < ∞",
        sweep(space, grid.radii(), &a, &b, p - 1.0),
    );
    v.witness("p", p);
    Ok(v)
}

/// Variable-exponent analogue with `ρ^{p(y)}` and `ρ^{−p(y)/(p₋−1)}` raised to `p₋ − 1`.
pub fn muckenhoupt_variable(
    rho: &dyn CellWeight,
    p: &ExponentField,
    space: &MetricMeasureSpace,
    grid: &RadiusGrid,
) -> Result<CriterionVerdict> {
    p.check_len(space.len())?;
    let pm = p.p_minus();
    let a = cell_sums(rho, space, |i| p.value(i));
    let b = cell_sums(rho, space, |i| -p.value(i) / (pm - 1.0));
    let mut v = verdict_from(
        "muckenhoupt_variable",
        "sup_B (avg_B ρ^p(y))(avg_B ρ^(−p(y)/(p₋−1)))^(p₋−1) < ∞",
        sweep(space, grid.radii(), &a, &b, pm - 1.0),
    );
    v.witness("p_minus", pm);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::build_grid;
    use crate::weight::{RadialProductWeight, SampledWeight, UnitWeight, WeightModel};

    fn setup() -> (MetricMeasureSpace, RadiusGrid) {
        let s = build_grid(&[(0.0, 1.0)], &[129], None).unwrap();
        let g = RadiusGrid::geometric(2.0 * s.mesh(), 1.0, 4).unwrap();
        (s, g)
    }

    #[test]
    fn unit_weight_is_one() {
        let (s, g) = setup();
        let v = muckenhoupt_classical(&UnitWeight, 2.0, &s, &g).unwrap();
        assert!((v.get("A_est").unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(v.status, Status::Pass);
        let p = ExponentField::from_fn(&s, |x| 1.5 + x[0]).unwrap();
        assert!((muckenhoupt_variable(&UnitWeight, &p, &s, &g).unwrap().get("A_est").unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_weights() {
        let (s, g) = setup();
        let ok = RadialProductWeight::single(0, WeightModel::power(0.3));
        let v = muckenhoupt_classical(&ok, 2.0, &s, &g).unwrap();
        assert_eq!(v.status, Status::Pass);
        for beta in [0.6, -0.6] {
            let bad = RadialProductWeight::single(0, WeightModel::power(beta));
            let v = muckenhoupt_classical(&bad, 2.0, &s, &g).unwrap();
            assert_eq!(v.status, Status::Fail, "β = {beta}");
        }
    }

    #[test]
    fn constant_p_coincides() {
        let (s, g) = setup();
        let rho = SampledWeight::new((0..s.len()).map(|i| 1.0 + (i as f64 * 0.7).sin().abs()).collect()).unwrap();
        let c = muckenhoupt_classical(&rho, 2.0, &s, &g).unwrap().get("A_est").unwrap();
        let p = ExponentField::constant(2.0, s.len()).unwrap();
        let w = muckenhoupt_variable(&rho, &p, &s, &g).unwrap().get("A_est").unwrap();
        assert!((c - w).abs() <= 1e-10 * c);
    }
}

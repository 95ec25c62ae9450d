//! Weight conditions for the maximal operator.

use super::{interval_clause, margin_status, muckenhoupt_variable, CriterionVerdict, Precision, Status};
use crate::error::Result;
use crate::exponent::{conj, constancy_radius, log_holder_constant, ExponentField};
use crate::space::{
    carleson_check, dimensions_at_infinity, doubling_constant, uniform_lower_dimension, CurveSpace, MetricMeasureSpace,
    RadiusGrid,
};
use crate::weight::{
    mo_indices, mo_indices_at_infinity, phi_class_check, CellWeight, IndexPair, RadialProductWeight, WeightModel,
};

/// Absolute uncertainty attached to estimated dimensions.
pub const DIMENSION_UNCERTAINTY: f64 = 0.05;
/// Absolute uncertainty attached to numerically estimated indices.
pub const INDEX_UNCERTAINTY: f64 = 0.02;

pub(crate) fn index_precision(idx: &IndexPair) -> Precision {
    if idx.exact {
        Precision::Exact
    } else {
        Precision::Estimated(INDEX_UNCERTAINTY)
    }
}

/// `lo < m(w) ≤ M(w) < hi` together with `w ∈ W̃` (some `t^a w(t)` almost increasing).
pub(crate) fn weight_clause(
    v: &mut CriterionVerdict,
    label: &str,
    w: &WeightModel,
    lo: f64,
    hi: f64,
    base: Precision,
    at_infinity: bool,
) -> Result<Status> {
    let idx = if at_infinity { mo_indices_at_infinity(w)? } else { mo_indices(w)? };
    let status = interval_clause(v, label, lo, idx.m, idx.big_m, hi, base.combine(index_precision(&idx)));
    v.flag(format!("{label}.indices_exact"), idx.exact);
    match idx.shift {
        Some(a) => {
            v.witness(format!("{label}.shift"), a);
        }
        None => {
            v.require(Status::Unknown);
            v.note(format!("{label}: no t^a·w(t) found almost increasing"));
        }
    }
    Ok(status)
}

/// `p(∞)`: the declared value, else the value at the point farthest from the origin.
pub(crate) fn p_infinity(p: &ExponentField, space: &MetricMeasureSpace) -> f64 {
    if let Some(v) = p.p_inf() {
        return v;
    }
    let o = space.origin();
    let far =
        (0..space.len()).max_by(|&a, &b| space.dist(o, a).total_cmp(&space.dist(o, b)).then(b.cmp(&a))).unwrap_or(0);
    p.value(far)
}

fn require_bounded(v: &mut CriterionVerdict, space: &MetricMeasureSpace) -> bool {
    v.flag("bounded", space.is_bounded());
    if !space.is_bounded() {
        v.require(Status::Fail);
        v.note("bounded required");
    }
    space.is_bounded()
}

/// `p` constant outside a ball well inside the truncation.
fn require_constant_at_infinity(v: &mut CriterionVerdict, p: &ExponentField, space: &MetricMeasureSpace) -> bool {
    let r_outer = space.r_outer().unwrap_or(f64::INFINITY);
    match constancy_radius(p, space) {
        Some(r) if r <= 0.5 * r_outer => {
            v.witness("constancy_radius", r);
            v.flag("hypothesis", "p constant at infinity");
            true
        }
        other => {
            v.witness("constancy_radius", other.unwrap_or(f64::INFINITY));
            v.flag("hypothesis", "violated");
            v.require(Status::Fail);
            v.note("hypothesis violated: p is not constant outside a ball");
            false
        }
    }
}

fn probe_grid(space: &MetricMeasureSpace) -> Result<RadiusGrid> {
    RadiusGrid::geometric(2.0 * space.mesh(), space.diameter().max(2.0 * space.mesh()), 4)
}

/// Bounded doubling space, `p ∈ ℙ(X)` and the variable Muckenhoupt-type condition on `ρ`.
pub fn theorem_a_check(
    rho: &dyn CellWeight,
    p: &ExponentField,
    space: &MetricMeasureSpace,
) -> Result<CriterionVerdict> {
    let mut v = CriterionVerdict::new(
        "theoremA",
        "M bounded on a bounded doubling space when p is log-Hölder and ρ meets the variable Muckenhoupt-type condition",
    );
    require_bounded(&mut v, space);
    let grid = probe_grid(space)?;
    let c = doubling_constant(space, &grid)?;
    let mut doubling = CriterionVerdict::new("doubling", "μB(x, 2r) ≤ C·μB(x, r)");
    doubling.witness("C_est", c);
    if !c.is_finite() {
        doubling.require(Status::Fail);
    }
    v.part(doubling);
    let mut class = CriterionVerdict::new("exponent_class", "1 < p₋ ≤ p⁺ < ∞ and p log-Hölder");
    class.witness("p_minus", p.p_minus()).witness("p_plus", p.p_plus());
    class.part(log_holder_constant(p, space)?.1);
    v.part(class);
    v.part(muckenhoupt_variable(rho, p, space, &grid)?);
    Ok(v)
}

fn local_node_clauses(
    v: &mut CriterionVerdict,
    weight: &RadialProductWeight,
    p: &ExponentField,
    space: &MetricMeasureSpace,
    dim: f64,
    precision: Precision,
    cross_check: bool,
) -> Result<()> {
    for (k, (&node, w)) in weight.nodes().iter().zip(weight.factors()).enumerate() {
        let pk = p.value(node);
        let label = format!("node{k}");
        v.witness(format!("{label}.p"), pk);
        weight_clause(v, &label, w, -dim / pk, dim / conj(pk), precision, false)?;
        if cross_check {
            // r^{d/p(x_k)} w_k(r) ∈ Φ^0_d
            let mut phi = phi_class_check(&w.clone().shifted(dim / pk), 0.0, dim, space.diameter())?;
            phi.name = format!("{label}.phi_class");
            v.flag(format!("{label}.phi_class"), phi.status);
            v.parts.push(phi);
        }
    }
    Ok(())
}

/// Index intervals at the nodes scaled by the uniform lower dimension `m(μB)`.
pub fn theorem_b_check(
    weight: &RadialProductWeight,
    p: &ExponentField,
    space: &MetricMeasureSpace,
) -> Result<CriterionVerdict> {
    let mut v = CriterionVerdict::new("theoremB", "−m(μB)/p(x_k) < m(w_k) ≤ M(w_k) < m(μB)/p′(x_k) at every node");
    p.check_len(space.len())?;
    weight.check_nodes(space)?;
    require_bounded(&mut v, space);
    let m_mu = uniform_lower_dimension(space, &RadiusGrid::for_space(space)?)?;
    v.witness("m_muB", m_mu);
    local_node_clauses(&mut v, weight, p, space, m_mu, Precision::Estimated(DIMENSION_UNCERTAINTY), true)?;
    Ok(v)
}

/// Node intervals with `m(μB)` plus the global at-infinity interval with `Δ_{p∞}`.
pub fn theorem_c_check(
    weight: &RadialProductWeight,
    p: &ExponentField,
    space: &MetricMeasureSpace,
) -> Result<CriterionVerdict> {
    let mut v = CriterionVerdict::new(
        "theoremC",
        "node intervals with m(μB); −m∞(μB)/p∞ < Σm∞(w_k) ≤ ΣM∞(w_k) < m∞(μB)/p′∞ − Δ",
    );
    p.check_len(space.len())?;
    weight.check_nodes(space)?;
    if space.is_bounded() {
        v.require(Status::Fail);
        v.note("truncated unbounded space required");
        return Ok(v);
    }
    if !require_constant_at_infinity(&mut v, p, space) {
        return Ok(v);
    }
    let p_inf = p_infinity(p, space);
    let grid = RadiusGrid::for_space(space)?;
    let m_mu = uniform_lower_dimension(space, &grid)?;
    v.witness("m_muB", m_mu).witness("p_inf", p_inf);
    let precision = Precision::Estimated(DIMENSION_UNCERTAINTY);
    local_node_clauses(&mut v, weight, p, space, m_mu, precision, false)?;

    let probe = dimensions_at_infinity(space, &grid)?;
    let delta = (probe.upper - probe.lower) / p_inf;
    v.witness("m_inf_muB", probe.lower).witness("M_inf_muB", probe.upper).witness("delta", delta);
    v.witness("dimension_spread", probe.spread);
    let mut factors: Vec<&WeightModel> = weight.factors().iter().collect();
    if let Some(f) = weight.infinity() {
        factors.push(&f.factor);
    }
    let (mut sm, mut big) = (0.0, 0.0);
    let mut prec = Precision::Estimated(DIMENSION_UNCERTAINTY);
    for w in &factors {
        let idx = mo_indices_at_infinity(w)?;
        sm += idx.m;
        big += idx.big_m;
        prec = prec.combine(index_precision(&idx));
    }
    let power = factors.iter().all(|w| matches!(w, WeightModel::PowerLaw { .. }));
    v.flag("power_shortcut", power);
    interval_clause(&mut v, "infinity", -probe.lower / p_inf, sm, big, probe.lower / conj(p_inf) - delta, prec);
    Ok(v)
}

/// Node intervals with the Euclidean dimension `n` on a bounded domain.
pub fn euclid_maximal_check(
    weight: &RadialProductWeight,
    p: &ExponentField,
    space: &MetricMeasureSpace,
) -> Result<CriterionVerdict> {
    let mut v = CriterionVerdict::new("euclid_maximal", "−n/p(x_k) < m(w_k) ≤ M(w_k) < n/p′(x_k) at every node");
    p.check_len(space.len())?;
    weight.check_nodes(space)?;
    require_bounded(&mut v, space);
    let n = space.dim_hint();
    v.witness("n", n);
    local_node_clauses(&mut v, weight, p, space, n, Precision::Exact, true)?;
    Ok(v)
}

fn power_nodes(v: &mut CriterionVerdict, betas: &[(usize, f64)], p: &ExponentField, n: f64, len: usize) -> Result<()> {
    for (k, &(node, beta)) in betas.iter().enumerate() {
        if node >= len {
            return Err(crate::Error::UnknownPoint(node));
        }
        let pk = p.value(node);
        let label = format!("node{k}");
        v.witness(format!("{label}.p"), pk);
        interval_clause(v, &label, -n / pk, beta, beta, n / conj(pk), Precision::Exact);
    }
    Ok(())
}

fn power_sum_clause(v: &mut CriterionVerdict, betas: &[(usize, f64)], beta_inf: f64, p_inf: f64, n: f64) {
    let sum = beta_inf + betas.iter().map(|b| b.1).sum::<f64>();
    v.witness("p_inf", p_inf);
    interval_clause(v, "infinity", -n / p_inf, sum, sum, n / conj(p_inf), Precision::Exact);
}

/// Power weights `(1+|t|)^β Π|t − t_k|^{β_k}` on a Carleson curve (two-sided condition).
pub fn carleson_power_weight_check(
    betas: &[(usize, f64)],
    beta_inf: f64,
    p: &ExponentField,
    curve: &CurveSpace,
) -> Result<CriterionVerdict> {
    let mut v = CriterionVerdict::new(
        "carleson_power_weight",
        "−1/p(t_k) < β_k < 1/p′(t_k), and −1/p∞ < β + Σβ_k < 1/p′∞ on infinite curves",
    )
    .iff();
    let space = curve.space();
    p.check_len(space.len())?;
    let grid = RadiusGrid::geometric(2.0 * curve.mesh(), curve.length(), 2)?;
    v.part(carleson_check(curve, &grid));
    power_nodes(&mut v, betas, p, 1.0, space.len())?;
    v.flag("infinite", curve.is_infinite());
    if curve.is_infinite() && require_constant_at_infinity(&mut v, p, space) {
        power_sum_clause(&mut v, betas, beta_inf, p_infinity(p, space), 1.0);
    }
    Ok(v)
}

/// Power-weight condition for convolution-type singular operators on `ℝⁿ` truncations.
pub fn singular_power_weight_check(
    betas: &[(usize, f64)],
    beta_inf: f64,
    p: &ExponentField,
    space: &MetricMeasureSpace,
) -> Result<CriterionVerdict> {
    let mut v = CriterionVerdict::new(
        "singular_power_weight",
        "−n/p(x_k) < β_k < n/p′(x_k), and −n/p∞ < β + Σβ_k < n/p′∞ on unbounded spaces",
    );
    p.check_len(space.len())?;
    let n = space.dim_hint();
    v.witness("n", n);
    power_nodes(&mut v, betas, p, n, space.len())?;
    if !space.is_bounded() && require_constant_at_infinity(&mut v, p, space) {
        power_sum_clause(&mut v, betas, beta_inf, p_infinity(p, space), n);
    }
    Ok(v)
}

/// Checks `0 < value` strictly, recording the witness.
pub(crate) fn positive_clause(v: &mut CriterionVerdict, name: &str, value: f64) -> Status {
    v.witness(name, value);
    let s = margin_status(value, Precision::Exact);
    v.require(s);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::build_grid;
    use crate::weight::UnitWeight;

    #[test]
    fn theorem_a_basics() {
        let s = build_grid(&[(0.0, 1.0)], &[65], None).unwrap();
        let p = ExponentField::constant(2.0, s.len()).unwrap();
        assert_eq!(theorem_a_check(&UnitWeight, &p, &s).unwrap().status, Status::Pass);
        let u = build_grid(&[(0.0, 10.0)], &[65], None).unwrap().with_outer_radius(10.0).unwrap();
        let v = theorem_a_check(&UnitWeight, &p, &u).unwrap();
        assert_eq!(v.status, Status::Fail);
        assert!(v.notes.iter().any(|n| n.contains("bounded required")));
    }

    #[test]
    fn theorem_b_examples() {
        let s = build_grid(&[(0.0, 1.0)], &[1025], None).unwrap();
        let p = ExponentField::constant(2.0, s.len()).unwrap();
        let run = |b: f64| theorem_b_check(&RadialProductWeight::single(0, WeightModel::power(b)), &p, &s).unwrap();
        let ok = run(0.3);
        assert!((ok.get("m_muB").unwrap() - 1.0).abs() < 0.15, "{}", ok.get("m_muB").unwrap());
        assert_eq!(ok.status, Status::Pass);
        assert_eq!(ok.get_flag("node0.phi_class"), Some("pass"));
        assert_eq!(run(0.6).status, Status::Fail);
        assert_eq!(run(0.49).status, Status::Boundary);
    }

    #[test]
    fn theorem_c_examples() {
        let s = build_grid(&[(0.0, 100.0)], &[401], None).unwrap().with_outer_radius(100.0).unwrap();
        let p = ExponentField::constant(2.0, s.len()).unwrap();
        let run = |b0: f64, b1: f64| {
            let w = RadialProductWeight::single(200, WeightModel::power(b1)).with_infinity(0, WeightModel::power(b0));
            theorem_c_check(&w, &p, &s).unwrap()
        };
        let ok = run(0.2, 0.1);
        assert_eq!(ok.status, Status::Pass, "{ok:?}");
        assert!(ok.get("delta").unwrap().abs() < 0.05);
        assert_eq!(run(0.4, 0.2).status, Status::Fail);
        let q = ExponentField::from_fn(&s, |x| 2.0 + x[0] / 100.0).unwrap();
        let w = RadialProductWeight::unit();
        let v = theorem_c_check(&w, &q, &s).unwrap();
        assert_eq!(v.status, Status::Fail);
        assert_eq!(v.get_flag("hypothesis"), Some("violated"));
    }

    #[test]
    fn euclid_examples() {
        let s = build_grid(&[(0.0, 1.0)], &[33], None).unwrap();
        let p = ExponentField::constant(2.0, s.len()).unwrap();
        let one = |w: WeightModel| euclid_maximal_check(&RadialProductWeight::single(0, w), &p, &s).unwrap().status;
        assert_eq!(one(WeightModel::power(0.3)), Status::Pass);
        assert_eq!(one(WeightModel::power(0.0)), Status::Pass);
        assert_eq!(one(WeightModel::power_log(0.3, 5.0)), Status::Pass);
        let s2 = build_grid(&[(0.0, 1.0), (0.0, 1.0)], &[9, 9], None).unwrap();
        let p3 = ExponentField::constant(3.0, s2.len()).unwrap();
        let v = euclid_maximal_check(&RadialProductWeight::single(0, WeightModel::power(-0.7)), &p3, &s2).unwrap();
        assert_eq!(v.status, Status::Fail);
    }

    #[test]
    fn power_weight_checks() {
        let c = CurveSpace::circle(64, 1.0).unwrap();
        let p = ExponentField::constant(2.0, c.len()).unwrap();
        let v = carleson_power_weight_check(&[(0, 0.3)], 0.0, &p, &c).unwrap();
        assert_eq!(v.status, Status::Pass);
        assert_eq!(v.strength, super::super::Strength::IfAndOnlyIf);
        assert!(v.get("infinity.margin").is_none());
        assert_eq!(carleson_power_weight_check(&[(0, -0.5)], 0.0, &p, &c).unwrap().status, Status::Fail);

        let line =
            CurveSpace::segment(num_complex::Complex64::new(-50.0, 0.0), num_complex::Complex64::new(50.0, 0.0), 201)
                .unwrap()
                .with_outer_radius(50.0)
                .unwrap();
        let p = ExponentField::constant(2.0, line.len()).unwrap();
        let v = carleson_power_weight_check(&[(100, 0.4)], 0.3, &p, &line).unwrap();
        assert_eq!(v.status, Status::Fail);
        assert_eq!(v.get("infinity.m"), Some(0.7));

        let s = build_grid(&[(0.0, 1.0), (0.0, 1.0)], &[9, 9], None).unwrap();
        let p = ExponentField::constant(2.0, s.len()).unwrap();
        assert_eq!(singular_power_weight_check(&[(40, 0.9)], 0.0, &p, &s).unwrap().status, Status::Pass);
        assert_eq!(singular_power_weight_check(&[(40, 1.0)], 0.0, &p, &s).unwrap().status, Status::Fail);
    }
}

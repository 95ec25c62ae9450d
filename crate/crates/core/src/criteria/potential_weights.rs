//! Weight conditions for potential operators.

use super::maximal_weights::{p_infinity, positive_clause, weight_clause};
use super::{interval_clause, CriterionVerdict, Precision, Status};
use crate::error::{Error, Result};
use crate::exponent::{conj, log_holder_witness, ExponentField};
use crate::space::{carleson_check, CurveSpace, MetricMeasureSpace, RadiusGrid};
use crate::weight::{phi_class_check, psi_class_check, WeightModel};

/// `0 < inf α·p` and `sup α·p < n`.
fn alpha_p_clause(v: &mut CriterionVerdict, alpha: &[f64], p: &ExponentField, n: f64) {
    let ap: Vec<f64> = alpha.iter().zip(p.values()).map(|(a, q)| a * q).collect();
    let lo = ap.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ap.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let before = v.status;
    positive_clause(v, "inf_alpha_p", lo);
    v.witness("sup_alpha_p", hi);
    positive_clause(v, "n_minus_sup_alpha_p", n - hi);
    if v.status != before {
        v.note("prerequisite on α·p fails");
    }
}

fn check_alpha_len(alpha: &[f64], len: usize) -> Result<()> {
    if alpha.len() != len {
        return Err(Error::LengthMismatch { expected: len, got: alpha.len() });
    }
    Ok(())
}

/// Potential `I^{α(·)}` on a bounded set with the radial weight `w(|x − x₀|)`.
pub fn potential_weight_check(
    w: &WeightModel,
    x0: usize,
    alpha: &[f64],
    p: &ExponentField,
    space: &MetricMeasureSpace,
) -> Result<CriterionVerdict> {
    let mut v = CriterionVerdict::new(
        "potential_weight",
        "α(x₀) − n/p(x₀) < m(w) ≤ M(w) < n/p′(x₀), with 0 < inf αp ≤ sup αp < n and α log-Hölder",
    );
    p.check_len(space.len())?;
    check_alpha_len(alpha, space.len())?;
    if x0 >= space.len() {
        return Err(Error::UnknownPoint(x0));
    }
    let n = space.dim_hint();
    v.witness("n", n);
    if !space.is_bounded() {
        v.require(Status::Fail);
        v.note("bounded required");
    }
    alpha_p_clause(&mut v, alpha, p, n);
    let (a_log, _) = log_holder_witness(alpha, space);
    v.witness("alpha_log_holder", a_log);
    let (a0, p0) = (alpha[x0], p.value(x0));
    let (lo, hi) = (a0 - n / p0, n / conj(p0));
    weight_clause(&mut v, "node", w, lo, hi, Precision::Exact, false)?;
    let mut phi = phi_class_check(w, lo, hi, space.diameter())?;
    phi.name = "node.phi_class".into();
    v.flag("node.phi_class", phi.status);
    v.parts.push(phi);
    Ok(v)
}

/// Max `|p(x) − p(y)|·ln(1/|x* − y*|)` over inverted points `x* = x/|x|²` within 1/2.
fn inversion_witness(p: &ExponentField, space: &MetricMeasureSpace) -> f64 {
    if !space.has_coords() {
        return f64::NAN;
    }
    let inv: Vec<Option<Vec<f64>>> = (0..space.len())
        .map(|i| {
            let x = space.coords(i);
            let r2: f64 = x.iter().map(|c| c * c).sum();
            (r2 > 0.0).then(|| x.iter().map(|c| c / r2).collect())
        })
        .collect();
    let mut best = 0.0f64;
    for i in 0..space.len() {
        let Some(a) = &inv[i] else { continue };
        for j in i + 1..space.len() {
            let Some(b) = &inv[j] else { continue };
            let d = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            if d > 0.0 && d <= 0.5 {
                best = best.max((p.value(i) - p.value(j)).abs() * (1.0 / d).ln());
            }
        }
    }
    best
}

/// Stein–Weiss weight `|x|^{γ₀}(1+|x|)^{γ∞−γ₀}` for `I^α` on a truncation of `ℝⁿ`.
pub fn stein_weiss_check(
    gamma0: f64,
    gamma_inf: f64,
    alpha: f64,
    p: &ExponentField,
    space: &MetricMeasureSpace,
) -> Result<CriterionVerdict> {
    let mut v = CriterionVerdict::new(
        "stein_weiss",
        "α − n/p(0) < γ₀ < n/p′(0) and α − n/p(∞) < γ∞ < n/p′(∞), with sup p < n/α",
    );
    p.check_len(space.len())?;
    let n = space.dim_hint();
    if !(alpha > 0.0 && alpha < n) {
        return Err(Error::InvalidOperator(format!("α = {alpha} must lie in (0, {n})")));
    }
    v.witness("n", n).witness("alpha", alpha);
    if positive_clause(&mut v, "n_over_alpha_minus_p_plus", n / alpha - p.p_plus()) == Status::Fail {
        v.note("prerequisite sup p < n/α fails");
    }
    v.witness("inversion_log_holder", inversion_witness(p, space));
    let p0 = p.value(space.origin());
    let pinf = p_infinity(p, space);
    v.witness("p0", p0).witness("p_inf", pinf);
    interval_clause(&mut v, "zero", alpha - n / p0, gamma0, gamma0, n / conj(p0), Precision::Exact);
    interval_clause(&mut v, "infinity", alpha - n / pinf, gamma_inf, gamma_inf, n / conj(pinf), Precision::Exact);
    Ok(v)
}

/// Two-weight condition `ρ = w₀(|x|)·w∞(|x|)` for `I^α` on `ℝⁿ`.
pub fn rn_potential_two_weight_check(
    w0: &WeightModel,
    w_inf: &WeightModel,
    alpha: f64,
    p: &ExponentField,
    space: &MetricMeasureSpace,
) -> Result<CriterionVerdict> {
    let mut v = CriterionVerdict::new(
        "rn_potential_two_weight",
        "α − n/p(0) < m(w₀) ≤ M(w₀) < n/p′(0) and α − n/p(∞) < m∞(w∞) ≤ M∞(w∞) < n/p′(∞)",
    );
    p.check_len(space.len())?;
    let n = space.dim_hint();
    if !(alpha > 0.0 && alpha < n) {
        return Err(Error::InvalidOperator(format!("α = {alpha} must lie in (0, {n})")));
    }
    v.witness("n", n).witness("alpha", alpha);
    if positive_clause(&mut v, "n_over_alpha_minus_p_plus", n / alpha - p.p_plus()) == Status::Fail {
        v.note("prerequisite sup p < n/α fails");
    }
    let p0 = p.value(space.origin());
    let pinf = p_infinity(p, space);
    v.witness("p0", p0).witness("p_inf", pinf);
    let (lo0, hi0) = (alpha - n / p0, n / conj(p0));
    let (loi, hii) = (alpha - n / pinf, n / conj(pinf));
    weight_clause(&mut v, "zero", w0, lo0, hi0, Precision::Exact, false)?;
    weight_clause(&mut v, "infinity", w_inf, loi, hii, Precision::Exact, true)?;
    let mut phi = phi_class_check(w0, lo0, hi0, 1.0)?;
    phi.name = "zero.phi_class".into();
    let mut psi = psi_class_check(w_inf, loi, hii, 1.0)?;
    psi.name = "infinity.psi_class".into();
    v.flag("zero.phi_class", phi.status).flag("infinity.psi_class", psi.status);
    v.parts.push(phi);
    v.parts.push(psi);
    Ok(v)
}

/// Power weight `Π|t − t_k|^{β_k}` for `I^{α(·)}` on a finite Carleson curve.
pub fn curve_potential_weight_check(
    betas: &[(usize, f64)],
    alpha: &[f64],
    p: &ExponentField,
    curve: &CurveSpace,
) -> Result<CriterionVerdict> {
    let mut v = CriterionVerdict::new(
        "curve_potential_weight",
        "α(t_k) − 1/p(t_k) < β_k < 1 − 1/p(t_k), with 0 < inf αp ≤ sup αp < 1 and α log-continuous at the nodes",
    );
    let space = curve.space();
    p.check_len(space.len())?;
    check_alpha_len(alpha, space.len())?;
    if curve.is_infinite() {
        v.require(Status::Fail);
        v.note("finite length required");
    }
    let grid = RadiusGrid::geometric(2.0 * curve.mesh(), curve.length(), 2)?;
    v.part(carleson_check(curve, &grid));
    alpha_p_clause(&mut v, alpha, p, 1.0);
    for (k, &(node, beta)) in betas.iter().enumerate() {
        if node >= space.len() {
            return Err(Error::UnknownPoint(node));
        }
        let label = format!("node{k}");
        // |α(t) − α(t_k)|·|ln|t − t_k|| near the node
        let a_node = (0..space.len())
            .filter(|&t| t != node)
            .map(|t| (t, space.dist(t, node)))
            .filter(|&(_, d)| d <= 0.5)
            .map(|(t, d)| (alpha[t] - alpha[node]).abs() * d.ln().abs())
            .fold(0.0, f64::max);
        let (ak, pk) = (alpha[node], p.value(node));
        v.witness(format!("{label}.alpha_log_continuity"), a_node);
        interval_clause(&mut v, &label, ak - 1.0 / pk, beta, beta, 1.0 - 1.0 / pk, Precision::Exact);
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::build_grid;

    #[test]
    fn potential_examples() {
        let s = build_grid(&[(0.0, 1.0)], &[33], None).unwrap();
        let p = ExponentField::constant(2.0, s.len()).unwrap();
        let a = vec![0.25; s.len()];
        let v = potential_weight_check(&WeightModel::power(0.0), 0, &a, &p, &s).unwrap();
        assert_eq!(v.status, Status::Pass);
        assert_eq!(v.get("node.lower_end"), Some(-0.25));
        assert_eq!(v.get("node.upper_end"), Some(0.5));
        assert_eq!(potential_weight_check(&WeightModel::power(-0.3), 0, &a, &p, &s).unwrap().status, Status::Fail);
        let big = vec![0.6; s.len()];
        let v = potential_weight_check(&WeightModel::power(0.0), 0, &big, &p, &s).unwrap();
        assert_eq!(v.status, Status::Fail);
        assert!(v.notes.iter().any(|n| n.contains("prerequisite")));
    }

    #[test]
    fn stein_weiss_examples() {
        let s = build_grid(&[(-10.0, 10.0)], &[81], None).unwrap().with_outer_radius(10.0).unwrap();
        let p = ExponentField::constant(2.0, s.len()).unwrap();
        assert_eq!(stein_weiss_check(0.0, 0.0, 0.25, &p, &s).unwrap().status, Status::Pass);
        assert_eq!(stein_weiss_check(0.6, 0.0, 0.25, &p, &s).unwrap().status, Status::Fail);
        let q = ExponentField::constant(4.0, s.len()).unwrap();
        let v = stein_weiss_check(0.0, 0.0, 0.25, &q, &s).unwrap();
        assert_eq!(v.status, Status::Fail);
        assert_eq!(v.get("inversion_log_holder"), Some(0.0));
    }

    #[test]
    fn two_weight_examples() {
        let s = build_grid(&[(-10.0, 10.0)], &[81], None).unwrap().with_outer_radius(10.0).unwrap();
        let p = ExponentField::constant(2.0, s.len()).unwrap();
        let v =
            rn_potential_two_weight_check(&WeightModel::power(0.0), &WeightModel::power(0.0), 0.25, &p, &s).unwrap();
        assert_eq!(v.status, Status::Pass);
        assert_eq!(v.get_flag("zero.phi_class"), Some("pass"));
        assert_eq!(v.get_flag("infinity.psi_class"), Some("pass"));
        let v =
            rn_potential_two_weight_check(&WeightModel::power(-0.3), &WeightModel::power(0.0), 0.25, &p, &s).unwrap();
        assert_eq!(v.status, Status::Fail);
        let q = ExponentField::constant(4.5, s.len()).unwrap();
        let v =
            rn_potential_two_weight_check(&WeightModel::power(0.0), &WeightModel::power(0.0), 0.25, &q, &s).unwrap();
        assert_eq!(v.status, Status::Fail);
    }

    #[test]
    fn curve_examples() {
        let c = CurveSpace::circle(64, 1.0).unwrap();
        let p = ExponentField::constant(2.0, c.len()).unwrap();
        let a = vec![0.25; c.len()];
        assert_eq!(curve_potential_weight_check(&[(0, 0.0)], &a, &p, &c).unwrap().status, Status::Pass);
        assert_eq!(curve_potential_weight_check(&[(0, 0.5)], &a, &p, &c).unwrap().status, Status::Fail);
        let big = vec![0.5; c.len()];
        assert_eq!(curve_potential_weight_check(&[(0, 0.0)], &big, &p, &c).unwrap().status, Status::Fail);
    }
}

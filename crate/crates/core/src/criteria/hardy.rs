use super::{margin_status, CriterionVerdict, Precision, Status};
use crate::error::Result;
use crate::exponent::{conj, hardy_class_check};
use crate::space::MetricMeasureSpace;

/// Two-sided condition for the Hardy operators with `q = p`:
/// `α < min{1/p′(0), 1/p′(∞)}` and `β > max{1/p(0), 1/p(∞)}`.
pub fn hardy_condition_check(
    alpha: Option<f64>,
    beta: Option<f64>,
    p: &[f64],
    space: &MetricMeasureSpace,
) -> Result<CriterionVerdict> {
    let mut v = CriterionVerdict::new("hardy_condition", "α < min{1/p′(0), 1/p′(∞)} and β > max{1/p(0), 1/p(∞)}").iff();
    let class = hardy_class_check(p, space)?;
    let constant = p.windows(2).all(|w| w[0] == w[1]);
    let (p0, pinf, precision) = if constant && !p.is_empty() {
        (p[0], p[0], Precision::Exact)
    } else {
        (class.get("p0").unwrap_or(f64::NAN), class.get("p_inf").unwrap_or(f64::NAN), Precision::Estimated(0.0))
    };
    if constant {
        v.parts.push(class);
        v.note("constant p: exponent class holds trivially");
    } else {
        v.part(class);
    }
    v.witness("p0", p0).witness("p_inf", pinf);
    if let Some(a) = alpha {
        let bound = (1.0 / conj(p0)).min(1.0 / conj(pinf));
        v.witness("alpha", a).witness("alpha.upper_end", bound).witness("alpha.margin", bound - a);
        v.require(margin_status(bound - a, precision));
    }
    if let Some(b) = beta {
        let bound = (1.0 / p0).max(1.0 / pinf);
        v.witness("beta", b).witness("beta.lower_end", bound).witness("beta.margin", b - bound);
        v.require(margin_status(b - bound, precision));
    }
    if alpha.is_none() && beta.is_none() {
        v.require(Status::Unknown);
        v.note("neither α nor β given");
    }
    Ok(v)
}

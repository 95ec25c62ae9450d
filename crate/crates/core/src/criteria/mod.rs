//! Admissibility conditions evaluated as structured verdicts.

mod hardy;
mod maximal_weights;
mod muckenhoupt;
mod potential_weights;
mod verdict;

pub use hardy::hardy_condition_check;
pub use maximal_weights::{
    carleson_power_weight_check, euclid_maximal_check, singular_power_weight_check, theorem_a_check, theorem_b_check,
    theorem_c_check, DIMENSION_UNCERTAINTY, INDEX_UNCERTAINTY,
};
pub use muckenhoupt::{muckenhoupt_classical, muckenhoupt_variable};
pub use potential_weights::{
    curve_potential_weight_check, potential_weight_check, rn_potential_two_weight_check, stein_weiss_check,
};
pub use verdict::{
    interval_clause, margin_status, CriterionVerdict, Precision, Status, Strength, Witness, BOUNDARY_BAND,
};

//! Empirical operator-norm estimates and refinement studies.
//!
//! Every estimate is a maximum over a finite corpus of test functions and so only a lower
//! bound of the true norm. A study reads the sequence of estimates over refinement levels
//! as stable, diverging or inconclusive using two configurable thresholds.

mod candidates;
mod config;
mod report;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{hardy_condition_check, potential_weight_check, theorem_a_check, theorem_b_check};
use crate::criteria::{CriterionVerdict, Status};
use crate::error::{Error, Result};
use crate::exponent::{ExponentDescriptor, ExponentField};
use crate::lebesgue::{weighted_norm, SampledFunction};
use crate::operators::{Domain, OperatorSpec, PreparedOperator};
use crate::space::MetricMeasureSpace;
use crate::weight::{CellWeight, RadialProductWeight};

pub use candidates::{candidates, corpus, Anchor, Candidate};
pub use config::{
    nearest_point, CorpusSection, ExperimentConfig, ExperimentSection, LevelSpace, NodeSpec, SpaceLevels, StudyKind,
    Thresholds, WeightSpec,
};
pub use report::{write_report, OutputFormat};

/// `x_min` of the graded grids used by the Hardy and potential studies, coarsest first.
pub const GRADED_LEVELS: [f64; 4] = [1e-6, 1e-12, 1e-24, 1e-48];

/// Grading ratio of those grids.
pub const GRADED_RATIO: f64 = 0.85;

pub const LOWER_BOUND_NOTE: &str = "estimates are maxima over a finite corpus: lower bounds of the true norm";

/// `‖ρ·Tf‖_{q(·)} / ‖ρ·f‖_{p(·)}`, or `None` when the denominator vanishes.
pub fn ratio_pq(
    op: &PreparedOperator<'_>,
    f: &SampledFunction,
    rho: &dyn CellWeight,
    p: &ExponentField,
    q: &ExponentField,
    space: &MetricMeasureSpace,
) -> Result<Option<f64>> {
    let den = weighted_norm(f, rho, p, space)?.value;
    if den == 0.0 {
        return Ok(None);
    }
    let tf = op.apply(f)?;
    let num = weighted_norm(&tf, rho, q, space)?.value;
    Ok(Some(num / den))
}

/// `‖ρ·Tf‖_{p(·)} / ‖ρ·f‖_{p(·)}`, or `None` when the denominator vanishes.
pub fn ratio(
    op: &PreparedOperator<'_>,
    f: &SampledFunction,
    rho: &dyn CellWeight,
    p: &ExponentField,
    space: &MetricMeasureSpace,
) -> Result<Option<f64>> {
    ratio_pq(op, f, rho, p, p, space)
}

/// One candidate's outcome: a ratio, or the reason it was skipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub id: usize,
    pub tag: String,
    pub ratio: Option<f64>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub level: usize,
    /// Number of points of the level's space.
    pub size: usize,
    pub mesh: f64,
    /// Largest ratio over the corpus.
    pub value: f64,
    pub argmax_id: usize,
    pub argmax_tag: String,
    /// Candidates evaluated, skipped ones included.
    pub trials: usize,
    pub skipped: usize,
}

/// Ratios of every candidate, then the maximum with ties going to the lowest id.
///
/// Trials run in parallel but the reduction walks them in id order, so the result does
/// not depend on the number of workers.
pub fn estimate_over(
    op: &PreparedOperator<'_>,
    corpus: &[Candidate],
    rho: &dyn CellWeight,
    p: &ExponentField,
    q: &ExponentField,
    space: &MetricMeasureSpace,
    level: usize,
) -> Result<(NormEstimate, Vec<Trial>)> {
    let trials: Vec<Trial> = corpus
        .par_iter()
        .map(|c| {
            let (ratio, skipped) = match ratio_pq(op, &c.f, rho, p, q, space) {
                Ok(Some(r)) if r.is_finite() => (Some(r), None),
                Ok(Some(r)) => (None, Some(format!("non-finite ratio {r}"))),
                Ok(None) => (None, Some("zero denominator".to_string())),
                Err(e) => (None, Some(e.to_string())),
            };
            Trial { id: c.id, tag: c.tag.clone(), ratio, skipped }
        })
        .collect();
    let mut best: Option<&Trial> = None;
    for t in &trials {
        if let Some(r) = t.ratio {
            if best.map_or(true, |b| r > b.ratio.unwrap_or(f64::NEG_INFINITY)) {
                best = Some(t);
            }
        }
    }
    let Some(best) = best else {
        let reason = trials.first().and_then(|t| t.skipped.clone()).unwrap_or_else(|| "empty corpus".into());
        return Err(Error::Experiment(format!("all {} candidates skipped at level {level}: {reason}", trials.len())));
    };
    let estimate = NormEstimate {
        level,
        size: space.len(),
        mesh: space.mesh(),
        value: best.ratio.unwrap_or(0.0),
        argmax_id: best.id,
        argmax_tag: best.tag.clone(),
        trials: trials.len(),
        skipped: trials.iter().filter(|t| t.ratio.is_none()).count(),
    };
    Ok((estimate, trials))
}

/// Everything needed to evaluate one refinement level.
pub struct LevelSetup {
    pub level: usize,
    pub domain: LevelSpace,
    pub p: ExponentField,
    pub q: ExponentField,
    pub weight: RadialProductWeight,
    pub anchors: Vec<Anchor>,
}

impl LevelSetup {
    pub fn new(config: &ExperimentConfig, level: usize) -> Result<Self> {
        config.validate()?;
        let domain = config.space.build(level)?;
        let space = &domain.space;
        let p = config.exponent.field(space)?;
        let weight = config.weight.resolve(space)?;
        let q = match config.experiment.kind {
            StudyKind::Potential => sobolev_exponent(&config.operator, &p, space, config.experiment.q_offset)?,
            _ => p.clone(),
        };
        let mut anchors: Vec<Anchor> = weight.nodes().iter().map(|&k| Anchor::Point(k)).collect();
        match config.experiment.kind {
            StudyKind::Hardy => {
                anchors.insert(0, Anchor::Origin);
                let far = (0..space.len())
                    .max_by(|&a, &b| space.norm_of(a).total_cmp(&space.norm_of(b)).then(b.cmp(&a)))
                    .unwrap_or(0);
                anchors.push(Anchor::Point(far));
            }
            StudyKind::Potential if anchors.is_empty() => anchors.push(Anchor::Point(space.origin())),
            _ => {}
        }
        Ok(LevelSetup { level, domain, p, q, weight, anchors })
    }

    pub fn space(&self) -> &MetricMeasureSpace {
        &self.domain.space
    }

    pub fn operator_domain(&self) -> Domain<'_> {
        match &self.domain.curve {
            Some(c) => Domain::Curve(c),
            None => Domain::Space(&self.domain.space),
        }
    }

    pub fn corpus(&self, seed: u64, budget: usize) -> Result<Vec<Candidate>> {
        corpus(&self.weight, Some(&self.weight), &self.anchors, &self.p, self.space(), seed, budget)
    }
}

/// `1/q = 1/p − α/n` pointwise, plus `offset`.
fn sobolev_exponent(
    op: &OperatorSpec,
    p: &ExponentField,
    space: &MetricMeasureSpace,
    offset: f64,
) -> Result<ExponentField> {
    let (alpha, n) = match op {
        OperatorSpec::RieszPotential { alpha, .. } => (alpha.sample(space), space.dim_hint()),
        OperatorSpec::CurvePotential { alpha, .. } => (alpha.sample(space), 1.0),
        other => return Err(Error::Config(format!("no Sobolev exponent for operator {}", other.name()))),
    };
    let mut q = Vec::with_capacity(space.len());
    for (i, (&a, &pi)) in alpha.iter().zip(p.values()).enumerate() {
        let inv = 1.0 / pi - a / n;
        if !(inv > 0.0) {
            return Err(Error::Config(format!("α·p = {} reaches n = {n} at point {i}", a * pi)));
        }
        q.push(1.0 / inv + offset);
    }
    ExponentField::new(q)
}

pub fn estimate_level(config: &ExperimentConfig, level: usize) -> Result<(NormEstimate, Vec<Trial>)> {
    let setup = LevelSetup::new(config, level)?;
    let op = PreparedOperator::new(&config.operator, setup.operator_domain())?;
    let corpus = setup.corpus(config.corpus.seed, config.corpus.budget)?;
    estimate_over(&op, &corpus, &setup.weight, &setup.p, &setup.q, setup.space(), level)
}

/// Largest ratio over the configured corpus at one refinement level.
pub fn estimate_operator_norm(config: &ExperimentConfig, level: usize) -> Result<NormEstimate> {
    Ok(estimate_level(config, level)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyOutcome {
    Stable,
    Diverging,
    Inconclusive,
}

impl StudyOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            StudyOutcome::Stable => "stable",
            StudyOutcome::Diverging => "diverging",
            StudyOutcome::Inconclusive => "inconclusive",
        }
    }
}

/// Trend of a sequence of estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    pub outcome: StudyOutcome,
    pub last_over_previous: f64,
    pub overall_growth: f64,
    pub monotone: bool,
}

/// Diverging when the estimates increase strictly and grow by at least `blow_up_ratio`
/// overall; otherwise stable when the last step grows by at most `stability_ratio`.
pub fn classify(values: &[f64], t: Thresholds) -> Result<Trend> {
    if values.len() < 2 {
        return Err(Error::Experiment(format!("a study needs at least 2 levels, got {}", values.len())));
    }
    let n = values.len();
    let last_over_previous = values[n - 1] / values[n - 2];
    let overall_growth = values[n - 1] / values[0];
    let monotone = values.windows(2).all(|w| w[1] > w[0]);
    let outcome = if monotone && overall_growth >= t.blow_up_ratio {
        StudyOutcome::Diverging
    } else if last_over_previous <= t.stability_ratio {
        StudyOutcome::Stable
    } else {
        StudyOutcome::Inconclusive
    };
    Ok(Trend { outcome, last_over_previous, overall_growth, monotone })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub config: ExperimentConfig,
    pub estimates: Vec<NormEstimate>,
    pub trend: Trend,
    /// The criterion that predicts the outcome, evaluated on the finest level.
    pub verdict: Option<CriterionVerdict>,
    pub notes: Vec<String>,
}

impl StudyReport {
    pub fn outcome(&self) -> StudyOutcome {
        self.trend.outcome
    }

    pub fn values(&self) -> Vec<f64> {
        self.estimates.iter().map(|e| e.value).collect()
    }
}

/// Norm estimates at every level of the config, their trend and the matching criterion.
pub fn refinement_study(config: &ExperimentConfig) -> Result<StudyReport> {
    config.validate()?;
    if config.levels() < 2 {
        return Err(Error::Experiment(format!("a study needs at least 2 levels, got {}", config.levels())));
    }
    let mut estimates = Vec::with_capacity(config.levels());
    for level in 0..config.levels() {
        estimates.push(estimate_operator_norm(config, level)?);
    }
    let values: Vec<f64> = estimates.iter().map(|e| e.value).collect();
    let trend = classify(&values, config.thresholds)?;
    let finest = LevelSetup::new(config, config.levels() - 1)?;
    let verdict = joined_verdict(config, &finest)?;
    let mut notes = vec![LOWER_BOUND_NOTE.to_string()];
    notes.extend(config.operator.notes());
    if let Some(v) = &verdict {
        if let Some(note) = agreement_note(v, trend.outcome) {
            notes.push(note);
        }
    }
    Ok(StudyReport { config: config.clone(), estimates, trend, verdict, notes })
}

fn agreement_note(v: &CriterionVerdict, outcome: StudyOutcome) -> Option<String> {
    let predicted = match v.status {
        Status::Pass => StudyOutcome::Stable,
        Status::Fail if v.strength == crate::criteria::Strength::IfAndOnlyIf => StudyOutcome::Diverging,
        _ => return None,
    };
    Some(if predicted == outcome {
        format!("{} predicts {} and the study agrees", v.name, predicted.as_str())
    } else {
        format!("{} predicts {} but the study reads {}", v.name, predicted.as_str(), outcome.as_str())
    })
}

/// Criterion names accepted by `experiment.criterion`.
pub const JOINABLE: [&str; 6] = ["none", "theorem_a", "theorem_b", "hardy_condition", "potential_weight", "sobolev"];

fn joined_verdict(config: &ExperimentConfig, setup: &LevelSetup) -> Result<Option<CriterionVerdict>> {
    let name = match &config.experiment.criterion {
        Some(n) => n.as_str(),
        None => match (&config.operator, config.experiment.kind) {
            (OperatorSpec::Maximal, _) if setup.domain.curve.is_none() => "theorem_b",
            (OperatorSpec::HardyLower { .. } | OperatorSpec::HardyUpper { .. }, _) => "hardy_condition",
            (_, StudyKind::Potential) => "sobolev",
            _ => "none",
        },
    };
    let space = setup.space();
    let p = &setup.p;
    Ok(match name {
        "none" => None,
        "theorem_a" => Some(theorem_a_check(&setup.weight, p, space)?),
        "theorem_b" => Some(theorem_b_check(&setup.weight, p, space)?),
        "hardy_condition" => Some(match config.operator {
            OperatorSpec::HardyLower { alpha } => hardy_condition_check(Some(alpha), None, p.values(), space)?,
            OperatorSpec::HardyUpper { beta, .. } => hardy_condition_check(None, Some(beta), p.values(), space)?,
            _ => return Err(Error::Config("hardy_condition needs a Hardy operator".into())),
        }),
        "potential_weight" | "sobolev" => Some(sobolev_verdict(config, setup)?),
        other => {
            return Err(Error::Config(format!("unknown criterion {other:?}; expected one of {}", JOINABLE.join(", "))))
        }
    })
}

/// The target exponent against the Sobolev one, with the weight condition when the weight
/// is a single power-type factor.
fn sobolev_verdict(config: &ExperimentConfig, setup: &LevelSetup) -> Result<CriterionVerdict> {
    let space = setup.space();
    let exact = sobolev_exponent(&config.operator, &setup.p, space, 0.0)?;
    let excess = setup.q.values().iter().zip(exact.values()).map(|(q, s)| q - s).fold(f64::NEG_INFINITY, f64::max);
    let mut v = CriterionVerdict::new("sobolev_exponent", "1/q = 1/p − α/n; a larger q cannot be reached");
    v.witness("q_excess", excess);
    v.require(if excess <= 1e-12 { Status::Pass } else { Status::Fail });
    if let (Some(alpha), [node], [factor], None) = (
        potential_alpha(&config.operator, space),
        setup.weight.nodes(),
        setup.weight.factors(),
        setup.weight.infinity(),
    ) {
        v.part(potential_weight_check(factor, *node, &alpha, &setup.p, space)?);
    }
    Ok(v)
}

fn potential_alpha(op: &OperatorSpec, space: &MetricMeasureSpace) -> Option<Vec<f64>> {
    match op {
        OperatorSpec::RieszPotential { alpha, .. } | OperatorSpec::CurvePotential { alpha, .. } => {
            Some(alpha.sample(space))
        }
        _ => None,
    }
}

/// Order parameter of a Hardy study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HardyParam {
    /// `H^α`
    Alpha(f64),
    /// `H_β`
    Beta(f64),
}

/// Hardy study on `(0, 1]` grids graded toward 0, one level per `x_min`.
pub fn hardy_config(param: HardyParam, p: ExponentDescriptor, x_min: &[f64]) -> ExperimentConfig {
    let (name, operator) = match param {
        HardyParam::Alpha(alpha) => (format!("hardy-lower-{alpha}"), OperatorSpec::HardyLower { alpha }),
        HardyParam::Beta(beta) => {
            (format!("hardy-upper-{beta}"), OperatorSpec::HardyUpper { beta, tail: Default::default() })
        }
    };
    ExperimentConfig {
        experiment: ExperimentSection { name, kind: StudyKind::Hardy, q_offset: 0.0, criterion: None },
        space: SpaceLevels::Graded { lo: 0.0, hi: 1.0, ratio: GRADED_RATIO, include_lo: false, x_min: x_min.to_vec() },
        exponent: p,
        weight: WeightSpec::default(),
        operator,
        corpus: CorpusSection::default(),
        thresholds: Thresholds::default(),
    }
}

pub fn hardy_experiment(param: HardyParam, p: ExponentDescriptor, x_min: &[f64]) -> Result<StudyReport> {
    refinement_study(&hardy_config(param, p, x_min))
}

/// Riesz potential study on `[0, 1]` grids graded toward 0, mapping `L^p` to `L^q` with
/// `q` from the Sobolev relation plus `q_offset`.
pub fn potential_config(
    alpha: f64,
    weight: WeightSpec,
    p: ExponentDescriptor,
    q_offset: f64,
    x_min: &[f64],
) -> ExperimentConfig {
    ExperimentConfig {
        experiment: ExperimentSection {
            name: format!("riesz-potential-{alpha}"),
            kind: StudyKind::Potential,
            q_offset,
            criterion: None,
        },
        space: SpaceLevels::Graded { lo: 0.0, hi: 1.0, ratio: GRADED_RATIO, include_lo: true, x_min: x_min.to_vec() },
        exponent: p,
        weight,
        operator: OperatorSpec::RieszPotential {
            alpha: ExponentDescriptor::Constant { p: alpha },
            diagonal: Default::default(),
        },
        corpus: CorpusSection::default(),
        thresholds: Thresholds::default(),
    }
}

pub fn potential_experiment(
    alpha: f64,
    weight: WeightSpec,
    p: ExponentDescriptor,
    q_offset: f64,
    x_min: &[f64],
) -> Result<StudyReport> {
    refinement_study(&potential_config(alpha, weight, p, q_offset, x_min))
}

/// Maximal-operator study on uniform `[0, 1]` grids with a power weight at 0.
pub fn maximal_power_config(beta: f64, p: f64, sizes: &[usize]) -> ExperimentConfig {
    ExperimentConfig {
        experiment: ExperimentSection {
            name: format!("maximal-power-{beta}"),
            kind: StudyKind::Refinement,
            q_offset: 0.0,
            criterion: None,
        },
        space: SpaceLevels::Uniform { bounds: vec![(0.0, 1.0)], resolutions: sizes.iter().map(|&n| vec![n]).collect() },
        exponent: ExponentDescriptor::Constant { p },
        weight: WeightSpec::power_at(vec![0.0], beta),
        operator: OperatorSpec::Maximal,
        corpus: CorpusSection::default(),
        thresholds: Thresholds::default(),
    }
}

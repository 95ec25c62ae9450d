use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::ExponentDescriptor;
use crate::operators::OperatorSpec;
use crate::space::{build_graded_interval, build_grid, CurveSpace, MetricMeasureSpace};
use crate::weight::{RadialProductWeight, WeightModel};

/// Which refinement study the config describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    /// Any operator with `p = q`.
    #[default]
    Refinement,
    /// Hardy operators on graded half-line grids.
    Hardy,
    /// Riesz potential from `L^p` to `L^q`, `q` from the Sobolev relation plus `q_offset`.
    Potential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub name: String,
    #[serde(default)]
    pub kind: StudyKind,
    /// Added to the Sobolev exponent in potential studies.
    #[serde(default)]
    pub q_offset: f64,
    /// Criterion joined to the report; chosen from the operator when absent.
    #[serde(default)]
    pub criterion: Option<String>,
}

/// Refinement levels of the underlying space, coarsest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceLevels {
    /// Uniform tensor grid; one resolution vector per level.
    Uniform { bounds: Vec<(f64, f64)>, resolutions: Vec<Vec<usize>> },
    /// Graded interval; one `x_min` per level.
    Graded {
        lo: f64,
        hi: f64,
        ratio: f64,
        #[serde(default)]
        include_lo: bool,
        x_min: Vec<f64>,
    },
    /// Regular polygon inscribed in a circle; one vertex count per level.
    Circle { radius: f64, vertices: Vec<usize> },
}

/// A space at one level, with the curve it came from when there is one.
#[derive(Debug, Clone)]
pub struct LevelSpace {
    pub space: MetricMeasureSpace,
    pub curve: Option<CurveSpace>,
}

impl SpaceLevels {
    pub fn count(&self) -> usize {
        match self {
            SpaceLevels::Uniform { resolutions, .. } => resolutions.len(),
            SpaceLevels::Graded { x_min, .. } => x_min.len(),
            SpaceLevels::Circle { vertices, .. } => vertices.len(),
        }
    }

    pub fn build(&self, level: usize) -> Result<LevelSpace> {
        if level >= self.count() {
            return Err(Error::Config(format!("level {level} out of range (have {})", self.count())));
        }
        match self {
            SpaceLevels::Uniform { bounds, resolutions } => {
                Ok(LevelSpace { space: build_grid(bounds, &resolutions[level], None)?, curve: None })
            }
            SpaceLevels::Graded { lo, hi, ratio, include_lo, x_min } => Ok(LevelSpace {
                space: build_graded_interval(*lo, *hi, x_min[level], *ratio, *include_lo)?,
                curve: None,
            }),
            SpaceLevels::Circle { radius, vertices } => {
                let c = CurveSpace::circle(vertices[level], *radius)?;
                Ok(LevelSpace { space: c.space().clone(), curve: Some(c) })
            }
        }
    }
}

/// A weight factor attached to the grid point nearest to `at`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub at: Vec<f64>,
    pub factor: WeightModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    #[serde(default)]
    pub nodes: Vec<NodeSpec>,
    #[serde(default)]
    pub infinity: Option<NodeSpec>,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec { nodes: Vec::new(), infinity: None, scale: 1.0 }
    }
}

/// Index of the point nearest to `at`, lowest index on ties.
pub fn nearest_point(space: &MetricMeasureSpace, at: &[f64]) -> Result<usize> {
    if !space.has_coords() {
        return Err(Error::Config("weight nodes need a space with coordinates".into()));
    }
    let d2 = |i: usize| -> f64 {
        let c = space.coords(i);
        if c.len() != at.len() {
            return f64::INFINITY;
        }
        c.iter().zip(at).map(|(a, b)| (a - b) * (a - b)).sum()
    };
    let best = (0..space.len()).min_by(|&a, &b| d2(a).total_cmp(&d2(b)).then(a.cmp(&b))).unwrap_or(0);
    if !d2(best).is_finite() {
        return Err(Error::Config(format!("node position {at:?} has the wrong dimension")));
    }
    Ok(best)
}

impl WeightSpec {
    pub fn power_at(at: Vec<f64>, a: f64) -> Self {
        WeightSpec { nodes: vec![NodeSpec { at, factor: WeightModel::power(a) }], infinity: None, scale: 1.0 }
    }

    pub fn resolve(&self, space: &MetricMeasureSpace) -> Result<RadialProductWeight> {
        let mut idx = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            idx.push(nearest_point(space, &n.at)?);
        }
        let mut w = RadialProductWeight::new(idx, self.nodes.iter().map(|n| n.factor.clone()).collect())?;
        if let Some(inf) = &self.infinity {
            w = w.with_infinity(nearest_point(space, &inf.at)?, inf.factor.clone());
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Config(format!("weight scale {} must be positive", self.scale)));
        }
        Ok(w.scaled(self.scale))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    pub seed: u64,
    pub budget: usize,
}

impl Default for CorpusSection {
    fn default() -> Self {
        CorpusSection { seed: 0, budget: 128 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// `last/previous` at or below this reads as stable.
    #[serde(default = "default_stability")]
    pub stability_ratio: f64,
    /// Overall growth at or above this, with monotone estimates, reads as diverging.
    #[serde(default = "default_blow_up")]
    pub blow_up_ratio: f64,
}

fn default_stability() -> f64 {
    1.25
}

fn default_blow_up() -> f64 {
    2.0
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { stability_ratio: default_stability(), blow_up_ratio: default_blow_up() }
    }
}

/// One experiment: a family of refined spaces, exponent, weight, operator, corpus and thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub space: SpaceLevels,
    pub exponent: ExponentDescriptor,
    #[serde(default)]
    pub weight: WeightSpec,
    pub operator: OperatorSpec,
    #[serde(default)]
    pub corpus: CorpusSection,
    #[serde(default)]
    pub thresholds: Thresholds,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Canonical TOML, with every default written out.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn levels(&self) -> usize {
        self.space.count()
    }

    pub fn validate(&self) -> Result<()> {
        if self.corpus.budget == 0 {
            return Err(Error::Config("corpus budget must be at least 1".into()));
        }
        if self.levels() == 0 {
            return Err(Error::Config("at least one refinement level is required".into()));
        }
        let t = self.thresholds;
        if !(t.stability_ratio >= 1.0 && t.blow_up_ratio > 1.0) {
            return Err(Error::Config(format!(
                "thresholds need stability_ratio ≥ 1 and blow_up_ratio > 1, got {} and {}",
                t.stability_ratio, t.blow_up_ratio
            )));
        }
        if self.experiment.kind == StudyKind::Potential
            && !matches!(self.operator, OperatorSpec::RieszPotential { .. } | OperatorSpec::CurvePotential { .. })
        {
            return Err(Error::Config("a potential study needs a riesz_potential or curve_potential operator".into()));
        }
        if self.experiment.kind == StudyKind::Hardy
            && !matches!(self.operator, OperatorSpec::HardyLower { .. } | OperatorSpec::HardyUpper { .. })
        {
            return Err(Error::Config("a hardy study needs a hardy_lower or hardy_upper operator".into()));
        }
        if self.operator.needs_curve() && !matches!(self.space, SpaceLevels::Circle { .. }) {
            return Err(Error::Config(format!("operator {} needs a curve space", self.operator.name())));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[experiment]
name = "maximal-power"

[space]
type = "uniform"
bounds = [[0.0, 1.0]]
resolutions = [[64], [128]]

[exponent]
type = "constant"
p = 2.0

[[weight.nodes]]
at = [0.0]
factor = { type = "power_law", a = 0.3 }

[operator]
type = "maximal"

[corpus]
seed = 7
budget = 32
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(cfg.levels(), 2);
        assert_eq!(cfg.thresholds, Thresholds::default());
        assert_eq!(cfg.weight.nodes[0].factor, WeightModel::power(0.3));
        let again = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn rejects_bad_input() {
        let zero = SAMPLE.replace("budget = 32", "budget = 0");
        assert!(matches!(ExperimentConfig::from_toml(&zero), Err(Error::Config(_))));
        let typo = SAMPLE.replace("seed = 7", "sead = 7");
        assert!(ExperimentConfig::from_toml(&typo).is_err());
    }

    #[test]
    fn nodes_snap_to_nearest_point() {
        let s = build_grid(&[(0.0, 1.0)], &[11], None).unwrap();
        assert_eq!(nearest_point(&s, &[0.0]).unwrap(), 0);
        assert_eq!(nearest_point(&s, &[0.33]).unwrap(), 3);
        assert!(nearest_point(&s, &[0.0, 0.0]).is_err());
    }
}

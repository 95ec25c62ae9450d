use std::path::{Path, PathBuf};

use clap::ValueEnum;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use varexp::exponent::ExponentDescriptor;
use varexp::harness::WeightSpec;
use varexp::lebesgue::SampledFunction;
use varexp::operators::{Domain, OperatorSpec};
use varexp::space::io::{load_curve, load_space};
use varexp::space::{build_graded_interval, build_grid, CurveSpace, MetricMeasureSpace};
use varexp::weight::WeightModel;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKindArg {
    /// Uniform grid on `[lo, hi]`.
    Interval,
    /// Uniform `n × n` grid on `[lo, hi]²`.
    Square,
    /// Interval graded geometrically toward `lo`.
    Graded,
    /// Circle of `radius` with `n` vertices.
    Curve,
    /// Space table written by `space`.
    File,
    /// Curve table written by `space --kind curve`.
    CurveFile,
}

fn zero() -> f64 {
    0.0
}
fn one() -> f64 {
    1.0
}
fn default_n() -> usize {
    64
}
fn default_x_min() -> f64 {
    1e-6
}
fn default_ratio() -> f64 {
    0.85
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub kind: SpaceKindArg,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "zero")]
    pub lo: f64,
    #[serde(default = "one")]
    pub hi: f64,
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default = "default_x_min")]
    pub x_min: f64,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    #[serde(default)]
    pub include_lo: bool,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

impl SpaceSpec {
    pub fn new(kind: SpaceKindArg) -> Self {
        SpaceSpec {
            kind,
            n: default_n(),
            lo: 0.0,
            hi: 1.0,
            radius: 1.0,
            x_min: default_x_min(),
            ratio: default_ratio(),
            include_lo: false,
            path: None,
        }
    }

    pub fn build(&self) -> Result<BuiltSpace, CliError> {
        let path =
            || self.path.clone().ok_or_else(|| CliError::Usage(format!("space kind {:?} needs a path", self.kind)));
        Ok(match self.kind {
            SpaceKindArg::Interval => BuiltSpace::plain(build_grid(&[(self.lo, self.hi)], &[self.n], None)?),
            SpaceKindArg::Square => {
                BuiltSpace::plain(build_grid(&[(self.lo, self.hi), (self.lo, self.hi)], &[self.n, self.n], None)?)
            }
            SpaceKindArg::Graded => {
                BuiltSpace::plain(build_graded_interval(self.lo, self.hi, self.x_min, self.ratio, self.include_lo)?)
            }
            SpaceKindArg::Curve => BuiltSpace::curve(CurveSpace::circle(self.n, self.radius)?),
            SpaceKindArg::File => BuiltSpace::plain(load_space(&path()?)?),
            SpaceKindArg::CurveFile => BuiltSpace::curve(load_curve(&path()?)?),
        })
    }
}

pub struct BuiltSpace {
    pub space: MetricMeasureSpace,
    pub curve: Option<CurveSpace>,
}

impl BuiltSpace {
    fn plain(space: MetricMeasureSpace) -> Self {
        BuiltSpace { space, curve: None }
    }

    fn curve(c: CurveSpace) -> Self {
        BuiltSpace { space: c.space().clone(), curve: Some(c) }
    }

    pub fn domain(&self) -> Domain<'_> {
        match &self.curve {
            Some(c) => Domain::Curve(c),
            None => Domain::Space(&self.space),
        }
    }
}

/// Input function for `norm` and `apply`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant {
        value: f64,
    },
    /// `|x − at|^exponent`, set to 0 at `at` itself when the exponent is negative.
    Power {
        at: Vec<f64>,
        exponent: f64,
    },
    /// Table with a `value` column or `re` and `im` columns, one row per point in id order.
    File {
        path: PathBuf,
    },
}

impl Default for FunctionSpec {
    fn default() -> Self {
        FunctionSpec::Constant { value: 1.0 }
    }
}

impl FunctionSpec {
    pub fn sample(&self, space: &MetricMeasureSpace) -> Result<SampledFunction, CliError> {
        match self {
            FunctionSpec::Constant { value } => Ok(SampledFunction::constant(*value, space.len())),
            FunctionSpec::Power { at, exponent } => {
                let f = SampledFunction::from_fn(space, |x| {
                    let d = x.iter().zip(at).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    if d == 0.0 && *exponent < 0.0 {
                        0.0
                    } else {
                        d.powf(*exponent)
                    }
                })?;
                Ok(f)
            }
            FunctionSpec::File { path } => read_function(path, space.len()),
        }
    }
}

pub fn read_function(path: &Path, n: usize) -> Result<SampledFunction, CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::io(path, e))?;
    let headers = rdr.headers().map_err(|e| CliError::io(path, e))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (re, im, id) = match (col("value"), col("re"), col("im")) {
        (Some(v), _, _) => (v, None, col("id")),
        (None, Some(r), Some(i)) => (r, Some(i), col("id")),
        _ => return Err(CliError::Data(format!("{}: need a `value` column or `re` and `im` columns", path.display()))),
    };
    let mut values = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::io(path, e))?;
        let num = |k: usize| -> Result<f64, CliError> {
            let field = rec.get(k).unwrap_or("").trim();
            field
                .parse::<f64>()
                .map_err(|_| CliError::Data(format!("{}: row {}: bad number {field:?}", path.display(), row + 1)))
        };
        if let Some(k) = id {
            let got = num(k)?;
            if got != row as f64 {
                return Err(CliError::Data(format!(
                    "{}: row {} has id {got}; rows must list ids 0..{} in order",
                    path.display(),
                    row + 1,
                    n
                )));
            }
        }
        values.push(Complex64::new(num(re)?, im.map(num).transpose()?.unwrap_or(0.0)));
    }
    if values.len() != n {
        return Err(CliError::Data(format!(
            "{}: {} function values for a space of {n} points",
            path.display(),
            values.len()
        )));
    }
    Ok(SampledFunction::new(values)?)
}

/// Numeric parameters shared by the criteria.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    /// Right end of the Zygmund-class domain `(0, ℓ]`.
    #[serde(default = "one")]
    pub ell: f64,
    /// Stein–Weiss power at the origin and at infinity.
    #[serde(default)]
    pub gamma0: f64,
    #[serde(default)]
    pub gamma_inf: f64,
    /// Power weight exponent at infinity for curve criteria.
    #[serde(default)]
    pub beta_inf: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params { alpha: None, beta: None, ell: 1.0, gamma0: 0.0, gamma_inf: 0.0, beta_inf: 0.0 }
    }
}

fn default_exponent() -> ExponentDescriptor {
    ExponentDescriptor::Constant { p: 2.0 }
}

/// Config for `norm`, `indices`, `check` and `apply`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default)]
    pub criteria: Vec<String>,
    #[serde(default = "default_exponent")]
    pub exponent: ExponentDescriptor,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub space: Option<SpaceSpec>,
    #[serde(default)]
    pub weight: WeightSpec,
    /// Single weight factor for `indices` and the Zygmund-class criteria.
    #[serde(default)]
    pub weight_model: Option<WeightModel>,
    #[serde(default)]
    pub function: FunctionSpec,
    #[serde(default)]
    pub operator: Option<OperatorSpec>,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        ProblemConfig {
            criteria: Vec::new(),
            exponent: default_exponent(),
            params: Params::default(),
            space: None,
            weight: WeightSpec::default(),
            weight_model: None,
            function: FunctionSpec::default(),
            operator: None,
        }
    }
}

impl ProblemConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Data(format!("config: {e}")))
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Data(format!("config: {e}")))
    }

    pub fn space(&self) -> Result<BuiltSpace, CliError> {
        self.space
            .as_ref()
            .ok_or_else(|| CliError::Usage("no space given: pass --kind (or --circle) or a [space] section".into()))?
            .build()
    }
}

/// Parses an inline TOML value such as `{ type = "power_law", a = 0.5 }`.
pub fn inline<T: serde::de::DeserializeOwned>(what: &str, text: &str) -> Result<T, CliError> {
    #[derive(Deserialize)]
    struct Wrap<T> {
        v: T,
    }
    toml::from_str::<Wrap<T>>(&format!("v = {text}"))
        .map(|w| w.v)
        .map_err(|e| CliError::Data(format!("{what} {text:?}: {e}")))
}

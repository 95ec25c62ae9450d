//! Integral operators on discretized spaces and curves.

mod convolution;
mod hardy;
mod maximal;
mod potential;
mod singular;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::ExponentDescriptor;
use crate::lebesgue::SampledFunction;
use crate::space::{CurveSpace, MetricMeasureSpace};

pub use convolution::{convolve, validate_decay, ConvolutionOutput, KernelSpec};
pub use hardy::{hardy_lower, hardy_upper, Tail};
pub use maximal::{fractional_maximal, maximal, BallSweep};
pub use potential::{curve_potential, riesz_potential, DiagonalMode};
pub use singular::{cauchy_singular, EpsRule, SingularOutput};

/// An operator with its parameters, as written in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OperatorSpec {
    Identity,
    Maximal,
    FractionalMaximal {
        alpha: ExponentDescriptor,
    },
    RieszPotential {
        alpha: ExponentDescriptor,
        #[serde(default)]
        diagonal: DiagonalMode,
    },
    CurvePotential {
        alpha: ExponentDescriptor,
        #[serde(default)]
        diagonal: DiagonalMode,
    },
    HardyLower {
        alpha: f64,
    },
    HardyUpper {
        beta: f64,
        #[serde(default)]
        tail: Tail,
    },
    CauchySingular {
        #[serde(default)]
        eps: EpsRule,
    },
    Convolution {
        kernel: KernelSpec,
        lambda: f64,
    },
}

impl OperatorSpec {
    pub fn name(&self) -> &'static str {
        match self {
            OperatorSpec::Identity => "identity",
            OperatorSpec::Maximal => "maximal",
            OperatorSpec::FractionalMaximal { .. } => "fractional_maximal",
            OperatorSpec::RieszPotential { .. } => "riesz_potential",
            OperatorSpec::CurvePotential { .. } => "curve_potential",
            OperatorSpec::HardyLower { .. } => "hardy_lower",
            OperatorSpec::HardyUpper { .. } => "hardy_upper",
            OperatorSpec::CauchySingular { .. } => "cauchy_singular",
            OperatorSpec::Convolution { .. } => "convolution",
        }
    }

    /// Discretization choices worth echoing next to any output of this operator.
    pub fn notes(&self) -> Vec<String> {
        match self {
            OperatorSpec::FractionalMaximal { .. } => {
                vec!["ball measure raised to α/n − 1 with n = dim_hint (curves: n = 1)".into()]
            }
            OperatorSpec::RieszPotential { diagonal, .. } | OperatorSpec::CurvePotential { diagonal, .. } => {
                vec![match diagonal {
                    DiagonalMode::SelfCell => "diagonal: exact kernel integral over a ball-shaped self cell".into(),
                    DiagonalMode::Drop => "diagonal: dropped".into(),
                }]
            }
            OperatorSpec::CauchySingular { .. } => vec![
                "line element dτ = (τ_{k+1} − τ_{k−1})/2; arc-length-symmetric exclusion".into(),
                "endpoints of open curves excluded from the output".into(),
            ],
            _ => Vec::new(),
        }
    }

    pub fn needs_curve(&self) -> bool {
        matches!(self, OperatorSpec::CurvePotential { .. } | OperatorSpec::CauchySingular { .. })
    }
}

/// Where an operator acts.
#[derive(Debug, Clone, Copy)]
pub enum Domain<'a> {
    Space(&'a MetricMeasureSpace),
    Curve(&'a CurveSpace),
}

impl<'a> Domain<'a> {
    pub fn space(&self) -> &'a MetricMeasureSpace {
        match self {
            Domain::Space(s) => s,
            Domain::Curve(c) => c.space(),
        }
    }

    pub fn curve(&self) -> Option<&'a CurveSpace> {
        match self {
            Domain::Space(_) => None,
            Domain::Curve(c) => Some(c),
        }
    }
}

/// An operator bound to a domain, with per-domain precomputation done once.
pub struct PreparedOperator<'a> {
    spec: OperatorSpec,
    domain: Domain<'a>,
    sweep: Option<BallSweep>,
    alpha: Vec<f64>,
}

impl<'a> PreparedOperator<'a> {
    pub fn new(spec: &OperatorSpec, domain: Domain<'a>) -> Result<Self> {
        if spec.needs_curve() && domain.curve().is_none() {
            return Err(Error::InvalidOperator(format!("{} needs a curve", spec.name())));
        }
        let space = domain.space();
        let sweep = match spec {
            OperatorSpec::Maximal | OperatorSpec::FractionalMaximal { .. } => Some(BallSweep::new(space)),
            _ => None,
        };
        let alpha = match spec {
            OperatorSpec::FractionalMaximal { alpha }
            | OperatorSpec::RieszPotential { alpha, .. }
            | OperatorSpec::CurvePotential { alpha, .. } => alpha.sample(space),
            _ => Vec::new(),
        };
        Ok(PreparedOperator { spec: spec.clone(), domain, sweep, alpha })
    }

    pub fn spec(&self) -> &OperatorSpec {
        &self.spec
    }

    pub fn domain(&self) -> Domain<'a> {
        self.domain
    }

    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        let space = self.domain.space();
        match &self.spec {
            OperatorSpec::Identity => {
                f.check_len(space.len())?;
                Ok(f.clone())
            }
            OperatorSpec::Maximal => self.sweep.as_ref().expect("prepared").maximal(f),
            OperatorSpec::FractionalMaximal { .. } => {
                self.sweep.as_ref().expect("prepared").fractional_maximal(f, &self.alpha)
            }
            OperatorSpec::RieszPotential { diagonal, .. } => riesz_potential(f, &self.alpha, space, *diagonal),
            OperatorSpec::CurvePotential { diagonal, .. } => {
                curve_potential(f, &self.alpha, self.domain.curve().expect("checked"), *diagonal)
            }
            OperatorSpec::HardyLower { alpha } => hardy_lower(f, *alpha, space),
            OperatorSpec::HardyUpper { beta, tail } => hardy_upper(f, *beta, space, *tail),
            OperatorSpec::CauchySingular { eps } => {
                Ok(cauchy_singular(f, self.domain.curve().expect("checked"), *eps)?.values)
            }
            OperatorSpec::Convolution { kernel, lambda } => Ok(convolve(kernel, *lambda, f, space)?.values),
        }
    }
}

/// One-shot application of `spec` to `f`.
pub fn apply(spec: &OperatorSpec, f: &SampledFunction, domain: Domain<'_>) -> Result<SampledFunction> {
    PreparedOperator::new(spec, domain)?.apply(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::build_grid;

    #[test]
    fn spec_round_trip_and_dispatch() {
        let spec = OperatorSpec::RieszPotential {
            alpha: ExponentDescriptor::Constant { p: 0.25 },
            diagonal: DiagonalMode::Drop,
        };
        let text = toml::to_string(&spec).unwrap();
        assert_eq!(toml::from_str::<OperatorSpec>(&text).unwrap(), spec);
        let parsed: OperatorSpec = toml::from_str("type = \"hardy_upper\"\nbeta = 0.6").unwrap();
        assert_eq!(parsed, OperatorSpec::HardyUpper { beta: 0.6, tail: Tail::Zero });

        let s = build_grid(&[(0.0, 1.0)], &[9], None).unwrap();
        let f = SampledFunction::constant(2.0, 9);
        assert_eq!(apply(&OperatorSpec::Identity, &f, Domain::Space(&s)).unwrap(), f);
        assert_eq!(apply(&OperatorSpec::Maximal, &f, Domain::Space(&s)).unwrap(), f);
        assert!(apply(&OperatorSpec::CauchySingular { eps: EpsRule::default() }, &f, Domain::Space(&s)).is_err());
    }
}

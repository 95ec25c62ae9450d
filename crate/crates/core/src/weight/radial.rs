use serde::{Deserialize, Serialize};

use super::{radial_power_average, WeightModel};
use crate::error::{Error, Result};
use crate::space::MetricMeasureSpace;

/// A weight as seen by discretized integrals: point values plus cell averages of its powers.
///
/// Point values are exact away from singularities. At a node where a factor vanishes or
/// blows up, the point value is 0 or ∞, while the cell average of `ρ^s` integrates the
/// factor over the ball-shaped cell of the node, which is finite whenever `ρ^s` is
/// locally integrable.
pub trait CellWeight: Send + Sync {
    fn point_value(&self, space: &MetricMeasureSpace, i: usize) -> f64;

    /// Average of `ρ^s` over the cell of point `i`.
    fn cell_power_avg(&self, space: &MetricMeasureSpace, i: usize, s: f64) -> f64 {
        if s == 0.0 {
            1.0
        } else {
            self.point_value(space, i).powf(s)
        }
    }

    /// `(avg ρ^p)^{1/p}`: the value to multiply `f(x_i)` by inside an `L^{p(·)}` modular.
    fn effective(&self, space: &MetricMeasureSpace, i: usize, p: f64) -> f64 {
        self.cell_power_avg(space, i, p).powf(1.0 / p)
    }

    fn describe(&self) -> String;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct UnitWeight;

impl CellWeight for UnitWeight {
    fn point_value(&self, _: &MetricMeasureSpace, _: usize) -> f64 {
        1.0
    }

    fn describe(&self) -> String {
        "1".into()
    }
}

/// Per-point weight values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledWeight {
    values: Vec<f64>,
}

impl SampledWeight {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidWeight(format!("weight value {v} at point {i}")));
        }
        Ok(SampledWeight { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Multiplies every value by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        SampledWeight { values: self.values.iter().map(|v| v * c).collect() }
    }
}

impl CellWeight for SampledWeight {
    fn point_value(&self, _: &MetricMeasureSpace, i: usize) -> f64 {
        self.values[i]
    }

    fn describe(&self) -> String {
        format!("sampled({} values)", self.values.len())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfinityFactor {
    pub center: usize,
    pub factor: WeightModel,
}

/// `ρ(x) = Π_k w_k(d(x, x_k)) · w₀(1 + d(x₀, x))`, the last factor being optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProductWeight {
    nodes: Vec<usize>,
    factors: Vec<WeightModel>,
    infinity: Option<InfinityFactor>,
    scale: f64,
}

/// Value of a radial weight at a point, with the node where it vanishes if any.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightEval {
    pub value: f64,
    pub vanishing_node: Option<usize>,
}

impl RadialProductWeight {
    pub fn new(nodes: Vec<usize>, factors: Vec<WeightModel>) -> Result<Self> {
        if nodes.len() != factors.len() {
            return Err(Error::LengthMismatch { expected: nodes.len(), got: factors.len() });
        }
        let mut sorted = nodes.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidWeight("weight nodes must be distinct".into()));
        }
        Ok(RadialProductWeight { nodes, factors, infinity: None, scale: 1.0 })
    }

    pub fn unit() -> Self {
        RadialProductWeight { nodes: Vec::new(), factors: Vec::new(), infinity: None, scale: 1.0 }
    }

    pub fn single(node: usize, factor: WeightModel) -> Self {
        RadialProductWeight { nodes: vec![node], factors: vec![factor], infinity: None, scale: 1.0 }
    }

    pub fn with_infinity(mut self, center: usize, factor: WeightModel) -> Self {
        self.infinity = Some(InfinityFactor { center, factor });
        self
    }

    /// Constant multiple `c·ρ`.
    pub fn scaled(mut self, c: f64) -> Self {
        self.scale *= c;
        self
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn factors(&self) -> &[WeightModel] {
        &self.factors
    }

    pub fn infinity(&self) -> Option<&InfinityFactor> {
        self.infinity.as_ref()
    }

    pub fn check_nodes(&self, space: &MetricMeasureSpace) -> Result<()> {
        let all = self.nodes.iter().chain(self.infinity.iter().map(|f| &f.center));
        for &k in all {
            if k >= space.len() {
                return Err(Error::UnknownPoint(k));
            }
        }
        Ok(())
    }

    fn infinity_value(&self, space: &MetricMeasureSpace, x: usize) -> f64 {
        match &self.infinity {
            Some(f) => f.factor.eval(1.0 + space.dist(f.center, x)),
            None => 1.0,
        }
    }

    fn value(&self, space: &MetricMeasureSpace, x: usize) -> f64 {
        let mut v = self.scale * self.infinity_value(space, x);
        for (&k, w) in self.nodes.iter().zip(&self.factors) {
            v *= w.eval(space.dist(x, k));
        }
        v
    }
}

impl CellWeight for RadialProductWeight {
    fn point_value(&self, space: &MetricMeasureSpace, i: usize) -> f64 {
        self.value(space, i)
    }

    fn cell_power_avg(&self, space: &MetricMeasureSpace, i: usize, s: f64) -> f64 {
        if s == 0.0 {
            return 1.0;
        }
        let Some(k) = self.nodes.iter().position(|&n| n == i) else {
            return self.value(space, i).powf(s);
        };
        let n = space.dim_hint();
        let mass = space.mass(i);
        if mass <= 0.0 {
            return self.value(space, i).powf(s);
        }
        let r_self = mass.powf(1.0 / n) / 2.0;
        let mut rest = self.scale * self.infinity_value(space, i);
        for (j, (&node, w)) in self.nodes.iter().zip(&self.factors).enumerate() {
            if j != k {
                rest *= w.eval(space.dist(i, node));
            }
        }
        rest.powf(s) * radial_power_average(&self.factors[k], s, n, r_self)
    }

    fn describe(&self) -> String {
        let mut parts: Vec<String> =
            self.nodes.iter().zip(&self.factors).map(|(k, w)| format!("node {k}: {w:?}")).collect();
        if let Some(f) = &self.infinity {
            parts.push(format!("infinity about {}: {:?}", f.center, f.factor));
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("; ")
        }
    }
}

/// `ρ(x)`; zero at a node whose factor vanishes there, an error where it is infinite.
pub fn evaluate_weight(rho: &RadialProductWeight, space: &MetricMeasureSpace, x: usize) -> Result<WeightEval> {
    if x >= space.len() {
        return Err(Error::UnknownPoint(x));
    }
    rho.check_nodes(space)?;
    let value = rho.value(space, x);
    let node_here = rho.nodes.iter().position(|&n| n == x);
    if value.is_infinite() || value.is_nan() {
        return Err(Error::SingularWeight { node: node_here.unwrap_or(usize::MAX), point: x });
    }
    let vanishing_node = if value == 0.0 { node_here } else { None };
    Ok(WeightEval { value, vanishing_node })
}

//! Python module `varexp`: spaces, norms, indices, criteria, operators and studies.
//!
//! Structured inputs (weight models, operators, exponent descriptors, experiment configs)
//! are passed as TOML text in the same shape the command-line tool reads.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use varexp::criteria::{hardy_condition_check, theorem_b_check, CriterionVerdict};
use varexp::exponent::{ExponentDescriptor, ExponentField};
use varexp::harness::{refinement_study, ExperimentConfig};
use varexp::lebesgue::{luxemburg_norm, modular, SampledFunction};
use varexp::operators::{apply, Domain, OperatorSpec};
use varexp::space::{
    build_graded_interval, build_grid, dimension_report, doubling_constant, CurveSpace, MetricMeasureSpace, RadiusGrid,
};
use varexp::weight::{mo_indices, mo_indices_at_infinity, RadialProductWeight, WeightModel};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn from_toml<T: DeserializeOwned>(what: &str, text: &str) -> PyResult<T> {
    #[derive(Deserialize)]
    struct Wrap<T> {
        v: T,
    }
    let text = text.trim();
    // a bare inline table is wrapped; a whole document is read as is
    if text.starts_with('{') {
        toml::from_str::<Wrap<T>>(&format!("v = {text}")).map(|w| w.v).map_err(|e| err(format!("{what}: {e}")))
    } else {
        toml::from_str(text).map_err(|e| err(format!("{what}: {e}")))
    }
}

/// A discretized metric measure space, optionally carrying the curve it samples.
#[pyclass(module = "varexp", frozen)]
pub struct Space {
    space: MetricMeasureSpace,
    curve: Option<CurveSpace>,
}

impl Space {
    fn domain(&self) -> Domain<'_> {
        match &self.curve {
            Some(c) => Domain::Curve(c),
            None => Domain::Space(&self.space),
        }
    }

    fn exponent(&self, p: PArg) -> PyResult<ExponentField> {
        match p {
            PArg::Constant(p) => ExponentField::constant(p, self.space.len()),
            PArg::Values(v) => ExponentField::new(v),
            PArg::Descriptor(text) => from_toml::<ExponentDescriptor>("exponent", &text)?.field(&self.space),
        }
        .map_err(err)
    }
}

/// An exponent given as a number, a list with one value per point, or descriptor TOML.
#[derive(FromPyObject)]
pub enum PArg {
    Constant(f64),
    Values(Vec<f64>),
    Descriptor(String),
}

#[pymethods]
impl Space {
    /// Uniform grid of `n` points on `[lo, hi]`.
    #[staticmethod]
    #[pyo3(signature = (n, lo = 0.0, hi = 1.0))]
    pub fn interval(n: usize, lo: f64, hi: f64) -> PyResult<Self> {
        Ok(Space { space: build_grid(&[(lo, hi)], &[n], None).map_err(err)?, curve: None })
    }

    /// Uniform `n × n` grid on `[lo, hi]²`.
    #[staticmethod]
    #[pyo3(signature = (n, lo = 0.0, hi = 1.0))]
    pub fn square(n: usize, lo: f64, hi: f64) -> PyResult<Self> {
        Ok(Space { space: build_grid(&[(lo, hi), (lo, hi)], &[n, n], None).map_err(err)?, curve: None })
    }

    /// Interval graded geometrically toward `lo`, smallest positive node `x_min`.
    #[staticmethod]
    #[pyo3(signature = (x_min, lo = 0.0, hi = 1.0, ratio = 0.85, include_lo = false))]
    pub fn graded(x_min: f64, lo: f64, hi: f64, ratio: f64, include_lo: bool) -> PyResult<Self> {
        Ok(Space { space: build_graded_interval(lo, hi, x_min, ratio, include_lo).map_err(err)?, curve: None })
    }

    /// Regular polygon with `n` vertices inscribed in a circle.
    #[staticmethod]
    #[pyo3(signature = (n, radius = 1.0))]
    pub fn circle(n: usize, radius: f64) -> PyResult<Self> {
        let c = CurveSpace::circle(n, radius).map_err(err)?;
        Ok(Space { space: c.space().clone(), curve: Some(c) })
    }

    fn __len__(&self) -> usize {
        self.space.len()
    }

    fn __repr__(&self) -> String {
        format!("Space(kind={}, points={})", self.space.kind().as_str(), self.space.len())
    }

    pub fn coords(&self) -> Vec<Vec<f64>> {
        (0..self.space.len()).map(|i| self.space.coords(i).to_vec()).collect()
    }

    pub fn masses(&self) -> Vec<f64> {
        self.space.masses().to_vec()
    }

    /// `(doubling constant, m(μB))` on the default radius grid.
    pub fn doubling(&self) -> PyResult<(f64, f64)> {
        let grid = RadiusGrid::for_space(&self.space).map_err(err)?;
        let c = doubling_constant(&self.space, &grid).map_err(err)?;
        let r = dimension_report(&self.space, &grid, &[]).map_err(err)?;
        Ok((c, r.m_uniform))
    }

    /// Lower and upper local dimensions at point `x`.
    pub fn local_dimensions(&self, x: usize) -> PyResult<(f64, f64)> {
        let grid = RadiusGrid::for_space(&self.space).map_err(err)?;
        let r = dimension_report(&self.space, &grid, &[x]).map_err(err)?;
        Ok((r.local[0].lower, r.local[0].upper))
    }
}

/// Luxemburg norm of `values` in `L^{p(·)}` of `space`.
#[pyfunction]
pub fn norm(space: &Space, values: Vec<Complex64>, p: PArg) -> PyResult<f64> {
    let f = SampledFunction::new(values).map_err(err)?;
    let p = space.exponent(p)?;
    Ok(luxemburg_norm(&f, &p, &space.space).map_err(err)?.value)
}

/// `Σ |f_i|^{p_i} μ_i`.
#[pyfunction(name = "modular")]
pub fn modular_value(space: &Space, values: Vec<Complex64>, p: PArg) -> PyResult<f64> {
    let f = SampledFunction::new(values).map_err(err)?;
    modular(&f, &space.exponent(p)?, &space.space).map_err(err)
}

/// Applies an operator given by name or TOML, e.g. `{ type = "hardy_lower", alpha = 0.2 }`.
#[pyfunction(name = "apply")]
pub fn apply_operator(space: &Space, operator: &str, values: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
    let text = operator.trim();
    let spec: OperatorSpec = if text.starts_with('{') {
        from_toml("operator", text)?
    } else {
        from_toml("operator", &format!("{{ type = {text:?} }}"))?
    };
    let f = SampledFunction::new(values).map_err(err)?;
    Ok(apply(&spec, &f, space.domain()).map_err(err)?.values().to_vec())
}

/// `(m, M)` at zero, or at infinity when `at_infinity` is set.
#[pyfunction]
#[pyo3(signature = (weight, at_infinity = false))]
pub fn indices(weight: &str, at_infinity: bool) -> PyResult<(f64, f64)> {
    let w: WeightModel = from_toml("weight model", weight)?;
    let i = if at_infinity { mo_indices_at_infinity(&w) } else { mo_indices(&w) }.map_err(err)?;
    Ok((i.m, i.big_m))
}

fn verdict_json(v: CriterionVerdict) -> (String, String) {
    (v.status.as_str().to_string(), v.to_json())
}

/// Maximal-operator verdict for the weight `d(x, x_node)^power`: `(status, verdict JSON)`.
#[pyfunction]
pub fn theorem_b(space: &Space, node: usize, power: f64, p: PArg) -> PyResult<(String, String)> {
    let w = RadialProductWeight::single(node, WeightModel::power(power));
    let v = theorem_b_check(&w, &space.exponent(p)?, &space.space).map_err(err)?;
    Ok(verdict_json(v))
}

/// Hardy-operator verdict for `H^α` and/or `H_β`: `(status, verdict JSON)`.
#[pyfunction]
#[pyo3(signature = (space, p, alpha = None, beta = None))]
pub fn hardy_condition(space: &Space, p: PArg, alpha: Option<f64>, beta: Option<f64>) -> PyResult<(String, String)> {
    let p = space.exponent(p)?;
    let v = hardy_condition_check(alpha, beta, p.values(), &space.space).map_err(err)?;
    Ok(verdict_json(v))
}

/// Runs a refinement study from experiment TOML: `(outcome, estimates, verdict status or None)`.
#[pyfunction]
pub fn study(config: &str) -> PyResult<(String, Vec<f64>, Option<String>)> {
    let cfg = ExperimentConfig::from_toml(config).map_err(err)?;
    let r = refinement_study(&cfg).map_err(err)?;
    Ok((r.outcome().as_str().to_string(), r.values(), r.verdict.map(|v| v.status.as_str().to_string())))
}

#[pymodule]
#[pyo3(name = "varexp")]
fn varexp_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Space>()?;
    m.add_function(wrap_pyfunction!(norm, m)?)?;
    m.add_function(wrap_pyfunction!(modular_value, m)?)?;
    m.add_function(wrap_pyfunction!(apply_operator, m)?)?;
    m.add_function(wrap_pyfunction!(indices, m)?)?;
    m.add_function(wrap_pyfunction!(theorem_b, m)?)?;
    m.add_function(wrap_pyfunction!(hardy_condition, m)?)?;
    m.add_function(wrap_pyfunction!(study, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bindings_match_the_library() {
        let s = Space::interval(65, 0.0, 1.0).unwrap();
        let one = vec![Complex64::new(1.0, 0.0); 65];
        assert!((norm(&s, one.clone(), PArg::Constant(3.0)).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(indices("{ type = \"power_law\", a = 0.5 }", false).unwrap(), (0.5, 0.5));
        let g = apply_operator(&s, "maximal", one).unwrap();
        assert!(g.iter().all(|v| (v.re - 1.0).abs() < 1e-12));
        let (status, json) = theorem_b(&s, 0, 0.3, PArg::Constant(2.0)).unwrap();
        assert_eq!(status, "pass");
        assert!(json.contains("theoremB"));
    }

    #[test]
    fn exponent_descriptors_parse_as_toml() {
        let s = Space::interval(9, 0.0, 1.0).unwrap();
        let p = s.exponent(PArg::Descriptor("{ type = \"affine\", base = 1.5, slope = 1 }".into())).unwrap();
        assert_eq!((p.p_minus(), p.p_plus()), (1.5, 2.5));
        assert!(s.exponent(PArg::Descriptor("{ type = \"nope\" }".into())).is_err());
    }
}

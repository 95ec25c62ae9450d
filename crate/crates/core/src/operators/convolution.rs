use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lebesgue::SampledFunction;
use crate::space::{GridSpec, MetricMeasureSpace};

/// Radial convolution kernels `k(y)` given analytically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelSpec {
    /// Discrete delta: the convolution is the identity.
    Delta,
    /// `k ≡ 1` on `|y| ≤ half_width`, 0 elsewhere.
    Window { half_width: f64 },
    /// `k(y) = c·(1 + |y|)^{−decay}`.
    PowerDecay { c: f64, decay: f64 },
    /// `k(y) = exp(−|y|²/(2σ²))`.
    Gaussian { sigma: f64 },
}

impl KernelSpec {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            KernelSpec::Delta => {
                if r == 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            KernelSpec::Window { half_width } => {
                if r <= half_width {
                    1.0
                } else {
                    0.0
                }
            }
            KernelSpec::PowerDecay { c, decay } => c * (1.0 + r).powf(-decay),
            KernelSpec::Gaussian { sigma } => (-r * r / (2.0 * sigma * sigma)).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionOutput {
    pub values: SampledFunction,
    /// Set when `|k(y)|(1 + |y|)^λ` did not look bounded.
    pub decay_warning: Option<String>,
}

/// Samples `|k(y)|(1+|y|)^λ` on `[0, 1e6]` and flags growth beyond the grid scale.
pub fn validate_decay(kernel: &KernelSpec, lambda: f64, scale: f64) -> Option<String> {
    let scale = scale.max(1.0);
    let g = |r: f64| kernel.eval(r).abs() * (1.0 + r).powf(lambda);
    let near = (0..=64).map(|k| scale * k as f64 / 64.0).map(g).fold(0.0, f64::max);
    let far = (0..=64).map(|k| scale * (1e6 / scale).max(1.0).powf(k as f64 / 64.0)).map(g).fold(0.0, f64::max);
    if far > 10.0 * near.max(f64::MIN_POSITIVE) {
        Some(format!("|k(y)|(1+|y|)^{lambda} grows from {near:.3e} near the grid to {far:.3e} far out"))
    } else {
        None
    }
}

/// `Σ_y k(x − y) f(y) μ(y)` on a uniform grid; the declared decay `λ` is validated, not enforced.
pub fn convolve(
    kernel: &KernelSpec,
    lambda: f64,
    f: &SampledFunction,
    space: &MetricMeasureSpace,
) -> Result<ConvolutionOutput> {
    f.check_len(space.len())?;
    if !matches!(space.grid(), Some(GridSpec::Uniform { .. })) {
        return Err(Error::InvalidOperator("convolution needs a uniform grid".into()));
    }
    let decay_warning = validate_decay(kernel, lambda, space.diameter());
    if *kernel == KernelSpec::Delta {
        return Ok(ConvolutionOutput { values: f.clone(), decay_warning });
    }
    let mass = space.masses();
    let values: Vec<Complex64> = (0..space.len())
        .into_par_iter()
        .map(|x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for y in 0..space.len() {
                let k = kernel.eval(space.dist(x, y));
                if k != 0.0 {
                    acc += f.value(y) * (k * mass[y]);
                }
            }
            acc
        })
        .collect();
    Ok(ConvolutionOutput { values: SampledFunction::new(values)?, decay_warning })
}

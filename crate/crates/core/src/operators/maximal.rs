use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lebesgue::SampledFunction;
use crate::space::{BallProfile, MetricMeasureSpace};

/// Ball profiles of every center, computed once and reused across functions.
///
/// A ball never splits an equidistant shell, so each prefix ending at a shell end is
/// one distinct ball configuration. Sums run in `(distance, id)` order.
#[derive(Debug, Clone)]
pub struct BallSweep {
    profiles: Vec<BallProfile>,
    masses: Vec<f64>,
    n: f64,
}

impl BallSweep {
    pub fn new(space: &MetricMeasureSpace) -> Self {
        let profiles = (0..space.len()).into_par_iter().map(|x| space.ball_profile(x)).collect();
        BallSweep { profiles, masses: space.masses().to_vec(), n: space.dim_hint() }
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// Largest value of `μB^{e}·Σ_B |f|μ` over the balls centered at `x`.
    fn sweep(&self, x: usize, a: &[f64], e: f64) -> f64 {
        let p = &self.profiles[x];
        let (mut sf, mut sm) = (0.0, 0.0);
        let mut best: f64 = 0.0;
        let mut start = 0;
        for &end in &p.shell_ends {
            for &y in &p.order[start..end] {
                sf += a[y] * self.masses[y];
                sm += self.masses[y];
            }
            start = end;
            if sm > 0.0 {
                let v = if e == -1.0 { sf / sm } else { sm.powf(e) * sf };
                best = best.max(v);
            }
        }
        best
    }

    pub fn maximal(&self, f: &SampledFunction) -> Result<SampledFunction> {
        f.check_len(self.len())?;
        let a = f.abs_values();
        let out = (0..self.len()).into_par_iter().map(|x| self.sweep(x, &a, -1.0)).collect();
        SampledFunction::real(out)
    }

    pub fn fractional_maximal(&self, f: &SampledFunction, alpha: &[f64]) -> Result<SampledFunction> {
        f.check_len(self.len())?;
        check_alpha(alpha, self.len(), self.n)?;
        let a = f.abs_values();
        let out = (0..self.len()).into_par_iter().map(|x| self.sweep(x, &a, alpha[x] / self.n - 1.0)).collect();
        SampledFunction::real(out)
    }
}

pub(crate) fn check_alpha(alpha: &[f64], len: usize, n: f64) -> Result<()> {
    if alpha.len() != len {
        return Err(Error::LengthMismatch { expected: len, got: alpha.len() });
    }
    if let Some((i, a)) = alpha.iter().enumerate().find(|(_, a)| !(**a > 0.0 && **a < n)) {
        return Err(Error::InvalidOperator(format!("α = {a} at point {i} must lie in (0, {n})")));
    }
    Ok(())
}

/// `Mf(x) = max_B (1/μB) Σ_B |f|μ` over the distinct balls centered at `x`.
pub fn maximal(f: &SampledFunction, space: &MetricMeasureSpace) -> Result<SampledFunction> {
    BallSweep::new(space).maximal(f)
}

/// `max_B μB^{α(x)/n − 1} Σ_B |f|μ` with `n = dim_hint`.
pub fn fractional_maximal(f: &SampledFunction, alpha: &[f64], space: &MetricMeasureSpace) -> Result<SampledFunction> {
    BallSweep::new(space).fractional_maximal(f, alpha)
}

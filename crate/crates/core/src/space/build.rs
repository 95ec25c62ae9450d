use serde::{Deserialize, Serialize};

use super::{MetricMeasureSpace, SpaceKind};
use crate::error::{Error, Result};

/// Recipe for a grid-built space, kept so that the space can be refined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GridSpec {
    Uniform { bounds: Vec<(f64, f64)>, resolution: Vec<usize> },
    Graded { lo: f64, hi: f64, x_min: f64, ratio: f64, include_lo: bool },
}

impl GridSpec {
    /// Nested refinement: every point of `self` is a point of the refined grid.
    pub fn refine(&self) -> GridSpec {
        match self {
            GridSpec::Uniform { bounds, resolution } => GridSpec::Uniform {
                bounds: bounds.clone(),
                resolution: resolution.iter().map(|&n| 2 * n - 1).collect(),
            },
            GridSpec::Graded { lo, hi, x_min, ratio, include_lo } => {
                GridSpec::Graded { lo: *lo, hi: *hi, x_min: *x_min, ratio: ratio.sqrt(), include_lo: *include_lo }
            }
        }
    }

    pub fn build(&self) -> Result<MetricMeasureSpace> {
        match self {
            GridSpec::Uniform { bounds, resolution } => build_grid(bounds, resolution, None),
            GridSpec::Graded { lo, hi, x_min, ratio, include_lo } => {
                build_graded_interval(*lo, *hi, *x_min, *ratio, *include_lo)
            }
        }
    }
}

/// Uniform tensor grid with trapezoid cell masses times `density`.
pub fn build_grid(
    bounds: &[(f64, f64)],
    resolution: &[usize],
    density: Option<&dyn Fn(&[f64]) -> f64>,
) -> Result<MetricMeasureSpace> {
    if bounds.is_empty() || bounds.len() != resolution.len() {
        return Err(Error::InvalidGrid(format!("{} axis ranges but {} resolutions", bounds.len(), resolution.len())));
    }
    for (axis, (&(lo, hi), &n)) in bounds.iter().zip(resolution).enumerate() {
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidGrid(format!("axis {axis} has zero or invalid extent [{lo}, {hi}]")));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("axis {axis} needs at least 2 points, got {n}")));
        }
    }

    // Per-axis node positions and 1-D trapezoid weights.
    let axes: Vec<(Vec<f64>, Vec<f64>)> = bounds
        .iter()
        .zip(resolution)
        .map(|(&(lo, hi), &n)| {
            let h = (hi - lo) / (n - 1) as f64;
            let x = (0..n).map(|i| if i == n - 1 { hi } else { lo + h * i as f64 }).collect();
            let w = (0..n).map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h }).collect();
            (x, w)
        })
        .collect();

    let total: usize = resolution.iter().product();
    let mut coords = Vec::with_capacity(total);
    let mut mass = Vec::with_capacity(total);
    let mut idx = vec![0usize; axes.len()];
    for cell in 0..total {
        let c: Vec<f64> = idx.iter().zip(&axes).map(|(&i, (x, _))| x[i]).collect();
        let vol: f64 = idx.iter().zip(&axes).map(|(&i, (_, w))| w[i]).product();
        let rho = match density {
            Some(f) => {
                let v = f(&c);
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::NegativeDensity { cell, value: v });
                }
                v
            }
            None => 1.0,
        };
        coords.push(c);
        mass.push(vol * rho);
        // last axis varies fastest
        for a in (0..idx.len()).rev() {
            idx[a] += 1;
            if idx[a] < resolution[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    let kind = if bounds.len() == 1 { SpaceKind::IntervalGrid } else { SpaceKind::EuclideanGrid };
    let space = MetricMeasureSpace::from_points(coords, mass, kind, bounds.len() as f64)?;
    Ok(space.with_grid(GridSpec::Uniform { bounds: bounds.to_vec(), resolution: resolution.to_vec() }))
}

/// Interval grid geometrically graded toward `lo`: points `lo + x_min·g^k` (g = 1/ratio) up to `hi`.
///
/// With `include_lo` the endpoint itself is a point; otherwise the grid lives on `(lo, hi]`
/// and the first cell absorbs `(lo, x_0]` so the total mass is still `hi − lo`.
pub fn build_graded_interval(lo: f64, hi: f64, x_min: f64, ratio: f64, include_lo: bool) -> Result<MetricMeasureSpace> {
    if !(hi > lo) || !(x_min > 0.0) || x_min >= hi - lo {
        return Err(Error::InvalidGrid(format!(
            "graded grid needs lo < lo + x_min < hi, got [{lo}, {hi}], x_min {x_min}"
        )));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidGrid(format!("grading ratio {ratio} must lie in (0, 1)")));
    }
    let g = 1.0 / ratio;
    let mut offsets = Vec::new();
    let mut k = 0i32;
    loop {
        let off = x_min * g.powi(k);
        if off >= hi - lo {
            break;
        }
        offsets.push(off);
        k += 1;
    }
    // avoid a sliver cell next to the far end
    if offsets.len() >= 2 {
        let n = offsets.len();
        if (hi - lo) - offsets[n - 1] < 0.5 * (offsets[n - 1] - offsets[n - 2]) {
            offsets.pop();
        }
    }
    offsets.push(hi - lo);

    let mut xs: Vec<f64> = Vec::with_capacity(offsets.len() + 1);
    if include_lo {
        xs.push(lo);
    }
    xs.extend(offsets.iter().map(|o| lo + o));
    let n = xs.len();
    let mut mass = vec![0.0; n];
    for i in 0..n {
        let left = if i == 0 {
            if include_lo {
                xs[0]
            } else {
                lo
            }
        } else {
            0.5 * (xs[i - 1] + xs[i])
        };
        let right = if i + 1 == n { xs[i] } else { 0.5 * (xs[i] + xs[i + 1]) };
        mass[i] = right - left;
    }
    let coords = xs.into_iter().map(|x| vec![x]).collect();
    let space = MetricMeasureSpace::from_points(coords, mass, SpaceKind::IntervalGrid, 1.0)?;
    Ok(space.with_grid(GridSpec::Graded { lo, hi, x_min, ratio, include_lo }))
}

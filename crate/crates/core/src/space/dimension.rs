//! Finite-sample estimators for the doubling constant and the measure dimension indices.
//!
//! Limits `r → 0` are replaced by the smallest half-decade of radii that the grid
//! can resolve. A radius is resolvable when it is at least four times the largest
//! nearest-neighbour distance; below that, ball measures count atoms rather than
//! measure.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{MetricMeasureSpace, RadiusGrid};
use crate::error::{Error, Result};

const RESOLUTION_FACTOR: f64 = 4.0;
const HALF_DECADE: f64 = 3.162_277_660_168_379_5;
const MIN_USABLE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalDimension {
    pub point: usize,
    pub lower: f64,
    pub upper: f64,
}

/// Index estimate together with the probe band it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionProbe {
    pub lower: f64,
    pub upper: f64,
    /// Smallest and largest base radius used.
    pub band: (f64, f64),
    /// Dilation factor `t` of the ratio `μB(x, rt)/μB(x, r)`.
    pub t: f64,
    /// Largest deviation of the estimate across auxiliary probe centers.
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub local: Vec<LocalDimension>,
    pub m_uniform: f64,
    pub at_infinity: Option<DimensionProbe>,
    pub probe_radii: Vec<f64>,
    pub band: (f64, f64),
}

/// `max μB(x,2r)/μB(x,r)` over all centers and grid radii with `μB(x,r) > 0`.
pub fn doubling_constant(space: &MetricMeasureSpace, grid: &RadiusGrid) -> Result<f64> {
    let mut radii: Vec<f64> = grid.radii().iter().flat_map(|&r| [r, 2.0 * r]).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let pos = |r: f64| radii.binary_search_by(|x| x.total_cmp(&r)).expect("radius present");
    let index: Vec<(usize, usize)> = grid.radii().iter().map(|&r| (pos(r), pos(2.0 * r))).collect();
    let best = (0..space.len())
        .into_par_iter()
        .map(|x| {
            let mu = space.ball_measures(x, &radii);
            index.iter().filter(|(i, _)| mu[*i] > 0.0).map(|&(i, j)| mu[j] / mu[i]).fold(f64::NEG_INFINITY, f64::max)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::NoInformativeRadius)
    }
}

/// Radii the space can resolve, capped at `cap`.
fn usable_radii(space: &MetricMeasureSpace, grid: &RadiusGrid, cap: f64) -> Vec<f64> {
    let floor = RESOLUTION_FACTOR * space.mesh();
    grid.radii().iter().copied().filter(|&r| r >= floor && r <= cap).collect()
}

fn local_cap(space: &MetricMeasureSpace) -> f64 {
    if space.diameter() > 0.0 {
        space.diameter() / 4.0
    } else {
        f64::INFINITY
    }
}

/// Lowest half-decade of usable radii, trimmed so that every base radius can still be
/// dilated by at least 2 within the usable range.
fn lowest_band(usable: &[f64]) -> Vec<f64> {
    let top = (usable[0] * HALF_DECADE).min(usable[usable.len() - 1] / 2.0) * (1.0 + 1e-12);
    usable.iter().copied().take_while(|&r| r <= top).collect()
}

fn insufficient(usable: &[f64]) -> Error {
    Error::InsufficientRadii(format!(
        "{} resolvable radii (need at least {MIN_USABLE}); extend the grid above four mesh widths",
        usable.len()
    ))
}

/// Local lower/upper dimensions at `x` from the ratios `μB(x, r t)/μB(x, r)` over the lowest band.
pub fn local_dimensions(space: &MetricMeasureSpace, x: usize, grid: &RadiusGrid) -> Result<LocalDimension> {
    if x >= space.len() {
        return Err(Error::UnknownPoint(x));
    }
    let usable = usable_radii(space, grid, local_cap(space));
    if usable.len() < MIN_USABLE {
        return Err(insufficient(&usable));
    }
    let band = lowest_band(&usable);
    if band.is_empty() {
        return Err(insufficient(&usable));
    }
    let t = usable[usable.len() - 1] / band[band.len() - 1];
    if t < 2.0 * (1.0 - 1e-12) {
        return Err(Error::InsufficientRadii(format!(
            "largest usable radius is only {t:.3}× the probe band; need a factor of 2"
        )));
    }
    let mut radii: Vec<f64> = band.iter().flat_map(|&r| [r, r * t]).collect();
    radii.sort_by(f64::total_cmp);
    let mu = space.ball_measures(x, &radii);
    let at = |r: f64| mu[radii.partition_point(|&q| q < r)];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &r in &band {
        let (a, b) = (at(r), at(r * t));
        if a > 0.0 {
            lo = lo.min(b / a);
            hi = hi.max(b / a);
        }
    }
    if !lo.is_finite() {
        return Err(Error::NoInformativeRadius);
    }
    Ok(LocalDimension { point: x, lower: lo.ln() / t.ln(), upper: hi.ln() / t.ln() })
}

/// Uniform lower index `m(μB)`.
///
/// For each dilation `T = r/s ≥ 2` (with `s` in the lowest band) the worst case over
/// centers `g(T) = max_s min_x μB(x,s)/μB(x,sT)` is formed; `m(μB)` is minus the
/// least-squares slope of `ln g` against `ln T`.
pub fn uniform_lower_dimension(space: &MetricMeasureSpace, grid: &RadiusGrid) -> Result<f64> {
    let usable = usable_radii(space, grid, local_cap(space));
    if usable.len() < MIN_USABLE {
        return Err(insufficient(&usable));
    }
    let band = lowest_band(&usable);
    let pairs: Vec<(usize, usize)> = (0..band.len())
        .flat_map(|i| (i + 1..usable.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| usable[j] / usable[i] >= 2.0 * (1.0 - 1e-12))
        .collect();
    if pairs.is_empty() {
        return Err(Error::InsufficientRadii("no dilation of at least 2 fits in the usable radii".into()));
    }
    let mins = (0..space.len())
        .into_par_iter()
        .map(|x| {
            let mu = space.ball_measures(x, &usable);
            pairs.iter().map(|&(i, j)| if mu[j] > 0.0 { mu[i] / mu[j] } else { f64::INFINITY }).collect::<Vec<f64>>()
        })
        .reduce(|| vec![f64::INFINITY; pairs.len()], |a, b| a.iter().zip(&b).map(|(x, y)| x.min(*y)).collect());

    // group by dilation factor; geometric grids repeat factors exactly up to rounding
    let mut groups: Vec<(f64, f64)> = Vec::new();
    for (&(i, j), &v) in pairs.iter().zip(&mins) {
        if !v.is_finite() || v <= 0.0 {
            continue;
        }
        let ln_t = (usable[j] / usable[i]).ln();
        match groups.iter_mut().find(|(l, _)| (l - ln_t).abs() < 1e-9 * ln_t) {
            Some(entry) => entry.1 = entry.1.max(v),
            None => groups.push((ln_t, v)),
        }
    }
    match groups.len() {
        0 => Err(Error::NoInformativeRadius),
        1 => Ok(-groups[0].1.ln() / groups[0].0),
        _ => {
            let xs: Vec<f64> = groups.iter().map(|g| g.0).collect();
            let ys: Vec<f64> = groups.iter().map(|g| g.1.ln()).collect();
            Ok(-least_squares_slope(&xs, &ys))
        }
    }
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Dimensions influenced by infinity, from the largest radii with `2r ≤ R_outer`.
///
/// The primary center is the point nearest the coordinate origin; `spread` is the
/// largest deviation seen from centers at distances `R_outer/20`, `R_outer/10` and
/// `3R_outer/20` from it.
pub fn dimensions_at_infinity(space: &MetricMeasureSpace, grid: &RadiusGrid) -> Result<DimensionProbe> {
    let r_outer = space.r_outer().ok_or(Error::BoundedSpace)?;
    let t = 2.0;
    let floor = RESOLUTION_FACTOR * space.mesh();
    let fitting: Vec<f64> =
        grid.radii().iter().copied().filter(|&r| r >= floor && r * t <= r_outer * (1.0 + 1e-12)).collect();
    if fitting.len() < 2 {
        return Err(Error::InsufficientRadii(format!(
            "{} radii between four mesh widths and R_outer/2",
            fitting.len()
        )));
    }
    let bottom = fitting[fitting.len() - 1] / HALF_DECADE * (1.0 - 1e-12);
    let band: Vec<f64> = fitting.iter().copied().filter(|&r| r >= bottom).collect();
    let probe = |x: usize| -> Option<(f64, f64)> {
        let mut radii: Vec<f64> = band.iter().flat_map(|&r| [r, r * t]).collect();
        radii.sort_by(f64::total_cmp);
        let mu = space.ball_measures(x, &radii);
        let at = |r: f64| mu[radii.partition_point(|&q| q < r)];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &r in &band {
            if at(r) > 0.0 {
                let q = (at(r * t) / at(r)).ln() / t.ln();
                lo = lo.min(q);
                hi = hi.max(q);
            }
        }
        lo.is_finite().then_some((lo, hi))
    };
    let origin = space.origin();
    let (lower, upper) = probe(origin).ok_or(Error::NoInformativeRadius)?;
    let mut spread = 0.0f64;
    for frac in [0.05, 0.1, 0.15] {
        let target = frac * r_outer;
        let other = (0..space.len())
            .min_by(|&a, &b| {
                let da = (space.dist(origin, a) - target).abs();
                let db = (space.dist(origin, b) - target).abs();
                da.total_cmp(&db).then(a.cmp(&b))
            })
            .unwrap_or(origin);
        if let Some((l, u)) = probe(other) {
            spread = spread.max((l - lower).abs()).max((u - upper).abs());
        }
    }
    Ok(DimensionProbe { lower, upper, band: (band[0], band[band.len() - 1]), t, spread })
}

/// Local dimensions at `points`, the uniform lower index and, for truncated spaces,
/// the dimensions at infinity.
pub fn dimension_report(space: &MetricMeasureSpace, grid: &RadiusGrid, points: &[usize]) -> Result<DimensionReport> {
    let local = points.iter().map(|&x| local_dimensions(space, x, grid)).collect::<Result<Vec<_>>>()?;
    let m_uniform = uniform_lower_dimension(space, grid)?;
    let at_infinity = if space.is_bounded() { None } else { Some(dimensions_at_infinity(space, grid)?) };
    let usable = usable_radii(space, grid, local_cap(space));
    let band = lowest_band(&usable);
    Ok(DimensionReport {
        local,
        m_uniform,
        at_infinity,
        probe_radii: grid.radii().to_vec(),
        band: (band[0], band[band.len() - 1]),
    })
}

//! Finite metric measure spaces: point sets with a (quasi)metric and per-point masses.
//!
//! Balls are open, `B(x, r) = {y : d(x, y) < r}`, everywhere in the crate.

mod build;
mod curve;
mod dimension;
pub mod io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use build::{build_graded_interval, build_grid, GridSpec};
pub use curve::{build_curve, carleson_check, CurveSpace};
pub use dimension::{
    dimension_report, dimensions_at_infinity, doubling_constant, least_squares_slope, local_dimensions,
    uniform_lower_dimension, DimensionProbe, DimensionReport, LocalDimension,
};

/// Relative slack allowed when verifying the quasi-triangle inequality.
const TRIANGLE_SLACK: f64 = 1e-12;
/// Beyond this many triples the triangle check samples instead of enumerating.
const EXHAUSTIVE_TRIPLES: usize = 10_000_000;
const SAMPLED_TRIPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    EuclideanGrid,
    IntervalGrid,
    CurvePolyline,
    AbstractGraph,
}

impl SpaceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SpaceKind::EuclideanGrid => "euclidean_grid",
            SpaceKind::IntervalGrid => "interval_grid",
            SpaceKind::CurvePolyline => "curve_polyline",
            SpaceKind::AbstractGraph => "abstract_graph",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "euclidean_grid" => Ok(SpaceKind::EuclideanGrid),
            "interval_grid" => Ok(SpaceKind::IntervalGrid),
            "curve_polyline" => Ok(SpaceKind::CurvePolyline),
            "abstract_graph" => Ok(SpaceKind::AbstractGraph),
            other => Err(Error::Parse(format!("unknown space kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub id: usize,
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone)]
enum Metric {
    Euclidean,
    /// Dense row-major `n × n` table.
    Table(Vec<f64>),
}

/// Sorted view of the whole space as seen from one center.
///
/// Points are ordered by `(distance, id)`; `shell_ends[k]` is one past the last
/// index of the k-th group of equidistant points.
#[derive(Debug, Clone)]
pub struct BallProfile {
    pub center: usize,
    pub order: Vec<usize>,
    pub dists: Vec<f64>,
    pub shell_ends: Vec<usize>,
}

impl BallProfile {
    /// Distinct distances, one per shell.
    pub fn shell_radii(&self) -> impl Iterator<Item = f64> + '_ {
        self.shell_ends.iter().map(move |&e| self.dists[e - 1])
    }
}

#[derive(Debug, Clone)]
pub struct MetricMeasureSpace {
    points: Vec<Point>,
    metric: Metric,
    mass: Vec<f64>,
    quasi_const: f64,
    kind: SpaceKind,
    dim_hint: f64,
    r_outer: Option<f64>,
    grid: Option<GridSpec>,
    mesh: f64,
    diameter: f64,
    nearest: Vec<f64>,
}

impl MetricMeasureSpace {
    /// Euclidean space over explicit coordinates.
    pub fn from_points(coords: Vec<Vec<f64>>, mass: Vec<f64>, kind: SpaceKind, dim_hint: f64) -> Result<Self> {
        if coords.len() != mass.len() {
            return Err(Error::LengthMismatch { expected: coords.len(), got: mass.len() });
        }
        let dim = coords.first().map(Vec::len).unwrap_or(0);
        if coords.iter().any(|c| c.len() != dim) {
            return Err(Error::InvalidSpace("points have inconsistent coordinate dimension".into()));
        }
        if coords.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidSpace("non-finite coordinate".into()));
        }
        let points = coords.into_iter().enumerate().map(|(id, coords)| Point { id, coords }).collect();
        Self::assemble(points, Metric::Euclidean, mass, 1.0, kind, dim_hint)
    }

    /// Abstract space given by a dense symmetric distance table and a quasimetric constant.
    pub fn from_table(dist: Vec<f64>, mass: Vec<f64>, quasi_const: f64, dim_hint: f64) -> Result<Self> {
        let n = mass.len();
        if dist.len() != n * n {
            return Err(Error::LengthMismatch { expected: n * n, got: dist.len() });
        }
        let points = (0..n).map(|id| Point { id, coords: Vec::new() }).collect();
        Self::assemble(points, Metric::Table(dist), mass, quasi_const, SpaceKind::AbstractGraph, dim_hint)
    }

    fn assemble(
        points: Vec<Point>,
        metric: Metric,
        mass: Vec<f64>,
        quasi_const: f64,
        kind: SpaceKind,
        dim_hint: f64,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidSpace("space has no points".into()));
        }
        if !(quasi_const >= 1.0 && quasi_const.is_finite()) {
            return Err(Error::InvalidSpace(format!("quasimetric constant {quasi_const} must be >= 1")));
        }
        if !(dim_hint > 0.0 && dim_hint.is_finite()) {
            return Err(Error::InvalidSpace(format!("dimension hint {dim_hint} must be positive")));
        }
        if let Some((i, &m)) = mass.iter().enumerate().find(|(_, m)| !(**m >= 0.0 && m.is_finite())) {
            return Err(Error::InvalidSpace(format!("mass {m} at point {i} is negative or non-finite")));
        }
        if mass.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidSpace("total mass must be positive".into()));
        }
        let mut space = MetricMeasureSpace {
            points,
            metric,
            mass,
            quasi_const,
            kind,
            dim_hint,
            r_outer: None,
            grid: None,
            mesh: 0.0,
            diameter: 0.0,
            nearest: Vec::new(),
        };
        space.validate_metric()?;
        Ok(space)
    }

    /// Checks positivity and symmetry and records nearest-neighbour distances and the diameter.
    fn validate_metric(&mut self) -> Result<()> {
        let n = self.len();
        let rows: Vec<Result<(f64, f64)>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut nearest = f64::INFINITY;
                let mut far = 0.0f64;
                for j in 0..n {
                    let d = self.dist(i, j);
                    if i == j {
                        if d != 0.0 {
                            return Err(Error::InvalidSpace(format!("d({i},{i}) = {d} is not zero")));
                        }
                        continue;
                    }
                    if !(d > 0.0 && d.is_finite()) {
                        return Err(Error::InvalidSpace(format!(
                            "d({i},{j}) = {d}: distinct points must be at positive finite distance"
                        )));
                    }
                    if let Metric::Table(_) = self.metric {
                        let back = self.dist(j, i);
                        if back != d {
                            return Err(Error::InvalidSpace(format!("distance table not symmetric at ({i},{j})")));
                        }
                    }
                    nearest = nearest.min(d);
                    far = far.max(d);
                }
                Ok((nearest, far))
            })
            .collect();
        let mut nearest = Vec::with_capacity(n);
        let mut diameter = 0.0f64;
        for row in rows {
            let (near, far) = row?;
            nearest.push(near);
            diameter = diameter.max(far);
        }
        self.mesh = if n > 1 { nearest.iter().cloned().fold(0.0, f64::max) } else { 0.0 };
        self.nearest = nearest;
        self.diameter = diameter;
        self.check_quasi_triangle()
    }

    fn check_quasi_triangle(&self) -> Result<()> {
        let n = self.len();
        let k = self.quasi_const;
        let check = |x: usize, y: usize, z: usize| -> Result<()> {
            let lhs = self.dist(x, z);
            let rhs = k * (self.dist(x, y) + self.dist(y, z));
            if lhs > rhs * (1.0 + TRIANGLE_SLACK) {
                return Err(Error::InvalidSpace(format!(
                    "quasi-triangle inequality fails for ({x},{y},{z}): {lhs} > {k}·({} + {})",
                    self.dist(x, y),
                    self.dist(y, z)
                )));
            }
            Ok(())
        };
        if n.saturating_mul(n).saturating_mul(n) <= EXHAUSTIVE_TRIPLES {
            (0..n).into_par_iter().try_for_each(|x| {
                for y in 0..n {
                    for z in 0..n {
                        check(x, y, z)?;
                    }
                }
                Ok(())
            })
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x7269_616e_676c_65);
            for _ in 0..SAMPLED_TRIPLES {
                check(rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n))?;
            }
            Ok(())
        }
    }

    /// Marks the space as the truncation of an unbounded space at radius `r_outer`.
    pub fn with_outer_radius(mut self, r_outer: f64) -> Result<Self> {
        if !(r_outer > 0.0 && r_outer.is_finite()) {
            return Err(Error::InvalidSpace(format!("outer radius {r_outer} must be positive")));
        }
        self.r_outer = Some(r_outer);
        Ok(self)
    }

    pub(crate) fn with_grid(mut self, grid: GridSpec) -> Self {
        self.grid = Some(grid);
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn coords(&self, i: usize) -> &[f64] {
        &self.points[i].coords
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.mass[i]
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn dim_hint(&self) -> f64 {
        self.dim_hint
    }

    pub fn quasi_const(&self) -> f64 {
        self.quasi_const
    }

    pub fn r_outer(&self) -> Option<f64> {
        self.r_outer
    }

    pub fn is_bounded(&self) -> bool {
        self.r_outer.is_none()
    }

    pub fn grid(&self) -> Option<&GridSpec> {
        self.grid.as_ref()
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Largest nearest-neighbour distance: the coarsest local resolution.
    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    /// Distance from `i` to its nearest other point.
    pub fn nearest_distance(&self, i: usize) -> f64 {
        self.nearest[i]
    }

    pub fn has_coords(&self) -> bool {
        matches!(self.metric, Metric::Euclidean)
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match &self.metric {
            Metric::Euclidean => {
                let a = &self.points[i].coords;
                let b = &self.points[j].coords;
                if a.len() == 1 {
                    (a[0] - b[0]).abs()
                } else {
                    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
                }
            }
            Metric::Table(t) => t[i * self.points.len() + j],
        }
    }

    /// Point closest to the coordinate origin (point 0 for abstract spaces).
    pub fn origin(&self) -> usize {
        if !self.has_coords() {
            return 0;
        }
        let norm = |i: usize| self.coords(i).iter().map(|c| c * c).sum::<f64>();
        (0..self.len()).min_by(|&a, &b| norm(a).total_cmp(&norm(b)).then(a.cmp(&b))).unwrap_or(0)
    }

    /// Euclidean norm of the coordinates, `|x|`.
    pub fn norm_of(&self, i: usize) -> f64 {
        if self.has_coords() {
            self.coords(i).iter().map(|c| c * c).sum::<f64>().sqrt()
        } else {
            self.dist(self.origin(), i)
        }
    }

    fn check_point(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownPoint(i))
        }
    }

    /// Open ball `{y : d(center, y) < r}`, ids in ascending order.
    pub fn ball_members(&self, center: usize, r: f64) -> Result<Vec<usize>> {
        self.check_point(center)?;
        if !(r > 0.0) {
            return Err(Error::InvalidSpace(format!("ball radius {r} must be positive")));
        }
        Ok((0..self.len()).filter(|&y| self.dist(center, y) < r).collect())
    }

    pub fn ball_measure(&self, center: usize, r: f64) -> Result<f64> {
        Ok(self.ball_members(center, r)?.into_iter().map(|y| self.mass[y]).sum())
    }

    /// `μB(center, r)` for every radius in ascending `radii`, in one pass over the space.
    pub fn ball_measures(&self, center: usize, radii: &[f64]) -> Vec<f64> {
        let mut bins = vec![0.0; radii.len() + 1];
        for y in 0..self.len() {
            let d = self.dist(center, y);
            // first radius strictly greater than d: the ball of that radius contains y
            let k = radii.partition_point(|&r| r <= d);
            bins[k] += self.mass[y];
        }
        let mut acc = 0.0;
        bins.truncate(radii.len());
        for b in bins.iter_mut() {
            acc += *b;
            *b = acc;
        }
        bins
    }

    /// Whole space sorted by distance from `center`, grouped into equidistant shells.
    pub fn ball_profile(&self, center: usize) -> BallProfile {
        let mut order: Vec<usize> = (0..self.len()).collect();
        let key: Vec<f64> = (0..self.len()).map(|y| self.dist(center, y)).collect();
        order.sort_by(|&a, &b| key[a].total_cmp(&key[b]).then(a.cmp(&b)));
        let dists: Vec<f64> = order.iter().map(|&y| key[y]).collect();
        let mut shell_ends = Vec::new();
        for k in 1..=dists.len() {
            if k == dists.len() || dists[k] != dists[k - 1] {
                shell_ends.push(k);
            }
        }
        BallProfile { center, order, dists, shell_ends }
    }

    /// Radii visiting each distinct ball configuration at `center` exactly once:
    /// midpoints between consecutive distinct distances, then one radius past the farthest point.
    pub fn configuration_radii(&self, center: usize) -> Vec<f64> {
        let profile = self.ball_profile(center);
        let shells: Vec<f64> = profile.shell_radii().collect();
        let mut radii: Vec<f64> = shells.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let last = *shells.last().unwrap_or(&0.0);
        radii.push(if last > 0.0 { 2.0 * last } else { 1.0 });
        radii
    }

    /// Same space with every mass multiplied by `c > 0`.
    pub fn scaled_masses(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidSpace(format!("mass scale {c} must be positive")));
        }
        let mut out = self.clone();
        out.mass.iter_mut().for_each(|m| *m *= c);
        Ok(out)
    }

    /// Nested refinement of a grid-built space (unit density on the refined grid).
    pub fn refined(&self) -> Option<Result<Self>> {
        let grid = self.grid.as_ref()?;
        let mut out = grid.refine().build();
        if let (Ok(space), Some(r)) = (&mut out, self.r_outer) {
            space.r_outer = Some(r);
        }
        Some(out)
    }
}

/// Sorted, positive radii used to probe ball measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusGrid {
    radii: Vec<f64>,
}

impl RadiusGrid {
    pub fn new(mut radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::InsufficientRadii("radius grid is empty".into()));
        }
        if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::InsufficientRadii("radii must be positive and finite".into()));
        }
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        Ok(RadiusGrid { radii })
    }

    /// `per_octave` radii per factor of two, from `r_min` up to at most `r_max`.
    pub fn geometric(r_min: f64, r_max: f64, per_octave: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max >= r_min && per_octave >= 1) {
            return Err(Error::InsufficientRadii(format!(
                "bad geometric grid [{r_min}, {r_max}] with {per_octave} per octave"
            )));
        }
        let step = 2f64.powf(1.0 / per_octave as f64);
        let count = ((r_max / r_min).ln() / step.ln() + 1e-9).floor() as usize;
        Self::new((0..=count).map(|k| r_min * step.powi(k as i32)).collect())
    }

    pub fn dyadic(r_min: f64, r_max: f64) -> Result<Self> {
        Self::geometric(r_min, r_max, 1)
    }

    /// Default probe grid for a space: 4 radii per octave from the mesh up to the diameter.
    pub fn for_space(space: &MetricMeasureSpace) -> Result<Self> {
        let lo = if space.mesh() > 0.0 { space.mesh() } else { space.diameter().max(1.0) * 1e-3 };
        let hi = space.diameter().max(lo);
        Self::geometric(lo, hi, 4)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_atoms() -> MetricMeasureSpace {
        MetricMeasureSpace::from_points(
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec![1.0; 3],
            SpaceKind::IntervalGrid,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn open_ball_semantics() {
        let s = three_atoms();
        assert_eq!(s.ball_members(0, 1.5).unwrap(), vec![0, 1]);
        assert_eq!(s.ball_members(0, 1.0).unwrap(), vec![0]);
        assert_eq!(s.ball_members(0, 10.0).unwrap(), vec![0, 1, 2]);
        assert!(s.ball_members(0, 0.0).is_err());
        assert!(s.ball_members(7, 1.0).is_err());
    }

    #[test]
    fn single_atom_ball_measure() {
        let s = MetricMeasureSpace::from_points(vec![vec![0.3]], vec![1.0], SpaceKind::IntervalGrid, 1.0).unwrap();
        for r in [1e-6, 0.5, 1e6] {
            assert_eq!(s.ball_measure(0, r).unwrap(), 1.0);
        }
    }

    #[test]
    fn binned_measures_match_direct_sums() {
        let s = build_grid(&[(0.0, 1.0)], &[33], None).unwrap();
        let radii = [0.01, 0.03125, 0.1, 0.25, 0.7];
        for c in [0, 7, 16, 32] {
            let fast = s.ball_measures(c, &radii);
            for (k, &r) in radii.iter().enumerate() {
                assert!((fast[k] - s.ball_measure(c, r).unwrap()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_broken_tables() {
        // coincident distinct points
        assert!(MetricMeasureSpace::from_table(vec![0.0, 0.0, 0.0, 0.0], vec![1.0, 1.0], 1.0, 1.0).is_err());
        // asymmetric
        assert!(MetricMeasureSpace::from_table(vec![0.0, 1.0, 2.0, 0.0], vec![1.0, 1.0], 1.0, 1.0).is_err());
        // zero total mass
        assert!(MetricMeasureSpace::from_table(vec![0.0, 1.0, 1.0, 0.0], vec![0.0, 0.0], 1.0, 1.0).is_err());
        // negative mass
        assert!(MetricMeasureSpace::from_table(vec![0.0, 1.0, 1.0, 0.0], vec![1.0, -1.0], 1.0, 1.0).is_err());
    }

    #[test]
    fn quasi_triangle_is_enforced() {
        // d(0,2) = 5 > 1 + 1
        let d = vec![0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0];
        assert!(MetricMeasureSpace::from_table(d.clone(), vec![1.0; 3], 1.0, 1.0).is_err());
        assert!(MetricMeasureSpace::from_table(d, vec![1.0; 3], 2.5, 1.0).is_ok());
    }

    #[test]
    fn configuration_radii_visit_each_ball_once() {
        let s = three_atoms();
        let radii = s.configuration_radii(0);
        assert_eq!(radii, vec![0.5, 1.5, 4.0]);
        let sizes: Vec<usize> = radii.iter().map(|&r| s.ball_members(0, r).unwrap().len()).collect();
        assert_eq!(sizes, vec![1, 2, 3]);
    }

    #[test]
    fn profile_groups_equidistant_shells() {
        let s = MetricMeasureSpace::from_points(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
            vec![1.0; 4],
            SpaceKind::EuclideanGrid,
            2.0,
        )
        .unwrap();
        let p = s.ball_profile(3);
        assert_eq!(p.shell_ends, vec![1, 3, 4]);
        assert_eq!(p.order, vec![3, 1, 2, 0]);
    }

    #[test]
    fn radius_grid_construction() {
        let g = RadiusGrid::dyadic(0.125, 1.0).unwrap();
        assert_eq!(g.radii(), &[0.125, 0.25, 0.5, 1.0]);
        assert!(RadiusGrid::new(vec![]).is_err());
        assert!(RadiusGrid::new(vec![0.1, -1.0]).is_err());
        let g = RadiusGrid::geometric(1.0, 2.0, 4).unwrap();
        assert_eq!(g.len(), 5);
    }
}

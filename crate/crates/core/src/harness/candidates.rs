use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::exponent::{conj, ExponentField};
use crate::lebesgue::SampledFunction;
use crate::space::MetricMeasureSpace;
use crate::weight::{radial_power_average, CellWeight, RadialProductWeight, WeightModel};

/// Most dyadic radii used per anchor; longer ladders are thinned evenly in `log r`.
const MAX_RADII: usize = 16;

/// Exponents of the power profiles, as fractions of the critical exponent.
const PROFILE_STEPS: usize = 8;

/// Where concentrated candidates are centred.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Anchor {
    Point(usize),
    /// `x = 0`, whether or not it is a grid point.
    Origin,
}

impl Anchor {
    fn dist(self, space: &MetricMeasureSpace, i: usize) -> f64 {
        match self {
            Anchor::Point(k) => space.dist(k, i),
            Anchor::Origin => space.norm_of(i),
        }
    }

    fn label(self) -> String {
        match self {
            Anchor::Point(k) => format!("x{k}"),
            Anchor::Origin => "0".into(),
        }
    }

    /// Smallest positive distance from the anchor to a point.
    fn spacing(self, space: &MetricMeasureSpace) -> f64 {
        (0..space.len()).map(|i| self.dist(space, i)).filter(|&d| d > 0.0).fold(f64::INFINITY, f64::min)
    }

    fn reach(self, space: &MetricMeasureSpace) -> f64 {
        (0..space.len()).map(|i| self.dist(space, i)).fold(0.0, f64::max)
    }
}

/// A test function with a stable id (its position in the corpus) and a readable tag.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub id: usize,
    pub tag: String,
    pub f: SampledFunction,
}

#[derive(Debug, Clone)]
enum Shape {
    Ball { anchor: Anchor, r: f64 },
    Extremizer { anchor: Anchor, r: f64 },
    Profile { anchor: Anchor, gamma: f64 },
    Noise { sub_seed: u64 },
    Bump { center: usize, width: f64 },
}

impl Shape {
    fn tag(&self) -> String {
        match self {
            Shape::Ball { anchor, r } => format!("ball[{};r={r:.3e}]", anchor.label()),
            Shape::Extremizer { anchor, r } => format!("extremizer[{};r={r:.3e}]", anchor.label()),
            Shape::Profile { anchor, gamma } => format!("power[{};gamma={gamma:.4}]", anchor.label()),
            Shape::Noise { sub_seed } => format!("noise[{sub_seed:016x}]"),
            Shape::Bump { center, width } => format!("bump[x{center};w={width:.3e}]"),
        }
    }

    fn realize(&self, rho: &dyn CellWeight, p: &ExponentField, space: &MetricMeasureSpace) -> Result<SampledFunction> {
        let n = space.len();
        match *self {
            Shape::Ball { anchor, r } => {
                SampledFunction::real((0..n).map(|i| if anchor.dist(space, i) < r { 1.0 } else { 0.0 }).collect())
            }
            Shape::Extremizer { anchor, r } => SampledFunction::real(
                (0..n)
                    .map(|i| {
                        if anchor.dist(space, i) >= r {
                            return 0.0;
                        }
                        let pi = p.value(i);
                        let v = rho.cell_power_avg(space, i, -conj(pi) / pi);
                        if v.is_finite() {
                            v
                        } else {
                            0.0
                        }
                    })
                    .collect(),
            ),
            Shape::Profile { anchor, gamma } => {
                SampledFunction::real((0..n).map(|i| profile_value(space, anchor, i, gamma)).collect())
            }
            Shape::Noise { sub_seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
                SampledFunction::real((0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect())
            }
            Shape::Bump { center, width } => SampledFunction::real(
                (0..n)
                    .map(|i| {
                        let t = space.dist(center, i) / width;
                        if t < 1.0 {
                            (1.0 - t * t).powi(2)
                        } else {
                            0.0
                        }
                    })
                    .collect(),
            ),
        }
    }
}

/// `d(x, anchor)^{−γ}`, averaged over the self cell where the distance vanishes.
fn profile_value(space: &MetricMeasureSpace, anchor: Anchor, i: usize, gamma: f64) -> f64 {
    let d = anchor.dist(space, i);
    if d > 0.0 {
        return d.powf(-gamma);
    }
    let n = space.dim_hint();
    let r_self = space.mass(i).powf(1.0 / n) / 2.0;
    if r_self <= 0.0 {
        return 0.0;
    }
    let avg = radial_power_average(&WeightModel::power(1.0), -gamma, n, r_self);
    if avg.is_finite() {
        avg
    } else {
        r_self.powf(-gamma)
    }
}

/// Dyadic radii `4h·2^k` up to the reach of the anchor, smallest first.
fn dyadic_radii(h: f64, reach: f64) -> Vec<f64> {
    if !(h.is_finite() && h > 0.0) {
        return Vec::new();
    }
    let mut all = Vec::new();
    let mut r = 4.0 * h;
    while r <= reach {
        all.push(r);
        r *= 2.0;
    }
    if all.is_empty() {
        all.push(reach.max(h) * 1.0000001);
    }
    if all.len() <= MAX_RADII {
        return all;
    }
    let last = (all.len() - 1) as f64;
    let mut picked: Vec<f64> =
        (0..MAX_RADII).map(|j| all[(j as f64 * last / (MAX_RADII - 1) as f64).round() as usize]).collect();
    picked.dedup();
    picked
}

/// Lower index of the weight factor sitting at an anchor, or 0 where there is none.
fn local_index(weight: Option<&RadialProductWeight>, anchor: Anchor) -> f64 {
    let (Some(w), Anchor::Point(k)) = (weight, anchor) else {
        return 0.0;
    };
    match w.nodes().iter().position(|&n| n == k) {
        Some(j) => w.factors()[j].exact_indices().map_or(0.0, |(m, _)| m),
        None => 0.0,
    }
}

/// Concentrated and random test functions for weighted norm ratios.
///
/// The corpus interleaves the families below one item at a time, in this order, so a
/// smaller budget always yields a prefix of a larger one: ball indicators at the anchors
/// over dyadic radii, extremizers `ρ^{−p′/p}` on the same balls, power profiles
/// `d(·, anchor)^{−γ}` up to the exponent where `ρf` leaves `L^p`, indicators of balls at
/// random centres, random-sign noise and smooth bumps.
pub fn corpus(
    rho: &dyn CellWeight,
    weight: Option<&RadialProductWeight>,
    anchors: &[Anchor],
    p: &ExponentField,
    space: &MetricMeasureSpace,
    seed: u64,
    budget: usize,
) -> Result<Vec<Candidate>> {
    p.check_len(space.len())?;
    let n_dim = space.dim_hint();

    let mut balls = Vec::new();
    let mut extremizers = Vec::new();
    let ladders: Vec<Vec<f64>> = anchors.iter().map(|a| dyadic_radii(a.spacing(space), a.reach(space))).collect();
    let rungs = ladders.iter().map(Vec::len).max().unwrap_or(0);
    for k in 0..rungs {
        for (a, ladder) in anchors.iter().zip(&ladders) {
            if let Some(&r) = ladder.get(k) {
                balls.push(Shape::Ball { anchor: *a, r });
                extremizers.push(Shape::Extremizer { anchor: *a, r });
            }
        }
    }
    let mut profiles = Vec::new();
    for j in (1..=PROFILE_STEPS).rev() {
        for &a in anchors {
            let p_here = match a {
                Anchor::Point(k) => p.value(k),
                Anchor::Origin => p.value(space.origin()),
            };
            let critical = local_index(weight, a) + n_dim / p_here;
            if critical > 0.0 {
                profiles.push(Shape::Profile { anchor: a, gamma: critical * j as f64 / PROFILE_STEPS as f64 });
            }
        }
    }
    let fixed = [balls, extremizers, profiles];

    // each random family draws from its own stream, so its items do not depend on the budget
    let stream = |s: u64| {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        r.set_stream(s);
        r
    };
    let (mut ball_rng, mut noise_rng, mut bump_rng) = (stream(1), stream(2), stream(3));
    let diam = space.diameter();
    let random_ball = |rng: &mut ChaCha8Rng| {
        let c = rng.gen_range(0..space.len());
        let ladder = dyadic_radii(space.nearest_distance(c), diam);
        let r = if ladder.is_empty() { diam.max(f64::MIN_POSITIVE) } else { ladder[rng.gen_range(0..ladder.len())] };
        Shape::Ball { anchor: Anchor::Point(c), r }
    };
    let random_bump = |rng: &mut ChaCha8Rng| {
        let c = rng.gen_range(0..space.len());
        let ladder = dyadic_radii(space.nearest_distance(c), diam);
        let width =
            if ladder.is_empty() { diam.max(f64::MIN_POSITIVE) } else { ladder[rng.gen_range(0..ladder.len())] };
        Shape::Bump { center: c, width }
    };

    let mut shapes = Vec::with_capacity(budget);
    'rounds: for round in 0.. {
        for fam in &fixed {
            if let Some(s) = fam.get(round) {
                shapes.push(s.clone());
                if shapes.len() == budget {
                    break 'rounds;
                }
            }
        }
        shapes.push(random_ball(&mut ball_rng));
        if shapes.len() == budget {
            break;
        }
        shapes.push(Shape::Noise { sub_seed: noise_rng.gen() });
        if shapes.len() == budget {
            break;
        }
        shapes.push(random_bump(&mut bump_rng));
        if shapes.len() == budget {
            break;
        }
    }

    shapes
        .par_iter()
        .enumerate()
        .map(|(id, s)| Ok(Candidate { id, tag: s.tag(), f: s.realize(rho, p, space)? }))
        .collect()
}

/// Corpus for a radial weight, anchored at its nodes.
pub fn candidates(
    weight: &RadialProductWeight,
    p: &ExponentField,
    space: &MetricMeasureSpace,
    seed: u64,
    budget: usize,
) -> Result<Vec<Candidate>> {
    weight.check_nodes(space)?;
    let anchors: Vec<Anchor> = weight.nodes().iter().map(|&k| Anchor::Point(k)).collect();
    corpus(weight, Some(weight), &anchors, p, space, seed, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::build_grid;

    fn setup() -> (MetricMeasureSpace, ExponentField) {
        let s = build_grid(&[(0.0, 1.0)], &[129], None).unwrap();
        let p = ExponentField::constant(2.0, s.len()).unwrap();
        (s, p)
    }

    #[test]
    fn budget_one_without_nodes_is_a_ball() {
        let (s, p) = setup();
        let c = candidates(&RadialProductWeight::unit(), &p, &s, 3, 1).unwrap();
        assert_eq!(c.len(), 1);
        assert!(c[0].tag.starts_with("ball["));
        assert!(c[0].f.values().iter().all(|v| v.re == 0.0 || v.re == 1.0));
    }

    #[test]
    fn extremizers_match_the_power_law_shape() {
        let (s, p) = setup();
        let beta = 0.3;
        let w = RadialProductWeight::single(0, WeightModel::power(beta));
        let c = candidates(&w, &p, &s, 0, 200).unwrap();
        let h = s.nearest_distance(0);
        let ex: Vec<&Candidate> = c.iter().filter(|c| c.tag.starts_with("extremizer")).collect();
        // one per dyadic radius 4h, 8h, ... ≤ 1
        let expected = (0..).take_while(|&k| 4.0 * h * 2f64.powi(k) <= 1.0).count();
        assert_eq!(ex.len(), expected);
        for e in ex {
            for i in 1..s.len() {
                let x = s.coords(i)[0];
                let v = e.f.value(i).re;
                if v != 0.0 {
                    // ρ^{−p′/p} = x^{−β} for p = 2
                    assert!((v - x.powf(-beta)).abs() <= 1e-12 * v);
                }
            }
        }
    }

    #[test]
    fn deterministic_and_prefix_closed() {
        let (s, p) = setup();
        let w = RadialProductWeight::single(64, WeightModel::power(-0.2));
        let a = candidates(&w, &p, &s, 11, 40).unwrap();
        let b = candidates(&w, &p, &s, 11, 40).unwrap();
        let big = candidates(&w, &p, &s, 11, 90).unwrap();
        for ((x, y), z) in a.iter().zip(&b).zip(&big) {
            assert_eq!(x.tag, y.tag);
            assert_eq!(x.f, y.f);
            assert_eq!(x.f, z.f);
        }
        let other = candidates(&w, &p, &s, 12, 40).unwrap();
        assert!(a.iter().zip(&other).any(|(x, y)| x.f != y.f));
    }
}

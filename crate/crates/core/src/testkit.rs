//! Brute-force oracles and constructed fixtures for tests.
//!
//! Nothing here calls the code it checks: distances, nearest points and the
//! gamma function are computed from scratch.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::estimator::Assignment;
use crate::geometry::PointSet;
use crate::models::{sample, Family};
use crate::params::{ParamBounds, ParamVector};

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Closest-pair distance by an O(n²) scan. Panics with fewer than 2 points.
pub fn brute_closest_pair(points: &PointSet) -> f64 {
    assert!(points.len() >= 2, "closest pair needs two points");
    let p = points.points();
    let mut best = f64::INFINITY;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            best = best.min(dist_sq(p[i].coords(), p[j].coords()));
        }
    }
    best.sqrt()
}

/// Nearest data point of every sample by exhaustive scan; the first (lowest
/// index) of equidistant points wins.
pub fn brute_assign(samples: &PointSet, data: &PointSet) -> Assignment {
    let mut nearest = Vec::with_capacity(samples.len());
    let mut sum = 0.0;
    let mut max: f64 = 0.0;
    for s in samples {
        let mut best = (usize::MAX, f64::INFINITY);
        for (i, d) in data.iter().enumerate() {
            let d2 = dist_sq(s.coords(), d.coords());
            if d2 < best.1 {
                best = (i, d2);
            }
        }
        nearest.push(best.0 as u32);
        sum += best.1.sqrt();
        max = max.max(best.1.sqrt());
    }
    let mut distinct = nearest.clone();
    distinct.sort_unstable();
    distinct.dedup();
    Assignment {
        distinct_count: distinct.len(),
        nearest_indices: nearest,
        sum_distances: sum,
        max_distance: max,
        sample_count: samples.len(),
    }
}

pub const GRID_BUDGET: u64 = 10_000_000;

/// Exhaustive maximization over a regular grid with `steps` nodes per axis,
/// endpoints included. Returns the best node and its value.
pub fn grid_search(
    objective: impl Fn(&[f64]) -> f64,
    bounds: &ParamBounds,
    steps: usize,
) -> Result<(Vec<f64>, f64)> {
    let n = bounds.len();
    let total = (steps as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
    if steps == 0 || total > GRID_BUDGET {
        return Err(Error::Usage(format!(
            "grid of {steps}^{n} nodes exceeds the budget of {GRID_BUDGET}"
        )));
    }
    let node = |axis: usize, i: usize| {
        let (lo, hi) = (bounds.lower()[axis], bounds.upper()[axis]);
        if steps == 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * i as f64 / (steps - 1) as f64
        }
    };
    let mut idx = vec![0usize; n];
    let mut theta: Vec<f64> = (0..n).map(|a| node(a, 0)).collect();
    let mut best = (theta.clone(), f64::NEG_INFINITY);
    for _ in 0..total {
        let v = objective(&theta);
        if v > best.1 {
            best = (theta.clone(), v);
        }
        for a in 0..n {
            idx[a] += 1;
            if idx[a] < steps {
                theta[a] = node(a, idx[a]);
                break;
            }
            idx[a] = 0;
            theta[a] = node(a, 0);
        }
    }
    Ok(best)
}

/// `ln Γ(x)` for `x > 0` from the Stirling series after shifting the
/// argument above 15 with `Γ(x+1) = x·Γ(x)`.
pub fn ln_gamma_oracle(x: f64) -> f64 {
    assert!(x > 0.0);
    let mut shift = 0.0;
    let mut z = x;
    while z < 15.0 {
        shift += z.ln();
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    // Bernoulli terms B_2k / (2k(2k−1) z^(2k−1)).
    let series = inv
        * (1.0 / 12.0
            + inv2
                * (-1.0 / 360.0
                    + inv2
                        * (1.0 / 1260.0
                            + inv2
                                * (-1.0 / 1680.0
                                    + inv2
                                        * (1.0 / 1188.0
                                            + inv2 * (-691.0 / 360360.0 + inv2 / 156.0))))));
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series - shift
}

pub fn gamma_oracle(x: f64) -> f64 {
    ln_gamma_oracle(x).exp()
}

/// Mantegna `σ_u` evaluated with the oracle gamma function.
pub fn sigma_u_oracle(beta: f64) -> f64 {
    let num = gamma_oracle(1.0 + beta) * (PI * beta / 2.0).sin();
    let den = gamma_oracle((1.0 + beta) / 2.0) * beta * 2f64.powf((beta - 1.0) / 2.0);
    (num / den).powf(1.0 / beta)
}

/// Twelve collinear data points and four segments above them.
///
/// Points 0..4 ("blue") sit at `x = 0..3`, points 4..12 ("yellow") at
/// `x = 5..12`, all on `y = 0`. Each segment runs at height `h` over the
/// cells of the points it covers:
///
/// * `M_12` over `[−0.5, 3.5]` (the blue points),
/// * `M_36` over `[4.5, 12.5]` (the yellow points),
/// * `M_35` over `[4.5, 10.5]` and `M_46` over `[6.5, 12.5]`, which overlap
///   on `M_45 = [6.5, 10.5]`.
///
/// So `|M_12| = |M_45| = 4` and `|M_34| = |M_56| = 2`. Sampled at
/// `resolution`, both unions have the same maximum and average error, but
/// `M_12 ∪ M_36` reaches all 12 points while `M_35 ∪ M_46` reaches only the
/// 8 yellow ones.
#[derive(Clone, Debug)]
pub struct OverlapFixture {
    pub data: PointSet,
    pub height: f64,
    pub resolution: f64,
    pub m12: ParamVector,
    pub m36: ParamVector,
    pub m35: ParamVector,
    pub m46: ParamVector,
}

impl OverlapFixture {
    pub fn new(height: f64) -> Self {
        let mut xs: Vec<f64> = (0..4).map(f64::from).collect();
        xs.extend((5..13).map(f64::from));
        let data = PointSet::from_xy(&xs.iter().map(|&x| (x, 0.0)).collect::<Vec<_>>());
        let seg = |a: f64, b: f64| ParamVector(vec![a, height, b - a, 0.0]);
        OverlapFixture {
            data,
            height,
            resolution: 0.5,
            m12: seg(-0.5, 3.5),
            m36: seg(4.5, 12.5),
            m35: seg(4.5, 10.5),
            m46: seg(6.5, 12.5),
        }
    }

    pub fn samples(&self, segment: &ParamVector) -> PointSet {
        sample(Family::Line2d.model(), segment.as_slice(), self.resolution).expect("valid segment")
    }

    /// Concatenated samples of both segments.
    pub fn union(&self, a: &ParamVector, b: &ParamVector) -> PointSet {
        let mut s = self.samples(a);
        s.extend_from(&self.samples(b)).expect("same dimension");
        s
    }
}

impl Default for OverlapFixture {
    fn default() -> Self {
        OverlapFixture::new(0.5)
    }
}

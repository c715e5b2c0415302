//! Nearest-data-point regularized model-to-data error.
//!
//! For model samples `M` and data `D` the fitness is
//!
//! ```text
//! ξ(M, D) = (|A(M, D)| / |D|)^λ · δ_D / s(M, D)
//! ```
//!
//! where `A` is the set of distinct data points that are the nearest
//! neighbour of at least one model sample, `δ_D` is the closest-pair
//! distance within the data, and `s` is the mean distance from each model
//! sample to its nearest data point. Outliers far from the model never
//! enter the minimum, so no inlier threshold is needed; overlapping model
//! instances share nearest data points, so overlap is not double counted.

use crate::error::{Error, Result};
use crate::geometry::{dedupe, squared_distance, Point, PointSet};
use crate::spatial::{closest_pair_distance, KdTree};

/// Relative dedupe tolerance applied to data, as a fraction of the bounding-box diagonal.
pub const DEDUPE_RELATIVE_TOL: f64 = 1e-9;

/// Error floor, as a fraction of `δ_D`, used when samples hit data exactly.
pub const ZERO_ERROR_FLOOR: f64 = 1e-12;

/// Deduplicated data with a spatial index and its resolution `δ_D`.
#[derive(Clone, Debug)]
pub struct DataIndex {
    data: PointSet,
    tree: KdTree,
    delta_d: f64,
}

impl DataIndex {
    /// Dedupes `data` and indexes it; needs at least two distinct points.
    pub fn build(data: &PointSet) -> Result<Self> {
        let bbox = data
            .bounding_box()
            .ok_or_else(|| Error::InsufficientData("data set is empty".into()))?;
        let data = dedupe(data, DEDUPE_RELATIVE_TOL * bbox.diagonal());
        if data.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "need at least 2 distinct data points, got {}",
                data.len()
            )));
        }
        let delta_d = closest_pair_distance(&data).expect("two or more points");
        let tree = KdTree::build(&data);
        Ok(DataIndex {
            data,
            tree,
            delta_d,
        })
    }

    pub fn data(&self) -> &PointSet {
        &self.data
    }

    /// Closest-pair distance `δ_D` of the data.
    pub fn delta_d(&self) -> f64 {
        self.delta_d
    }

    pub fn point_count(&self) -> usize {
        self.data.len()
    }

    pub fn tree(&self) -> &KdTree {
        &self.tree
    }

    pub(crate) fn check_dim(&self, samples: &PointSet) -> Result<()> {
        if samples.dim() != self.data.dim() {
            return Err(Error::Usage(format!(
                "{} samples against {} data",
                samples.dim(),
                self.data.dim()
            )));
        }
        Ok(())
    }

    /// Nearest data index per sample, walking the samples in order.
    ///
    /// A full query also yields the runner-up distance `r` at an anchor
    /// sample. Every other data point stays at least `r − t` away from a later
    /// sample that has travelled a path of length `t`, so while the anchor's
    /// nearest point is closer than that it is still the unique nearest and
    /// the tree is not consulted.
    pub(crate) fn for_each_nearest(&self, samples: &[Point], mut f: impl FnMut(usize, f64)) {
        let mut anchor: Option<(usize, f64)> = None;
        let mut travelled = 0.0;
        let mut prev: Option<&Point> = None;
        for p in samples {
            if let (Some((index, runner_up)), Some(q)) = (anchor, prev) {
                travelled += squared_distance(p, q).sqrt();
                let d = squared_distance(p, self.tree.point(index)).sqrt();
                let slack = runner_up - travelled;
                if d < slack - 1e-12 * (runner_up + travelled) {
                    f(index, d);
                    prev = Some(p);
                    continue;
                }
            }
            let (n, second) = self.tree.nearest_two(p).expect("index is non-empty");
            anchor = Some((n.index, second.sqrt()));
            travelled = 0.0;
            prev = Some(p);
            f(n.index, n.distance());
        }
    }

    /// Nearest-data assignment of every sample. See [`assign`].
    pub fn assign(&self, samples: &PointSet) -> Result<Assignment> {
        assign(self, samples)
    }
}

/// Nearest data point of every model sample, with aggregates.
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    /// One data index per sample, in sample order.
    pub nearest_indices: Vec<u32>,
    /// `|A(M, D)|`: number of distinct nearest data points.
    pub distinct_count: usize,
    pub sum_distances: f64,
    pub max_distance: f64,
    pub sample_count: usize,
}

impl Assignment {
    /// Sorted distinct data indices.
    pub fn distinct_indices(&self) -> Vec<u32> {
        let mut v = self.nearest_indices.clone();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Number of distinct values in `indices`, all below `universe`.
pub(crate) fn count_distinct(indices: &[u32], universe: usize) -> usize {
    let mut bits = vec![0u64; universe.div_ceil(64)];
    let mut count = 0;
    for &i in indices {
        let (w, b) = ((i / 64) as usize, i % 64);
        if bits[w] & (1 << b) == 0 {
            bits[w] |= 1 << b;
            count += 1;
        }
    }
    count
}

/// Assigns each model sample to its nearest data point (ties to the lowest
/// data index).
pub fn assign(index: &DataIndex, samples: &PointSet) -> Result<Assignment> {
    index.check_dim(samples)?;
    if samples.is_empty() {
        return Err(Error::Usage("no model samples to assign".into()));
    }
    let mut nearest = Vec::with_capacity(samples.len());
    let mut sum = 0.0;
    let mut max: f64 = 0.0;
    index.for_each_nearest(samples.points(), |i, d| {
        nearest.push(i as u32);
        sum += d;
        max = max.max(d);
    });
    Ok(Assignment {
        distinct_count: count_distinct(&nearest, index.point_count()),
        nearest_indices: nearest,
        sum_distances: sum,
        max_distance: max,
        sample_count: samples.len(),
    })
}

/// Average model-to-data error `s = Σ min‖m − d‖ / |M^δ|`.
pub fn error_avg(assignment: &Assignment) -> f64 {
    if assignment.sample_count == 0 {
        return 0.0;
    }
    assignment.sum_distances / assignment.sample_count as f64
}

/// Maximum model-to-data error `max_m min_d ‖m − d‖`.
pub fn error_max(assignment: &Assignment) -> f64 {
    assignment.max_distance
}

/// Estimator value from its ingredients; `error` is floored at
/// `ZERO_ERROR_FLOOR · δ_D` so an exact fit saturates instead of diverging.
pub fn npre_value(
    distinct: usize,
    data_count: usize,
    delta_d: f64,
    error: f64,
    lambda: f64,
) -> f64 {
    let coverage = distinct as f64 / data_count as f64;
    let error = error.max(ZERO_ERROR_FLOOR * delta_d);
    coverage.powf(lambda) * delta_d / error
}

/// Fitness `ξ = (|A|/|D|)^λ · δ_D / s` using the average error.
pub fn npre(index: &DataIndex, assignment: &Assignment, lambda: f64) -> f64 {
    npre_value(
        assignment.distinct_count,
        index.point_count(),
        index.delta_d(),
        error_avg(assignment),
        lambda,
    )
}

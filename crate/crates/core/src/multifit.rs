//! Sequential multi-instance fitting.
//!
//! Instance `k` maximizes the fitness of the union of the frozen instances
//! `1..k` with the candidate. Error terms of the union are taken over the
//! concatenated samples, while coverage counts each data point once no
//! matter how many instances reach it.

use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{assign, error_avg, npre, npre_value, Assignment, DataIndex};
use crate::geometry::PointSet;
use crate::models::{fit_bounds_from_data, sample, Family};
use crate::optimizer::{self, SearchConfig, TraceRow};
use crate::params::{FitConfig, ParamBounds, ParamVector};

/// Parameter bounds margin around the data, as a fraction of its diagonal.
pub const BOUNDS_MARGIN: f64 = 0.05;

/// Samples and nearest-data assignment of the instances fitted so far.
#[derive(Clone, Debug)]
pub struct UnionState {
    family: Family,
    delta: f64,
    fitted: Vec<ParamVector>,
    samples: PointSet,
    assignment: Assignment,
    covered: Vec<u64>,
}

impl UnionState {
    pub fn new(family: Family, index: &DataIndex, delta: f64) -> Self {
        UnionState {
            family,
            delta,
            fitted: Vec::new(),
            samples: PointSet::empty(index.data().dim()),
            assignment: Assignment {
                nearest_indices: Vec::new(),
                distinct_count: 0,
                sum_distances: 0.0,
                max_distance: 0.0,
                sample_count: 0,
            },
            covered: vec![0; index.point_count().div_ceil(64)],
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn fitted(&self) -> &[ParamVector] {
        &self.fitted
    }

    /// Concatenated samples of all fitted instances.
    pub fn samples(&self) -> &PointSet {
        &self.samples
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    fn is_covered(&self, i: u32) -> bool {
        self.covered[(i / 64) as usize] & (1 << (i % 64)) != 0
    }

    /// Freezes `theta` as the next instance.
    pub fn push(&mut self, index: &DataIndex, theta: &ParamVector) -> Result<()> {
        let s = sample(self.family.model(), theta.as_slice(), self.delta)?;
        let a = assign(index, &s)?;
        let fresh = a.nearest_indices.iter().filter(|&&i| !self.is_covered(i));
        let mut fresh: Vec<u32> = fresh.copied().collect();
        fresh.sort_unstable();
        fresh.dedup();
        for &i in &fresh {
            self.covered[(i / 64) as usize] |= 1 << (i % 64);
        }
        self.assignment.distinct_count += fresh.len();
        self.assignment
            .nearest_indices
            .extend_from_slice(&a.nearest_indices);
        self.assignment.sum_distances += a.sum_distances;
        self.assignment.max_distance = self.assignment.max_distance.max(a.max_distance);
        self.assignment.sample_count += a.sample_count;
        self.samples.extend_from(&s)?;
        self.fitted.push(theta.clone());
        Ok(())
    }

    /// Union fitness of the frozen instances plus `theta`, computed
    /// incrementally. Degenerate candidates score 0.
    pub fn candidate_fitness(&self, index: &DataIndex, theta: &[f64], lambda: f64) -> f64 {
        let Ok(s) = sample(self.family.model(), theta, self.delta) else {
            return 0.0;
        };
        let mut sum = 0.0;
        let mut fresh = Vec::new();
        index.for_each_nearest(s.points(), |i, d| {
            sum += d;
            if !self.is_covered(i as u32) {
                fresh.push(i as u32);
            }
        });
        fresh.sort_unstable();
        fresh.dedup();
        let count = self.assignment.sample_count + s.len();
        let error = (self.assignment.sum_distances + sum) / count as f64;
        npre_value(
            self.assignment.distinct_count + fresh.len(),
            index.point_count(),
            index.delta_d(),
            error,
            lambda,
        )
    }
}

/// Objective for the next instance: `f(θ) = ξ(M_{k−1} ∪ M_θ, D)`.
pub fn instance_objective<'a>(
    state: &'a UnionState,
    index: &'a DataIndex,
    lambda: f64,
) -> impl Fn(&[f64]) -> f64 + Sync + 'a {
    move |theta: &[f64]| state.candidate_fitness(index, theta, lambda)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub params: ParamVector,
    /// Union fitness after adding this instance.
    pub fitness: f64,
    pub evaluations: u64,
    pub found_at_iteration: usize,
    /// Mean model-to-data error of this instance's own samples.
    pub error: f64,
    pub sample_count: usize,
    /// Distinct nearest data points of this instance alone.
    pub distinct_count: usize,
    pub trace: Vec<TraceRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub family: Family,
    pub config: FitConfig,
    pub seed: u64,
    pub data_points: usize,
    pub data_resolution: f64,
    pub sample_resolution: f64,
    pub bounds: ParamBounds,
    pub instances: Vec<InstanceReport>,
    /// Fitness of the union of all accepted instances, recomputed from scratch.
    pub union_fitness: f64,
    pub union_distinct_count: usize,
    /// Coverage gain `(|A_k| − |A_{k−1}|) / |D|` of each accepted instance.
    pub marginal_gains: Vec<f64>,
    pub stopped_early: bool,
}

impl FitReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Fits `config.instance_count` instances of `family` to `data`, one at a time.
pub fn fit_all(data: &PointSet, family: Family, config: &FitConfig) -> Result<FitReport> {
    config.validate()?;
    let index = DataIndex::build(data)?;
    let bounds = fit_bounds_from_data(family.model(), index.data(), BOUNDS_MARGIN)?;
    fit_with_index(&index, family, config, &bounds)
}

/// As [`fit_all`], with a prebuilt index and explicit parameter bounds.
pub fn fit_with_index(
    index: &DataIndex,
    family: Family,
    config: &FitConfig,
    bounds: &ParamBounds,
) -> Result<FitReport> {
    config.validate()?;
    let model = family.model();
    if index.data().dim() != model.dim() {
        return Err(Error::Usage(format!(
            "{} family needs {} data, got {}",
            family,
            model.dim(),
            index.data().dim()
        )));
    }
    if bounds.len() != model.n_params() {
        return Err(Error::Config(format!(
            "{} bounds components for a {}-parameter family",
            bounds.len(),
            model.n_params()
        )));
    }
    let delta = index.delta_d() * config.sample_resolution_factor;
    let search = SearchConfig::from(config);
    let mut state = UnionState::new(family, index, delta);
    let mut instances = Vec::new();
    let mut gains = Vec::new();
    let mut stopped_early = false;

    for k in 0..config.instance_count {
        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        rng.set_stream(k as u64);
        let result = {
            let objective = instance_objective(&state, index, config.lambda);
            optimizer::run(&objective, bounds, &search, &mut rng)?
        };
        let best = result.best;

        let own = sample(model, best.theta.as_slice(), delta).and_then(|s| assign(index, &s));
        let mut next = state.clone();
        if next.push(index, &best.theta).is_err() {
            info!("instance {}: no valid model found, stopping", k + 1);
            stopped_early = true;
            break;
        }
        let gain = (next.assignment().distinct_count - state.assignment().distinct_count) as f64
            / index.point_count() as f64;
        if let Some(threshold) = config.early_stop_gain {
            if gain < threshold {
                info!(
                    "instance {}: coverage gain {gain:.4} below {threshold}, discarded",
                    k + 1
                );
                stopped_early = true;
                break;
            }
        }
        state = next;
        let own = own.expect("pushed instance samples cleanly");
        info!(
            "instance {}: fitness {:.6} (found at iteration {}), coverage gain {:.4}",
            k + 1,
            best.fitness,
            best.found_at_iteration,
            gain
        );
        instances.push(InstanceReport {
            params: best.theta,
            fitness: best.fitness,
            evaluations: result.evaluations,
            found_at_iteration: best.found_at_iteration,
            error: error_avg(&own),
            sample_count: own.sample_count,
            distinct_count: own.distinct_count,
            trace: result.trace,
        });
        gains.push(gain);
    }

    let (union_fitness, union_distinct_count) = if state.samples().is_empty() {
        (0.0, 0)
    } else {
        let a = assign(index, state.samples())?;
        (npre(index, &a, config.lambda), a.distinct_count)
    };

    Ok(FitReport {
        family,
        config: config.clone(),
        seed: config.rng_seed,
        data_points: index.point_count(),
        data_resolution: index.delta_d(),
        sample_resolution: delta,
        bounds: bounds.clone(),
        instances,
        union_fitness,
        union_distinct_count,
        marginal_gains: gains,
        stopped_early,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PointSet;

    fn two_rows() -> PointSet {
        let mut pts: Vec<(f64, f64)> = (0..4).map(|x| (x as f64, 0.0)).collect();
        pts.extend((0..8).map(|x| (x as f64, 3.0)));
        PointSet::from_xy(&pts)
    }

    #[test]
    fn empty_union_objective_is_plain_fitness() {
        let data = two_rows();
        let index = DataIndex::build(&data).unwrap();
        let state = UnionState::new(Family::Line2d, &index, 1.0);
        let f = instance_objective(&state, &index, 1.0);
        let theta = [0.3, 0.2, 6.0, 2.0];
        let s = sample(Family::Line2d.model(), &theta, 1.0).unwrap();
        let a = assign(&index, &s).unwrap();
        assert_eq!(f(&theta), npre(&index, &a, 1.0));
    }

    #[test]
    fn duplicate_instance_lowers_fitness() {
        let data = two_rows();
        let index = DataIndex::build(&data).unwrap();
        let theta = ParamVector(vec![0.0, 0.2, 3.0, 0.0]);
        let mut state = UnionState::new(Family::Line2d, &index, 1.0);
        state.push(&index, &theta).unwrap();
        let single = state.candidate_fitness(&index, &[100.0, 100.0, 1.0, 0.0], 1.0);
        assert!(single.is_finite());

        let s = sample(Family::Line2d.model(), theta.as_slice(), 1.0).unwrap();
        let alone = npre(&index, &assign(&index, &s).unwrap(), 1.0);
        let doubled = state.candidate_fitness(&index, theta.as_slice(), 1.0);
        // Same coverage, same mean error over the doubled multiset.
        assert!((doubled - alone).abs() < 1e-12 * alone);

        // A copy shifted further away keeps coverage but raises the error.
        let worse = state.candidate_fitness(&index, &[0.0, 0.4, 3.0, 0.0], 1.0);
        assert!(worse < alone);
    }

    #[test]
    fn degenerate_candidates_score_zero() {
        let data = two_rows();
        let index = DataIndex::build(&data).unwrap();
        let state = UnionState::new(Family::Line2d, &index, 1.0);
        assert_eq!(
            state.candidate_fitness(&index, &[1.0, 1.0, 0.0, 0.0], 1.0),
            0.0
        );
    }

    #[test]
    fn state_matches_scratch_recomputation() {
        let data = two_rows();
        let index = DataIndex::build(&data).unwrap();
        let mut state = UnionState::new(Family::Line2d, &index, 0.5);
        state
            .push(&index, &ParamVector(vec![0.0, 0.1, 3.0, 0.0]))
            .unwrap();
        state
            .push(&index, &ParamVector(vec![1.0, 2.8, 5.0, 0.3]))
            .unwrap();
        let scratch = assign(&index, state.samples()).unwrap();
        let cached = state.assignment();
        assert_eq!(scratch.nearest_indices, cached.nearest_indices);
        assert_eq!(scratch.distinct_count, cached.distinct_count);
        assert_eq!(scratch.sample_count, cached.sample_count);
        assert_eq!(scratch.max_distance, cached.max_distance);
        assert!((scratch.sum_distances - cached.sum_distances).abs() < 1e-12);
    }

    #[test]
    fn single_instance_run_reports_consistently() {
        let data = two_rows();
        let config = FitConfig {
            population: 10,
            max_iterations: 60,
            instance_count: 1,
            rng_seed: 5,
            ..Default::default()
        };
        let r = fit_all(&data, Family::Line2d, &config).unwrap();
        assert_eq!(r.instances.len(), 1);
        assert_eq!(r.instances[0].evaluations, 10 * (1 + 2 * 60));
        assert!((r.union_fitness - r.instances[0].fitness).abs() <= 1e-9 * r.union_fitness);
        assert_eq!(r.marginal_gains.len(), 1);
    }

    #[test]
    fn early_stop_discards_useless_instances() {
        let data = two_rows();
        let config = FitConfig {
            population: 10,
            max_iterations: 40,
            instance_count: 5,
            rng_seed: 1,
            early_stop_gain: Some(0.99),
            ..Default::default()
        };
        let r = fit_all(&data, Family::Line2d, &config).unwrap();
        assert!(r.stopped_early);
        assert!(r.instances.is_empty());
        assert_eq!(r.union_fitness, 0.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let data = two_rows();
        let config = FitConfig::default();
        assert!(matches!(
            fit_all(&data, Family::RoadCircleParabola, &config),
            Err(Error::Usage(_))
        ));
    }
}

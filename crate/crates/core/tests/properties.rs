mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use robustfit::estimator::npre_value;
use robustfit::multifit::UnionState;
use robustfit::optimizer::{self, LevyParams, SearchConfig};
use robustfit::spatial::closest_pair_distance;
use robustfit::testkit::{brute_assign, brute_closest_pair};
use robustfit::{
    assign, npre, sample, DataIndex, Dim, ParamBounds, ParamVector, Point, PointSet, Replacement,
};

use common::{random_data, random_theta, relative_change, Similarity, FAMILIES};

fn point_set(dim: usize, coords: Vec<f64>) -> PointSet {
    let points = coords
        .chunks_exact(dim)
        .map(|c| Point::from_slice(c).unwrap())
        .collect();
    PointSet::new(Dim::from_count(dim).unwrap(), points).unwrap()
}

/// Coordinates either continuous or on a half-integer lattice (to force ties).
fn coords(dim: usize, max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop_oneof![
        prop::collection::vec(-30.0..30.0f64, dim..=dim * max),
        prop::collection::vec(
            (-12i32..=12).prop_map(|v| f64::from(v) * 0.5),
            dim..=dim * max
        ),
    ]
    .prop_map(move |mut v| {
        v.truncate(v.len() / dim * dim);
        v
    })
}

fn data_and_samples() -> impl Strategy<Value = (PointSet, PointSet)> {
    (2usize..=3).prop_flat_map(|dim| {
        (coords(dim, 200), coords(dim, 200))
            .prop_filter("two data points", move |(d, _)| d.len() >= 2 * dim)
            .prop_map(move |(d, s)| (point_set(dim, d), point_set(dim, s)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn assign_matches_exhaustive_scan((data, samples) in data_and_samples()) {
        let Ok(index) = DataIndex::build(&data) else {
            // All points coincide after deduplication.
            return Ok(());
        };
        let fast = assign(&index, &samples).unwrap();
        let slow = brute_assign(&samples, index.data());
        prop_assert_eq!(&fast.nearest_indices, &slow.nearest_indices);
        prop_assert_eq!(fast.distinct_count, slow.distinct_count);
        prop_assert_eq!(fast.max_distance, slow.max_distance);
        prop_assert!(relative_change(fast.sum_distances, slow.sum_distances) <= 1e-12);
    }

    #[test]
    fn closest_pair_matches_exhaustive_scan((data, _) in data_and_samples()) {
        let Ok(index) = DataIndex::build(&data) else {
            return Ok(());
        };
        let brute = brute_closest_pair(index.data());
        prop_assert_eq!(index.delta_d(), brute);
        prop_assert_eq!(closest_pair_distance(index.data()), Some(brute));
        prop_assert!(brute > 0.0);
    }

    #[test]
    fn coverage_and_error_ranges((data, samples) in data_and_samples(), lambda in 0.1..3.0f64) {
        let Ok(index) = DataIndex::build(&data) else {
            return Ok(());
        };
        let a = assign(&index, &samples).unwrap();
        prop_assert!(a.distinct_count >= 1);
        prop_assert!(a.distinct_count <= a.sample_count.min(index.point_count()));
        prop_assert!(a.max_distance * a.sample_count as f64 >= a.sum_distances * (1.0 - 1e-12));
        let xi = npre(&index, &a, lambda);
        prop_assert!(xi.is_finite() && xi > 0.0);
    }

    #[test]
    fn incremental_union_matches_recomputation(
        seed in any::<u64>(),
        family in 0usize..4,
        extra in 0usize..=3,
        lambda in 0.25..2.5f64,
    ) {
        let family = FAMILIES[family];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = random_theta(family, &mut rng);
        let data = random_data(family, &base, 150, &mut rng);
        let index = DataIndex::build(&data).unwrap();
        let delta = family.model().length(&base).unwrap() / 120.0;
        let mut state = UnionState::new(family, &index, delta);
        let mut all = PointSet::empty(family.model().dim());
        for _ in 0..extra {
            let t = ParamVector(random_theta(family, &mut rng));
            state.push(&index, &t).unwrap();
            all.extend_from(&sample(family.model(), t.as_slice(), delta).unwrap()).unwrap();
        }
        let theta = random_theta(family, &mut rng);
        let incremental = state.candidate_fitness(&index, &theta, lambda);
        all.extend_from(&sample(family.model(), &theta, delta).unwrap()).unwrap();
        let a = brute_assign(&all, index.data());
        let naive = npre_value(
            a.distinct_count,
            index.point_count(),
            index.delta_d(),
            a.sum_distances / a.sample_count as f64,
            lambda,
        );
        prop_assert!(relative_change(incremental, naive) <= 1e-9, "{} vs {}", incremental, naive);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn estimator_is_similarity_invariant(seed in any::<u64>(), family in 0usize..4) {
        let family = FAMILIES[family];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta = random_theta(family, &mut rng);
        let data = random_data(family, &theta, 200, &mut rng);
        let xi = |theta: &[f64], data: &PointSet| {
            let index = DataIndex::build(data).unwrap();
            let s = sample(family.model(), theta, index.delta_d()).unwrap();
            npre(&index, &assign(&index, &s).unwrap(), 1.0)
        };
        let base = xi(&theta, &data);
        for _ in 0..4 {
            let t = Similarity::random(&mut rng);
            let moved = xi(&t.theta(family, &theta), &t.points(&data));
            prop_assert!(relative_change(base, moved) <= 1e-9, "{} vs {} under {:?}", base, moved, t);
        }
    }

    #[test]
    fn optimizer_keeps_budget_bounds_and_elitism(
        seed in any::<u64>(),
        dim in 1usize..=6,
        population in 2usize..=20,
        iterations in 0usize..=60,
        discovery_rate in 0.05..0.95f64,
        always in any::<bool>(),
    ) {
        let bounds = ParamBounds::new(vec![-3.0; dim], vec![2.0; dim]).unwrap();
        let config = SearchConfig {
            population,
            max_iterations: iterations,
            discovery_rate,
            levy: LevyParams::default(),
            replacement: if always { Replacement::Always } else { Replacement::IfBetter },
        };
        let seen = std::sync::Mutex::new(Vec::new());
        let objective = |t: &[f64]| {
            seen.lock().unwrap().push(t.to_vec());
            -t.iter().map(|x| (x - 1.0).powi(2)).sum::<f64>()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let result = optimizer::run(&objective, &bounds, &config, &mut rng).unwrap();
        let expected = (population * (1 + 2 * iterations)) as u64;
        prop_assert_eq!(result.evaluations, expected);
        let seen = seen.into_inner().unwrap();
        prop_assert_eq!(seen.len() as u64, expected);
        prop_assert!(seen.iter().all(|t| bounds.contains(t)));
        prop_assert_eq!(result.trace.len(), iterations + 1);
        prop_assert!(result.trace.windows(2).all(|w| w[1].f_star >= w[0].f_star));
        prop_assert!(bounds.contains(result.best.theta.as_slice()));
        prop_assert_eq!(result.best.fitness, result.trace.last().unwrap().f_star);
        prop_assert!(result.best.found_at_iteration <= iterations);
    }
}

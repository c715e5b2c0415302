//! Cuckoo search maximizing a black-box objective inside a parameter box.
//!
//! One run follows the classic four-step loop: uniform initialization,
//! Lévy-flight perturbation of every cuckoo into an egg, greedy pairwise
//! selection between cuckoo and egg, and component-wise recombination with
//! two randomly permuted partners. The best solution seen is tracked after
//! each evaluation phase, so a run of `i_max` iterations costs exactly
//! `n_p · (1 + 2·i_max)` objective evaluations.
//!
//! All random draws happen serially, in a fixed order, before the parallel
//! evaluation of a batch. Thread count never changes the result.

mod levy;

use log::warn;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use levy::{sigma_u, LevyParams};

use crate::error::{Error, Result};
use crate::params::{FitConfig, ParamBounds, ParamVector, Replacement};

/// A function to maximize. Implementations must be pure.
pub trait Objective: Sync {
    fn evaluate(&self, theta: &[f64]) -> f64;
}

impl<F> Objective for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn evaluate(&self, theta: &[f64]) -> f64 {
        self(theta)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub population: usize,
    pub max_iterations: usize,
    pub discovery_rate: f64,
    pub levy: LevyParams,
    pub replacement: Replacement,
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::Config(format!(
                "population must be at least 2, got {}",
                self.population
            )));
        }
        if !(self.discovery_rate > 0.0 && self.discovery_rate < 1.0) {
            return Err(Error::Config(format!(
                "discovery rate must lie in (0, 1), got {}",
                self.discovery_rate
            )));
        }
        Ok(())
    }
}

impl From<&FitConfig> for SearchConfig {
    fn from(c: &FitConfig) -> Self {
        SearchConfig {
            population: c.population,
            max_iterations: c.max_iterations,
            discovery_rate: c.discovery_rate,
            levy: LevyParams::default(),
            replacement: c.replacement,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    pub solutions: Vec<Vec<f64>>,
    /// Fitness of each solution; `NaN` until evaluated.
    pub fitnesses: Vec<f64>,
    pub iteration: usize,
    pub evaluations: u64,
}

impl Population {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    /// Index of the fittest solution; the first one wins ties.
    pub fn best_index(&self) -> usize {
        let mut best = 0;
        for (j, &f) in self.fitnesses.iter().enumerate().skip(1) {
            if f > self.fitnesses[best] {
                best = j;
            }
        }
        best
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestSolution {
    pub theta: ParamVector,
    pub fitness: f64,
    pub found_at_iteration: usize,
}

impl BestSolution {
    /// Adopts the best member of `pop` if it strictly improves on `self`.
    fn update(&mut self, pop: &Population) -> bool {
        let j = pop.best_index();
        if pop.fitnesses[j] > self.fitness {
            self.fitness = pop.fitnesses[j];
            self.theta = ParamVector(pop.solutions[j].clone());
            self.found_at_iteration = pop.iteration;
            true
        } else {
            false
        }
    }
}

/// One entry per iteration, recorded after the iteration's last best update.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub f_star: f64,
    pub evaluations: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub best: BestSolution,
    pub trace: Vec<TraceRow>,
    pub evaluations: u64,
}

/// Uniform random population inside `bounds`.
pub fn init_population<R: Rng + ?Sized>(
    bounds: &ParamBounds,
    n_p: usize,
    rng: &mut R,
) -> Result<Population> {
    if n_p < 2 {
        return Err(Error::Config(format!(
            "population must be at least 2, got {n_p}"
        )));
    }
    let solutions = (0..n_p)
        .map(|_| {
            bounds
                .lower()
                .iter()
                .zip(bounds.upper())
                .map(|(&lo, &hi)| lo + (hi - lo) * rng.random::<f64>())
                .collect()
        })
        .collect();
    Ok(Population {
        solutions,
        fitnesses: vec![f64::NAN; n_p],
        iteration: 0,
        evaluations: 0,
    })
}

/// Evaluates a batch, mapping invalid values to fitness 0.
fn evaluate_batch<O: Objective + ?Sized>(
    objective: &O,
    batch: &[Vec<f64>],
    invalid: &mut u64,
) -> Vec<f64> {
    let mut values: Vec<f64> = batch.par_iter().map(|t| objective.evaluate(t)).collect();
    for v in &mut values {
        if v.is_nan() {
            *invalid += 1;
            *v = 0.0;
        }
    }
    values
}

/// Evaluates every solution of `pop` in place.
pub fn evaluate<O: Objective + ?Sized>(pop: &mut Population, objective: &O) {
    let mut invalid = 0;
    pop.fitnesses = evaluate_batch(objective, &pop.solutions, &mut invalid);
    pop.evaluations += pop.len() as u64;
    if invalid > 0 {
        warn!("{invalid} objective evaluations returned NaN; scored as 0");
    }
}

/// Lévy-flight eggs: `θ' = θ + s·η·(θ − θ*) ⊙ w`, clamped to `bounds`.
///
/// Draw order: every `w` vector first, then one `(u, v)` pair per cuckoo.
pub fn levy_perturb<R: Rng + ?Sized>(
    pop: &Population,
    best: &BestSolution,
    params: &LevyParams,
    bounds: &ParamBounds,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let dims = bounds.len();
    let w: Vec<Vec<f64>> = (0..pop.len())
        .map(|_| (0..dims).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let etas: Vec<f64> = (0..pop.len())
        .map(|_| {
            let (u, v) = params.draw_uv(rng);
            params.eta(u, v)
        })
        .collect();
    pop.solutions
        .iter()
        .zip(w.iter().zip(&etas))
        .map(|(theta, (w, &eta))| {
            let mut egg: Vec<f64> = theta
                .iter()
                .zip(best.theta.as_slice())
                .zip(w)
                .map(|((&t, &b), &w)| t + params.step_scale * eta * (t - b) * w)
                .collect();
            bounds.clamp(&mut egg);
            egg
        })
        .collect()
}

/// Keeps each egg that is strictly fitter than its cuckoo.
pub fn select(pop: &mut Population, eggs: Vec<Vec<f64>>, egg_fitness: &[f64]) {
    for (j, (egg, &f)) in eggs.into_iter().zip(egg_fitness).enumerate() {
        if f > pop.fitnesses[j] {
            pop.solutions[j] = egg;
            pop.fitnesses[j] = f;
        }
    }
}

/// Component-wise recombination with two random permutations of the
/// population; each component moves with probability `1 − p_a`.
///
/// Draw order: a `(gate, scale)` uniform pair per component, then the two
/// partner permutations. Fitnesses are invalidated.
pub fn recombine<R: Rng + ?Sized>(
    pop: &mut Population,
    p_a: f64,
    bounds: &ParamBounds,
    rng: &mut R,
) {
    let n = pop.len();
    let dims = bounds.len();
    let draws: Vec<(f64, f64)> = (0..n * dims)
        .map(|_| (rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    let mut h: Vec<usize> = (0..n).collect();
    let mut g: Vec<usize> = (0..n).collect();
    h.shuffle(rng);
    g.shuffle(rng);

    let snapshot = pop.solutions.clone();
    for (j, theta) in pop.solutions.iter_mut().enumerate() {
        let (a, b) = (&snapshot[h[j]], &snapshot[g[j]]);
        for m in 0..dims {
            let (gate, scale) = draws[j * dims + m];
            if gate >= p_a {
                theta[m] += scale * (a[m] - b[m]);
            }
        }
        bounds.clamp(theta);
    }
    pop.fitnesses.iter_mut().for_each(|f| *f = f64::NAN);
}

/// Full cuckoo search run maximizing `objective`.
pub fn run<O: Objective + ?Sized, R: Rng + ?Sized>(
    objective: &O,
    bounds: &ParamBounds,
    config: &SearchConfig,
    rng: &mut R,
) -> Result<RunResult> {
    config.validate()?;
    let mut invalid = 0u64;
    let mut pop = init_population(bounds, config.population, rng)?;
    pop.fitnesses = evaluate_batch(objective, &pop.solutions, &mut invalid);
    pop.evaluations = pop.len() as u64;

    let mut best = BestSolution {
        theta: ParamVector(pop.solutions[0].clone()),
        fitness: f64::NEG_INFINITY,
        found_at_iteration: 0,
    };
    best.update(&pop);
    let mut trace = Vec::with_capacity(config.max_iterations + 1);
    trace.push(TraceRow {
        iteration: 0,
        f_star: best.fitness,
        evaluations: pop.evaluations,
    });

    while pop.iteration < config.max_iterations {
        let eggs = levy_perturb(&pop, &best, &config.levy, bounds, rng);
        let egg_fitness = evaluate_batch(objective, &eggs, &mut invalid);
        pop.evaluations += eggs.len() as u64;
        let j = best_of(&egg_fitness);
        if egg_fitness[j] > best.fitness {
            best = BestSolution {
                theta: ParamVector(eggs[j].clone()),
                fitness: egg_fitness[j],
                found_at_iteration: pop.iteration,
            };
        }

        select(&mut pop, eggs, &egg_fitness);
        let selected = (config.replacement == Replacement::IfBetter)
            .then(|| (pop.solutions.clone(), pop.fitnesses.clone()));
        recombine(&mut pop, config.discovery_rate, bounds, rng);
        pop.fitnesses = evaluate_batch(objective, &pop.solutions, &mut invalid);
        pop.evaluations += pop.len() as u64;
        best.update(&pop);
        if let Some((solutions, fitnesses)) = selected {
            for (j, (theta, f)) in solutions.into_iter().zip(fitnesses).enumerate() {
                if pop.fitnesses[j] <= f {
                    pop.solutions[j] = theta;
                    pop.fitnesses[j] = f;
                }
            }
        }

        pop.iteration += 1;
        trace.push(TraceRow {
            iteration: pop.iteration,
            f_star: best.fitness,
            evaluations: pop.evaluations,
        });
    }

    if invalid > 0 {
        warn!("{invalid} objective evaluations returned NaN; scored as 0");
    }
    Ok(RunResult {
        best,
        trace,
        evaluations: pop.evaluations,
    })
}

fn best_of(values: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = j;
        }
    }
    best
}

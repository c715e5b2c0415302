use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of one model instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(pub Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Self {
        ParamVector(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(v: Vec<f64>) -> Self {
        ParamVector(v)
    }
}

impl std::ops::Index<usize> for ParamVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Per-component box constraints on a parameter vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl ParamBounds {
    /// Requires equal lengths and `lower[m] < upper[m]` for all components.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Config(format!(
                "bounds length mismatch: {} lower vs {} upper",
                lower.len(),
                upper.len()
            )));
        }
        for (m, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Config(format!(
                    "bounds for component {m} must satisfy lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(ParamBounds { lower, upper })
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.len()
            && theta
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| v >= lo && v <= hi)
    }

    /// Clamps every component into its interval in place.
    pub fn clamp(&self, theta: &mut [f64]) {
        for (v, (lo, hi)) in theta.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            if v.is_nan() {
                *v = *lo;
            } else {
                *v = v.clamp(*lo, *hi);
            }
        }
    }
}

/// What happens to a solution after recombination.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Replacement {
    /// The recombined solution is kept only if it is strictly better.
    #[default]
    IfBetter,
    /// The recombined solution always becomes the next cuckoo.
    Always,
}

/// Optimizer and estimator hyperparameters for one fitting run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Number of cuckoos (solutions) per instance.
    pub population: usize,
    pub max_iterations: usize,
    /// Probability that a component escapes recombination.
    pub discovery_rate: f64,
    /// Exponent on the coverage ratio of the estimator.
    pub lambda: f64,
    /// Model sampling resolution as a multiple of the data resolution.
    pub sample_resolution_factor: f64,
    pub instance_count: usize,
    pub rng_seed: u64,
    /// Stop adding instances once the coverage gain of a new instance is
    /// below this fraction of the data. Disabled when `None`.
    pub early_stop_gain: Option<f64>,
    #[serde(default)]
    pub replacement: Replacement,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            population: 25,
            max_iterations: 2000,
            discovery_rate: 0.25,
            lambda: 1.0,
            sample_resolution_factor: 1.0,
            instance_count: 1,
            rng_seed: 0,
            early_stop_gain: None,
            replacement: Replacement::IfBetter,
        }
    }
}

impl FitConfig {
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
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if !(self.sample_resolution_factor > 0.0 && self.sample_resolution_factor.is_finite()) {
            return Err(Error::Config(format!(
                "sample resolution factor must be positive, got {}",
                self.sample_resolution_factor
            )));
        }
        if self.instance_count == 0 {
            return Err(Error::Config("instance count must be positive".into()));
        }
        if let Some(g) = self.early_stop_gain {
            if !(0.0..1.0).contains(&g) {
                return Err(Error::Config(format!(
                    "early stop gain must lie in [0, 1), got {g}"
                )));
            }
        }
        Ok(())
    }

    /// Total objective evaluations of one instance fit.
    pub fn evaluations_per_instance(&self) -> u64 {
        self.population as u64 * (1 + 2 * self.max_iterations as u64)
    }
}

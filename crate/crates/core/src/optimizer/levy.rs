use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Lévy flight step parameters (Mantegna's algorithm).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevyParams {
    pub beta: f64,
    pub sigma_u: f64,
    /// Multiplier on the step toward/away from the best solution.
    pub step_scale: f64,
}

impl LevyParams {
    pub fn new(beta: f64, step_scale: f64) -> Result<Self> {
        Ok(LevyParams {
            beta,
            sigma_u: sigma_u(beta)?,
            step_scale,
        })
    }

    /// Heavy-tailed scalar `η = u / |v|^{1/β}`, `u ~ N(0, σ_u²)`, `v ~ N(0, 1)`.
    pub fn draw_eta<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (u, v) = self.draw_uv(rng);
        self.eta(u, v)
    }

    pub(crate) fn draw_uv<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let u: f64 = rng.sample(StandardNormal);
        let v: f64 = rng.sample(StandardNormal);
        (u * self.sigma_u, v)
    }

    pub(crate) fn eta(&self, u: f64, v: f64) -> f64 {
        u / v.abs().powf(1.0 / self.beta)
    }
}

impl Default for LevyParams {
    fn default() -> Self {
        LevyParams::new(1.5, 0.01).expect("default beta is valid")
    }
}

/// Mantegna standard deviation
/// `σ_u = (Γ(1+β)·sin(πβ/2) / (Γ((1+β)/2)·β·2^((β−1)/2)))^{1/β}` for `β ∈ (1, 2]`.
pub fn sigma_u(beta: f64) -> Result<f64> {
    if !(beta > 1.0 && beta <= 2.0) {
        return Err(Error::Config(format!(
            "Lévy exponent must lie in (1, 2], got {beta}"
        )));
    }
    let num = gamma(1.0 + beta) * (PI * beta / 2.0).sin();
    let den = gamma((1.0 + beta) / 2.0) * beta * 2f64.powf((beta - 1.0) / 2.0);
    Ok((num / den).powf(1.0 / beta))
}

//! Datasets: point-cloud text files, grayscale images, synthetic
//! generation and sample export.

mod export;
mod pgm;
mod pointfile;
mod synth;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::models::Family;
use crate::params::ParamVector;

pub use export::{export_samples, ExportedFiles};
pub use pgm::{binarize, binarize_image, GrayImage, PgmEncoding, Polarity};
pub use pointfile::{format_points, load_points, parse_points, write_points};
pub use synth::{generate, render_stroke, salt_and_pepper, GroundTruthFile, TruthInstance};

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub points: PointSet,
    /// Where the points came from (a path or a generator description).
    pub provenance: String,
    pub ground_truth: Vec<TruthInstance>,
}

/// Corruption applied to synthetic data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Standard deviation of the jitter applied perpendicular to the curve.
    pub gaussian_sigma: f64,
    /// Fraction of the final dataset made of uniform outliers.
    pub outlier_fraction: f64,
    /// Fraction of image pixels forced to black or white.
    pub salt_pepper_rate: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            gaussian_sigma: 0.0,
            outlier_fraction: 0.0,
            salt_pepper_rate: 0.0,
            seed: 0,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.gaussian_sigma >= 0.0 && self.gaussian_sigma.is_finite()) {
            return Err(Error::Config(format!(
                "noise sigma must be non-negative, got {}",
                self.gaussian_sigma
            )));
        }
        for (name, v) in [
            ("outlier fraction", self.outlier_fraction),
            ("salt-and-pepper rate", self.salt_pepper_rate),
        ] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1), got {v}")));
            }
        }
        Ok(())
    }
}

impl TruthInstance {
    pub fn new(family: Family, params: ParamVector) -> Self {
        TruthInstance { family, params }
    }
}

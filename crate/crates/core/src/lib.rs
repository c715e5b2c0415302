//! Robust fitting of multiple parametric curve instances to noisy point
//! data, driven by a coverage-weighted error estimator and cuckoo search.

pub mod cli;
pub mod dataio;
pub mod error;
pub mod estimator;
pub mod eval;
pub mod geometry;
pub mod models;
pub mod multifit;
pub mod optimizer;
pub mod params;
pub mod spatial;
pub mod testkit;

pub use error::{Error, Result};
pub use estimator::{assign, error_avg, error_max, npre, Assignment, DataIndex};
pub use geometry::{BoundingBox, Dim, Point, PointSet};
pub use models::{sample, Family, ModelFamily};
pub use multifit::{fit_all, fit_with_index, FitReport, InstanceReport};
pub use params::{FitConfig, ParamBounds, ParamVector, Replacement};

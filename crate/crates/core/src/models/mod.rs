//! Parametric model families.
//!
//! A family maps a parameter vector to a curve parameterized by arc length
//! `s ∈ [0, L]`. Sampling at resolution `δ` places `ceil(L/δ) + 1` equally
//! spaced stations along the curve, endpoints included, so consecutive
//! samples are never more than `δ` apart along the curve.

mod bspline;
mod line;
mod quadrature;
mod road;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bspline::{BSplineStroke2D, SplineBasis};
pub use line::LineSegment2D;
pub use road::{HighwayCircleParabola3D, HighwaySpiralParabola3D};

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Dim, Point, PointSet};
use crate::params::{ParamBounds, ParamVector};
use crate::spatial::closest_pair_distance;

/// Behaviour shared by every parametric curve family.
pub trait ModelFamily: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    fn dim(&self) -> Dim;

    /// Human-readable parameter names, one per component.
    fn param_names(&self) -> &'static [&'static str];

    fn n_params(&self) -> usize {
        self.param_names().len()
    }

    /// Arc length `L` of the instance.
    fn length(&self, theta: &[f64]) -> Result<f64>;

    /// The model point at arc length `s` (no range check).
    fn eval_at(&self, theta: &[f64], s: f64) -> Point;

    /// Samples at the given arc lengths, which are sorted ascending in `[0, L]`.
    fn eval_stations(&self, theta: &[f64], stations: &[f64]) -> Vec<Point> {
        stations.iter().map(|&s| self.eval_at(theta, s)).collect()
    }

    /// Parameter box derived from the data extent and resolution.
    fn bounds(&self, bbox: &BoundingBox, resolution: f64, margin: f64) -> ParamBounds;

    /// Parameters of the same point set traversed from the other end.
    fn reversed(&self, theta: &[f64]) -> Result<ParamVector>;

    /// Index of the parameter reported as the curve's radius, if any.
    fn radius_index(&self) -> Option<usize> {
        None
    }
}

pub(crate) fn check_theta(family: &dyn ModelFamily, theta: &[f64]) -> Result<()> {
    if theta.len() != family.n_params() {
        return Err(Error::Domain(format!(
            "{} expects {} parameters, got {}",
            family.name(),
            family.n_params(),
            theta.len()
        )));
    }
    if let Some(v) = theta.iter().find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite parameter {v}")));
    }
    Ok(())
}

/// Number of sampling stations for a curve of length `length`.
pub fn station_count(length: f64, delta: f64) -> usize {
    (length / delta).ceil() as usize + 1
}

/// Uniform arc-length samples of the instance at resolution `delta`.
pub fn sample(family: &dyn ModelFamily, theta: &[f64], delta: f64) -> Result<PointSet> {
    check_theta(family, theta)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Domain(format!(
            "sampling resolution must be positive, got {delta}"
        )));
    }
    let length = family.length(theta)?;
    let n = station_count(length, delta);
    if n > 50_000_000 {
        return Err(Error::Domain(format!(
            "{n} samples requested (length {length}, resolution {delta})"
        )));
    }
    let step = length / (n - 1) as f64;
    let stations: Vec<f64> = (0..n)
        .map(|i| if i + 1 == n { length } else { step * i as f64 })
        .collect();
    let mut set = PointSet::new(family.dim(), family.eval_stations(theta, &stations))?;
    set.resolution_hint = Some(step);
    Ok(set)
}

/// The model point at arc length `s`, for `s ∈ [0, L]`.
pub fn arc_length_position(family: &dyn ModelFamily, theta: &[f64], s: f64) -> Result<Point> {
    check_theta(family, theta)?;
    let length = family.length(theta)?;
    if !(0.0..=length).contains(&s) {
        return Err(Error::Domain(format!(
            "arc length {s} outside [0, {length}]"
        )));
    }
    Ok(family.eval_at(theta, s))
}

/// Parameter bounds for fitting `family` to `data`.
///
/// Positions are confined to the data bounding box grown by
/// `margin × diagonal`; lengths and scales to `[δ_D, diagonal]`; angles to
/// `[0, 2π]`. Per-family defaults cover the remaining components.
pub fn fit_bounds_from_data(
    family: &dyn ModelFamily,
    data: &PointSet,
    margin: f64,
) -> Result<ParamBounds> {
    let bbox = data
        .bounding_box()
        .ok_or_else(|| Error::InsufficientData("no data points".into()))?;
    if data.dim() != family.dim() {
        return Err(Error::Usage(format!(
            "{} family on {} data",
            family.name(),
            data.dim()
        )));
    }
    let resolution = if data.len() >= 2 {
        closest_pair_distance(data).unwrap_or(0.0)
    } else {
        0.0
    };
    let resolution = if resolution > 0.0 {
        resolution
    } else {
        1e-9 * bbox.diagonal().max(1.0)
    };
    Ok(family.bounds(&bbox, resolution, margin.max(0.0)))
}

/// A position interval `[lo, hi]` on each active axis, guaranteed non-empty.
pub(crate) fn axis_range(bbox: &BoundingBox, axis: usize, margin: f64) -> (f64, f64) {
    let pad = margin * bbox.diagonal();
    let (lo, hi) = (bbox.min[axis] - pad, bbox.max[axis] + pad);
    if hi > lo {
        (lo, hi)
    } else {
        let w = 1e-6 * bbox.diagonal().max(1.0);
        (lo - w, hi + w)
    }
}

/// Upper bound on lengths: the grown diagonal, never below `lower`.
pub(crate) fn length_upper(bbox: &BoundingBox, margin: f64, lower: f64) -> f64 {
    let diag = bbox.diagonal() * (1.0 + 2.0 * margin);
    if diag > lower {
        diag
    } else {
        lower * 2.0
    }
}

/// Registry of the built-in families, keyed by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "line2d")]
    Line2d,
    #[serde(rename = "bspline2d")]
    BSpline2d,
    #[serde(rename = "road-circle-parabola")]
    RoadCircleParabola,
    #[serde(rename = "road-spiral-parabola")]
    RoadSpiralParabola,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::Line2d,
        Family::BSpline2d,
        Family::RoadCircleParabola,
        Family::RoadSpiralParabola,
    ];

    pub fn model(self) -> &'static dyn ModelFamily {
        match self {
            Family::Line2d => &LineSegment2D,
            Family::BSpline2d => &BSplineStroke2D,
            Family::RoadCircleParabola => &HighwayCircleParabola3D,
            Family::RoadSpiralParabola => &HighwaySpiralParabola3D,
        }
    }

    pub fn name(self) -> &'static str {
        self.model().name()
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Family::ALL.iter().map(|f| f.name()).collect();
                Error::Usage(format!(
                    "unknown model family {s:?}, expected one of {names:?}"
                ))
            })
    }
}

pub(crate) fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(std::f64::consts::TAU);
    if w >= std::f64::consts::TAU {
        0.0
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::distance;
    use std::f64::consts::PI;

    #[test]
    fn registry_round_trips_names() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
            let json = serde_json::to_string(&f).unwrap();
            assert_eq!(json, format!("\"{}\"", f.name()));
        }
        assert!("circle".parse::<Family>().is_err());
    }

    fn example_theta(f: Family) -> Vec<f64> {
        match f {
            Family::Line2d => vec![1.0, 2.0, 3.0, -4.0],
            Family::BSpline2d => vec![
                5.0, 5.0, 3.0, 0.7, -0.4, -0.3, -0.1, 0.2, 0.1, -0.2, 0.3, 0.1, 0.45, 0.4,
            ],
            Family::RoadCircleParabola => vec![10.0, 20.0, 3.0, 80.0, 0.4, 0.02, 120.0, 0.0005],
            Family::RoadSpiralParabola => {
                vec![10.0, 20.0, 3.0, 80.0, 0.4, 0.02, 0.004, 5e-5, -0.0003]
            }
        }
    }

    #[test]
    fn sampling_contract_for_every_family() {
        for f in Family::ALL {
            let model = f.model();
            let theta = example_theta(f);
            let length = model.length(&theta).unwrap();
            for delta in [0.05, 0.5, 2.0] {
                let s = sample(model, &theta, delta).unwrap();
                assert_eq!(s.dim(), model.dim());
                assert_eq!(s.len(), station_count(length, delta));
                assert!(s.len() >= 2);
                for w in s.points().windows(2) {
                    // Road stations are spaced in horizontal arc length.
                    let chord = if model.dim() == Dim::Three {
                        ((w[0].x() - w[1].x()).powi(2) + (w[0].y() - w[1].y()).powi(2)).sqrt()
                    } else {
                        distance(&w[0], &w[1]).unwrap()
                    };
                    assert!(
                        chord <= delta * (1.0 + 1e-9),
                        "{f}: chord {chord} > {delta}"
                    );
                }
                let first = s.points()[0];
                let last = *s.points().last().unwrap();
                assert_eq!(first, model.eval_at(&theta, 0.0));
                assert!(distance(&last, &model.eval_at(&theta, length)).unwrap() < 1e-9);
            }
        }
    }

    #[test]
    fn arc_length_is_unit_speed() {
        for f in Family::ALL {
            let model = f.model();
            let theta = example_theta(f);
            let length = model.length(&theta).unwrap();
            let eps = 1e-3;
            for k in 0..20 {
                let s = length * k as f64 / 20.0;
                let a = model.eval_at(&theta, s);
                let b = model.eval_at(&theta, s + eps);
                let step = distance(&a, &b).unwrap();
                // Road curves also climb, so only the horizontal part is unit speed.
                let horizontal = ((a.x() - b.x()).powi(2) + (a.y() - b.y()).powi(2)).sqrt();
                assert!(
                    horizontal <= eps * (1.0 + 1e-6),
                    "{f} at s={s}: {horizontal}"
                );
                if model.dim() == Dim::Two {
                    assert!(step >= eps * (1.0 - 1e-3), "{f} at s={s}: {step}");
                }
            }
        }
    }

    #[test]
    fn halving_resolution_stays_close() {
        for f in Family::ALL {
            let model = f.model();
            let theta = example_theta(f);
            let delta = 1.0;
            let coarse = sample(model, &theta, delta).unwrap();
            let fine = sample(model, &theta, delta / 2.0).unwrap();
            for p in &coarse {
                let d = fine
                    .iter()
                    .map(|q| distance(p, q).unwrap())
                    .fold(f64::INFINITY, f64::min);
                assert!(d <= delta, "{f}: {d}");
            }
        }
    }

    #[test]
    fn reversal_traces_the_same_points() {
        for f in Family::ALL {
            let model = f.model();
            let theta = example_theta(f);
            let rev = model.reversed(&theta).unwrap();
            let length = model.length(&theta).unwrap();
            assert!((model.length(rev.as_slice()).unwrap() - length).abs() < 1e-9);
            for k in 0..=10 {
                let s = length * k as f64 / 10.0;
                let a = model.eval_at(&theta, s);
                let b = model.eval_at(rev.as_slice(), length - s);
                assert!(distance(&a, &b).unwrap() < 1e-6, "{f} at {s}");
            }
        }
    }

    #[test]
    fn arc_length_position_range_checked() {
        let model = Family::Line2d.model();
        let theta = [0.0, 0.0, 2.0, 0.0];
        assert!(matches!(
            arc_length_position(model, &theta, 2.5),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            arc_length_position(model, &theta, -0.1),
            Err(Error::Domain(_))
        ));
        assert_eq!(
            arc_length_position(model, &theta, 0.0).unwrap(),
            Point::new2(0.0, 0.0)
        );
    }

    #[test]
    fn start_of_every_family_is_its_anchor() {
        let road = example_theta(Family::RoadCircleParabola);
        let p = arc_length_position(Family::RoadCircleParabola.model(), &road, 0.0).unwrap();
        assert_eq!(p, Point::new3(10.0, 20.0, 3.0));
        let spiral = example_theta(Family::RoadSpiralParabola);
        let p = arc_length_position(Family::RoadSpiralParabola.model(), &spiral, 0.0).unwrap();
        assert_eq!(p, Point::new3(10.0, 20.0, 3.0));
        let line = example_theta(Family::Line2d);
        let p = arc_length_position(Family::Line2d.model(), &line, 0.0).unwrap();
        assert_eq!(p, Point::new2(1.0, 2.0));
    }

    #[test]
    fn sample_rejects_bad_inputs() {
        let model = Family::Line2d.model();
        assert!(matches!(
            sample(model, &[0.0, 0.0, 1.0], 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            sample(model, &[0.0, 0.0, 1.0, 0.0], 0.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            sample(model, &[0.0, f64::NAN, 1.0, 0.0], 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            sample(model, &[0.0, 0.0, 0.0, 0.0], 1.0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn bounds_from_data_examples() {
        let data = PointSet::from_xy(&[(0.0, 0.0), (10.0, 10.0), (3.0, 4.0)]);
        let b = fit_bounds_from_data(Family::Line2d.model(), &data, 0.0).unwrap();
        assert_eq!(&b.lower()[..2], &[0.0, 0.0]);
        assert_eq!(&b.upper()[..2], &[10.0, 10.0]);

        let b = fit_bounds_from_data(Family::Line2d.model(), &data, 0.1).unwrap();
        assert!(b.lower()[0] < 0.0 && b.upper()[0] > 10.0);
        assert!(b.lower()[1] < 0.0 && b.upper()[1] > 10.0);

        let road = PointSet::from_points(vec![
            Point::new3(0.0, 0.0, 0.0),
            Point::new3(500.0, 500.0, 500.0),
            Point::new3(250.0, 100.0, 20.0),
        ])
        .unwrap();
        let b = fit_bounds_from_data(Family::RoadCircleParabola.model(), &road, 0.0).unwrap();
        assert!(b.upper()[3] >= 500.0 * 3f64.sqrt());
        let angle = HighwayCircleParabola3D
            .param_names()
            .iter()
            .position(|n| *n == "azimuth")
            .unwrap();
        assert_eq!(b.lower()[angle], 0.0);
        assert!((b.upper()[angle] - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn bounds_from_data_rejects_dimension_mismatch() {
        let data = PointSet::from_xy(&[(0.0, 0.0), (10.0, 10.0)]);
        assert!(fit_bounds_from_data(Family::RoadCircleParabola.model(), &data, 0.0).is_err());
    }
}

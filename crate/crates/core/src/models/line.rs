use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Dim, Point};
use crate::params::{ParamBounds, ParamVector};

use super::{axis_range, check_theta, length_upper, ModelFamily};

const MIN_EXTENT: f64 = 1e-12;

/// Segment `{ p + t·q | t ∈ [0, 1] }` with `θ = (p_x, p_y, q_x, q_y)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct LineSegment2D;

impl ModelFamily for LineSegment2D {
    fn name(&self) -> &'static str {
        "line2d"
    }

    fn dim(&self) -> Dim {
        Dim::Two
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["p_x", "p_y", "q_x", "q_y"]
    }

    fn length(&self, theta: &[f64]) -> Result<f64> {
        let len = theta[2].hypot(theta[3]);
        if len < MIN_EXTENT {
            return Err(Error::Degenerate(format!(
                "segment direction has length {len}"
            )));
        }
        Ok(len)
    }

    fn eval_at(&self, theta: &[f64], s: f64) -> Point {
        let t = s / theta[2].hypot(theta[3]);
        Point::new2(theta[0] + t * theta[2], theta[1] + t * theta[3])
    }

    fn eval_stations(&self, theta: &[f64], stations: &[f64]) -> Vec<Point> {
        let length = theta[2].hypot(theta[3]);
        let n = stations.len();
        // Evenly spaced stations map onto t = i/(n-1) exactly.
        let ts: Vec<f64> = if n >= 2 && (stations[n - 1] - length).abs() <= f64::EPSILON * length {
            (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
        } else {
            stations.iter().map(|s| s / length).collect()
        };
        ts.into_iter()
            .map(|t| Point::new2(theta[0] + t * theta[2], theta[1] + t * theta[3]))
            .collect()
    }

    fn bounds(&self, bbox: &BoundingBox, _resolution: f64, margin: f64) -> ParamBounds {
        let (x0, x1) = axis_range(bbox, 0, margin);
        let (y0, y1) = axis_range(bbox, 1, margin);
        let reach = length_upper(bbox, margin, 1e-9);
        ParamBounds::new(vec![x0, y0, -reach, -reach], vec![x1, y1, reach, reach])
            .expect("line bounds are well formed")
    }

    fn reversed(&self, theta: &[f64]) -> Result<ParamVector> {
        check_theta(self, theta)?;
        Ok(ParamVector(vec![
            theta[0] + theta[2],
            theta[1] + theta[3],
            -theta[2],
            -theta[3],
        ]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::sample;
    use proptest::prelude::*;

    #[test]
    fn axis_aligned_exact_division() {
        let s = sample(&LineSegment2D, &[0.0, 0.0, 2.0, 0.0], 1.0).unwrap();
        assert_eq!(
            s.points(),
            &[
                Point::new2(0.0, 0.0),
                Point::new2(1.0, 0.0),
                Point::new2(2.0, 0.0)
            ]
        );
    }

    proptest! {
        #[test]
        fn samples_satisfy_segment_equation(
            px in -50.0..50.0f64, py in -50.0..50.0f64,
            qx in -30.0..30.0f64, qy in -30.0..30.0f64,
            delta in 0.05..5.0f64,
        ) {
            prop_assume!(qx.hypot(qy) > 1e-3);
            let s = sample(&LineSegment2D, &[px, py, qx, qy], delta).unwrap();
            let qq = qx * qx + qy * qy;
            for p in &s {
                let t = ((p.x() - px) * qx + (p.y() - py) * qy) / qq;
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&t));
                let rx = px + t * qx - p.x();
                let ry = py + t * qy - p.y();
                prop_assert!(rx.hypot(ry) <= 1e-12 * (1.0 + px.abs().max(py.abs()) + qq.sqrt()));
            }
        }
    }
}

#![allow(dead_code)]

use std::f64::consts::TAU;

use rand::Rng;
use robustfit::{Family, Point, PointSet};

pub const FAMILIES: [Family; 4] = Family::ALL;

/// Random non-degenerate parameters of `family`, centered near the origin.
pub fn random_theta<R: Rng>(family: Family, rng: &mut R) -> Vec<f64> {
    let sym = |rng: &mut R, a: f64| rng.random_range(-a..a);
    match family {
        Family::Line2d => {
            let (len, dir) = (rng.random_range(5.0..80.0), rng.random_range(0.0..TAU));
            vec![
                sym(rng, 50.0),
                sym(rng, 50.0),
                len * dir.cos(),
                len * dir.sin(),
            ]
        }
        Family::BSpline2d => {
            let mut t = vec![
                sym(rng, 50.0),
                sym(rng, 50.0),
                rng.random_range(20.0..80.0),
                rng.random_range(0.0..TAU),
            ];
            t.extend((0..10).map(|_| sym(rng, 0.5)));
            t
        }
        Family::RoadCircleParabola => {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            vec![
                sym(rng, 50.0),
                sym(rng, 50.0),
                sym(rng, 5.0),
                rng.random_range(30.0..150.0),
                rng.random_range(0.0..TAU),
                sym(rng, 0.05),
                sign * rng.random_range(80.0..500.0),
                sym(rng, 0.002),
            ]
        }
        Family::RoadSpiralParabola => vec![
            sym(rng, 50.0),
            sym(rng, 50.0),
            sym(rng, 5.0),
            rng.random_range(30.0..150.0),
            rng.random_range(0.0..TAU),
            sym(rng, 0.05),
            sym(rng, 0.01),
            sym(rng, 1e-4),
            sym(rng, 0.002),
        ],
    }
}

/// Jittered samples of `theta` plus uniform outliers, at most `max_points` in total.
pub fn random_data<R: Rng>(
    family: Family,
    theta: &[f64],
    max_points: usize,
    rng: &mut R,
) -> PointSet {
    let model = family.model();
    let length = model.length(theta).expect("random theta is valid");
    let inliers = rng.random_range(10..=(max_points * 2 / 3));
    let outliers = rng.random_range(0..=(max_points - inliers));
    let samples = robustfit::sample(model, theta, length / (inliers - 1) as f64).unwrap();
    let mut points: Vec<Point> = samples
        .iter()
        .take(inliers)
        .map(|p| {
            let c: Vec<f64> = p
                .coords()
                .iter()
                .map(|v| v + rng.random_range(-0.5..0.5))
                .collect();
            Point::from_slice(&c).unwrap()
        })
        .collect();
    let bbox = samples.bounding_box().unwrap().expanded(5.0);
    for _ in 0..outliers {
        let c: Vec<f64> = (0..bbox.dim.count())
            .map(|a| rng.random_range(bbox.min[a]..bbox.max[a]))
            .collect();
        points.push(Point::from_slice(&c).unwrap());
    }
    PointSet::new(model.dim(), points).unwrap()
}

/// Rotation by `angle` about the origin (about the z axis in 3D), uniform
/// scale, then translation.
#[derive(Clone, Copy, Debug)]
pub struct Similarity {
    pub scale: f64,
    pub angle: f64,
    pub shift: [f64; 3],
}

impl Similarity {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        Similarity {
            scale: 10f64.powf(rng.random_range(-1.0..1.0)),
            angle: rng.random_range(0.0..TAU),
            shift: [
                rng.random_range(-100.0..100.0),
                rng.random_range(-100.0..100.0),
                rng.random_range(-100.0..100.0),
            ],
        }
    }

    fn rotate(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = self.angle.sin_cos();
        (c * x - s * y, s * x + c * y)
    }

    pub fn point(&self, p: &Point) -> Point {
        let (x, y) = self.rotate(p.x(), p.y());
        let (x, y) = (
            self.scale * x + self.shift[0],
            self.scale * y + self.shift[1],
        );
        if p.coords().len() == 3 {
            Point::new3(x, y, self.scale * p.z() + self.shift[2])
        } else {
            Point::new2(x, y)
        }
    }

    pub fn points(&self, set: &PointSet) -> PointSet {
        PointSet::new(set.dim(), set.iter().map(|p| self.point(p)).collect()).unwrap()
    }

    /// Parameters of the transformed model instance.
    pub fn theta(&self, family: Family, theta: &[f64]) -> Vec<f64> {
        let s = self.scale;
        let mut t = theta.to_vec();
        let (x, y) = self.rotate(theta[0], theta[1]);
        t[0] = s * x + self.shift[0];
        t[1] = s * y + self.shift[1];
        match family {
            Family::Line2d => {
                let (qx, qy) = self.rotate(theta[2], theta[3]);
                t[2] = s * qx;
                t[3] = s * qy;
            }
            Family::BSpline2d => {
                t[2] = s * theta[2];
                t[3] = (theta[3] + self.angle).rem_euclid(TAU);
            }
            Family::RoadCircleParabola => {
                t[2] = s * theta[2] + self.shift[2];
                t[3] = s * theta[3];
                t[4] = (theta[4] + self.angle).rem_euclid(TAU);
                t[6] = s * theta[6];
                t[7] = theta[7] / s;
            }
            Family::RoadSpiralParabola => {
                t[2] = s * theta[2] + self.shift[2];
                t[3] = s * theta[3];
                t[4] = (theta[4] + self.angle).rem_euclid(TAU);
                t[6] = theta[6] / s;
                t[7] = theta[7] / (s * s);
                t[8] = theta[8] / s;
            }
        }
        t
    }
}

pub fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

//! 3D highway alignment curves: a horizontal curve (circular arc or
//! clothoid) combined with a vertical parabola over the same horizontal arc
//! length.
//!
//! Horizontal heading `ψ(s)` is measured counterclockwise from the +x axis
//! and the horizontal tangent is `(cos ψ, sin ψ)`. For the circular family
//! `ψ(s) = φ₀ + s/R`, so a positive radius turns left. Elevation is
//! `z(s) = z₀ + g₀·s + ½·c_v·s²`.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Dim, Point};
use crate::params::{ParamBounds, ParamVector};

use super::quadrature::adaptive;
use super::{axis_range, check_theta, length_upper, wrap_angle, ModelFamily};

/// Start slope bound, rise over run.
pub const SLOPE_LIMIT: f64 = 0.15;
/// Vertical curvature bound in 1/m.
pub const VERTICAL_CURVATURE_LIMIT: f64 = 0.01;
/// Horizontal curvature bound for the clothoid start curvature, 1/m.
pub const CURVATURE_LIMIT: f64 = 0.02;
/// Clothoid curvature rate bound, 1/m².
pub const CURVATURE_RATE_LIMIT: f64 = 1e-4;
/// Smallest radius bound magnitude, in data units.
pub const MIN_RADIUS_LIMIT: f64 = 1000.0;

const MIN_RADIUS: f64 = 1e-9;
const QUADRATURE_TOL: f64 = 1e-9;

fn elevation(theta: &[f64], s: f64) -> f64 {
    theta[2] + theta[5] * s + 0.5 * theta[theta.len() - 1] * s * s
}

fn check_length(theta: &[f64]) -> Result<f64> {
    let len = theta[3];
    if len <= 0.0 {
        return Err(Error::Degenerate(format!(
            "curve length {len} is not positive"
        )));
    }
    Ok(len)
}

fn common_bounds(bbox: &BoundingBox, resolution: f64, margin: f64) -> (Vec<f64>, Vec<f64>) {
    let (x0, x1) = axis_range(bbox, 0, margin);
    let (y0, y1) = axis_range(bbox, 1, margin);
    let (z0, z1) = axis_range(bbox, 2, margin);
    (
        vec![x0, y0, z0, resolution, 0.0, -SLOPE_LIMIT],
        vec![
            x1,
            y1,
            z1,
            length_upper(bbox, margin, resolution),
            TAU,
            SLOPE_LIMIT,
        ],
    )
}

/// Horizontal circular arc with vertical parabola.
///
/// `θ = (x₀, y₀, z₀, L, φ₀, g₀, R, c_v)`; the sign of `R` encodes the turn
/// direction. The radius is searched within `±max(10 × diagonal, 1000)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct HighwayCircleParabola3D;

impl ModelFamily for HighwayCircleParabola3D {
    fn name(&self) -> &'static str {
        "road-circle-parabola"
    }

    fn dim(&self) -> Dim {
        Dim::Three
    }

    fn param_names(&self) -> &'static [&'static str] {
        &[
            "x0",
            "y0",
            "z0",
            "length",
            "azimuth",
            "slope",
            "radius",
            "vertical_curvature",
        ]
    }

    fn length(&self, theta: &[f64]) -> Result<f64> {
        if theta[6].abs() < MIN_RADIUS {
            return Err(Error::Degenerate(format!("radius {} is zero", theta[6])));
        }
        check_length(theta)
    }

    fn eval_at(&self, theta: &[f64], s: f64) -> Point {
        let (phi, r) = (theta[4], theta[6]);
        // Chord form avoids cancellation for large radii.
        let half = s / (2.0 * r);
        let chord = 2.0 * r * half.sin();
        let (sin, cos) = (phi + half).sin_cos();
        Point::new3(
            theta[0] + chord * cos,
            theta[1] + chord * sin,
            elevation(theta, s),
        )
    }

    fn bounds(&self, bbox: &BoundingBox, resolution: f64, margin: f64) -> ParamBounds {
        let (mut lower, mut upper) = common_bounds(bbox, resolution, margin);
        let radius = (10.0 * bbox.diagonal()).max(MIN_RADIUS_LIMIT);
        lower.extend([-radius, -VERTICAL_CURVATURE_LIMIT]);
        upper.extend([radius, VERTICAL_CURVATURE_LIMIT]);
        ParamBounds::new(lower, upper).expect("road bounds are well formed")
    }

    fn reversed(&self, theta: &[f64]) -> Result<ParamVector> {
        check_theta(self, theta)?;
        let len = self.length(theta)?;
        let end = self.eval_at(theta, len);
        let (phi, slope, r, cv) = (theta[4], theta[5], theta[6], theta[7]);
        Ok(ParamVector(vec![
            end.x(),
            end.y(),
            end.z(),
            len,
            wrap_angle(phi + len / r + PI),
            -(slope + cv * len),
            -r,
            cv,
        ]))
    }

    fn radius_index(&self) -> Option<usize> {
        Some(6)
    }
}

/// Horizontal clothoid with vertical parabola.
///
/// `θ = (x₀, y₀, z₀, L, φ₀, g₀, κ₀, κ', c_v)` with curvature
/// `κ(s) = κ₀ + κ'·s` and heading `ψ(s) = φ₀ + κ₀·s + ½·κ'·s²`. Positions
/// come from adaptive Gauss-Legendre integration of `(cos ψ, sin ψ)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct HighwaySpiralParabola3D;

fn heading(theta: &[f64], s: f64) -> f64 {
    theta[4] + theta[6] * s + 0.5 * theta[7] * s * s
}

fn horizontal_step(theta: &[f64], a: f64, b: f64) -> [f64; 2] {
    adaptive(
        &|s| {
            let (sin, cos) = heading(theta, s).sin_cos();
            [cos, sin]
        },
        a,
        b,
        QUADRATURE_TOL,
    )
}

impl ModelFamily for HighwaySpiralParabola3D {
    fn name(&self) -> &'static str {
        "road-spiral-parabola"
    }

    fn dim(&self) -> Dim {
        Dim::Three
    }

    fn param_names(&self) -> &'static [&'static str] {
        &[
            "x0",
            "y0",
            "z0",
            "length",
            "azimuth",
            "slope",
            "curvature",
            "curvature_rate",
            "vertical_curvature",
        ]
    }

    fn length(&self, theta: &[f64]) -> Result<f64> {
        check_length(theta)
    }

    fn eval_at(&self, theta: &[f64], s: f64) -> Point {
        let d = horizontal_step(theta, 0.0, s);
        Point::new3(theta[0] + d[0], theta[1] + d[1], elevation(theta, s))
    }

    fn eval_stations(&self, theta: &[f64], stations: &[f64]) -> Vec<Point> {
        let mut out = Vec::with_capacity(stations.len());
        let (mut x, mut y, mut prev) = (theta[0], theta[1], 0.0);
        for &s in stations {
            if s != prev {
                let d = horizontal_step(theta, prev, s);
                x += d[0];
                y += d[1];
                prev = s;
            }
            out.push(Point::new3(x, y, elevation(theta, s)));
        }
        out
    }

    fn bounds(&self, bbox: &BoundingBox, resolution: f64, margin: f64) -> ParamBounds {
        let (mut lower, mut upper) = common_bounds(bbox, resolution, margin);
        lower.extend([
            -CURVATURE_LIMIT,
            -CURVATURE_RATE_LIMIT,
            -VERTICAL_CURVATURE_LIMIT,
        ]);
        upper.extend([
            CURVATURE_LIMIT,
            CURVATURE_RATE_LIMIT,
            VERTICAL_CURVATURE_LIMIT,
        ]);
        ParamBounds::new(lower, upper).expect("road bounds are well formed")
    }

    fn reversed(&self, theta: &[f64]) -> Result<ParamVector> {
        check_theta(self, theta)?;
        let len = self.length(theta)?;
        let end = self.eval_at(theta, len);
        let (slope, k0, rate, cv) = (theta[5], theta[6], theta[7], theta[8]);
        Ok(ParamVector(vec![
            end.x(),
            end.y(),
            end.z(),
            len,
            wrap_angle(heading(theta, len) + PI),
            -(slope + cv * len),
            -(k0 + rate * len),
            rate,
            cv,
        ]))
    }
}

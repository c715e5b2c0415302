use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Dim, Point};
use crate::params::{ParamBounds, ParamVector};

use super::quadrature::gauss5;
use super::{axis_range, check_theta, length_upper, ModelFamily};

const DEGREE: usize = 3;
const CONTROL_POINTS: usize = 5;
/// Arc-length table resolution, intervals per knot span.
const TABLE_STEPS_PER_SPAN: usize = 16;
const CONTROL_EXTENT: f64 = 0.5;

/// Clamped uniform B-spline basis: end knots repeated `degree + 1` times so
/// the curve interpolates its first and last control points.
#[derive(Clone, Debug, PartialEq)]
pub struct SplineBasis {
    degree: usize,
    knots: Vec<f64>,
}

impl SplineBasis {
    pub fn clamped_uniform(degree: usize, n_control: usize) -> Self {
        assert!(
            n_control > degree,
            "need more control points than the degree"
        );
        let interior = n_control - degree;
        let mut knots = vec![0.0; degree + 1];
        knots.extend((1..interior).map(|k| k as f64));
        knots.extend(std::iter::repeat_n(interior as f64, degree + 1));
        SplineBasis { degree, knots }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Parameter range `[u_min, u_max]`.
    pub fn domain(&self) -> (f64, f64) {
        (
            self.knots[self.degree],
            self.knots[self.knots.len() - 1 - self.degree],
        )
    }

    fn span(&self, u: f64, n_control: usize) -> usize {
        let p = self.degree;
        if u >= self.knots[n_control] {
            return n_control - 1;
        }
        let mut k = p;
        while k + 1 < n_control && self.knots[k + 1] <= u {
            k += 1;
        }
        k
    }

    /// De Boor evaluation of the curve with the given control polygon.
    pub fn eval(&self, ctrl: &[[f64; 2]], u: f64) -> [f64; 2] {
        let p = self.degree;
        let k = self.span(u, ctrl.len());
        let mut d = [[0.0; 2]; 8];
        d[..=p].copy_from_slice(&ctrl[k - p..=k]);
        for r in 1..=p {
            for j in (r..=p).rev() {
                let lo = self.knots[j + k - p];
                let hi = self.knots[j + 1 + k - r];
                let alpha = if hi > lo { (u - lo) / (hi - lo) } else { 0.0 };
                d[j] = [
                    (1.0 - alpha) * d[j - 1][0] + alpha * d[j][0],
                    (1.0 - alpha) * d[j - 1][1] + alpha * d[j][1],
                ];
            }
        }
        d[p]
    }

    /// Basis and control polygon of the derivative curve.
    pub fn derivative(&self, ctrl: &[[f64; 2]]) -> (SplineBasis, Vec<[f64; 2]>) {
        let p = self.degree;
        let dctrl = (0..ctrl.len() - 1)
            .map(|i| {
                let w = p as f64 / (self.knots[i + p + 1] - self.knots[i + 1]);
                [
                    w * (ctrl[i + 1][0] - ctrl[i][0]),
                    w * (ctrl[i + 1][1] - ctrl[i][1]),
                ]
            })
            .collect();
        let basis = SplineBasis {
            degree: p - 1,
            knots: self.knots[1..self.knots.len() - 1].to_vec(),
        };
        (basis, dctrl)
    }
}

/// Cubic B-spline stroke through five control points, then scaled, rotated
/// and translated.
///
/// `θ = (c_x, c_y, scale, rotation, u1_x, u1_y, …, u5_x, u5_y)`. Control
/// points live in a unit frame `[-0.5, 0.5]²`; the world curve is
/// `c + scale · Rot(rotation) · B(u)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct BSplineStroke2D;

/// Base curve with a cumulative arc-length table over its parameter.
struct ArcTable {
    basis: SplineBasis,
    ctrl: Vec<[f64; 2]>,
    dbasis: SplineBasis,
    dctrl: Vec<[f64; 2]>,
    us: Vec<f64>,
    cumulative: Vec<f64>,
}

impl ArcTable {
    fn new(ctrl: Vec<[f64; 2]>) -> Self {
        let basis = SplineBasis::clamped_uniform(DEGREE, ctrl.len());
        let (dbasis, dctrl) = basis.derivative(&ctrl);
        let (u0, u1) = basis.domain();
        let steps = TABLE_STEPS_PER_SPAN * (u1 - u0).round() as usize;
        let us: Vec<f64> = (0..=steps)
            .map(|i| u0 + (u1 - u0) * i as f64 / steps as f64)
            .collect();
        let mut table = ArcTable {
            basis,
            ctrl,
            dbasis,
            dctrl,
            us,
            cumulative: Vec::with_capacity(steps + 1),
        };
        let mut acc = 0.0;
        table.cumulative.push(0.0);
        for w in 0..steps {
            acc += table.arc(table.us[w], table.us[w + 1]);
            table.cumulative.push(acc);
        }
        table
    }

    fn speed(&self, u: f64) -> f64 {
        let d = self.dbasis.eval(&self.dctrl, u);
        d[0].hypot(d[1])
    }

    fn arc(&self, a: f64, b: f64) -> f64 {
        gauss5(&|u| [self.speed(u), 0.0], a, b)[0]
    }

    fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Parameter `u` at base arc length `s`, searching from table cell `hint`.
    fn locate(&self, s: f64, hint: &mut usize) -> f64 {
        let last = self.cumulative.len() - 2;
        let mut k = (*hint).min(last);
        while k < last && self.cumulative[k + 1] < s {
            k += 1;
        }
        while k > 0 && self.cumulative[k] > s {
            k -= 1;
        }
        *hint = k;
        let (ua, ub) = (self.us[k], self.us[k + 1]);
        let (sa, sb) = (self.cumulative[k], self.cumulative[k + 1]);
        if s <= sa {
            return ua;
        }
        if s >= sb {
            return ub;
        }
        let mut u = ua + (ub - ua) * (s - sa) / (sb - sa);
        for _ in 0..8 {
            let f = sa + self.arc(ua, u) - s;
            let v = self.speed(u);
            if v < 1e-300 {
                break;
            }
            let next = (u - f / v).clamp(ua, ub);
            let done = (next - u).abs() <= 1e-15 * (1.0 + u.abs());
            u = next;
            if done {
                break;
            }
        }
        u
    }
}

fn control_polygon(theta: &[f64]) -> Vec<[f64; 2]> {
    theta[4..4 + 2 * CONTROL_POINTS]
        .chunks_exact(2)
        .map(|c| [c[0], c[1]])
        .collect()
}

struct Placement {
    cx: f64,
    cy: f64,
    scale: f64,
    cos: f64,
    sin: f64,
}

impl Placement {
    fn new(theta: &[f64]) -> Self {
        let (sin, cos) = theta[3].sin_cos();
        Placement {
            cx: theta[0],
            cy: theta[1],
            scale: theta[2],
            cos,
            sin,
        }
    }

    fn apply(&self, b: [f64; 2]) -> Point {
        Point::new2(
            self.cx + self.scale * (self.cos * b[0] - self.sin * b[1]),
            self.cy + self.scale * (self.sin * b[0] + self.cos * b[1]),
        )
    }
}

impl ModelFamily for BSplineStroke2D {
    fn name(&self) -> &'static str {
        "bspline2d"
    }

    fn dim(&self) -> Dim {
        Dim::Two
    }

    fn param_names(&self) -> &'static [&'static str] {
        &[
            "c_x", "c_y", "scale", "rotation", "u1_x", "u1_y", "u2_x", "u2_y", "u3_x", "u3_y",
            "u4_x", "u4_y", "u5_x", "u5_y",
        ]
    }

    fn length(&self, theta: &[f64]) -> Result<f64> {
        if theta[2] <= 0.0 {
            return Err(Error::Degenerate(format!(
                "stroke scale {} is not positive",
                theta[2]
            )));
        }
        let len = theta[2] * ArcTable::new(control_polygon(theta)).total();
        if len < 1e-12 {
            return Err(Error::Degenerate(format!("stroke length {len}")));
        }
        Ok(len)
    }

    fn eval_at(&self, theta: &[f64], s: f64) -> Point {
        self.eval_stations(theta, &[s])[0]
    }

    fn eval_stations(&self, theta: &[f64], stations: &[f64]) -> Vec<Point> {
        let table = ArcTable::new(control_polygon(theta));
        let place = Placement::new(theta);
        let mut hint = 0;
        stations
            .iter()
            .map(|&s| {
                let u = table.locate(s / place.scale, &mut hint);
                place.apply(table.basis.eval(&table.ctrl, u))
            })
            .collect()
    }

    fn bounds(&self, bbox: &BoundingBox, resolution: f64, margin: f64) -> ParamBounds {
        let (x0, x1) = axis_range(bbox, 0, margin);
        let (y0, y1) = axis_range(bbox, 1, margin);
        let mut lower = vec![x0, y0, resolution, 0.0];
        let mut upper = vec![x1, y1, length_upper(bbox, margin, resolution), TAU];
        lower.extend(std::iter::repeat_n(-CONTROL_EXTENT, 2 * CONTROL_POINTS));
        upper.extend(std::iter::repeat_n(CONTROL_EXTENT, 2 * CONTROL_POINTS));
        ParamBounds::new(lower, upper).expect("stroke bounds are well formed")
    }

    fn reversed(&self, theta: &[f64]) -> Result<ParamVector> {
        check_theta(self, theta)?;
        let mut out = theta[..4].to_vec();
        for c in control_polygon(theta).iter().rev() {
            out.extend_from_slice(c);
        }
        Ok(ParamVector(out))
    }
}

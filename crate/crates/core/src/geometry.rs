//! Points, point sets and the handful of geometric helpers shared by every
//! other module.
//!
//! Coordinates are stored in a fixed `[f64; 3]` with unused trailing
//! components held at zero, so 2D and 3D data share one code path and
//! squared distances are bit-identical whichever dimension is active.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spatial dimension of a point or point set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn count(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    pub fn from_count(n: usize) -> Result<Self> {
        match n {
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            _ => Err(Error::Usage(format!(
                "unsupported dimension {n}, expected 2 or 3"
            ))),
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}D", self.count())
    }
}

#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    xyz: [f64; 3],
    dim: Dim,
}

impl Point {
    pub fn new2(x: f64, y: f64) -> Self {
        Point {
            xyz: [x, y, 0.0],
            dim: Dim::Two,
        }
    }

    pub fn new3(x: f64, y: f64, z: f64) -> Self {
        Point {
            xyz: [x, y, z],
            dim: Dim::Three,
        }
    }

    /// Builds a point from 2 or 3 finite coordinates.
    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        let dim = Dim::from_count(coords.len())?;
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("non-finite coordinate {bad}")));
        }
        let mut xyz = [0.0; 3];
        xyz[..coords.len()].copy_from_slice(coords);
        Ok(Point { xyz, dim })
    }

    pub(crate) fn from_array(xyz: [f64; 3], dim: Dim) -> Self {
        let mut xyz = xyz;
        if dim == Dim::Two {
            xyz[2] = 0.0;
        }
        Point { xyz, dim }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.xyz[..self.dim.count()]
    }

    pub(crate) fn xyz(&self) -> &[f64; 3] {
        &self.xyz
    }

    pub fn x(&self) -> f64 {
        self.xyz[0]
    }

    pub fn y(&self) -> f64 {
        self.xyz[1]
    }

    /// Zero for 2D points.
    pub fn z(&self) -> f64 {
        self.xyz[2]
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Point").field(&self.coords()).finish()
    }
}

/// Squared Euclidean distance without a dimension check.
#[inline]
pub(crate) fn squared_distance(a: &Point, b: &Point) -> f64 {
    let dx = a.xyz[0] - b.xyz[0];
    let dy = a.xyz[1] - b.xyz[1];
    let dz = a.xyz[2] - b.xyz[2];
    dx * dx + dy * dy + dz * dz
}

/// Euclidean distance between two points of the same dimension.
pub fn distance(a: &Point, b: &Point) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::Usage(format!(
            "distance between {} and {} points",
            a.dim, b.dim
        )));
    }
    Ok(squared_distance(a, b).sqrt())
}

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundingBox {
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub dim: Dim,
}

impl BoundingBox {
    pub fn extent(&self, axis: usize) -> f64 {
        self.max[axis] - self.min[axis]
    }

    pub fn diagonal(&self) -> f64 {
        (0..self.dim.count())
            .map(|a| self.extent(a).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0..self.dim.count()).all(|a| p.xyz[a] >= self.min[a] && p.xyz[a] <= self.max[a])
    }

    /// Grows the box by `amount` on every side of every active axis.
    pub fn expanded(&self, amount: f64) -> Self {
        let mut out = *self;
        for a in 0..self.dim.count() {
            out.min[a] -= amount;
            out.max[a] += amount;
        }
        out
    }
}

/// An ordered collection of points of one dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    points: Vec<Point>,
    dim: Dim,
    /// Known sampling resolution of the set, if any.
    pub resolution_hint: Option<f64>,
}

impl PointSet {
    pub fn empty(dim: Dim) -> Self {
        PointSet {
            points: Vec::new(),
            dim,
            resolution_hint: None,
        }
    }

    pub fn with_capacity(dim: Dim, capacity: usize) -> Self {
        PointSet {
            points: Vec::with_capacity(capacity),
            dim,
            resolution_hint: None,
        }
    }

    /// Builds a set checking that every point has dimension `dim`.
    pub fn new(dim: Dim, points: Vec<Point>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| p.dim != dim) {
            return Err(Error::Usage(format!(
                "{} point {:?} in a {} point set",
                p.dim, p, dim
            )));
        }
        Ok(PointSet {
            points,
            dim,
            resolution_hint: None,
        })
    }

    /// Builds a non-empty set, taking the dimension from its first point.
    pub fn from_points(points: Vec<Point>) -> Result<Self> {
        let dim = points
            .first()
            .map(|p| p.dim)
            .ok_or_else(|| Error::InsufficientData("empty point set".into()))?;
        Self::new(dim, points)
    }

    /// Convenience constructor for literal 2D data.
    pub fn from_xy(coords: &[(f64, f64)]) -> Self {
        PointSet {
            points: coords.iter().map(|&(x, y)| Point::new2(x, y)).collect(),
            dim: Dim::Two,
            resolution_hint: None,
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    pub fn push(&mut self, p: Point) -> Result<()> {
        if p.dim != self.dim {
            return Err(Error::Usage(format!(
                "cannot add a {} point to a {} point set",
                p.dim, self.dim
            )));
        }
        self.points.push(p);
        Ok(())
    }

    pub(crate) fn push_unchecked(&mut self, p: Point) {
        debug_assert_eq!(p.dim, self.dim);
        self.points.push(p);
    }

    /// Appends all points of `other` (multiset concatenation).
    pub fn extend_from(&mut self, other: &PointSet) -> Result<()> {
        if other.dim != self.dim {
            return Err(Error::Usage(format!(
                "cannot concatenate {} and {} point sets",
                self.dim, other.dim
            )));
        }
        self.points.extend_from_slice(&other.points);
        Ok(())
    }

    /// `None` for an empty set.
    pub fn bounding_box(&self) -> Option<BoundingBox> {
        let first = self.points.first()?;
        let mut bb = BoundingBox {
            min: first.xyz,
            max: first.xyz,
            dim: self.dim,
        };
        for p in &self.points[1..] {
            for a in 0..3 {
                bb.min[a] = bb.min[a].min(p.xyz[a]);
                bb.max[a] = bb.max[a].max(p.xyz[a]);
            }
        }
        Some(bb)
    }

    /// Applies `f` to every point, keeping the dimension.
    pub fn map(&self, mut f: impl FnMut(&Point) -> [f64; 3]) -> PointSet {
        PointSet {
            points: self
                .points
                .iter()
                .map(|p| Point::from_array(f(p), self.dim))
                .collect(),
            dim: self.dim,
            resolution_hint: self.resolution_hint,
        }
    }
}

impl<'a> IntoIterator for &'a PointSet {
    type Item = &'a Point;
    type IntoIter = std::slice::Iter<'a, Point>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// Removes points lying within `tol` of an earlier kept point.
///
/// The first occurrence in input order survives. With `tol == 0` only exact
/// duplicates are merged.
pub fn dedupe(points: &PointSet, tol: f64) -> PointSet {
    let tol = tol.max(0.0);
    let mut out = PointSet::with_capacity(points.dim, points.len());
    out.resolution_hint = points.resolution_hint;

    if tol == 0.0 {
        let mut seen = std::collections::HashSet::with_capacity(points.len());
        for p in points {
            // -0.0 and 0.0 are the same coordinate.
            let key = p.xyz.map(|c| (c + 0.0).to_bits());
            if seen.insert(key) {
                out.push_unchecked(*p);
            }
        }
        return out;
    }

    let tol_sq = tol * tol;
    let cell_of = |p: &Point| p.xyz.map(|c| (c / tol).floor() as i64);
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    let reach: i64 = if points.dim == Dim::Two { 0 } else { 1 };
    for p in points {
        let c = cell_of(p);
        let mut clash = false;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -reach..=reach {
                    if let Some(members) = grid.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                        if members
                            .iter()
                            .any(|&k| squared_distance(&out.points[k], p) <= tol_sq)
                        {
                            clash = true;
                            break 'search;
                        }
                    }
                }
            }
        }
        if !clash {
            grid.entry(c).or_default().push(out.len());
            out.push_unchecked(*p);
        }
    }
    out
}

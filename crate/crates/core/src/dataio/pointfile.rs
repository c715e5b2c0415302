use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};
use crate::estimator::DEDUPE_RELATIVE_TOL;
use crate::geometry::{dedupe, Dim, Point, PointSet};

/// Parses whitespace-separated coordinates, one point per line. Blank lines
/// and lines starting with `#` are skipped. With `dim` unset, the first
/// point's column count decides.
pub fn parse_points(text: &str, dim: Option<Dim>, source: &Path) -> Result<PointSet> {
    let mut dim = dim;
    let mut points = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: source.display().to_string(),
            line: n + 1,
            message,
        };
        let coords = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| parse_err(format!("bad number {t:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let d = match dim {
            Some(d) => d,
            None => {
                let d = Dim::from_count(coords.len())
                    .map_err(|_| parse_err(format!("{} columns, expected 2 or 3", coords.len())))?;
                dim = Some(d);
                d
            }
        };
        if coords.len() != d.count() {
            return Err(parse_err(format!(
                "{} columns, expected {}",
                coords.len(),
                d.count()
            )));
        }
        points.push(Point::from_slice(&coords).map_err(|e| parse_err(e.to_string()))?);
    }
    let Some(dim) = dim else {
        return Err(Error::InsufficientData(format!(
            "{}: no points",
            source.display()
        )));
    };
    PointSet::new(dim, points)
}

/// Reads a point file and removes duplicate points.
pub fn load_points(path: &Path, dim: Option<Dim>) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let raw = parse_points(&text, dim, path)?;
    let bbox = raw
        .bounding_box()
        .expect("parse_points returns at least one point");
    let points = dedupe(&raw, DEDUPE_RELATIVE_TOL * bbox.diagonal());
    Ok(Dataset {
        points,
        provenance: path.display().to_string(),
        ground_truth: Vec::new(),
    })
}

/// Text form of `points`; every value round-trips exactly.
pub fn format_points(points: &PointSet) -> String {
    let mut out = String::with_capacity(points.len() * 40);
    for p in points {
        let mut first = true;
        for c in p.coords() {
            if !first {
                out.push(' ');
            }
            first = false;
            write!(out, "{c}").expect("writing to a string");
        }
        out.push('\n');
    }
    out
}

pub fn write_points(path: &Path, points: &PointSet) -> Result<()> {
    fs::write(path, format_points(points)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str, dim: Option<Dim>) -> Result<PointSet> {
        parse_points(text, dim, Path::new("test.txt"))
    }

    #[test]
    fn two_points() {
        let s = parse("0 0\n1 0\n", Some(Dim::Two)).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.points()[1], Point::new2(1.0, 0.0));
    }

    #[test]
    fn comments_and_blank_lines_skipped() {
        let s = parse("# comment\n\n0 0\n  # indented\n1\t2\n", None).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.dim(), Dim::Two);
    }

    #[test]
    fn wrong_column_count_names_line() {
        let err = parse("0 0\n# c\n1 2 3\n", Some(Dim::Two)).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
        assert!(matches!(
            parse("1 2 3 4\n", None),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse("1 x\n", None),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse("1 nan\n", None),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn empty_file_is_insufficient() {
        assert!(matches!(
            parse("# nothing\n", None),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn load_dedupes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pts.txt");
        fs::write(&path, "0 0\n1 0\n0 0\n").unwrap();
        let d = load_points(&path, None).unwrap();
        assert_eq!(d.points.len(), 2);
        assert!(matches!(
            load_points(&dir.path().join("missing.txt"), None),
            Err(Error::Io { .. })
        ));
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(coords in prop::collection::vec((-1e300f64..1e300, -1e-300f64..1e-300, any::<f64>()), 1..30)) {
            let pts: Vec<Point> = coords
                .iter()
                .map(|&(x, y, z)| Point::new3(x, y, if z.is_finite() { z } else { 0.5 }))
                .collect();
            let set = PointSet::from_points(pts).unwrap();
            let back = parse(&format_points(&set), Some(Dim::Three)).unwrap();
            for (a, b) in set.iter().zip(back.iter()) {
                for (u, v) in a.coords().iter().zip(b.coords()) {
                    prop_assert_eq!(u.to_bits(), v.to_bits());
                }
            }
        }
    }
}

//! Comparison of fitted instances against ground truth.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::models::{sample, Family};
use crate::params::ParamVector;
use crate::spatial::KdTree;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamError {
    pub name: String,
    pub truth: f64,
    pub fitted: f64,
    pub abs_error: f64,
    /// `abs_error / |truth|`; absent when the truth value is 0.
    pub rel_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceMatch {
    pub truth_index: usize,
    pub fitted_index: usize,
    /// Symmetric mean sample distance between the two curves.
    pub curve_distance: f64,
    /// The fitted instance runs the other way and was reversed before comparing.
    pub reversed: bool,
    pub params: Vec<ParamError>,
    /// Relative error of `|R|`, for families with a radius parameter.
    pub radius_rel_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub family: Family,
    pub resolution: f64,
    pub truth_count: usize,
    pub fitted_count: usize,
    pub matched_count: usize,
    pub matches: Vec<InstanceMatch>,
    pub unmatched_truth: Vec<usize>,
    pub unmatched_fitted: Vec<usize>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("evaluation serializes")
    }

    pub fn match_for_truth(&self, truth_index: usize) -> Option<&InstanceMatch> {
        self.matches.iter().find(|m| m.truth_index == truth_index)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EvalOptions {
    /// Pairs farther apart than this stay unmatched.
    pub max_match_distance: Option<f64>,
}

fn mean_nearest(from: &PointSet, tree: &KdTree) -> f64 {
    let sum: f64 = from
        .iter()
        .map(|p| tree.nearest(p).expect("non-empty tree").distance())
        .sum();
    sum / from.len() as f64
}

/// Average of the two directed mean nearest-sample distances.
pub fn curve_distance(a: &PointSet, b: &PointSet) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Usage(format!(
            "{} curve against {} curve",
            a.dim(),
            b.dim()
        )));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::Usage("empty curve".into()));
    }
    let (ta, tb) = (KdTree::build(a), KdTree::build(b));
    Ok(0.5 * (mean_nearest(a, &tb) + mean_nearest(b, &ta)))
}

fn is_angle(name: &str) -> bool {
    matches!(name, "azimuth" | "rotation")
}

fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    if d > PI {
        d - 2.0 * PI
    } else {
        d
    }
}

/// Matches fitted instances to ground truth greedily by curve distance
/// (closest pair first) and reports parameter errors for each match.
pub fn evaluate(
    family: Family,
    fitted: &[ParamVector],
    truth: &[ParamVector],
    resolution: f64,
    options: &EvalOptions,
) -> Result<EvalReport> {
    let model = family.model();
    let sample_all = |set: &[ParamVector]| -> Result<Vec<PointSet>> {
        set.iter()
            .map(|t| sample(model, t.as_slice(), resolution))
            .collect()
    };
    let fs = sample_all(fitted)?;
    let ts = sample_all(truth)?;

    let mut pairs = Vec::new();
    for (i, t) in ts.iter().enumerate() {
        for (j, f) in fs.iter().enumerate() {
            pairs.push((curve_distance(t, f)?, i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut truth_used = vec![false; truth.len()];
    let mut fitted_used = vec![false; fitted.len()];
    let mut matches = Vec::new();
    for (d, i, j) in pairs {
        if truth_used[i] || fitted_used[j] {
            continue;
        }
        if options.max_match_distance.is_some_and(|m| d > m) {
            break;
        }
        truth_used[i] = true;
        fitted_used[j] = true;

        let (t, f) = (&ts[i], &fs[j]);
        let (t0, t1) = (&t.points()[0], t.points().last().unwrap());
        let (f0, f1) = (&f.points()[0], f.points().last().unwrap());
        let dist = |a, b| crate::geometry::distance(a, b).expect("same dimension");
        let reversed = dist(f0, t1) + dist(f1, t0) < dist(f0, t0) + dist(f1, t1);
        let params = if reversed {
            model.reversed(fitted[j].as_slice())?
        } else {
            fitted[j].clone()
        };

        let errors = model
            .param_names()
            .iter()
            .zip(truth[i].0.iter().zip(&params.0))
            .map(|(name, (&tv, &fv))| {
                let abs_error = if is_angle(name) {
                    angle_diff(fv, tv).abs()
                } else {
                    (fv - tv).abs()
                };
                ParamError {
                    name: name.to_string(),
                    truth: tv,
                    fitted: fv,
                    abs_error,
                    rel_error: (tv != 0.0).then(|| abs_error / tv.abs()),
                }
            })
            .collect();
        let radius_rel_error = model.radius_index().map(|r| {
            let (tv, fv) = (truth[i][r].abs(), params[r].abs());
            (fv - tv).abs() / tv
        });
        matches.push(InstanceMatch {
            truth_index: i,
            fitted_index: j,
            curve_distance: d,
            reversed,
            params: errors,
            radius_rel_error,
        });
    }
    matches.sort_by_key(|m| m.truth_index);

    let unmatched = |used: &[bool]| -> Vec<usize> {
        used.iter()
            .enumerate()
            .filter(|(_, &u)| !u)
            .map(|(i, _)| i)
            .collect()
    };
    Ok(EvalReport {
        family,
        resolution,
        truth_count: truth.len(),
        fitted_count: fitted.len(),
        matched_count: matches.len(),
        unmatched_truth: unmatched(&truth_used),
        unmatched_fitted: unmatched(&fitted_used),
        matches,
    })
}

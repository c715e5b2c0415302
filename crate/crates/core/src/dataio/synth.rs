use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Dataset, GrayImage, NoiseSpec};
use crate::error::{Error, Result};
use crate::geometry::{Dim, Point, PointSet};
use crate::models::{sample, Family};
use crate::params::ParamVector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthInstance {
    pub family: Family,
    pub params: ParamVector,
}

/// Sidecar written next to a generated dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthFile {
    pub family: Family,
    pub instances: Vec<ParamVector>,
    pub inlier_spacing: f64,
    pub noise: NoiseSpec,
    pub inlier_count: usize,
    pub outlier_count: usize,
}

impl GroundTruthFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ground truth serializes")
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalized(a: [f64; 3]) -> Option<[f64; 3]> {
    let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    (n > 0.0).then(|| [a[0] / n, a[1] / n, a[2] / n])
}

/// Unit vectors spanning the normal space of the polyline at sample `i`.
fn normal_basis(samples: &[Point], i: usize, dim: Dim) -> Vec<[f64; 3]> {
    let prev = samples[i.saturating_sub(1)].xyz();
    let next = samples[(i + 1).min(samples.len() - 1)].xyz();
    let t = normalized(sub(*next, *prev)).unwrap_or([1.0, 0.0, 0.0]);
    match dim {
        Dim::Two => vec![[-t[1], t[0], 0.0]],
        Dim::Three => {
            let helper = if t[2].abs() < 0.9 {
                [0.0, 0.0, 1.0]
            } else {
                [1.0, 0.0, 0.0]
            };
            let e1 = normalized(cross(t, helper)).expect("helper is not parallel to the tangent");
            vec![e1, cross(t, e1)]
        }
    }
}

/// Samples every ground-truth instance at `spacing`, jitters each sample
/// perpendicular to the curve and appends uniform outliers in the bounding
/// box of the inliers so they make up `outlier_fraction` of the result.
pub fn generate(
    family: Family,
    ground_truth: &[ParamVector],
    spacing: f64,
    noise: &NoiseSpec,
) -> Result<Dataset> {
    noise.validate()?;
    if ground_truth.is_empty() {
        return Err(Error::Usage(
            "no ground-truth instances to generate from".into(),
        ));
    }
    let model = family.model();
    let dim = model.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let jitter = Normal::new(0.0, noise.gaussian_sigma).expect("sigma validated");
    let mut points = PointSet::empty(dim);
    for theta in ground_truth {
        let s = sample(model, theta.as_slice(), spacing)?;
        for (i, p) in s.iter().enumerate() {
            let mut xyz = *p.xyz();
            if noise.gaussian_sigma > 0.0 {
                for e in normal_basis(s.points(), i, dim) {
                    let a = jitter.sample(&mut rng);
                    for k in 0..3 {
                        xyz[k] += a * e[k];
                    }
                }
            }
            points.push_unchecked(Point::from_array(xyz, dim));
        }
    }
    let inliers = points.len();
    let f = noise.outlier_fraction;
    let outliers = (f * inliers as f64 / (1.0 - f)).ceil() as usize;
    let bbox = points
        .bounding_box()
        .expect("at least two samples per instance");
    for _ in 0..outliers {
        let mut xyz = [0.0; 3];
        for (k, v) in xyz.iter_mut().enumerate().take(dim.count()) {
            *v = if bbox.max[k] > bbox.min[k] {
                rng.random_range(bbox.min[k]..bbox.max[k])
            } else {
                bbox.min[k]
            };
        }
        points.push_unchecked(Point::from_array(xyz, dim));
    }
    Ok(Dataset {
        points,
        provenance: format!(
            "{} synthetic {family} instance(s), spacing {spacing}, sigma {}, outlier fraction {f}, seed {}",
            ground_truth.len(),
            noise.gaussian_sigma,
            noise.seed
        ),
        ground_truth: ground_truth
            .iter()
            .map(|t| TruthInstance::new(family, t.clone()))
            .collect(),
    })
}

/// Renders a `bspline2d` stroke as dark pixels of width `thickness` on a
/// white `width × height` canvas. Model point `(x, y)` lands on column `x`,
/// row `height − 1 − y`.
pub fn render_stroke(
    theta: &[f64],
    width: usize,
    height: usize,
    thickness: f64,
) -> Result<GrayImage> {
    let s = sample(Family::BSpline2d.model(), theta, 0.25)?;
    let mut img = GrayImage::filled(width, height, 255);
    let r = (thickness / 2.0).max(0.5);
    for p in s.iter() {
        let (c0, c1) = ((p.x() - r).floor(), (p.x() + r).ceil());
        let (y0, y1) = ((p.y() - r).floor(), (p.y() + r).ceil());
        for y in (y0 as i64).max(0)..=(y1 as i64).min(height as i64 - 1) {
            for c in (c0 as i64).max(0)..=(c1 as i64).min(width as i64 - 1) {
                let (dx, dy) = (c as f64 - p.x(), y as f64 - p.y());
                if dx * dx + dy * dy <= r * r {
                    img.set(c as usize, height - 1 - y as usize, 0);
                }
            }
        }
    }
    Ok(img)
}

/// Forces each pixel to 0 or to the maximum with probability `rate / 2` each.
pub fn salt_and_pepper<R: Rng + ?Sized>(image: &mut GrayImage, rate: f64, rng: &mut R) {
    for v in image.pixels.iter_mut() {
        let u: f64 = rng.random();
        if u < rate / 2.0 {
            *v = 0;
        } else if u < rate {
            *v = image.max_gray;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{binarize, Polarity};
    use crate::estimator::{assign, DataIndex};

    fn two_lines() -> Vec<ParamVector> {
        vec![
            ParamVector(vec![0.0, 0.0, 10.0, 2.0]),
            ParamVector(vec![0.0, 8.0, 10.0, -3.0]),
        ]
    }

    #[test]
    fn noiseless_points_lie_on_the_truth() {
        let d = generate(Family::Line2d, &two_lines(), 0.5, &NoiseSpec::default()).unwrap();
        for p in d.points.iter() {
            let on_first = (p.y() - 0.2 * p.x()).abs() <= 1e-9;
            let on_second = (p.y() - (8.0 - 0.3 * p.x())).abs() <= 1e-9;
            assert!(on_first || on_second, "{p:?}");
        }
        assert_eq!(d.ground_truth.len(), 2);
    }

    #[test]
    fn noiseless_road_points_lie_on_the_truth() {
        let gt = ParamVector(vec![0.0, 0.0, 10.0, 200.0, 0.3, 0.01, 349.0, 0.0005]);
        let d = generate(
            Family::RoadCircleParabola,
            std::slice::from_ref(&gt),
            1.0,
            &NoiseSpec::default(),
        )
        .unwrap();
        let dense = sample(Family::RoadCircleParabola.model(), gt.as_slice(), 1.0).unwrap();
        let index = DataIndex::build(&dense).unwrap();
        let a = assign(&index, &d.points).unwrap();
        assert!(a.max_distance <= 1e-9);
    }

    #[test]
    fn outlier_count_matches_fraction() {
        let noise = NoiseSpec {
            outlier_fraction: 0.5,
            seed: 3,
            ..Default::default()
        };
        let inliers = generate(Family::Line2d, &two_lines(), 0.5, &NoiseSpec::default())
            .unwrap()
            .points
            .len();
        let d = generate(Family::Line2d, &two_lines(), 0.5, &noise).unwrap();
        let outliers = d.points.len() - inliers;
        assert!(outliers.abs_diff(inliers) <= 1);

        let noise = NoiseSpec {
            outlier_fraction: 0.3,
            ..noise
        };
        let d = generate(Family::Line2d, &two_lines(), 0.5, &noise).unwrap();
        let want = (0.3 * inliers as f64 / 0.7).ceil() as usize;
        assert_eq!(d.points.len() - inliers, want);
    }

    #[test]
    fn jitter_is_perpendicular_and_seeded() {
        let noise = NoiseSpec {
            gaussian_sigma: 0.3,
            seed: 9,
            ..Default::default()
        };
        let gt = [ParamVector(vec![0.0, 0.0, 100.0, 0.0])];
        let a = generate(Family::Line2d, &gt, 1.0, &noise).unwrap();
        let b = generate(Family::Line2d, &gt, 1.0, &noise).unwrap();
        assert_eq!(a, b);
        // A horizontal segment only moves vertically.
        for (i, p) in a.points.iter().enumerate() {
            assert!((p.x() - i as f64).abs() < 1e-12);
        }
        let ys: Vec<f64> = a.points.iter().map(|p| p.y()).collect();
        let sd = (ys.iter().map(|y| y * y).sum::<f64>() / ys.len() as f64).sqrt();
        assert!((sd - 0.3).abs() < 0.1, "{sd}");
        let other = generate(Family::Line2d, &gt, 1.0, &NoiseSpec { seed: 10, ..noise }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn bad_noise_rejected() {
        let noise = NoiseSpec {
            outlier_fraction: 1.0,
            ..Default::default()
        };
        assert!(generate(Family::Line2d, &two_lines(), 1.0, &noise).is_err());
        assert!(generate(Family::Line2d, &[], 1.0, &NoiseSpec::default()).is_err());
    }

    #[test]
    fn stroke_render_and_noise() {
        let theta = [
            32.0, 32.0, 40.0, 0.0, -0.5, 0.0, -0.25, 0.2, 0.0, -0.2, 0.25, 0.2, 0.5, 0.0,
        ];
        let img = render_stroke(&theta, 64, 64, 2.0).unwrap();
        let clean = binarize(&img, 128, Polarity::Dark);
        assert!(
            clean.len() > 40 && clean.len() < 64 * 64 / 4,
            "{}",
            clean.len()
        );

        let mut noisy = img.clone();
        salt_and_pepper(&mut noisy, 0.1, &mut ChaCha8Rng::seed_from_u64(1));
        let flipped = img
            .pixels
            .iter()
            .zip(&noisy.pixels)
            .filter(|(a, b)| a != b)
            .count();
        // About rate/2 of the pixels change value.
        let frac = flipped as f64 / img.pixels.len() as f64;
        assert!((frac - 0.05).abs() < 0.015, "{frac}");
        let mut none = img.clone();
        salt_and_pepper(&mut none, 0.0, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(none, img);
    }
}

use std::fs;
use std::path::{Path, PathBuf};

use super::write_points;
use crate::error::{Error, Result};
use crate::models::sample;
use crate::multifit::FitReport;

#[derive(Clone, Debug, PartialEq)]
pub struct ExportedFiles {
    pub instances: Vec<PathBuf>,
    pub union: PathBuf,
}

/// Writes the samples of each fitted instance to `instance_<k>.txt` and all
/// of them to `union.txt`, in `dir`, at the report's sampling resolution.
pub fn export_samples(report: &FitReport, dir: &Path) -> Result<ExportedFiles> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let model = report.family.model();
    let mut all = crate::geometry::PointSet::empty(model.dim());
    let mut instances = Vec::new();
    for (k, inst) in report.instances.iter().enumerate() {
        let s = sample(model, inst.params.as_slice(), report.sample_resolution)?;
        let path = dir.join(format!("instance_{}.txt", k + 1));
        write_points(&path, &s)?;
        all.extend_from(&s)?;
        instances.push(path);
    }
    let union = dir.join("union.txt");
    write_points(&union, &all)?;
    Ok(ExportedFiles { instances, union })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::load_points;
    use crate::estimator::{assign, error_avg, DataIndex};
    use crate::geometry::PointSet;
    use crate::models::Family;
    use crate::multifit::fit_all;
    use crate::params::FitConfig;

    #[test]
    fn two_instances_give_three_files() {
        let mut pts: Vec<(f64, f64)> = (0..10).map(|x| (x as f64, 0.0)).collect();
        pts.extend((0..10).map(|x| (x as f64, 5.0)));
        let data = PointSet::from_xy(&pts);
        let config = FitConfig {
            population: 10,
            max_iterations: 30,
            instance_count: 2,
            rng_seed: 2,
            ..Default::default()
        };
        let report = fit_all(&data, Family::Line2d, &config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = export_samples(&report, dir.path()).unwrap();
        assert_eq!(files.instances.len(), 2);
        assert!(files.union.exists());

        let index = DataIndex::build(&data).unwrap();
        let mut total = 0;
        for (path, inst) in files.instances.iter().zip(&report.instances) {
            let raw = fs::read_to_string(path).unwrap();
            let lines = raw.lines().count();
            assert_eq!(lines, inst.sample_count);
            total += lines;
            let back = load_points(path, None).unwrap();
            let err = error_avg(&assign(&index, &back.points).unwrap());
            assert!((err - inst.error).abs() <= 1e-9);
        }
        let union = fs::read_to_string(&files.union).unwrap();
        assert_eq!(union.lines().count(), total);
    }
}

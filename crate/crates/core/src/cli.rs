//! The `robustfit` command line: `generate`, `fit` and `eval`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::Rng;

use crate::dataio::{
    binarize_image, export_samples, generate, load_points, render_stroke, salt_and_pepper,
    write_points, GroundTruthFile, NoiseSpec, PgmEncoding, Polarity,
};
use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalOptions};
use crate::models::{sample, Family};
use crate::multifit::{fit_all, FitReport};
use crate::params::{FitConfig, ParamVector, Replacement};

#[derive(Debug, Parser)]
#[command(
    name = "robustfit",
    version,
    about = "Fit multiple curve instances to noisy point data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset and its ground-truth sidecar.
    Generate(GenerateArgs),
    /// Fit model instances to a dataset.
    Fit(FitArgs),
    /// Compare a fit report with ground truth.
    Eval(EvalArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// Two circle-parabola road curves with radii 349 and 349.2.
    RoadPair,
    /// Two crossing line segments.
    TwoLines,
}

impl Preset {
    pub fn family(self) -> Family {
        match self {
            Preset::RoadPair => Family::RoadCircleParabola,
            Preset::TwoLines => Family::Line2d,
        }
    }

    pub fn instances(self) -> Vec<ParamVector> {
        match self {
            Preset::RoadPair => vec![
                ParamVector(vec![0.0, 0.0, 20.0, 300.0, 0.9, 0.01, 349.0, 0.0005]),
                ParamVector(vec![100.0, -80.0, 25.0, 300.0, 0.9, -0.02, 349.2, 0.0005]),
            ],
            Preset::TwoLines => vec![
                ParamVector(vec![0.0, 0.0, 100.0, 60.0]),
                ParamVector(vec![0.0, 80.0, 100.0, -50.0]),
            ],
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Model family; implied by --preset.
    #[arg(long)]
    pub model: Option<Family>,
    /// Ground-truth parameters, comma separated. Repeat for more instances.
    #[arg(long = "params", value_name = "P1,P2,...", allow_hyphen_values = true)]
    pub params: Vec<String>,
    /// JSON file holding an array of parameter arrays.
    #[arg(long, value_name = "FILE")]
    pub params_file: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Dataset to write. A `.pgm` path renders a stroke image (bspline2d only).
    #[arg(long)]
    pub out: PathBuf,
    /// Ground-truth sidecar; defaults to the dataset path with extension `gt.json`.
    #[arg(long)]
    pub truth_out: Option<PathBuf>,
    /// Distance between consecutive inlier samples.
    #[arg(long, default_value_t = 1.0)]
    pub spacing: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub outlier_fraction: f64,
    /// Fraction of image pixels forced to black or white.
    #[arg(long, default_value_t = 0.0)]
    pub salt_pepper: f64,
    /// Image size for stroke rendering.
    #[arg(long, default_value_t = 100)]
    pub width: usize,
    #[arg(long, default_value_t = 100)]
    pub height: usize,
    /// Stroke width in pixels.
    #[arg(long, default_value_t = 3.0)]
    pub thickness: f64,
    /// Random seed; drawn at random and printed when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub model: Family,
    /// Point file (one point per line) or PGM image.
    #[arg(long)]
    pub data: PathBuf,
    /// Directory for `report.json` and sample exports.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Number of instances to fit.
    #[arg(long, default_value_t = 1)]
    pub instances: usize,
    /// Population size.
    #[arg(long, default_value_t = 25)]
    pub pop: usize,
    /// Iterations per instance.
    #[arg(long, default_value_t = 2000)]
    pub iters: usize,
    /// Exponent on the coverage ratio.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Model sampling resolution as a multiple of the data resolution.
    #[arg(long, default_value_t = 1.0)]
    pub delta_factor: f64,
    #[arg(long, default_value_t = 0.25)]
    pub discovery_rate: f64,
    #[arg(long, value_enum, default_value_t = ReplacementArg::IfBetter)]
    pub replacement: ReplacementArg,
    /// Stop once a new instance covers less than this fraction of the data.
    #[arg(long)]
    pub early_stop: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for objective evaluation (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Gray level separating foreground from background in images.
    #[arg(long, default_value_t = 128)]
    pub threshold: u8,
    #[arg(long, value_enum, default_value_t = Polarity::Dark)]
    pub polarity: Polarity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ReplacementArg {
    IfBetter,
    Always,
}

impl From<ReplacementArg> for Replacement {
    fn from(r: ReplacementArg) -> Self {
        match r {
            ReplacementArg::IfBetter => Replacement::IfBetter,
            ReplacementArg::Always => Replacement::Always,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Fit report (`report.json`).
    pub report: PathBuf,
    /// Ground-truth sidecar written by `generate`.
    pub truth: PathBuf,
    /// Curve sampling resolution for matching; defaults to the report's.
    #[arg(long)]
    pub resolution: Option<f64>,
    /// Leave pairs farther apart than this unmatched.
    #[arg(long)]
    pub max_distance: Option<f64>,
    /// Also write the metrics to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_params(text: &str) -> Result<ParamVector> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("bad parameter {t:?} in {text:?}")))
        })
        .collect::<Result<Vec<f64>>>()
        .map(ParamVector)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| rand::rng().random())
}

fn out_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

pub fn cmd_generate(args: &GenerateArgs, out: &mut dyn Write) -> Result<()> {
    let family = match (args.model, args.preset) {
        (Some(m), Some(p)) if m != p.family() => {
            return Err(Error::Usage(format!(
                "preset {p:?} is for {}, not {m}",
                p.family()
            )))
        }
        (Some(m), _) => m,
        (None, Some(p)) => p.family(),
        (None, None) => return Err(Error::Usage("--model or --preset is required".into())),
    };
    let mut instances = args.preset.map(Preset::instances).unwrap_or_default();
    if let Some(path) = &args.params_file {
        instances.extend(read_json::<Vec<ParamVector>>(path)?);
    }
    for p in &args.params {
        instances.push(parse_params(p)?);
    }
    if instances.is_empty() {
        return Err(Error::Usage(
            "no ground-truth instances (use --params, --params-file or --preset)".into(),
        ));
    }
    let n = family.model().n_params();
    if let Some(bad) = instances.iter().find(|p| p.len() != n) {
        return Err(Error::Usage(format!(
            "{family} takes {n} parameters ({}), got {}",
            family.model().param_names().join(", "),
            bad.len()
        )));
    }
    let seed = resolve_seed(args.seed);
    writeln!(out, "seed: {seed}").map_err(out_err)?;
    let noise = NoiseSpec {
        gaussian_sigma: args.noise_sigma,
        outlier_fraction: args.outlier_fraction,
        salt_pepper_rate: args.salt_pepper,
        seed,
    };
    noise.validate()?;

    let is_image = args
        .out
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    let (inlier_count, outlier_count) = if is_image {
        if family != Family::BSpline2d {
            return Err(Error::Usage(format!(
                "image output needs the bspline2d family, not {family}"
            )));
        }
        let mut img = crate::dataio::GrayImage::filled(args.width, args.height, 255);
        for theta in &instances {
            let stroke = render_stroke(theta.as_slice(), args.width, args.height, args.thickness)?;
            for (p, s) in img.pixels.iter_mut().zip(&stroke.pixels) {
                *p = (*p).min(*s);
            }
        }
        let dark = img.pixels.iter().filter(|&&v| v == 0).count();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        salt_and_pepper(&mut img, args.salt_pepper, &mut rng);
        write_file(&args.out, &img.encode(PgmEncoding::Binary))?;
        (dark, 0)
    } else {
        let data = generate(family, &instances, args.spacing, &noise)?;
        let inliers: usize = instances
            .iter()
            .map(|t| sample(family.model(), t.as_slice(), args.spacing).map(|s| s.len()))
            .sum::<Result<usize>>()?;
        if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        write_points(&args.out, &data.points)?;
        (inliers, data.points.len() - inliers)
    };

    let truth = GroundTruthFile {
        family,
        instances,
        inlier_spacing: args.spacing,
        noise,
        inlier_count,
        outlier_count,
    };
    let truth_path = args
        .truth_out
        .clone()
        .unwrap_or_else(|| args.out.with_extension("gt.json"));
    write_file(&truth_path, truth.to_json().as_bytes())?;
    writeln!(
        out,
        "wrote {} ({} inliers, {} outliers) and {}",
        args.out.display(),
        inlier_count,
        outlier_count,
        truth_path.display()
    )
    .map_err(out_err)?;
    Ok(())
}

pub fn cmd_fit(args: &FitArgs, out: &mut dyn Write) -> Result<FitReport> {
    if let Some(n) = args.threads {
        // Only the first pool configuration in a process takes effect.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
    let seed = resolve_seed(args.seed);
    writeln!(out, "seed: {seed}").map_err(out_err)?;
    let config = FitConfig {
        population: args.pop,
        max_iterations: args.iters,
        discovery_rate: args.discovery_rate,
        lambda: args.lambda,
        sample_resolution_factor: args.delta_factor,
        instance_count: args.instances,
        rng_seed: seed,
        early_stop_gain: args.early_stop,
        replacement: args.replacement.into(),
    };
    config.validate()?;
    let is_image = args
        .data
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    let dataset = if is_image {
        binarize_image(&args.data, args.threshold, args.polarity)?
    } else {
        load_points(&args.data, Some(args.model.model().dim()))?
    };
    let report = fit_all(&dataset.points, args.model, &config)?;

    writeln!(
        out,
        "{} points, resolution {}, sampling at {}",
        report.data_points, report.data_resolution, report.sample_resolution
    )
    .map_err(out_err)?;
    let names = args.model.model().param_names();
    for (k, inst) in report.instances.iter().enumerate() {
        let params: Vec<String> = names
            .iter()
            .zip(&inst.params.0)
            .map(|(n, v)| format!("{n}={v}"))
            .collect();
        writeln!(
            out,
            "instance {}: fitness {} error {} covers {} (gain {}) | {}",
            k + 1,
            inst.fitness,
            inst.error,
            inst.distinct_count,
            report.marginal_gains[k],
            params.join(" ")
        )
        .map_err(out_err)?;
    }
    if report.stopped_early {
        writeln!(out, "stopped after {} instance(s)", report.instances.len()).map_err(out_err)?;
    }
    writeln!(out, "union fitness: {}", report.union_fitness).map_err(out_err)?;

    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join("report.json");
        write_file(&path, report.to_json().as_bytes())?;
        export_samples(&report, dir)?;
        writeln!(out, "wrote {}", path.display()).map_err(out_err)?;
    }
    Ok(report)
}

pub fn cmd_eval(args: &EvalArgs, out: &mut dyn Write) -> Result<crate::eval::EvalReport> {
    let report: FitReport = read_json(&args.report)?;
    let truth: GroundTruthFile = read_json(&args.truth)?;
    if report.family != truth.family {
        return Err(Error::Usage(format!(
            "report is {} but ground truth is {}",
            report.family, truth.family
        )));
    }
    let fitted: Vec<ParamVector> = report.instances.iter().map(|i| i.params.clone()).collect();
    let resolution = args.resolution.unwrap_or(report.sample_resolution);
    let options = EvalOptions {
        max_match_distance: args.max_distance,
    };
    let metrics = evaluate(
        report.family,
        &fitted,
        &truth.instances,
        resolution,
        &options,
    )?;
    let json = metrics.to_json();
    writeln!(out, "{json}").map_err(out_err)?;
    if let Some(path) = &args.out {
        write_file(path, json.as_bytes())?;
    }
    Ok(metrics)
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Generate(a) => cmd_generate(a, out),
        Command::Fit(a) => cmd_fit(a, out).map(|_| ()),
        Command::Eval(a) => cmd_eval(a, out).map(|_| ()),
    }
}

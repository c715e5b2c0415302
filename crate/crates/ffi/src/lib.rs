//! C interface to the `robustfit` library.
//!
//! Functions return an [`RfStatus`] code; on failure the message is available
//! from [`rf_last_error_message`] on the same thread. Handles are opaque and
//! must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use robustfit::models::fit_bounds_from_data;
use robustfit::multifit::BOUNDS_MARGIN;
use robustfit::{
    Assignment, DataIndex, Dim, Error, Family, FitConfig, FitReport, Point, PointSet, Replacement,
};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RfStatus {
    Ok = 0,
    NullPointer = 1,
    Usage = 2,
    Domain = 3,
    Degenerate = 4,
    InsufficientData = 5,
    Config = 6,
    Format = 7,
    Io = 8,
    /// Output buffer too small; the required length was still written.
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RfFamily {
    Line2d = 0,
    Bspline2d = 1,
    RoadCircleParabola = 2,
    RoadSpiralParabola = 3,
}

impl From<RfFamily> for Family {
    fn from(f: RfFamily) -> Self {
        match f {
            RfFamily::Line2d => Family::Line2d,
            RfFamily::Bspline2d => Family::BSpline2d,
            RfFamily::RoadCircleParabola => Family::RoadCircleParabola,
            RfFamily::RoadSpiralParabola => Family::RoadSpiralParabola,
        }
    }
}

/// Fitting configuration. Obtain defaults from [`rf_fit_config_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RfFitConfig {
    pub population: u32,
    pub max_iterations: u32,
    pub discovery_rate: f64,
    pub lambda: f64,
    pub sample_resolution_factor: f64,
    pub instance_count: u32,
    pub seed: u64,
    /// Minimum coverage gain for a new instance; negative disables early stopping.
    pub early_stop_gain: f64,
    /// 0 keeps a recombined solution only if it improves, 1 always keeps it.
    pub replacement: u32,
}

impl RfFitConfig {
    fn to_config(self) -> Result<FitConfig, Error> {
        let replacement = match self.replacement {
            0 => Replacement::IfBetter,
            1 => Replacement::Always,
            r => return Err(Error::Config(format!("unknown replacement rule {r}"))),
        };
        let config = FitConfig {
            population: self.population as usize,
            max_iterations: self.max_iterations as usize,
            discovery_rate: self.discovery_rate,
            lambda: self.lambda,
            sample_resolution_factor: self.sample_resolution_factor,
            instance_count: self.instance_count as usize,
            rng_seed: self.seed,
            early_stop_gain: (self.early_stop_gain >= 0.0).then_some(self.early_stop_gain),
            replacement,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Deduplicated point data with its search index.
pub struct RfDataset {
    index: DataIndex,
}

/// Result of [`rf_fit`].
pub struct RfReport {
    report: FitReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RfStatus {
    match e {
        Error::Usage(_) => RfStatus::Usage,
        Error::Domain(_) => RfStatus::Domain,
        Error::Degenerate(_) => RfStatus::Degenerate,
        Error::InsufficientData(_) => RfStatus::InsufficientData,
        Error::Config(_) => RfStatus::Config,
        Error::Parse { .. } | Error::Format(_) | Error::Json { .. } => RfStatus::Format,
        Error::Io { .. } => RfStatus::Io,
    }
}

enum Failure {
    Status(RfStatus, String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(RfStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            RfStatus::Ok
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            RfStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn params_slice<'a>(params: *const f64, len: usize) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if params.is_null() {
        return Err(null("params"));
    }
    Ok(slice::from_raw_parts(params, len))
}

fn instance(report: &RfReport, k: usize) -> Result<&robustfit::InstanceReport, Failure> {
    report.report.instances.get(k).ok_or_else(|| {
        Failure::Status(
            RfStatus::Usage,
            format!(
                "instance {k} out of range ({} fitted)",
                report.report.instances.len()
            ),
        )
    })
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn rf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn rf_fit_config_default() -> RfFitConfig {
    let d = FitConfig::default();
    RfFitConfig {
        population: d.population as u32,
        max_iterations: d.max_iterations as u32,
        discovery_rate: d.discovery_rate,
        lambda: d.lambda,
        sample_resolution_factor: d.sample_resolution_factor,
        instance_count: d.instance_count as u32,
        seed: d.rng_seed,
        early_stop_gain: -1.0,
        replacement: 0,
    }
}

/// Number of parameters of a model family.
#[no_mangle]
pub extern "C" fn rf_family_param_count(family: RfFamily) -> usize {
    Family::from(family).model().n_params()
}

/// Builds a dataset from `count` points of `dim` (2 or 3) interleaved coordinates.
///
/// # Safety
/// `coords` must point to `count * dim` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_dataset_new(
    coords: *const f64,
    count: usize,
    dim: u32,
    out: *mut *mut RfDataset,
) -> RfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let dim = Dim::from_count(dim as usize)?;
        let raw = params_slice(coords, count * dim.count())?;
        let points = raw
            .chunks_exact(dim.count())
            .map(Point::from_slice)
            .collect::<Result<Vec<_>, _>>()?;
        let set = PointSet::new(dim, points)?;
        let index = DataIndex::build(&set)?;
        out.write(Box::into_raw(Box::new(RfDataset { index })));
        Ok(())
    })
}

/// # Safety
/// `dataset` must come from [`rf_dataset_new`] and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn rf_dataset_free(dataset: *mut RfDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Number of points after deduplication.
///
/// # Safety
/// `dataset` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn rf_dataset_len(dataset: *const RfDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.index.point_count())
}

/// Data resolution (closest-pair distance).
///
/// # Safety
/// `dataset` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_dataset_delta_d(dataset: *const RfDataset, out: *mut f64) -> RfStatus {
    guard(|| {
        let d = as_ref(dataset, "dataset")?;
        write_out(out, d.index.delta_d(), "out")
    })
}

/// Estimator value of one model instance, sampled at
/// `resolution_factor` times the data resolution.
///
/// # Safety
/// `params` must point to `n_params` doubles; `dataset` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_npre(
    dataset: *const RfDataset,
    family: RfFamily,
    params: *const f64,
    n_params: usize,
    lambda: f64,
    resolution_factor: f64,
    out: *mut f64,
) -> RfStatus {
    guard(|| {
        let d = as_ref(dataset, "dataset")?;
        let theta = params_slice(params, n_params)?;
        if !(resolution_factor > 0.0 && resolution_factor.is_finite()) {
            return Err(Error::Config(format!(
                "resolution factor must be positive, got {resolution_factor}"
            ))
            .into());
        }
        let model = Family::from(family).model();
        let samples = robustfit::sample(model, theta, resolution_factor * d.index.delta_d())?;
        let assignment: Assignment = robustfit::assign(&d.index, &samples)?;
        write_out(out, robustfit::npre(&d.index, &assignment, lambda), "out")
    })
}

/// Fits `config->instance_count` instances of `family`.
///
/// # Safety
/// `dataset` live, `config` readable (null uses defaults), `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_fit(
    dataset: *const RfDataset,
    family: RfFamily,
    config: *const RfFitConfig,
    out: *mut *mut RfReport,
) -> RfStatus {
    guard(|| {
        let d = as_ref(dataset, "dataset")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let config = config
            .as_ref()
            .copied()
            .unwrap_or_else(|| rf_fit_config_default())
            .to_config()?;
        let family = Family::from(family);
        let bounds = fit_bounds_from_data(family.model(), d.index.data(), BOUNDS_MARGIN)?;
        let report = robustfit::fit_with_index(&d.index, family, &config, &bounds)?;
        out.write(Box::into_raw(Box::new(RfReport { report })));
        Ok(())
    })
}

/// # Safety
/// `report` must come from [`rf_fit`] and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn rf_report_free(report: *mut RfReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `report` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn rf_report_instance_count(report: *const RfReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.instances.len())
}

/// # Safety
/// `report` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_report_union_fitness(
    report: *const RfReport,
    out: *mut f64,
) -> RfStatus {
    guard(|| {
        let r = as_ref(report, "report")?;
        write_out(out, r.report.union_fitness, "out")
    })
}

/// Union fitness after instance `k` was added.
///
/// # Safety
/// `report` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_report_fitness(
    report: *const RfReport,
    k: usize,
    out: *mut f64,
) -> RfStatus {
    guard(|| {
        let r = as_ref(report, "report")?;
        write_out(out, instance(r, k)?.fitness, "out")
    })
}

/// # Safety
/// `report` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_report_evaluations(
    report: *const RfReport,
    k: usize,
    out: *mut u64,
) -> RfStatus {
    guard(|| {
        let r = as_ref(report, "report")?;
        write_out(out, instance(r, k)?.evaluations, "out")
    })
}

/// Copies the parameters of instance `k` into `buf` (capacity `cap`). The
/// parameter count is written to `len` even when the buffer is too small.
///
/// # Safety
/// `report` live; `buf` writable for `cap` doubles (may be null when `cap` is 0); `len` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_report_params(
    report: *const RfReport,
    k: usize,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> RfStatus {
    guard(|| {
        let r = as_ref(report, "report")?;
        let params = instance(r, k)?.params.as_slice();
        write_out(len, params.len(), "len")?;
        if cap < params.len() {
            return Err(Failure::Status(
                RfStatus::BufferTooSmall,
                format!("need {} doubles, buffer holds {cap}", params.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(params.as_ptr(), buf, params.len());
        Ok(())
    })
}

/// Full report as JSON. Release the string with [`rf_string_free`].
///
/// # Safety
/// `report` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_report_to_json(
    report: *const RfReport,
    out: *mut *mut c_char,
) -> RfStatus {
    guard(|| {
        let r = as_ref(report, "report")?;
        let json = CString::new(r.report.to_json()).expect("JSON has no nul bytes");
        write_out(out, json.into_raw(), "out")
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn rf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

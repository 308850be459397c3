//! C ABI over the `mostwork` analysis engine.
//!
//! Handles are opaque pointers created by `mw_*_new` or `mw_analyze` and
//! released by the matching `*_free`. Every fallible call returns an
//! [`MwStatus`]; on failure [`mw_last_error`] describes the cause for the
//! calling thread. Strings handed out by the library are freed with
//! [`mw_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mostwork::report::{render, ReportFormat};
use mostwork::segmentation::TransitionMatrix;
use mostwork::timing::{index_time, AnalysisReport};
use mostwork::{io, rules, Analyzer, Error};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Text input was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Text input failed to parse; the message names the line and column.
    Parse = 3,
    /// Input parsed but was rejected, or a setting is out of range.
    InvalidInput = 4,
    /// Marker geometry could not define a trunk coordinate system.
    Degenerate = 5,
    /// No frame of the trace matched a posture rule.
    NoPosture = 6,
    /// Segment index past the end of the report.
    OutOfRange = 7,
    /// An internal consistency check failed.
    Internal = 8,
    /// The library panicked; the handle involved should be freed.
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwFormat {
    Table = 0,
    Csv = 1,
    Json = 2,
}

/// Timing of one report row.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MwSegment {
    pub start_frame: u64,
    pub end_frame: u64,
    /// Seconds.
    pub standard_time: f64,
    /// Seconds.
    pub actual_time: f64,
    /// Standard over actual time; 0 for rows priced at zero.
    pub efficiency: f64,
    /// Horizontal trunk travel over the segment, meters.
    pub action_distance: f64,
    pub entry_count: usize,
    pub warning_count: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MwTotals {
    pub standard_time: f64,
    pub actual_time: f64,
    pub efficiency: f64,
    pub segment_count: usize,
}

/// Analysis settings, rules, card and transition matrix.
pub struct MwAnalyzer {
    inner: Analyzer,
}

/// A finished analysis.
pub struct MwReport {
    inner: AnalysisReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> MwStatus {
    match e {
        Error::Parse { .. } => MwStatus::Parse,
        Error::Validation(_) | Error::Io { .. } => MwStatus::InvalidInput,
        Error::Degenerate(_) => MwStatus::Degenerate,
        Error::NoRecognizablePosture => MwStatus::NoPosture,
        Error::Invariant(_) => MwStatus::Internal,
    }
}

struct Failure(MwStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// Runs `body`, recording any failure or panic for [`mw_last_error`].
fn guard(body: impl FnOnce() -> Outcome<()>) -> MwStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => MwStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {message}"));
            MwStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(MwStatus::NullArgument, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Outcome<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Outcome<&'a mut T> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Outcome<&'a [u8]> {
    if p.is_null() {
        return Err(null(what));
    }
    let bytes = CStr::from_ptr(p).to_bytes();
    std::str::from_utf8(bytes).map_err(|e| Failure(MwStatus::InvalidUtf8, format!("{what}: {e}")))?;
    Ok(bytes)
}

/// Optional text: null means absent.
unsafe fn optional_text<'a>(p: *const c_char, what: &str) -> Outcome<Option<&'a [u8]>> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, what).map(Some)
    }
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(MwStatus::InvalidInput, message.into())
}

/// Message for the last failed call on this thread, or null after a
/// success. Valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn mw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn mw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// An analyzer with the built-in rules, card, matrix and default settings.
#[no_mangle]
pub extern "C" fn mw_analyzer_new() -> *mut MwAnalyzer {
    Box::into_raw(Box::new(MwAnalyzer { inner: Analyzer::default() }))
}

/// # Safety
/// `analyzer` must come from [`mw_analyzer_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mw_analyzer_free(analyzer: *mut MwAnalyzer) {
    if !analyzer.is_null() {
        drop(Box::from_raw(analyzer));
    }
}

/// Frames a new posture must persist before the change is accepted.
///
/// # Safety
/// `analyzer` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mw_analyzer_set_dwell(analyzer: *mut MwAnalyzer, frames: usize) -> MwStatus {
    guard(|| {
        let a = deref_mut(analyzer, "analyzer")?;
        if frames == 0 {
            return Err(invalid("dwell must be at least 1 frame"));
        }
        a.inner.config.dwell = frames;
        Ok(())
    })
}

fn checked(name: &str, value: f64, ok: bool) -> Outcome<f64> {
    if ok && value.is_finite() {
        Ok(value)
    } else {
        Err(invalid(format!("{name} {value} is out of range")))
    }
}

/// Finger flexion at or above which a finger counts as closed, in (0, 1).
/// Overrides the rule file's threshold.
///
/// # Safety
/// `analyzer` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mw_analyzer_set_gesture_threshold(analyzer: *mut MwAnalyzer, threshold: f64) -> MwStatus {
    guard(|| {
        let a = deref_mut(analyzer, "analyzer")?;
        a.inner.config.gesture_threshold = Some(checked("gesture threshold", threshold, threshold > 0.0 && threshold < 1.0)?);
        Ok(())
    })
}

/// Step length for action-distance bands and the within-reach distance, meters.
///
/// # Safety
/// `analyzer` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mw_analyzer_set_distance_bands(
    analyzer: *mut MwAnalyzer,
    step_length: f64,
    within_reach: f64,
) -> MwStatus {
    guard(|| {
        let a = deref_mut(analyzer, "analyzer")?;
        a.inner.config.bands.step_length = checked("step length", step_length, step_length > 0.0)?;
        a.inner.config.bands.within_reach = checked("within-reach distance", within_reach, within_reach > 0.0)?;
        Ok(())
    })
}

/// Seconds of "No motion" before a segment is flagged for review.
///
/// # Safety
/// `analyzer` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mw_analyzer_set_idle_threshold(analyzer: *mut MwAnalyzer, seconds: f64) -> MwStatus {
    guard(|| {
        let a = deref_mut(analyzer, "analyzer")?;
        a.inner.config.idle_threshold = checked("idle threshold", seconds, seconds > 0.0)?;
        Ok(())
    })
}

/// Replaces the posture and hand-action rules with the given rule file text.
///
/// # Safety
/// `analyzer` must be a live handle; `rules_text` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mw_analyzer_load_rules(analyzer: *mut MwAnalyzer, rules_text: *const c_char) -> MwStatus {
    guard(|| {
        let a = deref_mut(analyzer, "analyzer")?;
        a.inner.rules = rules::parse_rules(text(rules_text, "rules text")?)?;
        Ok(())
    })
}

/// Replaces the data card with the given card file text.
///
/// # Safety
/// `analyzer` must be a live handle; `card_text` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mw_analyzer_load_card(analyzer: *mut MwAnalyzer, card_text: *const c_char) -> MwStatus {
    guard(|| {
        let a = deref_mut(analyzer, "analyzer")?;
        a.inner.card = io::load_datacard(text(card_text, "card text")?)?;
        Ok(())
    })
}

/// Replaces the posture transition matrix with the given matrix file text.
///
/// # Safety
/// `analyzer` must be a live handle; `matrix_text` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mw_analyzer_load_matrix(analyzer: *mut MwAnalyzer, matrix_text: *const c_char) -> MwStatus {
    guard(|| {
        let a = deref_mut(analyzer, "analyzer")?;
        a.inner.matrix = TransitionMatrix::parse(text(matrix_text, "matrix text")?)?;
        Ok(())
    })
}

/// Analyzes a trace. `gestures_text` and `collisions_text` may be null.
/// On success `*out` owns a new report; on failure it is set to null.
///
/// # Safety
/// `analyzer` must be a live handle, the texts NUL-terminated strings and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mw_analyze(
    analyzer: *const MwAnalyzer,
    trace_text: *const c_char,
    gestures_text: *const c_char,
    collisions_text: *const c_char,
    out: *mut *mut MwReport,
) -> MwStatus {
    if out.is_null() {
        set_last_error("out is null");
        return MwStatus::NullArgument;
    }
    *out = ptr::null_mut();
    guard(|| {
        let a = deref(analyzer, "analyzer")?;
        let trace = io::parse_trace(text(trace_text, "trace text")?)?;
        let gestures = match optional_text(gestures_text, "gesture text")? {
            Some(t) => io::parse_gestures(t)?,
            None => Vec::new(),
        };
        let collisions = match optional_text(collisions_text, "collision text")? {
            Some(t) => io::parse_collisions(t)?,
            None => Vec::new(),
        };
        let report = a.inner.analyze(&trace, &gestures, &collisions)?;
        *out = Box::into_raw(Box::new(MwReport { inner: report }));
        Ok(())
    })
}

/// # Safety
/// `report` must come from [`mw_analyze`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mw_report_free(report: *mut MwReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of segments, or 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mw_report_segment_count(report: *const MwReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.segments.len())
}

/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mw_report_totals(report: *const MwReport, out: *mut MwTotals) -> MwStatus {
    guard(|| {
        let r = &deref(report, "report")?.inner;
        let out = deref_mut(out, "out")?;
        *out = MwTotals {
            standard_time: r.totals.standard_time,
            actual_time: r.totals.actual_time,
            efficiency: r.totals.efficiency,
            segment_count: r.segments.len(),
        };
        Ok(())
    })
}

unsafe fn segment_at<'a>(report: *const MwReport, index: usize) -> Outcome<&'a mostwork::timing::TimedSegment> {
    let r = &deref(report, "report")?.inner;
    r.segments.get(index).ok_or_else(|| {
        Failure(MwStatus::OutOfRange, format!("segment {index} out of range (report has {})", r.segments.len()))
    })
}

/// Timing of segment `index`, counted from 0.
///
/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mw_report_segment(report: *const MwReport, index: usize, out: *mut MwSegment) -> MwStatus {
    guard(|| {
        let s = segment_at(report, index)?;
        let out = deref_mut(out, "out")?;
        *out = MwSegment {
            start_frame: s.segment.start_frame,
            end_frame: s.segment.end_frame,
            standard_time: s.standard_time,
            actual_time: s.actual_time,
            efficiency: s.efficiency,
            action_distance: s.segment.action_distance,
            entry_count: s.segment.entries.len(),
            warning_count: s.segment.warnings.len(),
        };
        Ok(())
    })
}

/// MOST code of segment `index`, such as "BG" or "No motion". Free the
/// result with [`mw_string_free`].
///
/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mw_report_segment_code(report: *const MwReport, index: usize, out: *mut *mut c_char) -> MwStatus {
    if out.is_null() {
        set_last_error("out is null");
        return MwStatus::NullArgument;
    }
    *out = ptr::null_mut();
    guard(|| {
        *out = into_c_string(segment_at(report, index)?.segment.code.clone());
        Ok(())
    })
}

/// The report as a table, CSV or JSON. Free the result with [`mw_string_free`].
///
/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mw_report_render(report: *const MwReport, format: MwFormat, out: *mut *mut c_char) -> MwStatus {
    if out.is_null() {
        set_last_error("out is null");
        return MwStatus::NullArgument;
    }
    *out = ptr::null_mut();
    guard(|| {
        let r = &deref(report, "report")?.inner;
        let format = match format {
            MwFormat::Table => ReportFormat::Table,
            MwFormat::Csv => ReportFormat::Csv,
            MwFormat::Json => ReportFormat::Json,
        };
        *out = into_c_string(render(r, format)?);
        Ok(())
    })
}

/// Standard time in seconds for `len` priced indices.
///
/// # Safety
/// `indices` must point to `len` readable values (or be null when `len`
/// is 0) and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mw_standard_time(indices: *const u32, len: usize, out: *mut f64) -> MwStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        let indices = if len == 0 {
            &[][..]
        } else if indices.is_null() {
            return Err(null("indices"));
        } else {
            std::slice::from_raw_parts(indices, len)
        };
        *out = index_time(indices.iter().map(|&i| u64::from(i)).sum());
        Ok(())
    })
}

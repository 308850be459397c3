//! Standard time from card indices, actual time from frame counts, and the
//! report that puts them side by side.

use serde::{Deserialize, Serialize};

use crate::datacard::PricedEntry;
use crate::error::{Error, Result};
use crate::segmentation::{Segment, ToolUseInterval};

/// One time measurement unit, 1/100000 h, in seconds.
pub const TMU: f64 = 0.036;
/// Coarsest frame interval that still resolves a single index step (10 TMU).
pub const MOST_RESOLUTION: f64 = 0.36;
pub const FASTER_THAN_STANDARD: &str = "faster than standard";

/// Σ 10 × index × TMU. Summed as integer milliseconds scaled once so every
/// result is the nearest double to an exact multiple of 0.36 s.
pub fn standard_time(entries: &[PricedEntry]) -> f64 {
    let indices: u64 = entries.iter().map(|e| u64::from(e.index)).sum();
    index_time(indices)
}

/// Standard time of a summed index.
pub fn index_time(index: u64) -> f64 {
    (index * 360) as f64 / 1000.0
}

pub fn actual_time(n_s: u64, n_e: u64, frame_interval: f64) -> Result<f64> {
    if n_e <= n_s {
        return Err(Error::Invariant(format!("segment end frame {n_e} is not after start frame {n_s}")));
    }
    if !(frame_interval > 0.0) {
        return Err(Error::Invariant(format!("frame interval {frame_interval} is not positive")));
    }
    Ok((n_e - n_s) as f64 * frame_interval)
}

/// Standard over actual. 1.0 means the work ran exactly at standard pace.
pub fn efficiency(standard: f64, actual: f64) -> f64 {
    assert!(actual > 0.0, "actual time must be positive, got {actual}");
    standard / actual
}

pub fn percent(ratio: f64) -> String {
    format!("{:.1}%", ratio * 100.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedSegment {
    #[serde(flatten)]
    pub segment: Segment,
    pub standard_time: f64,
    pub actual_time: f64,
    pub efficiency: f64,
}

impl TimedSegment {
    pub fn new(segment: Segment, frame_interval: f64) -> Result<Self> {
        let standard_time = standard_time(&segment.entries);
        let actual_time = actual_time(segment.start_frame, segment.end_frame, frame_interval)?;
        let efficiency = efficiency(standard_time, actual_time);
        let mut segment = segment;
        if efficiency > 1.0 && !segment.warnings.iter().any(|w| w == FASTER_THAN_STANDARD) {
            segment.warnings.push(FASTER_THAN_STANDARD.to_string());
        }
        Ok(Self { segment, standard_time, actual_time, efficiency })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub frame_count: usize,
    pub first_frame: u64,
    pub last_frame: u64,
    pub frame_interval: f64,
    pub markers: Vec<String>,
    pub degenerate_frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub standard_time: f64,
    pub actual_time: f64,
    pub efficiency: f64,
}

impl Totals {
    /// Column sums over the segments, in segment order.
    pub fn of(segments: &[TimedSegment]) -> Self {
        let index: u64 = segments
            .iter()
            .flat_map(|s| &s.segment.entries)
            .map(|e| u64::from(e.index))
            .sum();
        let standard_time = index_time(index);
        let actual_time: f64 = segments.iter().map(|s| s.actual_time).sum();
        let efficiency = if actual_time > 0.0 { standard_time / actual_time } else { 0.0 };
        Self { standard_time, actual_time, efficiency }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub metadata: TraceMetadata,
    pub segments: Vec<TimedSegment>,
    pub tool_use: Vec<ToolUseInterval>,
    pub totals: Totals,
    pub warnings: Vec<String>,
}

pub fn resolution_warning(frame_interval: f64) -> Option<String> {
    (frame_interval > MOST_RESOLUTION).then(|| {
        format!(
            "frame interval {frame_interval} s is coarser than the MOST time resolution of {MOST_RESOLUTION} s"
        )
    })
}

pub fn build_report(
    metadata: TraceMetadata,
    segments: Vec<TimedSegment>,
    tool_use: Vec<ToolUseInterval>,
    mut warnings: Vec<String>,
) -> Result<AnalysisReport> {
    warnings.extend(resolution_warning(metadata.frame_interval));
    let totals = Totals::of(&segments);
    let report = AnalysisReport { metadata, segments, tool_use, totals, warnings };
    report.check()?;
    Ok(report)
}

impl AnalysisReport {
    /// Tiling and totals. Violations are bugs in the pipeline, not bad input.
    pub fn check(&self) -> Result<()> {
        if let (Some(first), Some(last)) = (self.segments.first(), self.segments.last()) {
            if first.segment.start_frame != self.metadata.first_frame
                || last.segment.end_frame != self.metadata.last_frame
            {
                return Err(Error::Invariant("segments do not span the trace".into()));
            }
        }
        for w in self.segments.windows(2) {
            if w[0].segment.end_frame != w[1].segment.start_frame {
                return Err(Error::Invariant(format!(
                    "gap between segments at frames {} and {}",
                    w[0].segment.end_frame, w[1].segment.start_frame
                )));
            }
        }
        if Totals::of(&self.segments) != self.totals {
            return Err(Error::Invariant("report totals differ from the column sums".into()));
        }
        Ok(())
    }
}

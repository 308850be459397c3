//! The end-to-end pipeline: kinematics, posture classification, key-frame
//! segmentation, hand actions, pricing and the report.

use crate::datacard::DataCard;
use crate::error::{Error, Result};
use crate::events::{CollisionEvent, GestureSample};
use crate::kinematics::trace_kinematics;
use crate::rules::{classify_sequence, detect_hand_actions, RuleSet, DEFAULT_DWELL};
use crate::segmentation::{
    attach_hand_actions, flag_unrecognizable, price_action_distances, segment_motions,
    tool_use_intervals, DistanceBands, TransitionMatrix, DEFAULT_IDLE_THRESHOLD,
};
use crate::timing::{build_report, AnalysisReport, TimedSegment, TraceMetadata};
use crate::trace::MotionTrace;

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    /// Frames a posture must persist before a change is accepted.
    pub dwell: usize,
    /// Overrides the rule file's `Threshold` when set.
    pub gesture_threshold: Option<f64>,
    pub bands: DistanceBands,
    /// Seconds of "No motion" before a segment is flagged for review.
    pub idle_threshold: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            dwell: DEFAULT_DWELL,
            gesture_threshold: None,
            bands: DistanceBands::default(),
            idle_threshold: DEFAULT_IDLE_THRESHOLD,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dwell == 0 {
            return Err(Error::validation("dwell must be at least 1 frame"));
        }
        if let Some(t) = self.gesture_threshold {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::validation(format!("gesture threshold {t} must lie in (0, 1)")));
            }
        }
        let b = &self.bands;
        if !(b.step_length > 0.0 && b.step_length.is_finite()) {
            return Err(Error::validation(format!("step length {} must be positive", b.step_length)));
        }
        if !(b.within_reach > 0.0 && b.within_reach.is_finite()) {
            return Err(Error::validation(format!("within-reach threshold {} must be positive", b.within_reach)));
        }
        if !(self.idle_threshold > 0.0 && self.idle_threshold.is_finite()) {
            return Err(Error::validation(format!("idle threshold {} must be positive", self.idle_threshold)));
        }
        Ok(())
    }
}

/// The built-in rules, card and matrix by default.
#[derive(Debug, Clone, Default)]
pub struct Analyzer {
    pub config: AnalysisConfig,
    pub rules: RuleSet,
    pub card: DataCard,
    pub matrix: TransitionMatrix,
}

fn check_event_frames(trace: &MotionTrace, gestures: &[GestureSample], collisions: &[CollisionEvent]) -> Result<()> {
    let (lo, hi) = (trace.first_index(), trace.last_index());
    let outside = |f: u64| f < lo || f > hi;
    if let Some(g) = gestures.iter().find(|g| outside(g.frame)) {
        return Err(Error::validation(format!("gesture sample at frame {} is outside the trace [{lo}, {hi}]", g.frame)));
    }
    if let Some(c) = collisions.iter().find(|c| outside(c.frame)) {
        return Err(Error::validation(format!("collision event at frame {} is outside the trace [{lo}, {hi}]", c.frame)));
    }
    Ok(())
}

impl Analyzer {
    pub fn new(config: AnalysisConfig) -> Self {
        Self { config, ..Self::default() }
    }

    pub fn gesture_threshold(&self) -> f64 {
        self.config.gesture_threshold.unwrap_or(self.rules.gesture_threshold)
    }

    pub fn analyze(
        &self,
        trace: &MotionTrace,
        gestures: &[GestureSample],
        collisions: &[CollisionEvent],
    ) -> Result<AnalysisReport> {
        self.config.validate()?;
        check_event_frames(trace, gestures, collisions)?;
        let mut warnings = Vec::new();
        let missing = self.matrix.missing_postures(&self.rules.posture_labels());
        if !missing.is_empty() {
            warnings.push(format!(
                "postures missing from the transition matrix: {}; their transitions are unrecognized",
                missing.join(", ")
            ));
        }

        let kinematics = trace_kinematics(trace)?;
        if kinematics.degenerate_count() > 0 {
            warnings.push(format!(
                "{} degenerate frame(s) took the pose of their nearest valid neighbor",
                kinematics.degenerate_count()
            ));
        }
        let sequence = classify_sequence(&kinematics, &self.rules, self.config.dwell)?;
        let mut segments = segment_motions(&sequence, &self.matrix, &self.card);

        let actions = detect_hand_actions(gestures, collisions, &self.rules, self.gesture_threshold());
        attach_hand_actions(&mut segments, &actions, &self.card)?;
        price_action_distances(&mut segments, &kinematics, &self.card, &self.config.bands)?;
        flag_unrecognizable(&mut segments, trace.frame_interval(), self.config.idle_threshold);

        let (tool_use, tool_warnings) = tool_use_intervals(collisions, trace.last_index());
        warnings.extend(tool_warnings);

        let timed = segments
            .into_iter()
            .map(|s| TimedSegment::new(s, trace.frame_interval()))
            .collect::<Result<Vec<_>>>()?;
        let metadata = TraceMetadata {
            frame_count: trace.len(),
            first_frame: trace.first_index(),
            last_frame: trace.last_index(),
            frame_interval: trace.frame_interval(),
            markers: trace.marker_set.names(),
            degenerate_frames: kinematics.degenerate_count(),
        };
        build_report(metadata, timed, tool_use, warnings)
    }
}

/// Runs the default analyzer.
pub fn analyze(trace: &MotionTrace, gestures: &[GestureSample], collisions: &[CollisionEvent]) -> Result<AnalysisReport> {
    Analyzer::default().analyze(trace, gestures, collisions)
}

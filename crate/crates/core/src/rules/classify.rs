use super::{PostureRule, RuleSet};
use crate::error::{Error, Result};
use crate::kinematics::{FrameKinematics, TraceKinematics};

/// Frames a new posture must persist before the change is accepted.
pub const DEFAULT_DWELL: usize = 3;

/// First posture rule, by priority, whose clauses all hold.
pub fn classify_frame<'r>(kin: &FrameKinematics, rules: &'r RuleSet) -> Option<&'r PostureRule> {
    rules
        .postures
        .iter()
        .filter(|r| r.matches(kin))
        .min_by_key(|r| r.priority)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostureLabelSequence {
    pub frame_indices: Vec<u64>,
    /// Debounced label for every frame.
    pub labels: Vec<String>,
    /// Per-frame classification before debouncing; `None` is unknown.
    pub raw: Vec<Option<String>>,
}

impl PostureLabelSequence {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Debounces raw labels.
///
/// A run of one known label is accepted when it lasts at least `dwell`
/// frames (or spans the whole input) and takes effect from its first frame.
/// Every other frame holds the last accepted label; frames before the first
/// accepted run take that run's label.
pub fn debounce(raw: &[Option<String>], dwell: usize) -> Result<Vec<String>> {
    if dwell == 0 {
        return Err(Error::validation("dwell must be at least 1 frame"));
    }
    let mut out: Vec<Option<&str>> = Vec::with_capacity(raw.len());
    let mut accepted: Option<&str> = None;
    let mut start = 0;
    while start < raw.len() {
        let mut end = start + 1;
        while end < raw.len() && raw[end] == raw[start] {
            end += 1;
        }
        let run = end - start;
        if let Some(label) = raw[start].as_deref() {
            if run >= dwell || run == raw.len() {
                accepted = Some(label);
            }
        }
        out.extend(std::iter::repeat_n(accepted, run));
        start = end;
    }
    let first = out
        .iter()
        .flatten()
        .next()
        .copied()
        .ok_or(Error::NoRecognizablePosture)?;
    Ok(out.into_iter().map(|l| l.unwrap_or(first).to_string()).collect())
}

pub fn classify_sequence(
    kinematics: &TraceKinematics,
    rules: &RuleSet,
    dwell: usize,
) -> Result<PostureLabelSequence> {
    let raw: Vec<Option<String>> = kinematics
        .frames
        .iter()
        .map(|k| classify_frame(k, rules).map(|r| r.label.clone()))
        .collect();
    let labels = debounce(&raw, dwell)?;
    Ok(PostureLabelSequence { frame_indices: kinematics.frame_indices.clone(), labels, raw })
}

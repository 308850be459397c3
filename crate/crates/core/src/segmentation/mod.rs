//! Key-frame segmentation of a posture sequence into MOST element motions.

mod matrix;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::datacard::{DataCard, MostParameter, PricedEntry};
use crate::error::{Error, Result};
use crate::events::{CollisionEvent, CollisionKind, Hand, Phase};
use crate::kinematics::TraceKinematics;
use crate::rules::{HandAction, PostureLabelSequence};

pub use matrix::{default_matrix, label_transition, Motion, TransitionMatrix, DEFAULT_MATRIX, NO_MOTION, UNRECOGNIZED};

/// Horizontal trunk travel at or below this (meters) is not an action distance.
pub const MIN_ACTION_DISTANCE: f64 = 0.05;
pub const DEFAULT_STEP_LENGTH: f64 = 0.75;
pub const DEFAULT_WITHIN_REACH: f64 = 0.60;
/// "No motion" segments longer than this (seconds) are flagged for review.
pub const DEFAULT_IDLE_THRESHOLD: f64 = 1.0;
pub const IDLE_WARNING: &str = "possible mental effort or idle; manual review needed";

/// A frame where the debounced posture changes. The first and last frames
/// of the trace are sentinels with no posture on their outer side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyFrame {
    pub frame: u64,
    /// Position of the frame within the trace.
    pub position: usize,
    pub posture_before: Option<String>,
    pub posture_after: Option<String>,
}

pub fn find_key_frames(seq: &PostureLabelSequence) -> Vec<KeyFrame> {
    let n = seq.labels.len();
    if n == 0 {
        return Vec::new();
    }
    let mut out = vec![KeyFrame {
        frame: seq.frame_indices[0],
        position: 0,
        posture_before: None,
        posture_after: Some(seq.labels[0].clone()),
    }];
    for i in 1..n {
        if seq.labels[i] != seq.labels[i - 1] {
            out.push(KeyFrame {
                frame: seq.frame_indices[i],
                position: i,
                posture_before: Some(seq.labels[i - 1].clone()),
                posture_after: Some(seq.labels[i].clone()),
            });
        }
    }
    if out.last().map(|k| k.position) != Some(n - 1) {
        out.push(KeyFrame {
            frame: seq.frame_indices[n - 1],
            position: n - 1,
            posture_before: Some(seq.labels[n - 1].clone()),
            posture_after: None,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentAction {
    pub frame: u64,
    pub group: MostParameter,
    pub label: String,
    pub object_id: String,
    pub hand: Option<Hand>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// n_s, frame index of the start key frame.
    pub start_frame: u64,
    /// n_e, frame index of the end key frame.
    pub end_frame: u64,
    pub from_posture: String,
    pub to_posture: String,
    pub motion: Motion,
    /// MOST sequence code such as `B`, `BG` or `ABP`; the motion name when no letter applies.
    pub code: String,
    pub entries: Vec<PricedEntry>,
    /// Horizontal trunk travel between the key frames, meters.
    pub action_distance: f64,
    pub hand_actions: Vec<SegmentAction>,
    pub warnings: Vec<String>,
}

impl Segment {
    fn refresh_code(&mut self) {
        let mut code = String::new();
        if self.entries.iter().any(|e| e.group == MostParameter::A) {
            code.push('A');
        }
        if self.motion.is_principal() {
            code.push('B');
        }
        for a in &self.hand_actions {
            let letter = a.group.letter();
            if !code.contains(letter) {
                code.push(letter);
            }
        }
        if code.is_empty() {
            code = self.motion.to_string();
        }
        self.code = code;
    }

    pub fn frame_span(&self) -> u64 {
        self.end_frame - self.start_frame
    }
}

/// Body-motion pricing: round-trip bends price half of "Bend and Arise" each way.
fn price_body_motion(motion: &Motion, card: &DataCard) -> std::result::Result<Option<PricedEntry>, String> {
    let Motion::Named(name) = motion else {
        return Ok(None);
    };
    let priced = match name.as_str() {
        "Bend" | "Arise" => card.entry(MostParameter::B, "Bend and Arise").map(PricedEntry::half),
        other => card.entry(MostParameter::B, other).map(PricedEntry::full),
    };
    priced
        .map(Some)
        .ok_or_else(|| format!("body motion `{name}` has no data card entry; priced at zero"))
}

/// Segments between consecutive key frames, labeled through the matrix and priced for body motion.
pub fn segment_motions(
    seq: &PostureLabelSequence,
    matrix: &TransitionMatrix,
    card: &DataCard,
) -> Vec<Segment> {
    let keys = find_key_frames(seq);
    keys.windows(2)
        .map(|w| {
            let from = &seq.labels[w[0].position];
            let to = &seq.labels[w[1].position];
            let motion = matrix.label_transition(from, to);
            let mut warnings = Vec::new();
            if motion == Motion::Unrecognized {
                warnings.push(format!(
                    "no motion defined for `{from}` -> `{to}`; manual review needed"
                ));
            }
            let entries = match price_body_motion(&motion, card) {
                Ok(e) => e.into_iter().collect(),
                Err(w) => {
                    warnings.push(w);
                    Vec::new()
                }
            };
            let mut seg = Segment {
                start_frame: w[0].frame,
                end_frame: w[1].frame,
                from_posture: from.clone(),
                to_posture: to.clone(),
                motion,
                code: String::new(),
                entries,
                action_distance: 0.0,
                hand_actions: Vec::new(),
                warnings,
            };
            seg.refresh_code();
            seg
        })
        .collect()
}

/// Horizontal (world X, Y) travel of the BTCS origin between two frames, meters.
pub fn action_distance(kinematics: &TraceKinematics, start_frame: u64, end_frame: u64) -> Result<f64> {
    let locate = |f: u64| {
        kinematics
            .position_of(f)
            .ok_or_else(|| Error::validation(format!("frame {f} is not in the trace")))
    };
    let a = kinematics.frames[locate(start_frame)?].btcs.origin;
    let b = kinematics.frames[locate(end_frame)?].btcs.origin;
    Ok((b.x - a.x).hypot(b.y - a.y))
}

/// Distance thresholds for the action-distance column of the card.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceBands {
    pub step_length: f64,
    pub within_reach: f64,
}

impl Default for DistanceBands {
    fn default() -> Self {
        Self { step_length: DEFAULT_STEP_LENGTH, within_reach: DEFAULT_WITHIN_REACH }
    }
}

impl DistanceBands {
    /// Card index for a distance, and whether the distance runs past the card.
    pub fn index_for(&self, d: f64) -> (u32, bool) {
        let step = self.step_length;
        if d <= MIN_ACTION_DISTANCE {
            (0, false)
        } else if d <= self.within_reach {
            (1, false)
        } else if d <= 2.0 * step {
            (3, false)
        } else if d <= 4.0 * step {
            (6, false)
        } else if d <= 7.0 * step {
            (10, false)
        } else if d <= 10.0 * step {
            (16, false)
        } else {
            (16, true)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionDistanceEntry {
    pub entry: PricedEntry,
    pub beyond_card: bool,
}

pub fn distance_to_a_entry(d: f64, card: &DataCard, bands: &DistanceBands) -> ActionDistanceEntry {
    assert!(d >= 0.0, "action distance must be nonnegative, got {d}");
    let (index, beyond_card) = bands.index_for(d);
    let entry = card
        .first_at(MostParameter::A, index)
        .map(PricedEntry::full)
        .unwrap_or_else(|| PricedEntry {
            group: MostParameter::A,
            label: "Action Distance".into(),
            card_index: index,
            index,
        });
    ActionDistanceEntry { entry, beyond_card }
}

/// Measures every segment's action distance and prices it where the
/// segment has an aim (a body motion or a hand action).
pub fn price_action_distances(
    segments: &mut [Segment],
    kinematics: &TraceKinematics,
    card: &DataCard,
    bands: &DistanceBands,
) -> Result<()> {
    for seg in segments.iter_mut() {
        let d = action_distance(kinematics, seg.start_frame, seg.end_frame)?;
        seg.action_distance = d;
        let aimed = seg.motion.is_principal() || !seg.hand_actions.is_empty();
        if d > MIN_ACTION_DISTANCE && aimed {
            let a = distance_to_a_entry(d, card, bands);
            if a.beyond_card {
                seg.warnings.push(format!("action distance {d:.2} m exceeds the card; priced as the last band"));
            }
            seg.entries.insert(0, a.entry);
        } else if d > MIN_ACTION_DISTANCE {
            seg.warnings.push(format!("trunk moved {d:.2} m without an aim; counted as time loss"));
        }
        seg.refresh_code();
    }
    Ok(())
}

fn default_hand_entry(group: MostParameter) -> &'static str {
    match group {
        MostParameter::P => "Lay Aside",
        _ => "Grasp Light Object",
    }
}

/// The card row for a hand action, or a warning and an off-card entry
/// carrying the rule's label when the card has no matching row.
fn price_hand_action(action: &HandAction, card: &DataCard) -> (PricedEntry, Option<String>) {
    let found = match action.index_hint {
        Some(i) => card.first_at(action.group, i),
        None => card.entry(action.group, default_hand_entry(action.group)),
    };
    match found {
        Some(e) => (PricedEntry::full(e), None),
        None => {
            let index = action.index_hint.unwrap_or(1);
            let warning = match action.index_hint {
                Some(i) => format!("no {} row at index {i} on the data card; `{}` priced off the card", action.group, action.label),
                None => format!(
                    "no `{}` row on the data card; `{}` priced off the card at index 1",
                    default_hand_entry(action.group),
                    action.label
                ),
            };
            (PricedEntry { group: action.group, label: action.label.clone(), card_index: index, index }, Some(warning))
        }
    }
}

/// Attaches each hand action to the segment containing its frame
/// (`start ≤ frame < end`, the last segment also owning its end frame).
pub fn attach_hand_actions(segments: &mut [Segment], actions: &[HandAction], card: &DataCard) -> Result<()> {
    let n = segments.len();
    for action in actions {
        let seg = segments
            .iter_mut()
            .enumerate()
            .find(|(i, s)| {
                s.start_frame <= action.frame
                    && (action.frame < s.end_frame || (*i == n - 1 && action.frame == s.end_frame))
            })
            .map(|(_, s)| s)
            .ok_or_else(|| Error::validation(format!("hand action at frame {} is outside the trace", action.frame)))?;
        let (entry, warning) = price_hand_action(action, card);
        seg.entries.push(entry);
        seg.warnings.extend(warning);
        seg.hand_actions.push(SegmentAction {
            frame: action.frame,
            group: action.group,
            label: action.label.clone(),
            object_id: action.object_id.clone(),
            hand: action.hand,
        });
        seg.refresh_code();
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolUseInterval {
    pub start_frame: u64,
    pub end_frame: u64,
    pub object_ids: [String; 2],
}

/// Pairs type-II begin/end events. A contact still open at `last_frame` is
/// closed there with a warning.
fn close_interval(ids: [String; 2], start: u64, end: u64, out: &mut Vec<ToolUseInterval>, warnings: &mut Vec<String>) {
    if start < end {
        out.push(ToolUseInterval { start_frame: start, end_frame: end, object_ids: ids });
    } else {
        warnings.push(format!("tool use of {}/{} at frame {start} has no duration; dropped", ids[0], ids[1]));
    }
}

pub fn tool_use_intervals(collisions: &[CollisionEvent], last_frame: u64) -> (Vec<ToolUseInterval>, Vec<String>) {
    let mut open: HashMap<[String; 2], u64> = HashMap::new();
    let mut out = Vec::new();
    let mut warnings = Vec::new();
    for e in collisions.iter().filter(|e| e.kind == CollisionKind::ObjectObject) {
        let ids = [e.object_ids[0].clone(), e.object_ids[1].clone()];
        match e.phase {
            Phase::Begin => {
                open.insert(ids, e.frame);
            }
            Phase::End => {
                if let Some(start) = open.remove(&ids) {
                    close_interval(ids, start, e.frame, &mut out, &mut warnings);
                }
            }
        }
    }
    let mut dangling: Vec<_> = open.into_iter().collect();
    dangling.sort_by(|a, b| (a.1, &a.0).cmp(&(b.1, &b.0)));
    for (ids, start) in dangling {
        warnings.push(format!(
            "tool use of {}/{} begun at frame {start} never ends; closed at frame {last_frame}",
            ids[0], ids[1]
        ));
        close_interval(ids, start, last_frame, &mut out, &mut warnings);
    }
    out.sort_by(|a, b| (a.start_frame, a.end_frame, &a.object_ids).cmp(&(b.start_frame, b.end_frame, &b.object_ids)));
    (out, warnings)
}

/// Flags long "No motion" segments, which may hide mental effort or idling.
pub fn flag_unrecognizable(segments: &mut [Segment], frame_interval: f64, threshold_s: f64) {
    for seg in segments.iter_mut() {
        let duration = seg.frame_span() as f64 * frame_interval;
        if seg.code == NO_MOTION && duration > threshold_s && !seg.warnings.iter().any(|w| w == IDLE_WARNING) {
            seg.warnings.push(IDLE_WARNING.to_string());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datacard::{default_card, CardEntry};
    use crate::kinematics::{AxisAngles, Btcs, FrameKinematics, LimbKinematics};
    use crate::trace::Vec3;
    use nalgebra::Matrix3;

    fn seq(labels: &[&str]) -> PostureLabelSequence {
        PostureLabelSequence {
            frame_indices: (0..labels.len() as u64).collect(),
            labels: labels.iter().map(|s| s.to_string()).collect(),
            raw: labels.iter().map(|s| Some(s.to_string())).collect(),
        }
    }

    fn kinematics(origins: &[Vec3]) -> TraceKinematics {
        let frames = origins
            .iter()
            .map(|&origin| FrameKinematics {
                btcs: Btcs { origin, axes: Matrix3::identity() },
                trunk_displacement: Vec3::zeros(),
                trunk_axis_angles: AxisAngles::default(),
                trunk_inclination: 0.0,
                left: LimbKinematics::default(),
                right: LimbKinematics::default(),
            })
            .collect();
        TraceKinematics {
            frames,
            degenerate: vec![false; origins.len()],
            frame_indices: (0..origins.len() as u64).collect(),
            frame_interval: 0.04,
        }
    }

    #[test]
    fn key_frames_of_a_single_change() {
        let keys = find_key_frames(&seq(&["S", "S", "S", "Si", "Si"]));
        let frames: Vec<_> = keys.iter().map(|k| k.frame).collect();
        assert_eq!(frames, vec![0, 3, 4]);
        assert_eq!(keys[1].posture_before.as_deref(), Some("S"));
        assert_eq!(keys[1].posture_after.as_deref(), Some("Si"));
    }

    #[test]
    fn key_frames_of_constant_and_round_trip_sequences() {
        let keys = find_key_frames(&seq(&["S"; 6]));
        assert_eq!(keys.iter().map(|k| k.frame).collect::<Vec<_>>(), vec![0, 5]);
        let keys = find_key_frames(&seq(&["S", "S", "Si", "Si", "S", "S"]));
        assert_eq!(keys.iter().map(|k| k.frame).collect::<Vec<_>>(), vec![0, 2, 4, 5]);
        // change on the last frame doubles as the end sentinel
        let keys = find_key_frames(&seq(&["S", "S", "Si"]));
        assert_eq!(keys.iter().map(|k| k.frame).collect::<Vec<_>>(), vec![0, 2]);
    }

    #[test]
    fn segments_tile_and_label() {
        let card = default_card();
        let segs = segment_motions(
            &seq(&["standing", "standing", "sitting", "sitting", "standing", "standing"]),
            &default_matrix(),
            &card,
        );
        let labels: Vec<_> = segs.iter().map(|s| s.code.as_str()).collect();
        assert_eq!(labels, vec!["B", "B", "No motion"]);
        let motions: Vec<_> = segs.iter().map(|s| s.motion.to_string()).collect();
        assert_eq!(motions, vec!["Sit", "Stand", "No motion"]);
        assert_eq!(segs[0].entries, vec![PricedEntry::full(card.entry(MostParameter::B, "Sit").unwrap())]);
        for w in segs.windows(2) {
            assert_eq!(w[0].end_frame, w[1].start_frame);
        }
        assert_eq!(segs.iter().map(|s| s.frame_span()).sum::<u64>(), 5);
    }

    #[test]
    fn bend_and_arise_price_half_each() {
        let card = default_card();
        let segs = segment_motions(&seq(&["standing", "bending", "standing"]), &default_matrix(), &card);
        assert_eq!(segs[0].entries[0].index, 3);
        assert_eq!(segs[0].entries[0].card_index, 6);
        assert_eq!(segs[1].entries[0].index, 3);
        assert_eq!(segs[0].entries[0].to_string(), "B6/2 Bend and Arise");
    }

    #[test]
    fn unrecognized_transition_warns() {
        let segs = segment_motions(&seq(&["sitting", "half-bending", "half-bending"]), &default_matrix(), &default_card());
        assert_eq!(segs[0].motion, Motion::Unrecognized);
        assert!(segs[0].entries.is_empty());
        assert_eq!(segs[0].warnings.len(), 1);
    }

    #[test]
    fn action_distance_is_horizontal() {
        let k = kinematics(&[Vec3::new(0.0, 0.0, 1.4), Vec3::new(3.0, 0.0, 1.4), Vec3::new(3.0, 0.0, 0.2), Vec3::new(0.3, 0.4, 7.0)]);
        assert_eq!(action_distance(&k, 0, 1).unwrap(), 3.0);
        assert_eq!(action_distance(&k, 1, 2).unwrap(), 0.0);
        assert!((action_distance(&k, 0, 3).unwrap() - 0.5).abs() < 1e-15);
        assert!(action_distance(&k, 0, 9).is_err());
    }

    #[test]
    fn distance_bands() {
        let card = default_card();
        let b = DistanceBands::default();
        let e = |d| distance_to_a_entry(d, &card, &b);
        assert_eq!(e(0.04).entry.label, "≤ 2 in. (5 cm.)");
        assert_eq!(e(0.0).entry.index, 0);
        assert_eq!(e(0.3).entry.label, "Within Reach");
        assert_eq!(e(1.2).entry.index, 3);
        assert_eq!(e(3.0).entry.label, "3 - 4 Steps");
        assert_eq!(e(5.0).entry.index, 10);
        assert_eq!(e(7.5).entry.index, 16);
        assert!(!e(7.5).beyond_card);
        assert!(e(9.0).beyond_card);
        assert_eq!(e(9.0).entry.index, 16);
    }

    #[test]
    #[should_panic]
    fn negative_distance_is_a_bug() {
        distance_to_a_entry(-1.0, &default_card(), &DistanceBands::default());
    }

    #[test]
    fn hand_actions_extend_codes() {
        let card = default_card();
        let mut segs = segment_motions(
            &seq(&["standing", "standing", "bending", "bending", "standing", "standing"]),
            &default_matrix(),
            &card,
        );
        let grasp = HandAction {
            frame: 3,
            group: MostParameter::G,
            label: "Grasp object".into(),
            object_id: "box".into(),
            hand: Some(Hand::Right),
            index_hint: Some(1),
        };
        let release = HandAction { frame: 5, group: MostParameter::P, label: "Release object".into(), ..grasp.clone() };
        let before: Vec<_> = segs.iter().map(|s| (s.start_frame, s.end_frame)).collect();
        attach_hand_actions(&mut segs, &[grasp, release], &card).unwrap();
        let after: Vec<_> = segs.iter().map(|s| (s.start_frame, s.end_frame)).collect();
        assert_eq!(before, after);
        let codes: Vec<_> = segs.iter().map(|s| s.code.as_str()).collect();
        assert_eq!(codes, vec!["B", "BG", "P"]);
        assert_eq!(segs[1].entries[1], PricedEntry::full(&CardEntry::new(MostParameter::G, 1, "Grasp Light Object")));
        assert_eq!(segs[2].entries[0].label, "Lay Aside");
    }

    #[test]
    fn action_distance_priced_only_with_an_aim() {
        let card = default_card();
        let labels = ["standing", "standing", "bending", "bending"];
        let k = kinematics(&[
            Vec3::new(0.0, 0.0, 1.4),
            Vec3::new(1.0, 0.0, 1.4),
            Vec3::new(2.0, 0.0, 1.0),
            Vec3::new(2.0, 2.0, 1.0),
        ]);
        let mut segs = segment_motions(&seq(&labels), &default_matrix(), &card);
        price_action_distances(&mut segs, &k, &card, &DistanceBands::default()).unwrap();
        assert_eq!(segs[0].code, "AB");
        assert_eq!(segs[0].entries[0].label, "3 - 4 Steps");
        assert_eq!(segs[1].code, "No motion");
        assert!(segs[1].entries.is_empty());
        assert!(segs[1].warnings[0].contains("without an aim"));
    }

    #[test]
    fn tool_use_pairing() {
        let evs = vec![
            CollisionEvent::object_object(40, Phase::Begin, "wrench-1", "bolt-3"),
            CollisionEvent::object_object(90, Phase::End, "wrench-1", "bolt-3"),
        ];
        let (iv, w) = tool_use_intervals(&evs, 120);
        assert_eq!(iv, vec![ToolUseInterval { start_frame: 40, end_frame: 90, object_ids: ["wrench-1".into(), "bolt-3".into()] }]);
        assert!(w.is_empty());

        assert!(tool_use_intervals(&[], 10).0.is_empty());

        let (iv, w) = tool_use_intervals(&evs[..1], 70);
        assert_eq!((iv[0].start_frame, iv[0].end_frame), (40, 70));
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn idle_flagging() {
        let card = default_card();
        let mut labels = vec!["standing"; 5];
        labels.extend(vec!["sitting"; 50]);
        let mut segs = segment_motions(&seq(&labels), &default_matrix(), &card);
        flag_unrecognizable(&mut segs, 0.04, DEFAULT_IDLE_THRESHOLD);
        assert!(segs[0].warnings.is_empty());
        assert_eq!(segs[1].warnings, vec![IDLE_WARNING.to_string()]);

        let mut short = segment_motions(&seq(&["standing"; 6]), &default_matrix(), &card);
        flag_unrecognizable(&mut short, 0.04, DEFAULT_IDLE_THRESHOLD);
        assert!(short[0].warnings.is_empty());

        let mut none: Vec<Segment> = Vec::new();
        flag_unrecognizable(&mut none, 0.04, 1.0);
        assert!(none.is_empty());
    }
}

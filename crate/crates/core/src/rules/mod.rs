//! Posture and hand-action rules: the rule file language, per-frame posture
//! classification with debouncing, and gesture + collision hand actions.

mod classify;
mod dsl;
mod hands;

use std::fmt;

use crate::datacard::MostParameter;
use crate::events::Hand;
use crate::kinematics::{FrameKinematics, LimbSegment, Side};

pub use classify::{classify_frame, classify_sequence, debounce, PostureLabelSequence, DEFAULT_DWELL};
pub use dsl::{default_rules, parse_rules, write_rules, DEFAULT_RULES};
pub use hands::{detect_hand_actions, match_gesture, HandAction, GESTURE_WINDOW};

pub const DEFAULT_GESTURE_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    fn name(self) -> &'static str {
        match self {
            Axis::X => "X Axis",
            Axis::Y => "Y Axis",
            Axis::Z => "Z Axis",
        }
    }
}

/// A scalar posture parameter a clause can constrain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    TrunkInclination,
    TrunkDisplacementZ,
    LegAngle(Side),
    ArmAngle(Side),
    LimbOrientation { side: Side, segment: LimbSegment, axis: Axis },
}

fn side_word(side: Side) -> &'static str {
    match side {
        Side::Left => "Left",
        Side::Right => "Right",
    }
}

impl Measure {
    /// Every measure the rule language can name.
    pub fn all() -> Vec<Measure> {
        let mut v = vec![Measure::TrunkInclination, Measure::TrunkDisplacementZ];
        for side in Side::BOTH {
            v.push(Measure::LegAngle(side));
            v.push(Measure::ArmAngle(side));
            for segment in LimbSegment::ALL {
                for axis in Axis::ALL {
                    v.push(Measure::LimbOrientation { side, segment, axis });
                }
            }
        }
        v
    }

    pub fn body_part(&self) -> String {
        match self {
            Measure::TrunkInclination | Measure::TrunkDisplacementZ => "Trunk".into(),
            Measure::LegAngle(s) => format!("{} Leg", side_word(*s)),
            Measure::ArmAngle(s) => format!("{} Arm", side_word(*s)),
            Measure::LimbOrientation { side, segment, .. } => {
                format!("{} {}", side_word(*side), segment.name())
            }
        }
    }

    pub fn parameter(&self) -> &'static str {
        match self {
            Measure::TrunkInclination => "Z Axis",
            Measure::TrunkDisplacementZ => "Displacement Z",
            Measure::LegAngle(_) | Measure::ArmAngle(_) => "Relative Angle",
            Measure::LimbOrientation { axis, .. } => axis.name(),
        }
    }

    /// Keyword phrase used in rule files, e.g. `Left Leg Relative Angle`.
    pub fn phrase(&self) -> String {
        format!("{} {}", self.body_part(), self.parameter())
    }

    pub fn value(&self, k: &FrameKinematics) -> f64 {
        match *self {
            Measure::TrunkInclination => k.trunk_inclination,
            Measure::TrunkDisplacementZ => k.trunk_displacement.z,
            Measure::LegAngle(s) => k.side(s).leg_angle,
            Measure::ArmAngle(s) => k.side(s).arm_angle,
            Measure::LimbOrientation { side, segment, axis } => {
                let a = k.side(side).orientation(segment);
                match axis {
                    Axis::X => a.alpha,
                    Axis::Y => a.beta,
                    Axis::Z => a.gamma,
                }
            }
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.phrase())
    }
}

/// Accepts values strictly inside `(mean − variance, mean + variance)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clause {
    pub measure: Measure,
    pub mean: f64,
    pub variance: f64,
}

impl Clause {
    pub fn accepts(&self, value: f64) -> bool {
        value > self.mean - self.variance && value < self.mean + self.variance
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.mean - self.variance, self.mean + self.variance)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostureRule {
    pub group: MostParameter,
    pub label: String,
    pub clauses: Vec<Clause>,
    /// File order among posture rules; lower wins.
    pub priority: usize,
}

impl PostureRule {
    pub fn matches(&self, k: &FrameKinematics) -> bool {
        self.clauses.iter().all(|c| c.accepts(c.measure.value(k)))
    }

    /// True when some kinematics could satisfy both rules (their clause boxes intersect).
    pub fn overlaps(&self, other: &PostureRule) -> bool {
        self.clauses.iter().all(|a| {
            other.clauses.iter().filter(|b| b.measure == a.measure).all(|b| {
                let (alo, ahi) = a.bounds();
                let (blo, bhi) = b.bounds();
                alo < bhi && blo < ahi
            })
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FingerState {
    /// Flexion strictly below the threshold.
    Open,
    /// Flexion at or above the threshold.
    Closed,
    Any,
}

impl FingerState {
    pub fn name(self) -> &'static str {
        match self {
            FingerState::Open => "open",
            FingerState::Closed => "closed",
            FingerState::Any => "any",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GesturePattern {
    pub name: String,
    /// Thumb, index, middle, ring, little.
    pub fingers: [FingerState; 5],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trigger {
    /// Fires when contact begins.
    Positive,
    /// Fires when contact ends.
    Negative,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObjectMatcher {
    Any,
    Exact(String),
    Prefix(String),
}

impl ObjectMatcher {
    pub fn parse(s: &str) -> Self {
        if s == "*" {
            ObjectMatcher::Any
        } else if let Some(p) = s.strip_suffix('*') {
            ObjectMatcher::Prefix(p.to_string())
        } else {
            ObjectMatcher::Exact(s.to_string())
        }
    }

    pub fn matches(&self, id: &str) -> bool {
        match self {
            ObjectMatcher::Any => true,
            ObjectMatcher::Exact(e) => e == id,
            ObjectMatcher::Prefix(p) => id.starts_with(p.as_str()),
        }
    }
}

impl fmt::Display for ObjectMatcher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectMatcher::Any => f.write_str("*"),
            ObjectMatcher::Exact(e) => f.write_str(e),
            ObjectMatcher::Prefix(p) => write!(f, "{p}*"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandActionRule {
    pub group: MostParameter,
    pub label: String,
    pub object: ObjectMatcher,
    /// Name of a [`GesturePattern`] in the same rule set.
    pub gesture: String,
    /// Restricts the rule to one hand; `None` accepts either.
    pub hand: Option<Hand>,
    pub trigger: Trigger,
    pub index_hint: Option<u32>,
    pub priority: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleSet {
    pub gesture_threshold: f64,
    pub gestures: Vec<GesturePattern>,
    pub postures: Vec<PostureRule>,
    pub hand_rules: Vec<HandActionRule>,
}

impl RuleSet {
    pub fn gesture(&self, name: &str) -> Option<&GesturePattern> {
        self.gestures.iter().find(|g| g.name == name)
    }

    pub fn posture(&self, label: &str) -> Option<&PostureRule> {
        self.postures.iter().find(|p| p.label == label)
    }

    pub fn posture_labels(&self) -> Vec<&str> {
        self.postures.iter().map(|p| p.label.as_str()).collect()
    }

    /// Pairs of posture rules whose clause boxes intersect, in priority order.
    pub fn overlapping_postures(&self) -> Vec<(&PostureRule, &PostureRule)> {
        let mut out = Vec::new();
        for (i, a) in self.postures.iter().enumerate() {
            for b in &self.postures[i + 1..] {
                if a.overlaps(b) {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

impl Default for RuleSet {
    fn default() -> Self {
        default_rules()
    }
}

//! Glove gesture samples and collision events.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hand {
    Left,
    Right,
}

impl Hand {
    pub fn name(self) -> &'static str {
        match self {
            Hand::Left => "left",
            Hand::Right => "right",
        }
    }
}

impl fmt::Display for Hand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Hand {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "left" => Ok(Hand::Left),
            "right" => Ok(Hand::Right),
            other => Err(format!("unknown hand `{other}` (expected left or right)")),
        }
    }
}

pub const FINGER_NAMES: [&str; 5] = ["thumb", "index", "middle", "ring", "little"];

/// One glove reading. Flexion is normalized to [0, 1], thumb first; 0 is fully open.
#[derive(Debug, Clone, PartialEq)]
pub struct GestureSample {
    pub frame: u64,
    pub hand: Hand,
    pub flexion: [f64; 5],
}

impl GestureSample {
    pub fn new(frame: u64, hand: Hand, flexion: [f64; 5]) -> Result<Self> {
        if let Some(i) = flexion.iter().position(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::validation(format!(
                "{} flexion {} outside [0, 1]",
                FINGER_NAMES[i], flexion[i]
            )));
        }
        Ok(Self { frame, hand, flexion })
    }

    /// Converts a raw 10-bit glove reading (0..=1023) to a normalized flexion.
    pub fn normalize_raw(raw: u16) -> f64 {
        f64::from(raw.min(1023)) / 1023.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CollisionKind {
    /// Human body part against an object.
    HumanObject,
    /// Object against object.
    ObjectObject,
}

impl CollisionKind {
    pub fn tag(self) -> &'static str {
        match self {
            CollisionKind::HumanObject => "I",
            CollisionKind::ObjectObject => "II",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Begin,
    End,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Begin => "begin",
            Phase::End => "end",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollisionEvent {
    pub frame: u64,
    pub kind: CollisionKind,
    pub object_ids: Vec<String>,
    pub phase: Phase,
    pub body_part: Option<String>,
}

impl CollisionEvent {
    pub fn human_object(frame: u64, phase: Phase, object_id: &str, body_part: &str) -> Self {
        Self {
            frame,
            kind: CollisionKind::HumanObject,
            object_ids: vec![object_id.to_string()],
            phase,
            body_part: Some(body_part.to_string()),
        }
    }

    pub fn object_object(frame: u64, phase: Phase, first: &str, second: &str) -> Self {
        Self {
            frame,
            kind: CollisionKind::ObjectObject,
            object_ids: vec![first.to_string(), second.to_string()],
            phase,
            body_part: None,
        }
    }

    pub fn check_shape(&self) -> Result<()> {
        match (self.kind, self.object_ids.len(), &self.body_part) {
            (CollisionKind::HumanObject, 1, Some(_)) => Ok(()),
            (CollisionKind::ObjectObject, 2, None) => Ok(()),
            (CollisionKind::HumanObject, _, _) => Err(Error::validation(
                "type-I collision needs exactly one object id and a body part",
            )),
            (CollisionKind::ObjectObject, _, _) => Err(Error::validation(
                "type-II collision needs exactly two object ids and no body part",
            )),
        }
    }

    /// Hand side implied by a `left-…`/`right-…` body part.
    pub fn hand(&self) -> Option<Hand> {
        let part = self.body_part.as_deref()?;
        if part.starts_with("left") {
            Some(Hand::Left)
        } else if part.starts_with("right") {
            Some(Hand::Right)
        } else {
            None
        }
    }

    fn key(&self) -> (CollisionKind, &[String], Option<&str>) {
        (self.kind, &self.object_ids, self.body_part.as_deref())
    }
}

/// Checks begin/end alternation per contact. Events must already be in frame order.
/// Returns the position of the first bad event. Contacts still open at the end are allowed.
pub(crate) fn check_pairing(events: &[CollisionEvent]) -> std::result::Result<(), (usize, String)> {
    let mut open: HashMap<_, bool> = HashMap::new();
    for (i, e) in events.iter().enumerate() {
        let state = open.entry(e.key()).or_insert(false);
        match (e.phase, *state) {
            (Phase::Begin, true) => {
                return Err((i, format!("begin for {} while already in contact", describe(e))));
            }
            (Phase::End, false) => {
                return Err((i, format!("end without begin for {}", describe(e))));
            }
            (Phase::Begin, false) => *state = true,
            (Phase::End, true) => *state = false,
        }
    }
    Ok(())
}

fn describe(e: &CollisionEvent) -> String {
    let mut s = format!("type-{} {}", e.kind.tag(), e.object_ids.join("/"));
    if let Some(p) = &e.body_part {
        s.push_str(&format!(" ({p})"));
    }
    s
}

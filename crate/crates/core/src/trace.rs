//! Marker layout and validated motion traces.

use std::fmt;

use nalgebra::{Rotation3, Vector3};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

pub const MARKER_COUNT: usize = 13;

/// The thirteen tracked joints, in file column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Marker {
    LeftShoulder,
    RightShoulder,
    LeftElbow,
    RightElbow,
    LeftWrist,
    RightWrist,
    Pelvis,
    LeftHip,
    RightHip,
    LeftKnee,
    RightKnee,
    LeftAnkle,
    RightAnkle,
}

impl Marker {
    pub const ALL: [Marker; MARKER_COUNT] = [
        Marker::LeftShoulder,
        Marker::RightShoulder,
        Marker::LeftElbow,
        Marker::RightElbow,
        Marker::LeftWrist,
        Marker::RightWrist,
        Marker::Pelvis,
        Marker::LeftHip,
        Marker::RightHip,
        Marker::LeftKnee,
        Marker::RightKnee,
        Marker::LeftAnkle,
        Marker::RightAnkle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Marker::LeftShoulder => "left-shoulder",
            Marker::RightShoulder => "right-shoulder",
            Marker::LeftElbow => "left-elbow",
            Marker::RightElbow => "right-elbow",
            Marker::LeftWrist => "left-wrist",
            Marker::RightWrist => "right-wrist",
            Marker::Pelvis => "pelvis",
            Marker::LeftHip => "left-hip",
            Marker::RightHip => "right-hip",
            Marker::LeftKnee => "left-knee",
            Marker::RightKnee => "right-knee",
            Marker::LeftAnkle => "left-ankle",
            Marker::RightAnkle => "right-ankle",
        }
    }

    pub fn column(self) -> usize {
        Marker::ALL.iter().position(|&m| m == self).unwrap()
    }
}

impl fmt::Display for Marker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The fixed marker layout every trace uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MarkerSet;

impl MarkerSet {
    pub fn markers(&self) -> &'static [Marker; MARKER_COUNT] {
        &Marker::ALL
    }

    pub fn names(&self) -> Vec<String> {
        Marker::ALL.iter().map(|m| m.name().to_string()).collect()
    }

    /// Checks a named layout against the fixed one (count, uniqueness, order).
    pub fn check_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        if names.len() != MARKER_COUNT {
            return Err(Error::validation(format!(
                "expected {MARKER_COUNT} markers, found {}",
                names.len()
            )));
        }
        for (i, (name, marker)) in names.iter().zip(Marker::ALL).enumerate() {
            if names[..i].iter().any(|n| n.as_ref() == name.as_ref()) {
                return Err(Error::validation(format!("duplicate marker `{}`", name.as_ref())));
            }
            if name.as_ref() != marker.name() {
                return Err(Error::validation(format!(
                    "marker {} is `{}`, expected `{}`",
                    i + 1,
                    name.as_ref(),
                    marker.name()
                )));
            }
        }
        Ok(MarkerSet)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub index: u64,
    /// Seconds.
    pub timestamp: f64,
    /// World coordinates in meters, indexed by [`Marker::column`].
    pub positions: [Vec3; MARKER_COUNT],
}

impl Frame {
    pub fn position(&self, marker: Marker) -> Vec3 {
        self.positions[marker.column()]
    }

    pub fn is_finite(&self) -> bool {
        self.timestamp.is_finite() && self.positions.iter().all(|p| p.iter().all(|c| c.is_finite()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionTrace {
    pub marker_set: MarkerSet,
    frames: Vec<Frame>,
    frame_interval: f64,
}

/// Relative tolerance between the nominal frame interval and any timestamp step.
pub const INTERVAL_TOLERANCE: f64 = 0.10;

/// Validates frame ordering and spacing, returning the inferred interval.
/// On failure the position of the offending frame is returned with the message.
pub(crate) fn check_frames(frames: &[Frame]) -> std::result::Result<f64, (usize, String)> {
    if frames.len() < 2 {
        return Err((frames.len().saturating_sub(1), "fewer than 2 frames".into()));
    }
    for (i, f) in frames.iter().enumerate() {
        if !f.is_finite() {
            return Err((i, format!("frame {} has non-finite values", f.index)));
        }
        if i > 0 {
            let prev = &frames[i - 1];
            if f.index <= prev.index {
                return Err((i, format!("frame index {} does not increase after {}", f.index, prev.index)));
            }
            if f.timestamp < prev.timestamp {
                return Err((i, format!("timestamp {} goes backwards after {}", f.timestamp, prev.timestamp)));
            }
        }
    }
    let first = &frames[0];
    let last = &frames[frames.len() - 1];
    let interval = (last.timestamp - first.timestamp) / (last.index - first.index) as f64;
    if interval <= 0.0 {
        return Err((frames.len() - 1, "frame interval must be positive".into()));
    }
    for i in 1..frames.len() {
        let steps = (frames[i].index - frames[i - 1].index) as f64;
        let dt = frames[i].timestamp - frames[i - 1].timestamp;
        if (dt - steps * interval).abs() >= INTERVAL_TOLERANCE * steps * interval {
            return Err((
                i,
                format!("timestamp step {dt} s deviates from frame interval {interval} s by 10% or more"),
            ));
        }
    }
    Ok(interval)
}

impl MotionTrace {
    pub fn new(frames: Vec<Frame>) -> Result<Self> {
        let frame_interval = check_frames(&frames).map_err(|(_, msg)| Error::validation(msg))?;
        Ok(Self { marker_set: MarkerSet, frames, frame_interval })
    }

    pub(crate) fn from_checked(frames: Vec<Frame>, frame_interval: f64) -> Self {
        Self { marker_set: MarkerSet, frames, frame_interval }
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame_interval(&self) -> f64 {
        self.frame_interval
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn first_index(&self) -> u64 {
        self.frames[0].index
    }

    pub fn last_index(&self) -> u64 {
        self.frames[self.frames.len() - 1].index
    }

    /// Rotates every marker by `yaw` radians about world vertical, then translates.
    pub fn rigidly_moved(&self, yaw: f64, offset: Vec3) -> MotionTrace {
        let rot = Rotation3::from_axis_angle(&Vec3::z_axis(), yaw);
        let frames = self
            .frames
            .iter()
            .map(|f| Frame {
                index: f.index,
                timestamp: f.timestamp,
                positions: f.positions.map(|p| rot * p + offset),
            })
            .collect();
        MotionTrace { marker_set: self.marker_set, frames, frame_interval: self.frame_interval }
    }
}

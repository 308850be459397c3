//! Body-based trunk coordinate system (BTCS) and the static posture
//! parameters derived from it.
//!
//! BTCS axes, in world coordinates:
//! * origin: midpoint of the shoulder markers
//! * X: right shoulder to left shoulder
//! * Z: origin toward the pelvis, orthogonalized against X
//! * Y: Z × X, pointing to the front of the trunk
//!
//! Limb vectors run proximal to distal, so a straight limb has a relative
//! angle near 0°.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::{Frame, Marker, MotionTrace, Vec3};

/// Frames whose raw trunk axis is closer than this (as |sin|) to the shoulder line are rejected.
pub const MIN_TRUNK_SINE: f64 = 0.1;
/// Marker pairs closer than this (meters) are treated as coincident.
pub const COINCIDENT_EPS: f64 = 1e-6;
/// A trace fails analysis when more than this fraction of frames is degenerate.
pub const MAX_DEGENERATE_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Btcs {
    pub origin: Vec3,
    /// Columns are the X, Y and Z axes.
    pub axes: Matrix3<f64>,
}

impl Btcs {
    pub fn x(&self) -> Vec3 {
        self.axes.column(0).into_owned()
    }

    pub fn y(&self) -> Vec3 {
        self.axes.column(1).into_owned()
    }

    pub fn z(&self) -> Vec3 {
        self.axes.column(2).into_owned()
    }

    /// Expresses a world point in this frame.
    pub fn to_local(&self, world: Vec3) -> Vec3 {
        self.axes.transpose() * (world - self.origin)
    }

    /// Largest deviation of `axesᵀ·axes` from identity.
    pub fn orthonormality_error(&self) -> f64 {
        (self.axes.transpose() * self.axes - Matrix3::identity()).abs().max()
    }

    /// Largest component of `X × Y − Z`.
    pub fn handedness_error(&self) -> f64 {
        (self.x().cross(&self.y()) - self.z()).abs().max()
    }
}

pub fn compute_btcs(frame: &Frame) -> Result<Btcs> {
    let left = frame.position(Marker::LeftShoulder);
    let right = frame.position(Marker::RightShoulder);
    let pelvis = frame.position(Marker::Pelvis);
    if !(left.iter().chain(right.iter()).chain(pelvis.iter())).all(|c| c.is_finite()) {
        return Err(Error::Degenerate(format!("frame {}: non-finite trunk markers", frame.index)));
    }
    let shoulder_line = left - right;
    let width = shoulder_line.norm();
    if width < COINCIDENT_EPS {
        return Err(Error::Degenerate(format!("frame {}: shoulders coincide", frame.index)));
    }
    let x = shoulder_line / width;
    let origin = (left + right) * 0.5;
    let raw_z = pelvis - origin;
    let length = raw_z.norm();
    if length < COINCIDENT_EPS || x.cross(&raw_z).norm() / length < MIN_TRUNK_SINE {
        return Err(Error::Degenerate(format!(
            "frame {}: pelvis lies on the shoulder line",
            frame.index
        )));
    }
    let z = (raw_z - x * x.dot(&raw_z)).normalize();
    let y = z.cross(&x);
    Ok(Btcs { origin, axes: Matrix3::from_columns(&[x, y, z]) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            other => Err(format!("unknown side `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LimbSegment {
    UpperArm,
    Forearm,
    UpperLeg,
    LowerLeg,
}

impl LimbSegment {
    pub const ALL: [LimbSegment; 4] =
        [LimbSegment::UpperArm, LimbSegment::Forearm, LimbSegment::UpperLeg, LimbSegment::LowerLeg];

    /// Proximal and distal markers.
    pub fn endpoints(self, side: Side) -> (Marker, Marker) {
        use Marker::*;
        match (self, side) {
            (LimbSegment::UpperArm, Side::Left) => (LeftShoulder, LeftElbow),
            (LimbSegment::UpperArm, Side::Right) => (RightShoulder, RightElbow),
            (LimbSegment::Forearm, Side::Left) => (LeftElbow, LeftWrist),
            (LimbSegment::Forearm, Side::Right) => (RightElbow, RightWrist),
            (LimbSegment::UpperLeg, Side::Left) => (LeftHip, LeftKnee),
            (LimbSegment::UpperLeg, Side::Right) => (RightHip, RightKnee),
            (LimbSegment::LowerLeg, Side::Left) => (LeftKnee, LeftAnkle),
            (LimbSegment::LowerLeg, Side::Right) => (RightKnee, RightAnkle),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LimbSegment::UpperArm => "Upper Arm",
            LimbSegment::Forearm => "Forearm",
            LimbSegment::UpperLeg => "Upper Leg",
            LimbSegment::LowerLeg => "Lower Leg",
        }
    }
}

/// Unit vector from the proximal to the distal marker of a limb segment, in world coordinates.
pub fn limb_vector(frame: &Frame, segment: LimbSegment, side: Side) -> Result<Vec3> {
    let (proximal, distal) = segment.endpoints(side);
    let v = frame.position(distal) - frame.position(proximal);
    let n = v.norm();
    if !(n >= COINCIDENT_EPS) {
        return Err(Error::Degenerate(format!(
            "frame {}: {proximal} and {distal} coincide",
            frame.index
        )));
    }
    Ok(v / n)
}

/// Angle between two nonzero vectors in degrees, in [0, 180].
pub fn angle_between(u: &Vec3, v: &Vec3) -> Result<f64> {
    let (nu, nv) = (u.norm(), v.norm());
    if !(nu > 0.0 && nv > 0.0) || !nu.is_finite() || !nv.is_finite() {
        return Err(Error::Degenerate("angle with a zero or non-finite vector".into()));
    }
    // atan2 form: exact 0 for parallel and exact 180 for antiparallel vectors.
    let sine = u.cross(v).norm();
    let cosine = u.dot(v);
    if sine == 0.0 {
        return Ok(if cosine >= 0.0 { 0.0 } else { 180.0 });
    }
    Ok(sine.atan2(cosine).to_degrees().clamp(0.0, 180.0))
}

/// Angles (degrees) between a direction and the X, Y and Z axes of a frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AxisAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl AxisAngles {
    fn of(v: &Vec3, btcs: &Btcs) -> Result<Self> {
        Ok(Self {
            alpha: angle_between(v, &btcs.x())?,
            beta: angle_between(v, &btcs.y())?,
            gamma: angle_between(v, &btcs.z())?,
        })
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    /// `cos²α + cos²β + cos²γ`; equals 1 for direction angles of a unit vector.
    pub fn cosine_square_sum(&self) -> f64 {
        self.as_array().iter().map(|a| a.to_radians().cos().powi(2)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LimbKinematics {
    pub upper_arm: AxisAngles,
    pub forearm: AxisAngles,
    pub upper_leg: AxisAngles,
    pub lower_leg: AxisAngles,
    /// θ_A, upper arm vs forearm.
    pub arm_angle: f64,
    /// θ_L, upper leg vs lower leg.
    pub leg_angle: f64,
}

impl LimbKinematics {
    pub fn orientation(&self, segment: LimbSegment) -> &AxisAngles {
        match segment {
            LimbSegment::UpperArm => &self.upper_arm,
            LimbSegment::Forearm => &self.forearm,
            LimbSegment::UpperLeg => &self.upper_leg,
            LimbSegment::LowerLeg => &self.lower_leg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameKinematics {
    pub btcs: Btcs,
    /// Current origin in the reference BTCS, meters.
    pub trunk_displacement: Vec3,
    /// Angles between current and reference X, Y, Z axes.
    pub trunk_axis_angles: AxisAngles,
    /// Current Z axis vs world down, degrees.
    pub trunk_inclination: f64,
    pub left: LimbKinematics,
    pub right: LimbKinematics,
}

impl FrameKinematics {
    pub fn side(&self, side: Side) -> &LimbKinematics {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }
}

pub const WORLD_DOWN: Vec3 = Vec3::new(0.0, 0.0, -1.0);

fn limb_kinematics(frame: &Frame, btcs: &Btcs, side: Side) -> Result<LimbKinematics> {
    let ua = limb_vector(frame, LimbSegment::UpperArm, side)?;
    let fa = limb_vector(frame, LimbSegment::Forearm, side)?;
    let ul = limb_vector(frame, LimbSegment::UpperLeg, side)?;
    let ll = limb_vector(frame, LimbSegment::LowerLeg, side)?;
    Ok(LimbKinematics {
        upper_arm: AxisAngles::of(&ua, btcs)?,
        forearm: AxisAngles::of(&fa, btcs)?,
        upper_leg: AxisAngles::of(&ul, btcs)?,
        lower_leg: AxisAngles::of(&ll, btcs)?,
        arm_angle: angle_between(&ua, &fa)?,
        leg_angle: angle_between(&ul, &ll)?,
    })
}

pub fn frame_kinematics(frame: &Frame, reference: &Btcs) -> Result<FrameKinematics> {
    let btcs = compute_btcs(frame)?;
    Ok(FrameKinematics {
        btcs,
        trunk_displacement: reference.to_local(btcs.origin),
        trunk_axis_angles: AxisAngles {
            alpha: angle_between(&btcs.x(), &reference.x())?,
            beta: angle_between(&btcs.y(), &reference.y())?,
            gamma: angle_between(&btcs.z(), &reference.z())?,
        },
        trunk_inclination: angle_between(&btcs.z(), &WORLD_DOWN)?,
        left: limb_kinematics(frame, &btcs, Side::Left)?,
        right: limb_kinematics(frame, &btcs, Side::Right)?,
    })
}

/// Kinematics for every frame of a trace. Degenerate frames carry the
/// previous valid frame's values (leading ones the first valid frame's).
#[derive(Debug, Clone)]
pub struct TraceKinematics {
    pub frames: Vec<FrameKinematics>,
    pub degenerate: Vec<bool>,
    pub frame_indices: Vec<u64>,
    pub frame_interval: f64,
}

impl TraceKinematics {
    pub fn degenerate_count(&self) -> usize {
        self.degenerate.iter().filter(|&&d| d).count()
    }

    /// Position of a frame index in the trace.
    pub fn position_of(&self, frame_index: u64) -> Option<usize> {
        self.frame_indices.binary_search(&frame_index).ok()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

pub fn trace_kinematics(trace: &MotionTrace) -> Result<TraceKinematics> {
    let frames = trace.frames();
    let reference = frames
        .iter()
        .find_map(|f| compute_btcs(f).ok())
        .ok_or_else(|| Error::validation("no frame has a valid trunk coordinate system"))?;

    let computed: Vec<Option<FrameKinematics>> =
        frames.iter().map(|f| frame_kinematics(f, &reference).ok()).collect();
    let degenerate: Vec<bool> = computed.iter().map(Option::is_none).collect();
    let bad = degenerate.iter().filter(|&&d| d).count();
    if bad as f64 > MAX_DEGENERATE_FRACTION * frames.len() as f64 {
        return Err(Error::validation(format!(
            "{bad} of {} frames have degenerate geometry (limit {:.0}%)",
            frames.len(),
            MAX_DEGENERATE_FRACTION * 100.0
        )));
    }
    let first_valid = computed
        .iter()
        .flatten()
        .next()
        .copied()
        .ok_or_else(|| Error::validation("no frame has valid kinematics"))?;
    let mut last = first_valid;
    let out = computed
        .into_iter()
        .map(|k| {
            if let Some(k) = k {
                last = k;
            }
            last
        })
        .collect();
    Ok(TraceKinematics {
        frames: out,
        degenerate,
        frame_indices: frames.iter().map(|f| f.index).collect(),
        frame_interval: trace.frame_interval(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::MARKER_COUNT;
    use nalgebra::Rotation3;

    fn upright() -> Frame {
        let mut p = [Vec3::zeros(); MARKER_COUNT];
        let mut set = |m: Marker, x: f64, y: f64, z: f64| p[m.column()] = Vec3::new(x, y, z);
        set(Marker::RightShoulder, 0.2, 0.0, 1.4);
        set(Marker::LeftShoulder, -0.2, 0.0, 1.4);
        set(Marker::RightElbow, 0.2, 0.0, 1.1);
        set(Marker::LeftElbow, -0.2, 0.0, 1.1);
        set(Marker::RightWrist, 0.2, 0.05, 0.85);
        set(Marker::LeftWrist, -0.2, 0.05, 0.85);
        set(Marker::Pelvis, 0.0, 0.0, 0.9);
        set(Marker::RightHip, 0.1, 0.0, 0.9);
        set(Marker::LeftHip, -0.1, 0.0, 0.9);
        set(Marker::RightKnee, 0.1, 0.0, 0.45);
        set(Marker::LeftKnee, -0.1, 0.0, 0.45);
        set(Marker::RightAnkle, 0.1, 0.0, 0.0);
        set(Marker::LeftAnkle, -0.1, 0.0, 0.0);
        Frame { index: 0, timestamp: 0.0, positions: p }
    }

    fn assert_vec(a: Vec3, b: Vec3) {
        assert!((a - b).norm() < 1e-12, "{a:?} != {b:?}");
    }

    #[test]
    fn btcs_of_symmetric_upright_pose() {
        let b = compute_btcs(&upright()).unwrap();
        assert_vec(b.origin, Vec3::new(0.0, 0.0, 1.4));
        assert_vec(b.x(), Vec3::new(-1.0, 0.0, 0.0));
        assert_vec(b.y(), Vec3::new(0.0, 1.0, 0.0));
        assert_vec(b.z(), Vec3::new(0.0, 0.0, -1.0));
        assert!(b.orthonormality_error() < 1e-9);
        assert!(b.handedness_error() < 1e-9);
    }

    #[test]
    fn btcs_rotates_with_the_body() {
        let rot = Rotation3::from_axis_angle(&Vec3::z_axis(), std::f64::consts::FRAC_PI_2);
        let mut f = upright();
        f.positions = f.positions.map(|p| rot * p);
        let b = compute_btcs(&f).unwrap();
        assert_vec(b.x(), rot * Vec3::new(-1.0, 0.0, 0.0));
        assert_vec(b.y(), rot * Vec3::new(0.0, 1.0, 0.0));
        assert_vec(b.z(), Vec3::new(0.0, 0.0, -1.0));
        assert!((b.origin.norm() - 1.4).abs() < 1e-12);
    }

    #[test]
    fn degenerate_trunks_are_rejected() {
        let mut f = upright();
        f.positions[Marker::LeftShoulder.column()] = f.position(Marker::RightShoulder);
        assert!(matches!(compute_btcs(&f), Err(Error::Degenerate(_))));
        let mut f = upright();
        f.positions[Marker::Pelvis.column()] = Vec3::new(0.5, 0.0, 1.4);
        assert!(matches!(compute_btcs(&f), Err(Error::Degenerate(_))));
    }

    #[test]
    fn limb_vectors() {
        let f = upright();
        assert_vec(limb_vector(&f, LimbSegment::UpperLeg, Side::Right).unwrap(), Vec3::new(0.0, 0.0, -1.0));
        let mut f2 = f.clone();
        f2.positions[Marker::RightAnkle.column()] = Vec3::new(0.1, 0.45, 0.45);
        assert_vec(limb_vector(&f2, LimbSegment::LowerLeg, Side::Right).unwrap(), Vec3::new(0.0, 1.0, 0.0));
        f2.positions[Marker::RightKnee.column()] = f2.position(Marker::RightHip);
        assert!(limb_vector(&f2, LimbSegment::UpperLeg, Side::Right).is_err());
    }

    #[test]
    fn angle_between_cases() {
        let x = Vec3::x();
        assert_eq!(angle_between(&x, &Vec3::y()).unwrap(), 90.0);
        assert_eq!(angle_between(&x, &x).unwrap(), 0.0);
        assert_eq!(angle_between(&x, &-x).unwrap(), 180.0);
        assert!(angle_between(&x, &Vec3::zeros()).is_err());
        let u = Vec3::new(0.3, -1.7, 2.2);
        assert_eq!(angle_between(&u, &u).unwrap(), 0.0);
        assert_eq!(angle_between(&u, &-u).unwrap(), 180.0);
    }

    #[test]
    fn reference_frame_against_itself() {
        let f = upright();
        let b = compute_btcs(&f).unwrap();
        let k = frame_kinematics(&f, &b).unwrap();
        assert_eq!(k.trunk_displacement, Vec3::zeros());
        assert_eq!(k.trunk_axis_angles, AxisAngles::default());
        assert_eq!(k.trunk_inclination, 0.0);
        assert_eq!(k.left.leg_angle, 0.0);
        assert_eq!(k.right.leg_angle, 0.0);
        for side in Side::BOTH {
            for seg in LimbSegment::ALL {
                assert!((k.side(side).orientation(seg).cosine_square_sum() - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn seated_leg_is_ninety_degrees() {
        let mut f = upright();
        // thigh forward, shank down
        for (hip, knee, ankle, x) in [
            (Marker::RightHip, Marker::RightKnee, Marker::RightAnkle, 0.1),
            (Marker::LeftHip, Marker::LeftKnee, Marker::LeftAnkle, -0.1),
        ] {
            f.positions[hip.column()] = Vec3::new(x, 0.0, 0.5);
            f.positions[knee.column()] = Vec3::new(x, 0.45, 0.5);
            f.positions[ankle.column()] = Vec3::new(x, 0.45, 0.05);
        }
        let b = compute_btcs(&f).unwrap();
        let k = frame_kinematics(&f, &b).unwrap();
        assert!((k.left.leg_angle - 90.0).abs() < 1e-9);
        assert!((k.right.leg_angle - 90.0).abs() < 1e-9);
    }

    #[test]
    fn displacement_is_in_reference_axes() {
        let f0 = upright();
        let reference = compute_btcs(&f0).unwrap();
        let mut f1 = f0.clone();
        f1.positions = f1.positions.map(|p| p + Vec3::new(1.0, 2.0, -0.5));
        let k = frame_kinematics(&f1, &reference).unwrap();
        // reference axes: X = -world x, Y = world y, Z = -world z
        assert_vec(k.trunk_displacement, Vec3::new(-1.0, 2.0, 0.5));
    }
}

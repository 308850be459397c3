//! Synthetic traces from task scripts.
//!
//! A script is a list of holds, posture transitions, walks and hand events.
//! Poses are the clause centers of the posture rules, turned into marker
//! positions by a stick figure: a trunk, two arms and two legs of fixed
//! length. The shoulder midpoint is the figure's anchor, so bending and
//! sitting never move it horizontally and only walks produce travel.

use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::events::{CollisionEvent, GestureSample, Hand, Phase};
use crate::kinematics::Side;
use crate::rules::{default_rules, FingerState, Measure, PostureRule, RuleSet};
use crate::segmentation::{Motion, TransitionMatrix};
use crate::text::{decode, lines, parse_f64, Line};
use crate::trace::{Frame, Marker, MotionTrace, Vec3, MARKER_COUNT};

pub const DEFAULT_FRAME_RATE: f64 = 25.0;
pub const DEFAULT_NOISE_STD: f64 = 0.003;
/// Height of the shoulder midpoint above the floor, meters.
pub const ANCHOR_HEIGHT: f64 = 1.4;
/// Elbow angle used when a posture does not constrain the arms, degrees.
pub const DEFAULT_ARM_ANGLE: f64 = 15.0;
const FLEXION_CLOSED: f64 = 0.9;
const FLEXION_OPEN: f64 = 0.1;
/// Positions are written with at most this many decimals (micrometers).
const POSITION_SCALE: f64 = 1e6;

/// Segment lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Skeleton {
    pub trunk: f64,
    pub shoulder_width: f64,
    pub hip_width: f64,
    pub upper_arm: f64,
    pub forearm: f64,
    pub upper_leg: f64,
    pub lower_leg: f64,
}

impl Default for Skeleton {
    fn default() -> Self {
        Self {
            trunk: 0.5,
            shoulder_width: 0.36,
            hip_width: 0.2,
            upper_arm: 0.3,
            forearm: 0.27,
            upper_leg: 0.45,
            lower_leg: 0.43,
        }
    }
}

const SKELETON_KEYS: [&str; 7] = ["trunk", "shoulder-width", "hip-width", "upper-arm", "forearm", "upper-leg", "lower-leg"];

impl Skeleton {
    fn field(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "trunk" => &mut self.trunk,
            "shoulder-width" => &mut self.shoulder_width,
            "hip-width" => &mut self.hip_width,
            "upper-arm" => &mut self.upper_arm,
            "forearm" => &mut self.forearm,
            "upper-leg" => &mut self.upper_leg,
            "lower-leg" => &mut self.lower_leg,
            _ => return None,
        })
    }

    fn values(&self) -> [f64; 7] {
        [self.trunk, self.shoulder_width, self.hip_width, self.upper_arm, self.forearm, self.upper_leg, self.lower_leg]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HandEventKind {
    Grasp,
    Release,
    Touch,
}

impl HandEventKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Grasp => "grasp",
            Self::Release => "release",
            Self::Touch => "touch",
        }
    }

    fn body_part(self) -> &'static str {
        match self {
            Self::Touch => "right-index-tip",
            _ => "right-palm",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Hold { posture: String, duration: f64 },
    Transition { posture: String, duration: f64 },
    Walk { dx: f64, dy: f64, duration: f64 },
    Hand { kind: HandEventKind, object_id: String, gesture: String },
}

impl Step {
    pub fn duration(&self) -> f64 {
        match self {
            Step::Hold { duration, .. } | Step::Transition { duration, .. } | Step::Walk { duration, .. } => *duration,
            Step::Hand { .. } => 0.0,
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Hold { posture, duration } => write!(f, "hold {posture} {duration}"),
            Step::Transition { posture, duration } => write!(f, "transition {posture} {duration}"),
            Step::Walk { dx, dy, duration } => write!(f, "walk {dx} {dy} {duration}"),
            Step::Hand { kind, object_id, gesture } => write!(f, "{} {object_id} {gesture}", kind.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TaskScript {
    pub skeleton: Skeleton,
    pub steps: Vec<Step>,
}

impl TaskScript {
    pub fn duration(&self) -> f64 {
        self.steps.iter().map(Step::duration).sum()
    }

    /// Checks durations, posture and gesture names against `rules`, that
    /// the script opens with a hold, that holds keep the current posture and
    /// that every release follows a grasp of the same object.
    pub fn validate(&self, rules: &RuleSet) -> Result<()> {
        if let Some((k, v)) = SKELETON_KEYS.iter().zip(self.skeleton.values()).find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::validation(format!("skeleton {k} must be positive, got {v}")));
        }
        let mut current: Option<&str> = None;
        let mut held: Vec<&str> = Vec::new();
        for (i, step) in self.steps.iter().enumerate() {
            let n = i + 1;
            let d = step.duration();
            if !matches!(step, Step::Hand { .. }) && !(d > 0.0 && d.is_finite()) {
                return Err(Error::validation(format!("step {n} ({step}): duration must be positive")));
            }
            match step {
                Step::Hold { posture, .. } | Step::Transition { posture, .. } => {
                    if rules.posture(posture).is_none() {
                        return Err(Error::validation(format!("step {n}: unknown posture `{posture}`")));
                    }
                    if let (Step::Hold { .. }, Some(cur)) = (step, current) {
                        if cur != posture {
                            return Err(Error::validation(format!(
                                "step {n}: hold {posture} while in {cur}; use a transition"
                            )));
                        }
                    }
                    if current.is_none() && matches!(step, Step::Transition { .. }) {
                        return Err(Error::validation("a script must start with a hold"));
                    }
                    current = Some(posture);
                }
                Step::Walk { dx, dy, .. } => {
                    if current.is_none() {
                        return Err(Error::validation("a script must start with a hold"));
                    }
                    if !(dx.is_finite() && dy.is_finite()) {
                        return Err(Error::validation(format!("step {n}: walk offsets must be finite")));
                    }
                }
                Step::Hand { kind, object_id, gesture } => {
                    if current.is_none() {
                        return Err(Error::validation("a script must start with a hold"));
                    }
                    if rules.gesture(gesture).is_none() {
                        return Err(Error::validation(format!("step {n}: unknown gesture `{gesture}`")));
                    }
                    match kind {
                        HandEventKind::Release => match held.iter().position(|o| o == object_id) {
                            Some(p) => {
                                held.remove(p);
                            }
                            None => {
                                return Err(Error::validation(format!("step {n}: release of `{object_id}` which is not held")));
                            }
                        },
                        _ => {
                            if held.contains(&object_id.as_str()) {
                                return Err(Error::validation(format!("step {n}: `{object_id}` is already in hand")));
                            }
                            held.push(object_id);
                        }
                    }
                }
            }
        }
        if current.is_none() {
            return Err(Error::validation("script has no posture steps"));
        }
        Ok(())
    }

    /// Motion sequence the script should produce: one motion per
    /// transition, then the closing "No motion" of the final hold.
    pub fn implied_motions(&self, matrix: &TransitionMatrix) -> Vec<Motion> {
        let mut out = Vec::new();
        let mut current: Option<&str> = None;
        for step in &self.steps {
            match step {
                Step::Hold { posture, .. } => current = Some(posture),
                Step::Transition { posture, .. } => {
                    if let Some(from) = current {
                        out.push(matrix.label_transition(from, posture));
                    }
                    current = Some(posture);
                }
                _ => {}
            }
        }
        out.push(Motion::NoMotion);
        out
    }
}

pub fn parse_script(bytes: &[u8]) -> Result<TaskScript> {
    let text = decode(bytes)?;
    let mut script = TaskScript::default();
    for line in lines(text) {
        let keyword = line.tokens[0].text;
        let step = match keyword {
            "skeleton" => {
                parse_skeleton(&line, &mut script.skeleton)?;
                continue;
            }
            "hold" | "transition" => {
                expect_fields(&line, 3, "posture and duration")?;
                let posture = line.tokens[1].text.to_string();
                let duration = positive(&line, 2, "duration")?;
                if keyword == "hold" {
                    Step::Hold { posture, duration }
                } else {
                    Step::Transition { posture, duration }
                }
            }
            "walk" => {
                expect_fields(&line, 4, "dx, dy and duration")?;
                Step::Walk {
                    dx: parse_f64(&line, 1, "dx")?,
                    dy: parse_f64(&line, 2, "dy")?,
                    duration: positive(&line, 3, "duration")?,
                }
            }
            "grasp" | "release" | "touch" => {
                if line.tokens.len() < 3 {
                    return Err(line.error(line.tokens.len(), "expected object id and gesture name"));
                }
                let kind = match keyword {
                    "grasp" => HandEventKind::Grasp,
                    "release" => HandEventKind::Release,
                    _ => HandEventKind::Touch,
                };
                Step::Hand { kind, object_id: line.tokens[1].text.to_string(), gesture: line.rest(2) }
            }
            other => {
                return Err(line.error(
                    0,
                    format!("unknown step `{other}` (expected skeleton, hold, transition, walk, grasp, release or touch)"),
                ))
            }
        };
        script.steps.push(step);
    }
    Ok(script)
}

fn expect_fields(line: &Line<'_>, n: usize, what: &str) -> Result<()> {
    if line.tokens.len() != n {
        return Err(line.error(line.tokens.len().min(n), format!("`{}` takes {what}", line.tokens[0].text)));
    }
    Ok(())
}

fn positive(line: &Line<'_>, index: usize, what: &str) -> Result<f64> {
    let v = parse_f64(line, index, what)?;
    if v <= 0.0 {
        return Err(line.error(index, format!("{what} must be positive")));
    }
    Ok(v)
}

fn parse_skeleton(line: &Line<'_>, skeleton: &mut Skeleton) -> Result<()> {
    if line.tokens.len() % 2 != 1 || line.tokens.len() < 3 {
        return Err(line.error(line.tokens.len(), "expected `skeleton` followed by name value pairs"));
    }
    for k in (1..line.tokens.len()).step_by(2) {
        let key = line.tokens[k].text;
        let value = positive(line, k + 1, key)?;
        *skeleton
            .field(key)
            .ok_or_else(|| line.error(k, format!("unknown segment `{key}` (expected one of {})", SKELETON_KEYS.join(", "))))? = value;
    }
    Ok(())
}

pub fn write_script(script: &TaskScript) -> String {
    let mut out = String::new();
    if script.skeleton != Skeleton::default() {
        out.push_str("skeleton");
        for (k, v) in SKELETON_KEYS.iter().zip(script.skeleton.values()) {
            let _ = write!(out, " {k} {v}");
        }
        out.push('\n');
    }
    for step in &script.steps {
        let _ = writeln!(out, "{step}");
    }
    out
}

/// Joint-angle targets for one posture, degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseTemplate {
    pub trunk_inclination: f64,
    /// θ_L per side, left first. The thigh pitches forward by the same
    /// angle so the shank stays vertical.
    pub leg_angle: [f64; 2],
    /// θ_A per side, left first.
    pub arm_angle: [f64; 2],
}

fn side_slot(side: Side) -> usize {
    match side {
        Side::Left => 0,
        Side::Right => 1,
    }
}

impl PoseTemplate {
    /// The pose at the center of every clause of `rule`.
    pub fn from_rule(rule: &PostureRule) -> Result<Self> {
        let mut pose = PoseTemplate { trunk_inclination: 0.0, leg_angle: [0.0; 2], arm_angle: [DEFAULT_ARM_ANGLE; 2] };
        for c in &rule.clauses {
            match c.measure {
                Measure::TrunkInclination => pose.trunk_inclination = c.mean,
                Measure::LegAngle(s) => pose.leg_angle[side_slot(s)] = c.mean,
                Measure::ArmAngle(s) => pose.arm_angle[side_slot(s)] = c.mean,
                other => {
                    return Err(Error::validation(format!(
                        "posture `{}` constrains {other}, which the generator cannot pose",
                        rule.label
                    )))
                }
            }
        }
        Ok(pose)
    }

    fn lerp(&self, to: &PoseTemplate, s: f64) -> PoseTemplate {
        let l = |a: f64, b: f64| a + (b - a) * s;
        PoseTemplate {
            trunk_inclination: l(self.trunk_inclination, to.trunk_inclination),
            leg_angle: [l(self.leg_angle[0], to.leg_angle[0]), l(self.leg_angle[1], to.leg_angle[1])],
            arm_angle: [l(self.arm_angle[0], to.arm_angle[0]), l(self.arm_angle[1], to.arm_angle[1])],
        }
    }

    /// Marker positions with the shoulder midpoint at `anchor`, facing +Y.
    pub fn markers(&self, skeleton: &Skeleton, anchor: Vec3) -> [Vec3; MARKER_COUNT] {
        let right = Vec3::new(1.0, 0.0, 0.0);
        let down = Vec3::new(0.0, 0.0, -1.0);
        let pitched = |deg: f64| {
            let r = deg.to_radians();
            Vec3::new(0.0, r.sin(), -r.cos())
        };
        let phi = self.trunk_inclination.to_radians();
        let up = Vec3::new(0.0, phi.sin(), phi.cos());
        let pelvis = anchor - up * skeleton.trunk;
        let mut p = [Vec3::zeros(); MARKER_COUNT];
        let mut set = |m: Marker, v: Vec3| p[m.column()] = v;
        set(Marker::Pelvis, pelvis);
        for (side, sign) in [(Side::Left, -1.0), (Side::Right, 1.0)] {
            let k = side_slot(side);
            let shoulder = anchor + right * (sign * skeleton.shoulder_width / 2.0);
            let elbow = shoulder + down * skeleton.upper_arm;
            let wrist = elbow + pitched(self.arm_angle[k]) * skeleton.forearm;
            let hip = pelvis + right * (sign * skeleton.hip_width / 2.0);
            let thigh = self.leg_angle[k];
            let knee = hip + pitched(thigh) * skeleton.upper_leg;
            let ankle = knee + pitched(thigh - self.leg_angle[k]) * skeleton.lower_leg;
            let [s, e, w, h, kn, a] = match side {
                Side::Left => [Marker::LeftShoulder, Marker::LeftElbow, Marker::LeftWrist, Marker::LeftHip, Marker::LeftKnee, Marker::LeftAnkle],
                Side::Right => [Marker::RightShoulder, Marker::RightElbow, Marker::RightWrist, Marker::RightHip, Marker::RightKnee, Marker::RightAnkle],
            };
            set(s, shoulder);
            set(e, elbow);
            set(w, wrist);
            set(h, hip);
            set(kn, knee);
            set(a, ankle);
        }
        p
    }
}

/// Cubic ease-in/ease-out on [0, 1].
pub fn ease(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub frame_rate: f64,
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { frame_rate: DEFAULT_FRAME_RATE, noise_std: DEFAULT_NOISE_STD, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub trace: MotionTrace,
    pub gestures: Vec<GestureSample>,
    pub collisions: Vec<CollisionEvent>,
}

/// A continuous piece of the timeline between two poses and two anchors.
struct Span {
    start: f64,
    end: f64,
    from: (PoseTemplate, Vec3),
    to: (PoseTemplate, Vec3),
}

fn round_position(v: f64) -> f64 {
    let r = (v * POSITION_SCALE).round() / POSITION_SCALE;
    if r == 0.0 { 0.0 } else { r }
}

/// Synthesizes a trace with the default rules' postures and gestures.
pub fn synthesize(script: &TaskScript, config: &SynthConfig) -> Result<SynthOutput> {
    synthesize_with(script, config, &default_rules())
}

pub fn synthesize_with(script: &TaskScript, config: &SynthConfig, rules: &RuleSet) -> Result<SynthOutput> {
    if !(config.frame_rate > 0.0 && config.frame_rate.is_finite()) {
        return Err(Error::validation(format!("frame rate {} must be positive", config.frame_rate)));
    }
    if !(config.noise_std >= 0.0 && config.noise_std.is_finite()) {
        return Err(Error::validation(format!("noise {} must be nonnegative", config.noise_std)));
    }
    script.validate(rules)?;
    let template = |name: &str| -> Result<PoseTemplate> {
        let rule = rules.posture(name).ok_or_else(|| Error::validation(format!("unknown posture `{name}`")))?;
        PoseTemplate::from_rule(rule)
    };

    let rate = config.frame_rate;
    let total = script.duration();
    let n_frames = (total * rate).round() as usize;
    if n_frames < 2 {
        return Err(Error::validation(format!("script lasts {total} s, fewer than 2 frames at {rate} Hz")));
    }
    let last_frame = (n_frames - 1) as u64;

    let mut spans = Vec::new();
    let mut gestures = Vec::new();
    let mut collisions = Vec::new();
    let mut open_parts: Vec<(String, &'static str)> = Vec::new();
    let mut pose: Option<PoseTemplate> = None;
    let mut anchor = Vec3::new(0.0, 0.0, ANCHOR_HEIGHT);
    let mut t = 0.0;
    for step in &script.steps {
        let start = t;
        t += step.duration();
        match step {
            Step::Hold { posture, .. } | Step::Transition { posture, .. } => {
                let target = template(posture)?;
                let from = pose.unwrap_or(target);
                spans.push(Span { start, end: t, from: (from, anchor), to: (target, anchor) });
                pose = Some(target);
            }
            Step::Walk { dx, dy, .. } => {
                let p = pose.expect("validated script opens with a hold");
                let to = anchor + Vec3::new(*dx, *dy, 0.0);
                spans.push(Span { start, end: t, from: (p, anchor), to: (p, to) });
                anchor = to;
            }
            Step::Hand { kind, object_id, gesture } => {
                let frame = ((start * rate).round() as u64).min(last_frame);
                let pattern = rules.gesture(gesture).expect("validated gesture");
                let flexion = pattern.fingers.map(|f| match f {
                    FingerState::Closed => FLEXION_CLOSED,
                    FingerState::Open | FingerState::Any => FLEXION_OPEN,
                });
                gestures.push(GestureSample::new(frame, Hand::Right, flexion)?);
                let (phase, part) = match kind {
                    HandEventKind::Release => {
                        let p = open_parts.iter().position(|(o, _)| o == object_id).expect("validated release");
                        (Phase::End, open_parts.remove(p).1)
                    }
                    other => {
                        open_parts.push((object_id.clone(), other.body_part()));
                        (Phase::Begin, other.body_part())
                    }
                };
                collisions.push(CollisionEvent::human_object(frame, phase, object_id, part));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise = (config.noise_std > 0.0)
        .then(|| Normal::new(0.0, config.noise_std).map_err(|e| Error::validation(e.to_string())))
        .transpose()?;
    let mut frames = Vec::with_capacity(n_frames);
    let mut k = 0;
    for i in 0..n_frames {
        let time = i as f64 / rate;
        while k + 1 < spans.len() && time >= spans[k].end {
            k += 1;
        }
        let span = &spans[k];
        let s = ease((time - span.start) / (span.end - span.start));
        let p = span.from.0.lerp(&span.to.0, s);
        let a = span.from.1 + (span.to.1 - span.from.1) * s;
        let mut positions = p.markers(&script.skeleton, a);
        for v in positions.iter_mut() {
            for c in v.iter_mut() {
                if let Some(n) = &noise {
                    *c += n.sample(&mut rng);
                }
                *c = round_position(*c);
            }
        }
        frames.push(Frame { index: i as u64, timestamp: time, positions });
    }
    gestures.sort_by_key(|g| g.frame);
    collisions.sort_by_key(|c| c.frame);
    let trace = MotionTrace::new(frames)?;
    Ok(SynthOutput { trace, gestures, collisions })
}

/// Posture pairs the generator moves between directly. Other pairs would
/// sweep through a third posture's range on the way.
pub const ADJACENT_POSTURES: [(&str, &str); 3] =
    [("standing", "sitting"), ("standing", "half-bending"), ("half-bending", "bending")];

fn neighbors(posture: &str) -> Vec<&'static str> {
    ADJACENT_POSTURES
        .iter()
        .filter_map(|&(a, b)| {
            if a == posture {
                Some(b)
            } else if b == posture {
                Some(a)
            } else {
                None
            }
        })
        .collect()
}

fn round_to(v: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (v * scale).round() / scale
}

/// A random valid script of exactly `length` steps over the default postures.
///
/// Holds last 0.5 to 1.5 s, transitions 0.6 to 1.2 s. A standing hold may be
/// followed by a walk of 0.3 to 3 m. The last step is always a hold.
pub fn random_script(seed: u64, length: usize) -> TaskScript {
    assert!(length >= 1, "a script needs at least one step");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let postures = ["standing", "sitting", "half-bending", "bending"];
    let mut current = postures[rng.random_range(0..postures.len())];
    let hold = |rng: &mut ChaCha8Rng, p: &str| Step::Hold { posture: p.to_string(), duration: round_to(rng.random_range(0.5..=1.5), 2) };
    let mut steps = vec![hold(&mut rng, current)];
    while steps.len() < length {
        let remaining = length - steps.len();
        let after_hold = matches!(steps.last(), Some(Step::Hold { .. }));
        if !after_hold || remaining == 1 {
            steps.push(hold(&mut rng, current));
        } else if current == "standing" && rng.random_bool(0.3) {
            let distance = rng.random_range(0.3..=3.0);
            let heading: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            steps.push(Step::Walk {
                dx: round_to(distance * heading.cos(), 3),
                dy: round_to(distance * heading.sin(), 3),
                duration: round_to(rng.random_range(1.0..=3.0), 2),
            });
        } else {
            let options = neighbors(current);
            current = options[rng.random_range(0..options.len())];
            steps.push(Step::Transition { posture: current.to_string(), duration: round_to(rng.random_range(0.6..=1.2), 2) });
        }
    }
    TaskScript { skeleton: Skeleton::default(), steps }
}

#![allow(dead_code)]

use std::path::PathBuf;

use mostwork::events::{CollisionEvent, GestureSample};
use mostwork::io;
use mostwork::trace::MotionTrace;

pub const FIXTURES: [&str; 2] = ["lifting", "walk-sit"];

pub fn fixture_path(name: &str, ext: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).join(format!("{name}.{ext}"))
}

/// A file under `fixtures/`, by relative path.
pub fn fixture_file(relative: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(relative)
}

pub fn read(path: &PathBuf) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn load_fixture(name: &str) -> (MotionTrace, Vec<GestureSample>, Vec<CollisionEvent>) {
    let trace = io::parse_trace(&read(&fixture_path(name, "trace"))).unwrap();
    let gestures = io::parse_gestures(&read(&fixture_path(name, "gestures"))).unwrap();
    let collisions = io::parse_collisions(&read(&fixture_path(name, "collisions"))).unwrap();
    (trace, gestures, collisions)
}

/// Seed the shipped fixtures were generated with.
pub fn fixture_seed(name: &str) -> u64 {
    match name {
        "lifting" => 7,
        "walk-sit" => 11,
        other => panic!("unknown fixture {other}"),
    }
}

/// Hand-written timeline of the lifting script: (trunk inclination at the
/// start, at the end, duration in seconds). Arms and legs stay straight.
pub const LIFTING_TIMELINE: [(f64, f64, f64); 9] = [
    (0.0, 0.0, 1.0),
    (0.0, 32.5, 1.0),
    (32.5, 32.5, 0.6),
    (32.5, 67.5, 1.0),
    (67.5, 67.5, 0.8),
    (67.5, 32.5, 1.0),
    (32.5, 32.5, 0.6),
    (32.5, 0.0, 1.0),
    (0.0, 0.0, 2.0),
];
/// Script times of the grasp and release events, seconds.
pub const LIFTING_GRASP_TIME: f64 = 2.6;
pub const LIFTING_RELEASE_TIME: f64 = 6.0;
pub const LIFTING_RATE: f64 = 25.0;

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    3.0 * t * t - 2.0 * t * t * t
}

pub fn lifting_inclination(t: f64) -> f64 {
    let mut start = 0.0;
    for &(a, b, d) in &LIFTING_TIMELINE {
        if t < start + d {
            return a + (b - a) * smoothstep((t - start) / d);
        }
        start += d;
    }
    LIFTING_TIMELINE[LIFTING_TIMELINE.len() - 1].1
}

/// Posture of a straight-legged pose from the trunk angle alone, with the
/// default rule bounds written out by hand.
fn lifting_label(phi: f64) -> Option<&'static str> {
    if phi > -15.0 && phi < 15.0 {
        Some("standing")
    } else if phi > 20.0 && phi < 45.0 {
        Some("half-bending")
    } else if phi > 45.0 && phi < 90.0 {
        Some("bending")
    } else {
        None
    }
}

/// Key frames of the noise-free lifting trace: frame 0, the first frame of
/// each new posture, and the last frame.
pub fn lifting_key_frames() -> Vec<u64> {
    let total: f64 = LIFTING_TIMELINE.iter().map(|s| s.2).sum();
    let n = (total * LIFTING_RATE).round() as u64;
    let mut keys = vec![0];
    let mut current = lifting_label(0.0).unwrap();
    for i in 1..n {
        if let Some(label) = lifting_label(lifting_inclination(i as f64 / LIFTING_RATE)) {
            if label != current {
                keys.push(i);
                current = label;
            }
        }
    }
    keys.push(n - 1);
    keys
}

/// 10 × index × 0.036 s for the lifting segments: B at half of index 6,
/// plus G1 and P1 where the hand acts.
pub const LIFTING_STANDARD_TIMES: [f64; 5] = [1.08, 1.44, 1.08, 1.44, 0.0];
pub const LIFTING_CODES: [&str; 5] = ["B", "BG", "B", "BP", "No motion"];

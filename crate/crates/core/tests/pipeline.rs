mod common;

use common::{fixture_file, load_fixture, read, LIFTING_CODES};
use mostwork::datacard::MostParameter;
use mostwork::events::{CollisionEvent, Phase};
use mostwork::io;
use mostwork::rules::parse_rules;
use mostwork::segmentation::{Motion, IDLE_WARNING};
use mostwork::synth::{self, parse_script, PoseTemplate, Skeleton, SynthConfig};
use mostwork::timing::FASTER_THAN_STANDARD;
use mostwork::trace::{Frame, Marker, MotionTrace, Vec3};
use mostwork::{analyze, Analyzer, Error};

fn codes(report: &mostwork::timing::AnalysisReport) -> Vec<String> {
    report.segments.iter().map(|s| s.segment.code.clone()).collect()
}

fn standing(seconds: f64) -> MotionTrace {
    let script = parse_script(format!("hold standing {seconds}\n").as_bytes()).unwrap();
    synth::synthesize(&script, &SynthConfig::default()).unwrap().trace
}

#[test]
fn trace_alone_still_prices_body_motion() {
    let (trace, _, _) = load_fixture("lifting");
    let report = analyze(&trace, &[], &[]).unwrap();
    assert_eq!(codes(&report), ["B", "B", "B", "B", "No motion"]);
    assert!(report.segments.iter().all(|s| s.segment.hand_actions.is_empty()));
    assert!(report.tool_use.is_empty());
}

#[test]
fn lifting_with_streams_adds_hand_actions() {
    let (trace, gestures, collisions) = load_fixture("lifting");
    let report = analyze(&trace, &gestures, &collisions).unwrap();
    assert_eq!(codes(&report), LIFTING_CODES);
    let grasp = &report.segments[1].segment;
    assert_eq!(grasp.hand_actions.len(), 1);
    assert_eq!(grasp.hand_actions[0].object_id, "box-1");
    assert_eq!(grasp.hand_actions[0].group, MostParameter::G);
}

#[test]
fn a_still_trace_is_one_idle_row() {
    let report = analyze(&standing(3.0), &[], &[]).unwrap();
    assert_eq!(report.segments.len(), 1);
    let row = &report.segments[0];
    assert_eq!(row.segment.motion, Motion::NoMotion);
    assert_eq!(row.standard_time, 0.0);
    assert_eq!(row.efficiency, 0.0);
    assert!(row.segment.warnings.iter().any(|w| w == IDLE_WARNING));
}

#[test]
fn short_idle_is_not_flagged() {
    let report = analyze(&standing(0.8), &[], &[]).unwrap();
    assert!(report.segments[0].segment.warnings.is_empty());
}

#[test]
fn too_many_degenerate_frames_is_an_error() {
    let trace = standing(2.0);
    let collapse = |every: usize| {
        let frames = trace
            .frames()
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let mut f = f.clone();
                if i % every == 1 {
                    f.positions[Marker::RightShoulder.column()] = f.position(Marker::LeftShoulder);
                }
                f
            })
            .collect();
        MotionTrace::new(frames).unwrap()
    };
    // 50 frames: every 25th is 2 frames (4%), every 10th is 5 frames (10%).
    let report = analyze(&collapse(25), &[], &[]).unwrap();
    assert_eq!(report.metadata.degenerate_frames, 2);
    assert!(report.warnings.iter().any(|w| w.contains("degenerate")));
    let err = analyze(&collapse(10), &[], &[]).unwrap_err();
    assert!(matches!(err, Error::Validation(_)), "{err}");
    assert!(err.to_string().contains("5 of 50"), "{err}");
}

#[test]
fn events_outside_the_trace_are_rejected() {
    let trace = standing(1.0);
    let late = [CollisionEvent::human_object(trace.last_index() + 1, Phase::Begin, "box", "right-palm")];
    let err = analyze(&trace, &[], &late).unwrap_err();
    assert!(err.to_string().contains("outside the trace"), "{err}");
}

#[test]
fn tool_use_is_reported_beside_segments() {
    let (trace, gestures, mut collisions) = load_fixture("lifting");
    collisions.push(CollisionEvent::object_object(90, Phase::Begin, "box-1", "pallet"));
    collisions.push(CollisionEvent::object_object(120, Phase::End, "box-1", "pallet"));
    collisions.push(CollisionEvent::object_object(200, Phase::Begin, "knife", "tape"));
    collisions.sort_by_key(|c| c.frame);
    let report = analyze(&trace, &gestures, &collisions).unwrap();
    assert_eq!(codes(&report), LIFTING_CODES);
    let spans: Vec<_> = report.tool_use.iter().map(|t| (t.start_frame, t.end_frame)).collect();
    assert_eq!(spans, [(90, 120), (200, 224)]);
    assert!(report.warnings.iter().any(|w| w.contains("never ends")));
}

#[test]
fn walking_prices_action_distance_and_sitting() {
    let (trace, gestures, collisions) = load_fixture("walk-sit");
    let report = analyze(&trace, &gestures, &collisions).unwrap();
    let first = &report.segments[0];
    assert_eq!(first.segment.code, "ABG");
    assert!((first.segment.action_distance - 3.0).abs() < 0.02);
    let labels: Vec<_> = first.segment.entries.iter().map(|e| e.to_string()).collect();
    assert_eq!(labels, ["A6 3 - 4 Steps", "B10 Sit", "G1 Grasp Light Object"]);
    assert!((first.standard_time - 6.12).abs() < 1e-9);
}

#[test]
fn a_custom_card_renames_and_reprices() {
    let (trace, gestures, collisions) = load_fixture("walk-sit");
    let card = io::load_datacard(&read(&fixture_file("cards/assembly.card"))).unwrap();
    let analyzer = Analyzer { card, ..Analyzer::default() };
    let report = analyzer.analyze(&trace, &gestures, &collisions).unwrap();
    let first = &report.segments[0].segment;
    let labels: Vec<_> = first.entries.iter().map(|e| e.to_string()).collect();
    // The card has no "Grasp Light Object" row, so the rule's own label is charged.
    assert_eq!(labels, ["A6 To press", "B10 Sit", "G1 Touching button"]);
    assert!(first.warnings.iter().any(|w| w.contains("priced off the card")));
}

#[test]
fn overlapping_rules_prefer_the_earlier_posture() {
    let rules = parse_rules(&read(&fixture_file("rules/overlap.rules"))).unwrap();
    assert_eq!(rules.overlapping_postures().len(), 1);
    // A still trunk at 23 degrees with straight legs lies in both ranges.
    let pose = PoseTemplate { trunk_inclination: 23.0, leg_angle: [0.0; 2], arm_angle: [15.0; 2] };
    let positions = pose.markers(&Skeleton::default(), Vec3::new(0.0, 0.0, 1.4));
    let frames = (0..30u64).map(|i| Frame { index: i, timestamp: i as f64 * 0.04, positions }).collect();
    let trace = MotionTrace::new(frames).unwrap();

    let posture = |analyzer: &Analyzer| {
        let report = analyzer.analyze(&trace, &[], &[]).unwrap();
        assert_eq!(codes(&report), ["No motion"]);
        report.segments[0].segment.from_posture.clone()
    };
    assert_eq!(posture(&Analyzer::default()), "half-bending");
    assert_eq!(posture(&Analyzer { rules, ..Analyzer::default() }), "standing");
}

#[test]
fn faster_than_standard_is_warned() {
    let script = parse_script(b"hold standing 0.4\ntransition bending 0.3\nhold bending 0.4\n").unwrap();
    let out = synth::synthesize(&script, &SynthConfig { noise_std: 0.0, ..Default::default() }).unwrap();
    let report = analyze(&out.trace, &[], &[]).unwrap();
    let b = report.segments.iter().find(|s| s.segment.code == "B").unwrap();
    assert!(b.efficiency > 1.0);
    assert!(b.segment.warnings.iter().any(|w| w.contains(FASTER_THAN_STANDARD)));
}

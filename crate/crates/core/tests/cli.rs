mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::{fixture_file, fixture_path};
use mostwork::report::read_report_json;

fn mostwork(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mostwork")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_prints_a_table() {
    let trace = fixture_path("lifting", "trace");
    let gestures = fixture_path("lifting", "gestures");
    let collisions = fixture_path("lifting", "collisions");
    let o = mostwork(&["analyze", path(&trace), "--gestures", path(&gestures), "--collisions", path(&collisions)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.lines().next().unwrap().contains("standard"));
    assert!(text.contains("BG") && text.contains("BP"));
    assert!(text.contains("manual review needed"));
}

#[test]
fn analyze_writes_json_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let trace = fixture_path("walk-sit", "trace");
    let o = mostwork(&["analyze", path(&trace), "--format", "json", "-o", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let report = read_report_json(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(report.segments[0].segment.code, "AB");
}

#[test]
fn csv_has_a_header_and_one_row_per_segment() {
    let o = mostwork(&["analyze", path(&fixture_path("lifting", "trace")), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<_> = text.lines().collect();
    assert!(lines[0].starts_with("segment,code,"));
    assert_eq!(lines.len(), 1 + 5);
    assert!(lines[5].starts_with("5,No motion,"));
}

#[test]
fn usage_errors_exit_one() {
    for args in [&[][..], &["analyze"], &["bogus"], &["analyze", "x.trace", "--format", "xml"], &["analyze", "x.trace", "--dwell", "-2"]] {
        let o = mostwork(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn help_and_version_exit_zero() {
    for flag in ["--help", "--version"] {
        let o = mostwork(&[flag]);
        assert_eq!(o.status.code(), Some(0));
        assert!(!o.stdout.is_empty());
    }
}

#[test]
fn missing_files_name_their_path() {
    let o = mostwork(&["analyze", "/nonexistent/walk.trace"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/walk.trace"), "{}", stderr(&o));
}

#[test]
fn bad_values_are_input_errors() {
    let trace = fixture_path("lifting", "trace");
    let o = mostwork(&["analyze", path(&trace), "--gesture-threshold", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("threshold"));
}

#[test]
fn malformed_input_reports_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("bad.rules");
    std::fs::write(&rules, "Threshold 0.5\nRules\nB standing\nTrunk Z Axis zero 5\n\\Rules\n").unwrap();
    let o = mostwork(&["rules-check", path(&rules)]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line 4") && err.contains("bad.rules"), "{err}");

    let trace = dir.path().join("short.trace");
    std::fs::write(&trace, "0 0 1 2 3\n").unwrap();
    let o = mostwork(&["analyze", path(&trace)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("expected 13 markers"), "{}", stderr(&o));
}

#[test]
fn synth_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let script = fixture_path("lifting", "script");
    let run = |name: &str| {
        let o = mostwork(&["synth", path(&script), "--out-dir", path(dir.path()), "--name", name, "--seed", "7"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stdout(&o).contains("225 frames"));
    };
    run("a");
    run("b");
    for ext in ["trace", "gestures", "collisions"] {
        let a = std::fs::read(dir.path().join(format!("a.{ext}"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("b.{ext}"))).unwrap();
        assert_eq!(a, b, "{ext}");
        // The shipped fixtures were produced by this same command.
        assert_eq!(a, std::fs::read(fixture_path("lifting", ext)).unwrap(), "{ext}");
    }
}

#[test]
fn synth_rejects_unknown_postures() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("kneel.script");
    std::fs::write(&script, "hold standing 1\ntransition kneeling 1\n").unwrap();
    let o = mostwork(&["synth", path(&script), "--out-dir", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("kneeling"), "{}", stderr(&o));
    assert!(!dir.path().join("kneel.trace").exists());
}

#[test]
fn rules_check_summarizes_the_defaults() {
    let o = mostwork(&["rules-check"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("posture rules: 4"), "{text}");
    let hand: usize = text
        .lines()
        .filter_map(|l| l.strip_prefix("hand rules "))
        .map(|l| l[3..].trim().parse::<usize>().unwrap())
        .sum();
    assert!(hand >= 3, "{text}");
    assert!(!text.contains("warning"));
}

#[test]
fn rules_check_warns_on_overlap() {
    let o = mostwork(&["rules-check", path(&fixture_file("rules/overlap.rules"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("`standing` and `half-bending` overlap"), "{}", stdout(&o));
}

#[test]
fn card_matrix_and_random_script_print_parseable_text() {
    let card = mostwork(&["card", "--card", path(&fixture_file("cards/assembly.card"))]);
    assert!(stdout(&card).contains("G 1 Pick part"));
    let matrix = mostwork(&["matrix"]);
    mostwork::segmentation::TransitionMatrix::parse(&matrix.stdout).unwrap();
    let script = mostwork(&["random-script", "--seed", "3", "--steps", "6"]);
    assert_eq!(mostwork::synth::parse_script(&script.stdout).unwrap().steps.len(), 6);
}

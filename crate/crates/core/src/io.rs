//! Line-oriented text formats for traces, glove streams, collision events
//! and data cards, plus file helpers.
//!
//! Every rejection carries the line and column of the offending token.

use std::fmt::Write as _;
use std::path::Path;

use crate::datacard::{CardEntry, DataCard, MostParameter, INDEX_VALUES};
use crate::error::{Error, Result};
use crate::events::{check_pairing, CollisionEvent, CollisionKind, GestureSample, Hand, Phase};
use crate::text::{decode, lines, parse_f64, parse_u64, Line};
use crate::timing::AnalysisReport;
use crate::report::{render, ReportFormat};
use crate::trace::{check_frames, Frame, MarkerSet, MotionTrace, Vec3, MARKER_COUNT};

const MARKERS_PREFIX: &str = "# markers:";
const TRACE_FIELDS: usize = 2 + 3 * MARKER_COUNT;

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

/// Checks an optional `# markers: …` header against the fixed layout.
fn check_marker_header(text: &str) -> Result<()> {
    for (i, raw) in text.lines().enumerate() {
        let Some(rest) = raw.trim_start().strip_prefix(MARKERS_PREFIX) else {
            continue;
        };
        let names: Vec<&str> = rest.split_whitespace().collect();
        return MarkerSet::check_names(&names)
            .map(|_| ())
            .map_err(|e| Error::parse(i + 1, 1, e.to_string()));
    }
    Ok(())
}

/// Parses `frame_index timestamp x1 y1 z1 … x13 y13 z13` lines.
pub fn parse_trace(bytes: &[u8]) -> Result<MotionTrace> {
    let text = decode(bytes)?;
    check_marker_header(text)?;
    let content = lines(text);
    let mut frames = Vec::with_capacity(content.len());
    for line in &content {
        frames.push(parse_frame(line)?);
    }
    match check_frames(&frames) {
        Ok(interval) => Ok(MotionTrace::from_checked(frames, interval)),
        Err((pos, msg)) => match content.get(pos) {
            Some(line) if frames.len() >= 2 => Err(line.error(0, msg)),
            _ => Err(Error::validation(msg)),
        },
    }
}

fn parse_frame(line: &Line<'_>) -> Result<Frame> {
    let n = line.tokens.len();
    if n != TRACE_FIELDS {
        let found = n.saturating_sub(2);
        let msg = if found.is_multiple_of(3) {
            format!("expected {MARKER_COUNT} markers, found {}", found / 3)
        } else {
            format!("expected {TRACE_FIELDS} fields (index, timestamp, {MARKER_COUNT} x/y/z triples), found {n}")
        };
        return Err(line.error(n.min(TRACE_FIELDS), msg));
    }
    let index = parse_u64(line, 0, "frame index")?;
    let timestamp = parse_f64(line, 1, "timestamp")?;
    let mut positions = [Vec3::zeros(); MARKER_COUNT];
    for (m, p) in positions.iter_mut().enumerate() {
        let base = 2 + 3 * m;
        *p = Vec3::new(
            parse_f64(line, base, "x")?,
            parse_f64(line, base + 1, "y")?,
            parse_f64(line, base + 2, "z")?,
        );
    }
    Ok(Frame { index, timestamp, positions })
}

pub fn write_trace(trace: &MotionTrace) -> String {
    let mut out = String::new();
    out.push_str("# frame timestamp, then x y z per marker (meters, seconds)\n");
    let _ = writeln!(out, "{MARKERS_PREFIX} {}", trace.marker_set.names().join(" "));
    for f in trace.frames() {
        let _ = write!(out, "{} {}", f.index, f.timestamp);
        for p in &f.positions {
            let _ = write!(out, " {} {} {}", p.x, p.y, p.z);
        }
        out.push('\n');
    }
    out
}

/// Parses `frame hand thumb index middle ring little` lines, sorted by frame.
pub fn parse_gestures(bytes: &[u8]) -> Result<Vec<GestureSample>> {
    let text = decode(bytes)?;
    let mut out = Vec::new();
    for line in lines(text) {
        if line.tokens.len() != 7 {
            return Err(line.error(
                line.tokens.len().min(7),
                format!("expected 7 fields (frame, hand, 5 flexions), found {}", line.tokens.len()),
            ));
        }
        let frame = parse_u64(&line, 0, "frame index")?;
        let hand: Hand = line.tokens[1].text.parse().map_err(|e: String| line.error(1, e))?;
        let mut flexion = [0.0; 5];
        for (k, f) in flexion.iter_mut().enumerate() {
            *f = parse_f64(&line, 2 + k, "flexion")?;
            if !(0.0..=1.0).contains(f) {
                return Err(line.error(2 + k, format!("flexion {} outside [0, 1]", *f)));
            }
        }
        out.push(GestureSample::new(frame, hand, flexion)?);
    }
    out.sort_by_key(|g| g.frame);
    Ok(out)
}

pub fn write_gestures(samples: &[GestureSample]) -> String {
    let mut out = String::from("# frame hand thumb index middle ring little\n");
    for g in samples {
        let _ = write!(out, "{} {}", g.frame, g.hand);
        for f in g.flexion {
            let _ = write!(out, " {f}");
        }
        out.push('\n');
    }
    out
}

/// Parses `frame I begin|end object body-part` and `frame II begin|end object object`
/// lines, sorted by frame, with begin/end pairing checked.
pub fn parse_collisions(bytes: &[u8]) -> Result<Vec<CollisionEvent>> {
    let text = decode(bytes)?;
    let content = lines(text);
    let mut events = Vec::with_capacity(content.len());
    for (pos, line) in content.iter().enumerate() {
        if line.tokens.len() != 5 {
            return Err(line.error(
                line.tokens.len().min(5),
                format!("expected 5 fields (frame, kind, phase, id, id or body part), found {}", line.tokens.len()),
            ));
        }
        let frame = parse_u64(line, 0, "frame index")?;
        let kind = match line.tokens[1].text {
            "I" => CollisionKind::HumanObject,
            "II" => CollisionKind::ObjectObject,
            other => return Err(line.error(1, format!("unknown collision type `{other}` (expected I or II)"))),
        };
        let phase = match line.tokens[2].text {
            "begin" => Phase::Begin,
            "end" => Phase::End,
            other => return Err(line.error(2, format!("unknown phase `{other}` (expected begin or end)"))),
        };
        let (a, b) = (line.tokens[3].text, line.tokens[4].text);
        let event = match kind {
            CollisionKind::HumanObject => CollisionEvent::human_object(frame, phase, a, b),
            CollisionKind::ObjectObject => CollisionEvent::object_object(frame, phase, a, b),
        };
        events.push((pos, event));
    }
    events.sort_by_key(|(_, e)| e.frame);
    let (positions, events): (Vec<usize>, Vec<CollisionEvent>) = events.into_iter().unzip();
    check_pairing(&events).map_err(|(i, msg)| content[positions[i]].error(0, msg))?;
    Ok(events)
}

pub fn write_collisions(events: &[CollisionEvent]) -> String {
    let mut out = String::from("# frame type phase object (body-part | object)\n");
    for e in events {
        let last = e.body_part.as_deref().unwrap_or_else(|| e.object_ids.get(1).map_or("", String::as_str));
        let _ = writeln!(out, "{} {} {} {} {}", e.frame, e.kind.tag(), e.phase.name(), e.object_ids[0], last);
    }
    out
}

/// Parses `group index label…` lines.
pub fn load_datacard(bytes: &[u8]) -> Result<DataCard> {
    let text = decode(bytes)?;
    let content = lines(text);
    let mut entries = Vec::with_capacity(content.len());
    for line in &content {
        if line.tokens.len() < 3 {
            return Err(line.error(line.tokens.len(), "expected group, index and label"));
        }
        let group: MostParameter = line.tokens[0].text.parse().map_err(|e: String| line.error(0, e))?;
        let index = parse_u64(line, 1, "index")?;
        let index = u32::try_from(index).map_err(|_| line.error(1, format!("index {index} is too large")))?;
        if !INDEX_VALUES.contains(&index) {
            return Err(line.error(1, format!("index {index} is not one of {INDEX_VALUES:?}")));
        }
        let entry = CardEntry::new(group, index, &line.rest(2));
        if entries.iter().any(|e: &CardEntry| e.group == entry.group && e.label == entry.label) {
            return Err(line.error(2, format!("duplicate entry ({}, {})", entry.group, entry.label)));
        }
        entries.push(entry);
    }
    DataCard::new(entries)
}

pub fn write_datacard(card: &DataCard) -> String {
    let mut out = String::from("# group index label\n");
    for e in card.entries() {
        let _ = writeln!(out, "{} {} {}", e.group, e.index, e.label);
    }
    out
}

pub fn write_report(report: &AnalysisReport, format: ReportFormat) -> Result<String> {
    render(report, format)
}

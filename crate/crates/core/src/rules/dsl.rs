//! Rule file reader and writer.
//!
//! ```text
//! Threshold 0.5
//! Gesture Pointing Index = closed open closed closed closed
//!
//! Rules
//! B sitting
//! Trunk Z Axis 0 5
//! Left Leg Relative Angle 90 20
//! \Rules
//!
//! Rules
//! G Touching button
//! Virtual Object button-*
//! Hand Gesture Pointing Index
//! Trigger Positive
//! \Rules
//! ```

use std::fmt::Write as _;

use super::*;
use crate::datacard::INDEX_VALUES;
use crate::error::{Error, Result};
use crate::text::{self, Line, Token};

pub const DEFAULT_RULES: &str = include_str!("../../data/default.rules");

pub fn default_rules() -> RuleSet {
    parse_rules(DEFAULT_RULES.as_bytes()).expect("embedded rule file is valid")
}

const END: &str = "\\Rules";

struct PendingHand {
    rule: HandActionRule,
    gesture_line: usize,
    gesture_column: usize,
}

pub fn parse_rules(bytes: &[u8]) -> Result<RuleSet> {
    let source = text::decode(bytes)?;
    let lines = text::lines(source);
    let mut threshold: Option<f64> = None;
    let mut gestures: Vec<GesturePattern> = Vec::new();
    let mut postures: Vec<PostureRule> = Vec::new();
    let mut hands: Vec<PendingHand> = Vec::new();

    let mut i = 0;
    while i < lines.len() {
        let line = &lines[i];
        match line.tokens[0].text {
            "Threshold" => {
                if threshold.is_some() {
                    return Err(line.error(0, "Threshold given twice"));
                }
                if line.tokens.len() != 2 {
                    return Err(line.error(2, "expected `Threshold <value>`"));
                }
                let t = text::parse_f64(line, 1, "threshold")?;
                if !(t > 0.0 && t < 1.0) {
                    return Err(line.error(1, "threshold must lie in (0, 1)"));
                }
                threshold = Some(t);
                i += 1;
            }
            "Gesture" => {
                let g = parse_gesture(line)?;
                if gestures.iter().any(|x| x.name == g.name) {
                    return Err(line.error(1, format!("gesture `{}` defined twice", g.name)));
                }
                gestures.push(g);
                i += 1;
            }
            "Rules" => {
                if line.tokens.len() > 1 {
                    return Err(line.error(1, "unexpected text after `Rules`"));
                }
                let end = lines[i + 1..]
                    .iter()
                    .position(|l| matches!(l.tokens[0].text, "Rules" | END))
                    .map(|p| p + i + 1)
                    .filter(|&p| lines[p].tokens[0].text == END)
                    .ok_or_else(|| line.error(0, "unterminated `Rules` block (missing `\\Rules`)"))?;
                if lines[end].tokens.len() > 1 {
                    return Err(lines[end].error(1, "unexpected text after `\\Rules`"));
                }
                parse_block(line, &lines[i + 1..end], &mut postures, &mut hands)?;
                i = end + 1;
            }
            END => return Err(line.error(0, "`\\Rules` without a matching `Rules`")),
            other => return Err(line.error(0, format!("unknown directive `{other}`"))),
        }
    }

    let mut hand_rules = Vec::with_capacity(hands.len());
    for p in hands {
        if !gestures.iter().any(|g| g.name == p.rule.gesture) {
            return Err(Error::parse(
                p.gesture_line,
                p.gesture_column,
                format!("gesture `{}` is not defined", p.rule.gesture),
            ));
        }
        hand_rules.push(p.rule);
    }

    Ok(RuleSet {
        gesture_threshold: threshold.unwrap_or(DEFAULT_GESTURE_THRESHOLD),
        gestures,
        postures,
        hand_rules,
    })
}

fn parse_finger(tok: &str) -> Option<FingerState> {
    match tok {
        "open" => Some(FingerState::Open),
        "closed" => Some(FingerState::Closed),
        "any" => Some(FingerState::Any),
        _ => None,
    }
}

fn parse_gesture(line: &Line<'_>) -> Result<GesturePattern> {
    let eq = line
        .tokens
        .iter()
        .position(|t| t.text == "=")
        .ok_or_else(|| line.error(1, "expected `Gesture <name> = <5 finger states>`"))?;
    if eq == 1 {
        return Err(line.error(1, "gesture name is empty"));
    }
    let name = text::join(&line.tokens[1..eq]);
    let states = &line.tokens[eq + 1..];
    if states.len() != 5 {
        return Err(line.error(eq + 1, format!("expected 5 finger states, found {}", states.len())));
    }
    let mut fingers = [FingerState::Any; 5];
    for (k, tok) in states.iter().enumerate() {
        fingers[k] = parse_finger(tok.text).ok_or_else(|| {
            line.error(eq + 1 + k, format!("finger state `{}` is not open, closed or any", tok.text))
        })?;
    }
    if fingers.iter().all(|f| *f == FingerState::Any) {
        return Err(line.error(eq + 1, "gesture constrains no finger"));
    }
    Ok(GesturePattern { name, fingers })
}

/// Drops parenthesized annotations such as `(θ)` or `(mean value)`.
fn strip_annotations<'a>(tokens: &[Token<'a>]) -> Vec<Token<'a>> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    for t in tokens {
        let opens = t.text.trim_start_matches(['"', '“']).starts_with('(');
        if depth > 0 || opens {
            depth += 1;
            if t.text.trim_end_matches(['"', '”']).ends_with(')') {
                depth = 0;
            }
            continue;
        }
        out.push(*t);
    }
    out
}

fn parse_block(
    open: &Line<'_>,
    body: &[Line<'_>],
    postures: &mut Vec<PostureRule>,
    hands: &mut Vec<PendingHand>,
) -> Result<()> {
    let header = body
        .first()
        .ok_or_else(|| open.error(0, "empty `Rules` block (expected `<group> <label>`)"))?;
    let mut start = 0;
    if header.tokens.len() > 2 && header.tokens[0].text == "Motion" && header.tokens[1].text == "group" {
        start = 2;
    }
    let group: MostParameter = header.tokens[start]
        .text
        .parse()
        .map_err(|e: String| header.error(start, e))?;
    let label = header.rest(start + 1);
    if label.is_empty() {
        return Err(header.error(start + 1, "missing rule label"));
    }

    let mut clauses = Vec::new();
    let mut object: Option<ObjectMatcher> = None;
    let mut gesture: Option<(String, Option<Hand>, usize, usize)> = None;
    let mut trigger: Option<Trigger> = None;
    let mut index_hint: Option<u32> = None;
    let mut first_hand_line: Option<&Line<'_>> = None;

    for line in &body[1..] {
        let toks: Vec<&str> = line.tokens.iter().map(|t| t.text).collect();
        let skip = if toks.len() > 1 && toks[0] == "Interaction" && matches!(toks[1], "Information" | "Part") {
            2
        } else {
            0
        };
        let words = &toks[skip..];
        let is_hand = matches!(words.first(), Some(&"Hand") | Some(&"Trigger") | Some(&"Index"))
            || (words.len() >= 2 && words[0] == "Virtual" && words[1] == "Object");
        if is_hand {
            first_hand_line.get_or_insert(line);
        }
        match words {
            ["Virtual", "Object", id] => {
                if object.replace(ObjectMatcher::parse(id)).is_some() {
                    return Err(line.error(skip, "`Virtual Object` given twice"));
                }
            }
            ["Virtual", "Object", ..] => {
                return Err(line.error(skip + 2, "expected exactly one object id"));
            }
            ["Hand", rest @ ..] => {
                let (hand, after) = match rest.first().map(|s| s.parse::<Hand>()) {
                    Some(Ok(h)) => (Some(h), 1),
                    _ => (None, 0),
                };
                if rest.get(after) != Some(&"Gesture") {
                    return Err(line.error(skip + 1 + after, "expected `Hand [left|right] Gesture <name>`"));
                }
                let name_at = skip + 2 + after;
                let name = line.rest(name_at);
                if name.is_empty() {
                    return Err(line.error(name_at, "missing gesture name"));
                }
                if gesture.is_some() {
                    return Err(line.error(skip, "`Hand` given twice"));
                }
                gesture = Some((name, hand, line.number, line.tokens[name_at].column));
            }
            ["Trigger", t] => {
                let parsed = match *t {
                    "Positive" => Trigger::Positive,
                    "Negative" => Trigger::Negative,
                    _ => return Err(line.error(skip + 1, "trigger must be Positive or Negative")),
                };
                if trigger.replace(parsed).is_some() {
                    return Err(line.error(skip, "`Trigger` given twice"));
                }
            }
            ["Index", _] => {
                let n = text::parse_u64(line, skip + 1, "index")?;
                let n = u32::try_from(n).ok().filter(|n| INDEX_VALUES.contains(n)).ok_or_else(|| {
                    line.error(skip + 1, format!("index must be one of {INDEX_VALUES:?}"))
                })?;
                index_hint = Some(n);
            }
            ["Trigger", ..] | ["Index", ..] => {
                return Err(line.error(skip, "expected a single value"));
            }
            _ => clauses.push(parse_clause(line)?),
        }
    }

    let is_posture = !clauses.is_empty();
    let is_hand = first_hand_line.is_some();
    match (is_posture, is_hand) {
        (true, true) => Err(first_hand_line
            .unwrap()
            .error(0, "block mixes posture clauses and interaction fields")),
        (false, false) => Err(header.error(0, format!("rule `{label}` has no clauses"))),
        (true, false) => {
            if postures.iter().any(|p| p.label == label) {
                return Err(header.error(start + 1, format!("posture `{label}` defined twice")));
            }
            let priority = postures.len();
            postures.push(PostureRule { group, label, clauses, priority });
            Ok(())
        }
        (false, true) => {
            if !matches!(group, MostParameter::G | MostParameter::P) {
                return Err(header.error(start, "hand action rules belong to group G or P"));
            }
            let object = object.ok_or_else(|| header.error(0, format!("rule `{label}` lacks `Virtual Object`")))?;
            let (gesture, hand, gesture_line, gesture_column) =
                gesture.ok_or_else(|| header.error(0, format!("rule `{label}` lacks `Hand ... Gesture`")))?;
            let trigger = trigger.ok_or_else(|| header.error(0, format!("rule `{label}` lacks `Trigger`")))?;
            let priority = hands.len();
            hands.push(PendingHand {
                rule: HandActionRule { group, label, object, gesture, hand, trigger, index_hint, priority },
                gesture_line,
                gesture_column,
            });
            Ok(())
        }
    }
}

fn parse_clause(line: &Line<'_>) -> Result<Clause> {
    let tokens = strip_annotations(&line.tokens);
    let column_of = |t: &Token<'_>| line.tokens.iter().position(|x| x.column == t.column).unwrap();
    if tokens.len() < 3 {
        return Err(line.error(0, "expected `<body part> <parameter> <mean> <variance>`"));
    }
    let n = tokens.len();
    let phrase = text::join(&tokens[..n - 2]);
    let measure = Measure::all()
        .into_iter()
        .find(|m| m.phrase().eq_ignore_ascii_case(&phrase))
        .ok_or_else(|| line.error(column_of(&tokens[0]), format!("unknown parameter `{phrase}`")))?;
    let mean = text::parse_f64(line, column_of(&tokens[n - 2]), "mean")?;
    let vi = column_of(&tokens[n - 1]);
    let variance = text::parse_f64(line, vi, "variance")?;
    if variance <= 0.0 {
        return Err(line.error(vi, "variance must be positive"));
    }
    Ok(Clause { measure, mean, variance })
}

/// Canonical text form; `parse_rules` reads it back to an equal rule set.
pub fn write_rules(rules: &RuleSet) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Threshold {}", rules.gesture_threshold);
    if !rules.gestures.is_empty() {
        out.push('\n');
    }
    for g in &rules.gestures {
        let states: Vec<_> = g.fingers.iter().map(|f| f.name()).collect();
        let _ = writeln!(out, "Gesture {} = {}", g.name, states.join(" "));
    }
    let mut postures: Vec<_> = rules.postures.iter().collect();
    postures.sort_by_key(|p| p.priority);
    for p in postures {
        let _ = writeln!(out, "\nRules\n{} {}", p.group, p.label);
        for c in &p.clauses {
            let _ = writeln!(out, "{} {} {}", c.measure.phrase(), c.mean, c.variance);
        }
        let _ = writeln!(out, "{END}");
    }
    let mut hands: Vec<_> = rules.hand_rules.iter().collect();
    hands.sort_by_key(|h| h.priority);
    for h in hands {
        let _ = writeln!(out, "\nRules\n{} {}", h.group, h.label);
        let _ = writeln!(out, "Virtual Object {}", h.object);
        match h.hand {
            Some(side) => {
                let _ = writeln!(out, "Hand {side} Gesture {}", h.gesture);
            }
            None => {
                let _ = writeln!(out, "Hand Gesture {}", h.gesture);
            }
        }
        let trig = match h.trigger {
            Trigger::Positive => "Positive",
            Trigger::Negative => "Negative",
        };
        let _ = writeln!(out, "Trigger {trig}");
        if let Some(i) = h.index_hint {
            let _ = writeln!(out, "Index {i}");
        }
        let _ = writeln!(out, "{END}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::Side;

    const SITTING: &str = "Rules\nB sitting\nTrunk Z Axis (α) 0 5\nLeft Leg Relative Angle (θ) 90 20\nRight Leg Relative Angle 90 20\n\\Rules\n";

    #[test]
    fn parses_table_style_sitting_block() {
        let rs = parse_rules(SITTING.as_bytes()).unwrap();
        assert_eq!(rs.postures.len(), 1);
        let p = &rs.postures[0];
        assert_eq!(p.group, MostParameter::B);
        assert_eq!(p.label, "sitting");
        assert_eq!(
            p.clauses,
            vec![
                Clause { measure: Measure::TrunkInclination, mean: 0.0, variance: 5.0 },
                Clause { measure: Measure::LegAngle(Side::Left), mean: 90.0, variance: 20.0 },
                Clause { measure: Measure::LegAngle(Side::Right), mean: 90.0, variance: 20.0 },
            ]
        );
        assert_eq!(rs.gesture_threshold, DEFAULT_GESTURE_THRESHOLD);
    }

    #[test]
    fn parses_touching_button_block() {
        let src = "Gesture Pointing Index = closed open closed closed closed\n\
                   Rules\nG Touching button\nInteraction Information Virtual Object button-7\n\
                   Interaction Part Hand Gesture Pointing Index\nTrigger Positive\n\\Rules\n";
        let rs = parse_rules(src.as_bytes()).unwrap();
        let h = &rs.hand_rules[0];
        assert_eq!(h.group, MostParameter::G);
        assert_eq!(h.label, "Touching button");
        assert_eq!(h.object, ObjectMatcher::Exact("button-7".into()));
        assert_eq!(h.gesture, "Pointing Index");
        assert_eq!(h.trigger, Trigger::Positive);
        assert_eq!(h.hand, None);
    }

    #[test]
    fn missing_terminator_reports_line() {
        let err = parse_rules(b"# x\nRules\nB sitting\nTrunk Z Axis 0 5\n").unwrap_err();
        let loc = err.location().unwrap();
        assert_eq!(loc.line, 2);
        assert!(err.to_string().contains("unterminated"));
        let err = parse_rules(b"Rules\nB a\nTrunk Z Axis 0 5\nRules\nB b\nTrunk Z Axis 0 5\n\\Rules\n").unwrap_err();
        assert_eq!(err.location().unwrap().line, 1);
    }

    #[test]
    fn rejects_bad_clauses() {
        let err = parse_rules(b"Rules\nB x\nTrunk Wobble 0 5\n\\Rules\n").unwrap_err();
        assert!(err.to_string().contains("unknown parameter"), "{err}");
        assert_eq!(err.location().unwrap().line, 3);
        let err = parse_rules(b"Rules\nB x\nTrunk Z Axis 0 0\n\\Rules\n").unwrap_err();
        assert!(err.to_string().contains("variance"));
        assert_eq!(err.location().unwrap().column, 16);
        let err = parse_rules(b"Rules\nB x\nTrunk Z Axis 0 -2\n\\Rules\n").unwrap_err();
        assert!(err.to_string().contains("variance"));
    }

    #[test]
    fn rejects_all_any_gesture_and_unknown_reference() {
        assert!(parse_rules(b"Gesture Limp = any any any any any\n").is_err());
        let src = "Rules\nG Touch\nVirtual Object b\nHand Gesture Nope\nTrigger Positive\n\\Rules\n";
        let err = parse_rules(src.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("not defined"));
        assert_eq!(err.location().unwrap().line, 4);
    }

    #[test]
    fn rejects_mixed_and_misgrouped_blocks() {
        let src = "Gesture F = closed closed closed closed closed\n\
                   Rules\nB x\nTrunk Z Axis 0 5\nTrigger Positive\n\\Rules\n";
        assert!(parse_rules(src.as_bytes()).unwrap_err().to_string().contains("mixes"));
        let src = "Gesture F = closed closed closed closed closed\n\
                   Rules\nB x\nVirtual Object a\nHand Gesture F\nTrigger Positive\n\\Rules\n";
        assert!(parse_rules(src.as_bytes()).is_err());
    }

    #[test]
    fn default_file_contents() {
        let rs = default_rules();
        assert_eq!(rs.posture_labels(), vec!["standing", "sitting", "half-bending", "bending"]);
        assert!(rs.hand_rules.len() >= 3);
        assert_eq!(rs.gestures.len(), 3);
        let priorities: Vec<_> = rs.postures.iter().map(|p| p.priority).collect();
        assert_eq!(priorities, vec![0, 1, 2, 3]);
    }

    #[test]
    fn written_rules_read_back_identically() {
        let rs = default_rules();
        let text = write_rules(&rs);
        assert_eq!(parse_rules(text.as_bytes()).unwrap(), rs);
        assert_eq!(write_rules(&parse_rules(text.as_bytes()).unwrap()), text);
    }
}

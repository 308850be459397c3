use super::{FingerState, GesturePattern, RuleSet, Trigger};
use crate::datacard::MostParameter;
use crate::events::{CollisionEvent, CollisionKind, GestureSample, Hand, Phase};

/// Gesture samples within this many frames of a collision are considered aligned with it.
pub const GESTURE_WINDOW: u64 = 2;

/// True iff every constrained finger is in its required state.
/// Open means flexion strictly below `threshold`.
pub fn match_gesture(sample: &GestureSample, pattern: &GesturePattern, threshold: f64) -> bool {
    sample.flexion.iter().zip(&pattern.fingers).all(|(&f, state)| match state {
        FingerState::Open => f < threshold,
        FingerState::Closed => f >= threshold,
        FingerState::Any => true,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandAction {
    pub frame: u64,
    pub group: MostParameter,
    /// Label of the rule that fired.
    pub label: String,
    pub object_id: String,
    pub hand: Option<Hand>,
    pub index_hint: Option<u32>,
}

fn nearest_gesture(gestures: &[GestureSample], frame: u64, hand: Option<Hand>) -> Option<&GestureSample> {
    let lo = frame.saturating_sub(GESTURE_WINDOW);
    let hi = frame + GESTURE_WINDOW;
    gestures
        .iter()
        .filter(|g| g.frame >= lo && g.frame <= hi)
        .filter(|g| hand.is_none_or(|h| g.hand == h))
        .min_by_key(|g| (g.frame.abs_diff(frame), g.frame))
}

/// Hand actions from type-I collisions confirmed by an aligned gesture.
///
/// Each collision fires at most one rule, the first by priority whose
/// trigger, object and gesture all match. A gesture with no collision never
/// fires anything.
pub fn detect_hand_actions(
    gestures: &[GestureSample],
    collisions: &[CollisionEvent],
    rules: &RuleSet,
    threshold: f64,
) -> Vec<HandAction> {
    let mut hand_rules: Vec<_> = rules.hand_rules.iter().collect();
    hand_rules.sort_by_key(|r| r.priority);
    let mut out = Vec::new();
    for event in collisions.iter().filter(|e| e.kind == CollisionKind::HumanObject) {
        let hand = event.hand();
        let Some(sample) = nearest_gesture(gestures, event.frame, hand) else {
            continue;
        };
        let object = &event.object_ids[0];
        let fired = hand_rules.iter().find(|rule| {
            let phase_ok = matches!(
                (rule.trigger, event.phase),
                (Trigger::Positive, Phase::Begin) | (Trigger::Negative, Phase::End)
            );
            phase_ok
                && rule.object.matches(object)
                && rule.hand.is_none_or(|h| h == sample.hand)
                && rules
                    .gesture(&rule.gesture)
                    .is_some_and(|p| match_gesture(sample, p, threshold))
        });
        if let Some(rule) = fired {
            out.push(HandAction {
                frame: event.frame,
                group: rule.group,
                label: rule.label.clone(),
                object_id: object.clone(),
                hand: hand.or(Some(sample.hand)),
                index_hint: rule.index_hint,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::default_rules;

    fn pointing() -> GesturePattern {
        default_rules().gesture("Pointing Index").unwrap().clone()
    }

    fn sample(frame: u64, hand: Hand, flexion: [f64; 5]) -> GestureSample {
        GestureSample::new(frame, hand, flexion).unwrap()
    }

    #[test]
    fn gesture_matching() {
        let p = pointing();
        assert!(match_gesture(&sample(0, Hand::Right, [0.9, 0.1, 0.9, 0.9, 0.9]), &p, 0.5));
        assert!(!match_gesture(&sample(0, Hand::Right, [0.9; 5]), &p, 0.5));
        // open is strict
        assert!(!match_gesture(&sample(0, Hand::Right, [0.9, 0.5, 0.9, 0.9, 0.9]), &p, 0.5));
        // closed is inclusive
        assert!(match_gesture(&sample(0, Hand::Right, [0.5, 0.1, 0.5, 0.5, 0.5]), &p, 0.5));
    }

    #[test]
    fn all_thirty_two_codes_are_distinguishable() {
        let mut seen = std::collections::HashSet::new();
        for code in 0u32..32 {
            let flex: [f64; 5] = std::array::from_fn(|i| if code >> i & 1 == 1 { 0.9 } else { 0.1 });
            let pattern = GesturePattern {
                name: format!("g{code}"),
                fingers: std::array::from_fn(|i| {
                    if code >> i & 1 == 1 { FingerState::Closed } else { FingerState::Open }
                }),
            };
            let s = sample(0, Hand::Left, flex);
            assert!(match_gesture(&s, &pattern, 0.5));
            seen.insert(
                (0u32..32)
                    .filter(|&c| {
                        let p = GesturePattern {
                            name: String::new(),
                            fingers: std::array::from_fn(|i| {
                                if c >> i & 1 == 1 { FingerState::Closed } else { FingerState::Open }
                            }),
                        };
                        match_gesture(&s, &p, 0.5)
                    })
                    .collect::<Vec<_>>(),
            );
        }
        assert_eq!(seen.len(), 32);
    }

    #[test]
    fn touching_button_needs_gesture_and_collision() {
        let rules = default_rules();
        let point = sample(30, Hand::Right, [0.9, 0.1, 0.9, 0.9, 0.9]);
        let touch = CollisionEvent::human_object(30, Phase::Begin, "button-7", "right-index-tip");

        let acts = detect_hand_actions(std::slice::from_ref(&point), std::slice::from_ref(&touch), &rules, 0.5);
        assert_eq!(acts.len(), 1);
        assert_eq!(acts[0].label, "Touching button");
        assert_eq!(acts[0].frame, 30);
        assert_eq!(acts[0].object_id, "button-7");

        assert!(detect_hand_actions(std::slice::from_ref(&point), &[], &rules, 0.5).is_empty());

        let flat = sample(30, Hand::Right, [0.1; 5]);
        assert!(detect_hand_actions(&[flat], std::slice::from_ref(&touch), &rules, 0.5).is_empty());
    }

    #[test]
    fn alignment_window_and_hand_side() {
        let rules = default_rules();
        let touch = CollisionEvent::human_object(30, Phase::Begin, "button-7", "right-index-tip");
        let near = sample(32, Hand::Right, [0.9, 0.1, 0.9, 0.9, 0.9]);
        assert_eq!(detect_hand_actions(&[near], std::slice::from_ref(&touch), &rules, 0.5).len(), 1);
        let far = sample(33, Hand::Right, [0.9, 0.1, 0.9, 0.9, 0.9]);
        assert!(detect_hand_actions(&[far], std::slice::from_ref(&touch), &rules, 0.5).is_empty());
        let other_hand = sample(30, Hand::Left, [0.9, 0.1, 0.9, 0.9, 0.9]);
        assert!(detect_hand_actions(&[other_hand], &[touch], &rules, 0.5).is_empty());
    }

    #[test]
    fn release_fires_on_contact_end() {
        let rules = default_rules();
        let events = vec![
            CollisionEvent::human_object(10, Phase::Begin, "box-1", "right-palm"),
            CollisionEvent::human_object(50, Phase::End, "box-1", "right-palm"),
        ];
        let gestures = vec![sample(10, Hand::Right, [0.9; 5]), sample(50, Hand::Right, [0.1; 5])];
        let acts = detect_hand_actions(&gestures, &events, &rules, 0.5);
        let groups: Vec<_> = acts.iter().map(|a| (a.frame, a.group)).collect();
        assert_eq!(groups, vec![(10, MostParameter::G), (50, MostParameter::P)]);
    }

    #[test]
    fn object_object_contacts_are_ignored() {
        let rules = default_rules();
        let events = vec![CollisionEvent::object_object(10, Phase::Begin, "wrench-1", "bolt-3")];
        let gestures = vec![sample(10, Hand::Right, [0.9; 5])];
        assert!(detect_hand_actions(&gestures, &events, &rules, 0.5).is_empty());
    }
}

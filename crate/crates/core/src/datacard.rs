//! The MOST general-move data card: parameter groups, indices and the
//! natural-language descriptions each index prices.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::normalize_label;

/// Indices printed on the general-move card.
pub const INDEX_VALUES: [u32; 6] = [0, 1, 3, 6, 10, 16];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MostParameter {
    /// Action distance.
    A,
    /// Body motion.
    B,
    /// Gain control.
    G,
    /// Placement.
    P,
}

impl MostParameter {
    pub const ALL: [MostParameter; 4] = [Self::A, Self::B, Self::G, Self::P];

    pub fn letter(self) -> char {
        match self {
            Self::A => 'A',
            Self::B => 'B',
            Self::G => 'G',
            Self::P => 'P',
        }
    }
}

impl fmt::Display for MostParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for MostParameter {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "A" => Ok(Self::A),
            "B" => Ok(Self::B),
            "G" => Ok(Self::G),
            "P" => Ok(Self::P),
            other => Err(format!("unknown MOST parameter `{other}` (expected A, B, G or P)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardEntry {
    pub group: MostParameter,
    pub index: u32,
    pub label: String,
}

impl CardEntry {
    pub fn new(group: MostParameter, index: u32, label: &str) -> Self {
        Self { group, index, label: normalize_label(label) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataCard {
    entries: Vec<CardEntry>,
}

impl DataCard {
    /// Builds a card, rejecting indices off the card and duplicate `(group, label)` rows.
    pub fn new(entries: Vec<CardEntry>) -> Result<Self> {
        let mut seen = HashSet::new();
        for e in &entries {
            if !INDEX_VALUES.contains(&e.index) {
                return Err(Error::validation(format!(
                    "index {} for ({}, {}) is not one of {:?}",
                    e.index, e.group, e.label, INDEX_VALUES
                )));
            }
            if e.label.is_empty() {
                return Err(Error::validation(format!("empty label in group {}", e.group)));
            }
            if !seen.insert((e.group, e.label.clone())) {
                return Err(Error::validation(format!("duplicate entry ({}, {})", e.group, e.label)));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[CardEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Exact match on the whitespace-normalized label within a group.
    pub fn lookup(&self, group: MostParameter, label: &str) -> Option<u32> {
        self.entry(group, label).map(|e| e.index)
    }

    pub fn entry(&self, group: MostParameter, label: &str) -> Option<&CardEntry> {
        let label = normalize_label(label);
        self.entries.iter().find(|e| e.group == group && e.label == label)
    }

    /// First row of `group` priced at `index`, in card order.
    pub fn first_at(&self, group: MostParameter, index: u32) -> Option<&CardEntry> {
        self.entries.iter().find(|e| e.group == group && e.index == index)
    }
}

impl Default for DataCard {
    fn default() -> Self {
        default_card()
    }
}

/// Rows of the basic general-move card, one row per description.
const DEFAULT_ROWS: &[(MostParameter, u32, &str)] = {
    use MostParameter::*;
    &[
        (A, 0, "≤ 2 in. (5 cm.)"),
        (A, 1, "Within Reach"),
        (A, 3, "1 - 2 Steps"),
        (A, 6, "3 - 4 Steps"),
        (A, 10, "5 - 7 Steps"),
        (A, 16, "8 - 10 Steps"),
        (B, 0, "No Body Motion"),
        (B, 3, "Sit without Adjustments"),
        (B, 3, "Stand without Adjustments"),
        (B, 3, "Bend and Arise 50% occ"),
        (B, 6, "Bend and Arise"),
        (B, 10, "Sit"),
        (B, 10, "Stand"),
        (B, 16, "Bend and Sit"),
        (B, 16, "Climb on"),
        (B, 16, "Climb off"),
        (B, 16, "Stand and Bend"),
        (B, 16, "Through Door"),
        (G, 0, "No Gain Control"),
        (G, 0, "Hold"),
        (G, 1, "Grasp Light Object"),
        (G, 1, "Grasp Light Objects Simo"),
        (G, 3, "Get Non-simo"),
        (G, 3, "Get Heavy/Bulky"),
        (G, 3, "Get Blind"),
        (G, 3, "Get Obstructed"),
        (G, 3, "Free Interlocked"),
        (G, 3, "Disengage"),
        (G, 3, "Collect"),
        (P, 0, "No placement"),
        (P, 0, "Hold"),
        (P, 0, "Toss"),
        (P, 1, "Lay Aside"),
        (P, 1, "Loose Fit"),
        (P, 3, "Loose Fit Blind"),
        (P, 3, "Place with Adjustments"),
        (P, 3, "Place with Light Pressure"),
        (P, 3, "Place with Double Placement"),
        (P, 6, "Position with Care"),
        (P, 6, "Position with Precision"),
        (P, 6, "Position Blind"),
        (P, 6, "Position Obstructed"),
        (P, 6, "Position with Heavy Pressure"),
        (P, 6, "Position with Intermediate Moves"),
    ]
};

/// A card row charged to a segment. `index` is the charged index; it is half
/// of `card_index` when a round-trip motion is split across two segments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PricedEntry {
    pub group: MostParameter,
    pub label: String,
    pub card_index: u32,
    pub index: u32,
}

impl PricedEntry {
    pub fn full(entry: &CardEntry) -> Self {
        Self { group: entry.group, label: entry.label.clone(), card_index: entry.index, index: entry.index }
    }

    pub fn half(entry: &CardEntry) -> Self {
        Self { index: entry.index / 2, ..Self::full(entry) }
    }
}

impl fmt::Display for PricedEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.index == self.card_index {
            write!(f, "{}{} {}", self.group, self.index, self.label)
        } else {
            write!(f, "{}{}/2 {}", self.group, self.card_index, self.label)
        }
    }
}

pub fn default_card() -> DataCard {
    let entries = DEFAULT_ROWS
        .iter()
        .map(|&(g, i, l)| CardEntry::new(g, i, l))
        .collect();
    DataCard::new(entries).expect("embedded card is valid")
}

pub fn lookup(card: &DataCard, group: MostParameter, label: &str) -> Option<u32> {
    card.lookup(group, label)
}

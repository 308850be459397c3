//! Posture-change to body-motion lookup table.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{self, normalize_label};

pub const NO_MOTION: &str = "No motion";
pub const UNRECOGNIZED: &str = "Unrecognized";
const MISSING: &str = "-";

pub const DEFAULT_MATRIX: &str = include_str!("../../data/default.matrix");

/// Dynamic motion assigned to a segment.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum Motion {
    NoMotion,
    Named(String),
    Unrecognized,
}

impl Motion {
    pub fn is_principal(&self) -> bool {
        matches!(self, Motion::Named(_))
    }
}

impl From<String> for Motion {
    fn from(s: String) -> Self {
        match s.as_str() {
            NO_MOTION => Motion::NoMotion,
            UNRECOGNIZED => Motion::Unrecognized,
            _ => Motion::Named(s),
        }
    }
}

impl From<Motion> for String {
    fn from(m: Motion) -> String {
        m.to_string()
    }
}

impl fmt::Display for Motion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Motion::NoMotion => f.write_str(NO_MOTION),
            Motion::Named(n) => f.write_str(n),
            Motion::Unrecognized => f.write_str(UNRECOGNIZED),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionMatrix {
    postures: Vec<String>,
    cells: HashMap<(String, String), String>,
}

impl TransitionMatrix {
    pub fn postures(&self) -> &[String] {
        &self.postures
    }

    /// Motion for a change from `from` to `to`. Same-posture pairs are always
    /// no motion; pairs without a cell are unrecognized.
    pub fn label_transition(&self, from: &str, to: &str) -> Motion {
        if from == to {
            return Motion::NoMotion;
        }
        match self.cells.get(&(from.to_string(), to.to_string())) {
            Some(label) => Motion::from(label.clone()),
            None => Motion::Unrecognized,
        }
    }

    /// Posture labels that are missing as a row/column of the matrix.
    pub fn missing_postures<'a>(&self, labels: &[&'a str]) -> Vec<&'a str> {
        labels
            .iter()
            .copied()
            .filter(|l| !self.postures.iter().any(|p| p == l))
            .collect()
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let source = text::decode(bytes)?;
        let mut rows = source.lines().enumerate().filter_map(|(i, raw)| {
            let content = raw.split('#').next().unwrap_or("");
            (!content.trim().is_empty()).then_some((i + 1, content))
        });
        let (header_line, header) = rows
            .next()
            .ok_or_else(|| Error::parse(1, 1, "empty transition matrix"))?;
        let columns: Vec<String> = split_cells(header).skip(1).map(|(_, c)| c).collect();
        if columns.is_empty() {
            return Err(Error::parse(header_line, 1, "header lists no postures"));
        }
        for (k, c) in columns.iter().enumerate() {
            if c.is_empty() || c == MISSING {
                return Err(Error::parse(header_line, 1, format!("column {} has no posture label", k + 1)));
            }
            if columns[..k].contains(c) {
                return Err(Error::parse(header_line, 1, format!("posture `{c}` repeated in header")));
            }
        }
        let mut cells = HashMap::new();
        let mut seen_rows = Vec::new();
        for (number, row) in rows {
            let parts: Vec<(usize, String)> = split_cells(row).collect();
            let (_, from) = &parts[0];
            if !columns.contains(from) {
                return Err(Error::parse(number, 1, format!("row posture `{from}` is not a header column")));
            }
            if seen_rows.contains(from) {
                return Err(Error::parse(number, 1, format!("row `{from}` given twice")));
            }
            if parts.len() != columns.len() + 1 {
                return Err(Error::parse(
                    number,
                    parts.last().map(|p| p.0).unwrap_or(1),
                    format!("expected {} cells, found {}", columns.len(), parts.len() - 1),
                ));
            }
            for ((column, cell), to) in parts[1..].iter().zip(&columns) {
                if cell.is_empty() {
                    return Err(Error::parse(number, *column, "empty cell (use `-` for no motion defined)"));
                }
                if from == to {
                    if cell != NO_MOTION && cell != MISSING {
                        return Err(Error::parse(number, *column, format!("diagonal cell for `{from}` must be `{NO_MOTION}`")));
                    }
                    continue;
                }
                if cell != MISSING {
                    cells.insert((from.clone(), to.clone()), cell.clone());
                }
            }
            seen_rows.push(from.clone());
        }
        if let Some(missing) = columns.iter().find(|c| !seen_rows.contains(c)) {
            return Err(Error::parse(header_line, 1, format!("posture `{missing}` has no row")));
        }
        Ok(Self { postures: columns, cells })
    }

    pub fn write(&self) -> String {
        let mut table: Vec<Vec<String>> = Vec::new();
        let mut header = vec!["from \\ to".to_string()];
        header.extend(self.postures.iter().cloned());
        table.push(header);
        for from in &self.postures {
            let mut row = vec![from.clone()];
            for to in &self.postures {
                row.push(if from == to {
                    NO_MOTION.to_string()
                } else {
                    self.cells.get(&(from.clone(), to.clone())).cloned().unwrap_or_else(|| MISSING.into())
                });
            }
            table.push(row);
        }
        let widths: Vec<usize> = (0..table[0].len())
            .map(|c| table.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in table {
            let cells: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}", w = *w))
                .collect();
            out.push_str(cells.join(" | ").trim_end());
            out.push('\n');
        }
        out
    }
}

impl Default for TransitionMatrix {
    fn default() -> Self {
        default_matrix()
    }
}

pub fn default_matrix() -> TransitionMatrix {
    TransitionMatrix::parse(DEFAULT_MATRIX.as_bytes()).expect("embedded matrix is valid")
}

pub fn label_transition(from: &str, to: &str, matrix: &TransitionMatrix) -> Motion {
    matrix.label_transition(from, to)
}

/// `|`-separated cells with the 1-based column each starts at.
fn split_cells(row: &str) -> impl Iterator<Item = (usize, String)> + '_ {
    let mut column = 1;
    row.split('|').map(move |cell| {
        let lead = cell.chars().take_while(|c| c.is_whitespace()).count();
        let at = column + lead;
        column += cell.chars().count() + 1;
        (at, normalize_label(cell))
    })
}

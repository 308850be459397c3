//! Line and token helpers shared by the text formats.

use crate::error::{Error, Result};

/// A whitespace-delimited token with its 1-based column.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Token<'a> {
    pub column: usize,
    pub text: &'a str,
}

/// A content line: comments stripped, blank lines skipped.
#[derive(Debug, Clone)]
pub(crate) struct Line<'a> {
    pub number: usize,
    pub tokens: Vec<Token<'a>>,
}

impl<'a> Line<'a> {
    pub fn error(&self, index: usize, message: impl Into<String>) -> Error {
        let column = self
            .tokens
            .get(index)
            .map(|t| t.column)
            .or_else(|| self.tokens.last().map(|t| t.column + t.text.chars().count()))
            .unwrap_or(1);
        Error::parse(self.number, column, message)
    }

    /// Tokens from `start` joined by single spaces.
    pub fn rest(&self, start: usize) -> String {
        join(&self.tokens[start.min(self.tokens.len())..])
    }
}

pub(crate) fn join(tokens: &[Token<'_>]) -> String {
    tokens.iter().map(|t| t.text).collect::<Vec<_>>().join(" ")
}

pub(crate) fn decode(bytes: &[u8]) -> Result<&str> {
    std::str::from_utf8(bytes).map_err(|e| {
        let valid = &bytes[..e.valid_up_to()];
        let line = valid.iter().filter(|&&b| b == b'\n').count() + 1;
        let column = valid.iter().rev().take_while(|&&b| b != b'\n').count() + 1;
        Error::parse(line, column, "input is not valid UTF-8")
    })
}

pub(crate) fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    let mut column = 0;
    for (byte, ch) in text.char_indices() {
        column += 1;
        if ch.is_whitespace() {
            if let Some((b, c)) = start.take() {
                out.push(Token { column: c, text: &text[b..byte] });
            }
        } else if start.is_none() {
            start = Some((byte, column));
        }
    }
    if let Some((b, c)) = start {
        out.push(Token { column: c, text: &text[b..] });
    }
    out
}

/// Splits text into content lines. `#` starts a comment running to end of line.
pub(crate) fn lines(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let content = raw.split('#').next().unwrap_or("");
            let tokens = tokenize(content);
            (!tokens.is_empty()).then_some(Line { number: i + 1, tokens })
        })
        .collect()
}

pub(crate) fn parse_f64(line: &Line<'_>, index: usize, what: &str) -> Result<f64> {
    let tok = line
        .tokens
        .get(index)
        .ok_or_else(|| line.error(index, format!("missing {what}")))?;
    let value: f64 = tok
        .text
        .parse()
        .map_err(|_| line.error(index, format!("{what}: `{}` is not a number", tok.text)))?;
    if !value.is_finite() {
        return Err(line.error(index, format!("{what} must be finite")));
    }
    Ok(value)
}

pub(crate) fn parse_u64(line: &Line<'_>, index: usize, what: &str) -> Result<u64> {
    let tok = line
        .tokens
        .get(index)
        .ok_or_else(|| line.error(index, format!("missing {what}")))?;
    tok.text
        .parse()
        .map_err(|_| line.error(index, format!("{what}: `{}` is not a nonnegative integer", tok.text)))
}

/// Collapses runs of whitespace to single spaces and trims.
pub fn normalize_label(label: &str) -> String {
    label.split_whitespace().collect::<Vec<_>>().join(" ")
}

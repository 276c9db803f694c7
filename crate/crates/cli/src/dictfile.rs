//! Dictionary files: one rule per line, highest priority first.
//!
//! ```text
//! #bpetk-dict v1 alphabet=bytes
//! # comments and blank lines are ignored
//! a b
//! ab c
//! ```
//!
//! Each rule line holds the escaped left and right tokens separated by
//! whitespace (see [`crate::text`]). Without a header the bytes profile is
//! assumed.

use std::collections::HashMap;

use bpetk::{Dictionary, Rule, Token};
use thiserror::Error;

use crate::text::{escape, unescape, Alphabet, TextSymbol};

pub const HEADER_PREFIX: &str = "#bpetk-dict";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn error(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

/// Alphabet declared by the header, if the first line is one.
pub fn header_alphabet(text: &str) -> Result<Option<Alphabet>, ParseError> {
    let Some(first) = text.lines().next() else {
        return Ok(None);
    };
    let Some(rest) = first.strip_prefix(HEADER_PREFIX) else {
        return Ok(None);
    };
    let mut alphabet = Alphabet::Bytes;
    let mut fields = rest.split_whitespace();
    match fields.next() {
        Some("v1") => {}
        Some(version) => return Err(error(1, format!("unsupported format version `{version}`"))),
        None => return Err(error(1, "header is missing the format version")),
    }
    for field in fields {
        match field.split_once('=') {
            Some(("alphabet", value)) => {
                alphabet = value.parse().map_err(|e: String| error(1, e))?
            }
            _ => return Err(error(1, format!("unknown header field `{field}`"))),
        }
    }
    Ok(Some(alphabet))
}

/// Parses a dictionary of the profile `S`. The header, if present, must
/// declare the same profile.
pub fn parse<S: TextSymbol>(text: &str) -> Result<Dictionary<S>, ParseError> {
    if let Some(alphabet) = header_alphabet(text)? {
        if alphabet != S::ALPHABET {
            return Err(error(
                1,
                format!(
                    "dictionary declares alphabet {alphabet}, expected {}",
                    S::ALPHABET
                ),
            ));
        }
    }
    let mut rules = Vec::new();
    let mut seen: HashMap<(Vec<S>, Vec<S>), usize> = HashMap::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.trim_end_matches('\r');
        if content.trim().is_empty() || content.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let [left, right] = fields[..] else {
            return Err(error(
                line,
                format!("expected `LEFT RIGHT`, found {} fields", fields.len()),
            ));
        };
        let left: Vec<S> = unescape(left).map_err(|e| error(line, e))?;
        let right: Vec<S> = unescape(right).map_err(|e| error(line, e))?;
        if let Some(first) = seen.insert((left.clone(), right.clone()), line) {
            return Err(error(
                line,
                format!(
                    "duplicate rule `{} {}` (first on line {first})",
                    escape(&left),
                    escape(&right)
                ),
            ));
        }
        let token = |symbols: &[S]| Token::new(symbols).map_err(|e| error(line, e.to_string()));
        rules.push(Rule::new(token(&left)?, token(&right)?));
    }
    Dictionary::new(rules).map_err(|e| error(0, e.to_string()))
}

pub fn render<S: TextSymbol>(dict: &Dictionary<S>) -> String {
    let mut out = format!("{HEADER_PREFIX} v1 alphabet={}\n", S::ALPHABET);
    for rule in dict.rules() {
        out.push_str(&escape(rule.left.symbols()));
        out.push(' ');
        out.push_str(&escape(rule.right.symbols()));
        out.push('\n');
    }
    out
}

/// A dictionary of whichever profile its file declares.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnyDictionary {
    Bytes(Dictionary<u8>),
    Chars(Dictionary<char>),
}

pub fn parse_any(text: &str) -> Result<AnyDictionary, ParseError> {
    match header_alphabet(text)?.unwrap_or_default() {
        Alphabet::Bytes => parse(text).map(AnyDictionary::Bytes),
        Alphabet::Chars => parse(text).map(AnyDictionary::Chars),
    }
}

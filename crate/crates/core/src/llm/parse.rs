use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

/// Keys that may carry the generated code, in priority order.
pub const CODE_FIELDS: [&str; 3] = ["code", "augmented_code", "source"];

const EXCERPT_CHARS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictValue {
    Yes,
    No,
    Unparseable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub value: VerdictValue,
    /// Last 500 characters of the raw response.
    pub reasoning_excerpt: String,
}

impl Verdict {
    pub fn unparseable(reasoning_excerpt: impl Into<String>) -> Self {
        Self {
            value: VerdictValue::Unparseable,
            reasoning_excerpt: reasoning_excerpt.into(),
        }
    }

    pub fn is_yes(&self) -> bool {
        self.value == VerdictValue::Yes
    }
}

fn answer_marker() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\banswer\b[\s*_]*:").expect("static pattern"))
}

fn yes_no() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\b(yes|no)\b").expect("static pattern"))
}

/// Reads the model's Yes/No.
///
/// The answer region starts after the last `Answer:` marker (the whole text
/// when there is none). The last standalone `yes`/`no` in that region wins.
pub fn parse_verdict(raw_response: &str) -> Verdict {
    let region = match answer_marker().find_iter(raw_response).last() {
        Some(m) => &raw_response[m.end()..],
        None => raw_response,
    };
    let value = match yes_no().find_iter(region).last() {
        Some(m) if m.as_str().eq_ignore_ascii_case("yes") => VerdictValue::Yes,
        Some(_) => VerdictValue::No,
        None => VerdictValue::Unparseable,
    };
    Verdict {
        value,
        reasoning_excerpt: tail_chars(raw_response, EXCERPT_CHARS).to_string(),
    }
}

fn tail_chars(s: &str, n: usize) -> &str {
    if n == 0 {
        return "";
    }
    match s.char_indices().rev().nth(n - 1) {
        Some((i, _)) => &s[i..],
        None => s,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationPayload {
    pub code: String,
    pub extra_fields: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AugmentParseError {
    #[error("no JSON object found in the response")]
    NoJson,
    #[error("JSON object has no string field among {}", CODE_FIELDS.join(", "))]
    MissingCodeField,
}

/// Extracts generated code from the first well-formed JSON object in the
/// text, fenced or not.
pub fn parse_augmentation(raw_response: &str) -> Result<AugmentationPayload, AugmentParseError> {
    let object = first_json_object(raw_response).ok_or(AugmentParseError::NoJson)?;
    let key = CODE_FIELDS
        .iter()
        .find(|k| object.contains_key(**k))
        .ok_or(AugmentParseError::MissingCodeField)?;
    let mut extra_fields = object;
    match extra_fields.remove(*key) {
        Some(Value::String(code)) => Ok(AugmentationPayload { code, extra_fields }),
        _ => Err(AugmentParseError::MissingCodeField),
    }
}

fn first_json_object(text: &str) -> Option<Map<String, Value>> {
    text.match_indices('{').find_map(|(i, _)| {
        let mut stream = serde_json::Deserializer::from_str(&text[i..]).into_iter::<Value>();
        match stream.next() {
            Some(Ok(Value::Object(map))) => Some(map),
            _ => None,
        }
    })
}

//! Minimal `{name}` placeholder templates.
//!
//! `{{` and `}}` produce literal braces. Any other brace that does not form a
//! known placeholder is rejected at parse time.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Text(String),
    Slot(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TemplateSyntaxError {
    UnknownPlaceholder(String),
    Malformed { offset: usize, reason: &'static str },
}

impl Template {
    pub fn parse(src: &str, allowed: &[&str]) -> Result<Self, TemplateSyntaxError> {
        let mut segments = Vec::new();
        let mut text = String::new();
        let bytes = src.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            match bytes[i] {
                b'{' if bytes.get(i + 1) == Some(&b'{') => {
                    text.push('{');
                    i += 2;
                }
                b'}' if bytes.get(i + 1) == Some(&b'}') => {
                    text.push('}');
                    i += 2;
                }
                b'{' => {
                    let rest = &src[i + 1..];
                    let end = rest.find('}').ok_or(TemplateSyntaxError::Malformed {
                        offset: i,
                        reason: "unclosed '{'",
                    })?;
                    let name = &rest[..end];
                    if name.is_empty() || !name.bytes().all(|b| b.is_ascii_lowercase() || b == b'_')
                    {
                        return Err(TemplateSyntaxError::Malformed {
                            offset: i,
                            reason: "placeholder names are lowercase letters and '_' (use '{{' for a literal brace)",
                        });
                    }
                    if !allowed.contains(&name) {
                        return Err(TemplateSyntaxError::UnknownPlaceholder(name.to_string()));
                    }
                    if !text.is_empty() {
                        segments.push(Segment::Text(std::mem::take(&mut text)));
                    }
                    segments.push(Segment::Slot(name.to_string()));
                    i += end + 2;
                }
                b'}' => {
                    return Err(TemplateSyntaxError::Malformed {
                        offset: i,
                        reason: "unmatched '}' (use '}}' for a literal brace)",
                    })
                }
                _ => {
                    // copy the whole UTF-8 scalar
                    let ch = src[i..].chars().next().expect("in bounds");
                    text.push(ch);
                    i += ch.len_utf8();
                }
            }
        }
        if !text.is_empty() {
            segments.push(Segment::Text(text));
        }
        Ok(Self { segments })
    }

    pub fn placeholders(&self) -> impl Iterator<Item = &str> {
        self.segments.iter().filter_map(|s| match s {
            Segment::Slot(name) => Some(name.as_str()),
            Segment::Text(_) => None,
        })
    }

    /// Substitutes every slot. Slots missing from `vars` render empty; the
    /// callers always supply the full allowed set.
    pub fn render(&self, vars: &BTreeMap<&str, &str>) -> String {
        let mut out = String::new();
        for seg in &self.segments {
            match seg {
                Segment::Text(t) => out.push_str(t),
                Segment::Slot(name) => out.push_str(vars.get(name.as_str()).copied().unwrap_or("")),
            }
        }
        out
    }
}

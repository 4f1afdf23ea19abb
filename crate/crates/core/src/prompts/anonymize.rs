use std::sync::OnceLock;

use regex::Regex;

use crate::taxonomy::CATEGORY_NAMES;

/// Outcome of scanning text for category-name phrases.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnonymizationReport {
    /// Offending phrases in order of appearance, as written in the text.
    pub offenders: Vec<String>,
}

impl AnonymizationReport {
    pub fn passed(&self) -> bool {
        self.offenders.is_empty()
    }
}

fn patterns() -> &'static [Regex] {
    static PATTERNS: OnceLock<Vec<Regex>> = OnceLock::new();
    PATTERNS.get_or_init(|| {
        let names = CATEGORY_NAMES
            .iter()
            .map(|n| regex::escape(n).replace('/', r"\s*/\s*"))
            .collect::<Vec<_>>()
            .join("|");
        let letter = r"\(\s*[A-Ja-j]\s*\)";
        [
            // "Input error", "loop errors", "Condition type", "Output category"
            format!(r"(?i)\b(?:{names})\s+(?:errors?|categor(?:y|ies)|types?)\b"),
            // "(A) Input", "(H): Array/String"
            format!(r"(?i){letter}\s*:?\s*(?:{names})\b"),
            // "Input (A)"
            format!(r"(?i)\b(?:{names})\s*{letter}"),
            // the slash form only ever names the category
            r"(?i)\barray\s*/\s*string\b".to_string(),
        ]
        .iter()
        .map(|p| Regex::new(p).expect("static pattern"))
        .collect()
    })
}

/// Fails when `text` names one of the ten categories as a category phrase.
///
/// Bare words stay usable: "the input-handling section" passes while
/// "an Input error" does not. Matching is case-insensitive.
pub fn anonymization_check(text: &str) -> AnonymizationReport {
    let mut spans: Vec<(usize, usize)> = patterns()
        .iter()
        .flat_map(|re| re.find_iter(text).map(|m| (m.start(), m.end())))
        .collect();
    spans.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for (start, end) in spans {
        match merged.last_mut() {
            Some(last) if start < last.1 => last.1 = last.1.max(end),
            _ => merged.push((start, end)),
        }
    }
    AnonymizationReport {
        offenders: merged
            .into_iter()
            .map(|(s, e)| text[s..e].to_string())
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_words_pass() {
        assert!(anonymization_check("inject error (A) into the input-handling section").passed());
        assert!(anonymization_check("").passed());
        assert!(anonymization_check("read the input, loop over it and print the output").passed());
        assert!(anonymization_check("a conditional statement with a wrong condition").passed());
    }

    #[test]
    fn category_phrases_fail() {
        let r = anonymization_check("this is an Input error");
        assert_eq!(r.offenders, vec!["Input error"]);

        let r = anonymization_check("see (H) Array/String and a loop error");
        assert_eq!(r.offenders, vec!["(H) Array/String", "loop error"]);

        assert!(!anonymization_check("array / string").passed());
        assert!(!anonymization_check("CONCEPTUAL ERRORS").passed());
        assert!(!anonymization_check("Computation (D)").passed());
        assert!(!anonymization_check("the Branching category").passed());
    }

    #[test]
    fn overlapping_matches_are_reported_once() {
        let r = anonymization_check("(H) Array/String error");
        assert_eq!(r.offenders, vec!["(H) Array/String error"]);
    }
}

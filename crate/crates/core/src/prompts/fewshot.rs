use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::PromptError;
use crate::taxonomy::ErrorId;

const BUILTIN_FEWSHOT: &str = include_str!("../../data/fewshot.jsonl");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Answer {
    Yes,
    No,
}

impl Answer {
    pub fn as_str(self) -> &'static str {
        match self {
            Answer::Yes => "Yes",
            Answer::No => "No",
        }
    }
}

/// One chain-of-thought shot. Stored as a line of `fewshot.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FewShotExample {
    #[serde(rename = "type")]
    pub error_type: ErrorId,
    pub problem_summary: String,
    #[serde(rename = "code")]
    pub code_snippet: String,
    pub reasoning: String,
    pub verdict: Answer,
}

impl FewShotExample {
    /// The last standalone yes/no in the reasoning's final line.
    fn concluded(&self) -> Option<Answer> {
        static TOKEN: OnceLock<Regex> = OnceLock::new();
        let re = TOKEN.get_or_init(|| Regex::new(r"(?i)\b(yes|no)\b").expect("static pattern"));
        let last_line = self.reasoning.trim_end().lines().last()?;
        let token = re.find_iter(last_line).last()?;
        Some(if token.as_str().eq_ignore_ascii_case("yes") {
            Answer::Yes
        } else {
            Answer::No
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FewShotBank {
    examples_by_type: BTreeMap<ErrorId, Vec<FewShotExample>>,
}

impl FewShotBank {
    pub fn builtin() -> Self {
        Self::from_jsonl_str(BUILTIN_FEWSHOT).expect("bundled few-shot bank is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PromptError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| PromptError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_jsonl_str(&text)
    }

    pub fn from_jsonl_str(text: &str) -> Result<Self, PromptError> {
        let mut examples_by_type: BTreeMap<ErrorId, Vec<FewShotExample>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let ex: FewShotExample =
                serde_json::from_str(line).map_err(|e| PromptError::FewShot {
                    line: line_no,
                    message: e.to_string(),
                })?;
            match ex.concluded() {
                Some(v) if v == ex.verdict => {}
                found => {
                    return Err(PromptError::FewShot {
                        line: line_no,
                        message: format!(
                            "verdict {} does not match the reasoning's final line (found {:?})",
                            ex.verdict.as_str(),
                            found.map(Answer::as_str)
                        ),
                    })
                }
            }
            examples_by_type.entry(ex.error_type).or_default().push(ex);
        }
        if let Some(missing) = ErrorId::ALL
            .iter()
            .find(|id| !examples_by_type.contains_key(id))
        {
            return Err(PromptError::Config(format!(
                "few-shot bank has no examples for {missing}"
            )));
        }
        Ok(Self { examples_by_type })
    }

    pub fn examples(&self, id: ErrorId) -> &[FewShotExample] {
        self.examples_by_type
            .get(&id)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Drops every example of `id`. Only useful for exercising error paths.
    pub fn without(mut self, id: ErrorId) -> Self {
        self.examples_by_type.remove(&id);
        self
    }
}

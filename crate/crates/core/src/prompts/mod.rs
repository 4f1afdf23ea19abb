//! Prompt assembly.
//!
//! A classification prompt checks one code sample for one error type and is
//! made of seven sections; ten of them (one per type) are sent for every
//! sample. An augmentation prompt asks the model to inject one error type into
//! accepted code and is made of six sections, with every type referred to by
//! its letter only.
//!
//! Section wording lives in `.tmpl` files so it can be edited without a
//! rebuild. The bundled defaults are under `data/templates`.

mod anonymize;
mod fewshot;
mod template;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

pub use anonymize::{anonymization_check, AnonymizationReport};
pub use fewshot::{Answer, FewShotBank, FewShotExample};
pub use template::{Template, TemplateSyntaxError};

use crate::taxonomy::{ErrorId, Taxonomy};

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("template {file}: {message}")]
    Template { file: String, message: String },
    #[error("few-shot bank line {line}: {message}")]
    FewShot { line: usize, message: String },
    #[error("rendered augmentation prompt names error categories: {}", offenders.join(", "))]
    Anonymization { offenders: Vec<String> },
}

/// Section of a classification prompt, in rendering order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassifySection {
    BackgroundKnowledge,
    ErrorDescription,
    FewShotCoT,
    Instruction,
    CodeWithError,
    ToTPrompt,
    QuestionOutputIndicator,
}

impl ClassifySection {
    pub const ORDER: [ClassifySection; 7] = [
        ClassifySection::BackgroundKnowledge,
        ClassifySection::ErrorDescription,
        ClassifySection::FewShotCoT,
        ClassifySection::Instruction,
        ClassifySection::CodeWithError,
        ClassifySection::ToTPrompt,
        ClassifySection::QuestionOutputIndicator,
    ];

    pub fn file_stem(self) -> &'static str {
        match self {
            ClassifySection::BackgroundKnowledge => "background_knowledge",
            ClassifySection::ErrorDescription => "error_description",
            ClassifySection::FewShotCoT => "few_shot_cot",
            ClassifySection::Instruction => "instruction",
            ClassifySection::CodeWithError => "code_with_error",
            ClassifySection::ToTPrompt => "tot_prompt",
            ClassifySection::QuestionOutputIndicator => "question_output_indicator",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ClassifySection::BackgroundKnowledge => "Background Knowledge",
            ClassifySection::ErrorDescription => "Error Description",
            ClassifySection::FewShotCoT => "Examples",
            ClassifySection::Instruction => "Instruction",
            ClassifySection::CodeWithError => "Code to Check",
            ClassifySection::ToTPrompt => "Expert Discussion",
            ClassifySection::QuestionOutputIndicator => "Question",
        }
    }
}

/// Section of an augmentation prompt, in rendering order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AugmentSection {
    BackgroundKnowledge,
    AnonymizedDescriptions,
    CodeWithoutError,
    Instruction,
    AugmentationRemarks,
    OutputFormatInduction,
}

impl AugmentSection {
    pub const ORDER: [AugmentSection; 6] = [
        AugmentSection::BackgroundKnowledge,
        AugmentSection::AnonymizedDescriptions,
        AugmentSection::CodeWithoutError,
        AugmentSection::Instruction,
        AugmentSection::AugmentationRemarks,
        AugmentSection::OutputFormatInduction,
    ];

    pub fn file_stem(self) -> &'static str {
        match self {
            AugmentSection::BackgroundKnowledge => "background_knowledge",
            AugmentSection::AnonymizedDescriptions => "anonymized_descriptions",
            AugmentSection::CodeWithoutError => "code_without_error",
            AugmentSection::Instruction => "instruction",
            AugmentSection::AugmentationRemarks => "augmentation_remarks",
            AugmentSection::OutputFormatInduction => "output_format_induction",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            AugmentSection::BackgroundKnowledge => "Background Knowledge",
            AugmentSection::AnonymizedDescriptions => "Error Descriptions",
            AugmentSection::CodeWithoutError => "Correct Code",
            AugmentSection::Instruction => "Instruction",
            AugmentSection::AugmentationRemarks => "Remarks",
            AugmentSection::OutputFormatInduction => "Response Format",
        }
    }
}

/// Prefix of the line that opens every section in rendered prompts.
pub const SECTION_MARKER: &str = "### ";

const CLASSIFY_SLOTS: &[&str] = &["error_names", "description", "examples", "problem", "code"];
const AUGMENT_SLOTS: &[&str] = &[
    "descriptions",
    "ordering",
    "problem",
    "code",
    "target",
    "remarks",
];

const BUILTIN_CLASSIFY: [&str; 7] = [
    include_str!("../../data/templates/classify/background_knowledge.tmpl"),
    include_str!("../../data/templates/classify/error_description.tmpl"),
    include_str!("../../data/templates/classify/few_shot_cot.tmpl"),
    include_str!("../../data/templates/classify/instruction.tmpl"),
    include_str!("../../data/templates/classify/code_with_error.tmpl"),
    include_str!("../../data/templates/classify/tot_prompt.tmpl"),
    include_str!("../../data/templates/classify/question_output_indicator.tmpl"),
];

const BUILTIN_AUGMENT: [&str; 6] = [
    include_str!("../../data/templates/augment/background_knowledge.tmpl"),
    include_str!("../../data/templates/augment/anonymized_descriptions.tmpl"),
    include_str!("../../data/templates/augment/code_without_error.tmpl"),
    include_str!("../../data/templates/augment/instruction.tmpl"),
    include_str!("../../data/templates/augment/augmentation_remarks.tmpl"),
    include_str!("../../data/templates/augment/output_format_induction.tmpl"),
];

/// Parsed section templates for both prompt kinds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Templates {
    classify: Vec<Template>,
    augment: Vec<Template>,
}

impl Templates {
    pub fn builtin() -> Self {
        let classify = ClassifySection::ORDER
            .iter()
            .zip(BUILTIN_CLASSIFY)
            .map(|(s, src)| {
                parse_template(
                    &format!("classify/{}.tmpl", s.file_stem()),
                    src,
                    CLASSIFY_SLOTS,
                )
            })
            .collect::<Result<Vec<_>, _>>()
            .expect("bundled classify templates are valid");
        let augment = AugmentSection::ORDER
            .iter()
            .zip(BUILTIN_AUGMENT)
            .map(|(s, src)| {
                parse_template(
                    &format!("augment/{}.tmpl", s.file_stem()),
                    src,
                    AUGMENT_SLOTS,
                )
            })
            .collect::<Result<Vec<_>, _>>()
            .expect("bundled augment templates are valid");
        Self { classify, augment }
    }

    /// Loads `classify/<section>.tmpl` and `augment/<section>.tmpl` from `dir`.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, PromptError> {
        let dir = dir.as_ref();
        let read = |rel: String, slots: &[&str]| -> Result<Template, PromptError> {
            let path = dir.join(&rel);
            if !path.is_file() {
                return Err(PromptError::Config(format!(
                    "missing template section {} in {}",
                    rel,
                    dir.display()
                )));
            }
            let src = std::fs::read_to_string(&path).map_err(|source| PromptError::Io {
                path: path.display().to_string(),
                source,
            })?;
            parse_template(&rel, &src, slots)
        };
        let classify = ClassifySection::ORDER
            .iter()
            .map(|s| read(format!("classify/{}.tmpl", s.file_stem()), CLASSIFY_SLOTS))
            .collect::<Result<Vec<_>, _>>()?;
        let augment = AugmentSection::ORDER
            .iter()
            .map(|s| read(format!("augment/{}.tmpl", s.file_stem()), AUGMENT_SLOTS))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { classify, augment })
    }

    fn classify(&self, section: ClassifySection) -> &Template {
        &self.classify[section as usize]
    }

    fn augment(&self, section: AugmentSection) -> &Template {
        &self.augment[section as usize]
    }
}

fn parse_template(file: &str, src: &str, slots: &[&str]) -> Result<Template, PromptError> {
    Template::parse(src, slots).map_err(|e| PromptError::Template {
        file: file.to_string(),
        message: match e {
            TemplateSyntaxError::UnknownPlaceholder(name) => {
                format!(
                    "unknown placeholder {{{name}}} (allowed: {})",
                    slots.join(", ")
                )
            }
            TemplateSyntaxError::Malformed { offset, reason } => format!("byte {offset}: {reason}"),
        },
    })
}

/// Problem statement plus code, the content slot of both prompt kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeSample<'a> {
    pub problem: &'a str,
    pub code: &'a str,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassificationPrompt {
    pub target_type: ErrorId,
    pub sections: Vec<(ClassifySection, String)>,
    pub rendered: String,
}

impl ClassificationPrompt {
    pub fn section(&self, id: ClassifySection) -> &str {
        section_text(&self.sections, id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentationPrompt {
    pub target_type: ErrorId,
    pub sections: Vec<(AugmentSection, String)>,
    pub rendered: String,
}

impl AugmentationPrompt {
    pub fn section(&self, id: AugmentSection) -> &str {
        section_text(&self.sections, id)
    }
}

fn section_text<S: PartialEq + Copy>(sections: &[(S, String)], id: S) -> &str {
    sections
        .iter()
        .find(|(s, _)| *s == id)
        .map(|(_, t)| t.as_str())
        .unwrap_or("")
}

fn assemble<S: Copy>(sections: &[(S, String)], title: impl Fn(S) -> &'static str) -> String {
    let mut out = String::new();
    for (i, (id, body)) in sections.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        out.push_str(SECTION_MARKER);
        out.push_str(title(*id));
        out.push('\n');
        out.push_str(body.trim_end());
    }
    out.push('\n');
    out
}

/// Builds prompts from one taxonomy, template set and few-shot bank.
#[derive(Debug, Clone, Copy)]
pub struct PromptBuilder<'a> {
    pub taxonomy: &'a Taxonomy,
    pub templates: &'a Templates,
    pub bank: &'a FewShotBank,
}

impl<'a> PromptBuilder<'a> {
    pub fn new(taxonomy: &'a Taxonomy, templates: &'a Templates, bank: &'a FewShotBank) -> Self {
        Self {
            taxonomy,
            templates,
            bank,
        }
    }

    pub fn build_classification_prompt(
        &self,
        sample: CodeSample<'_>,
        target: ErrorId,
    ) -> Result<ClassificationPrompt, PromptError> {
        let shots = self.bank.examples(target);
        if shots.is_empty() {
            return Err(PromptError::Config(format!(
                "few-shot bank has no examples for {target}"
            )));
        }
        let error_names = self.error_names();
        let description = self.classification_description(target);
        let examples = render_shots(shots);
        let vars: BTreeMap<&str, &str> = BTreeMap::from([
            ("error_names", error_names.as_str()),
            ("description", description.as_str()),
            ("examples", examples.as_str()),
            ("problem", sample.problem),
            ("code", sample.code),
        ]);
        let sections: Vec<(ClassifySection, String)> = ClassifySection::ORDER
            .iter()
            .map(|&s| (s, self.templates.classify(s).render(&vars)))
            .collect();
        let rendered = assemble(&sections, ClassifySection::title);
        Ok(ClassificationPrompt {
            target_type: target,
            sections,
            rendered,
        })
    }

    /// One prompt per type, in `A..J` order.
    pub fn build_all_classification_prompts(
        &self,
        sample: CodeSample<'_>,
    ) -> Result<Vec<ClassificationPrompt>, PromptError> {
        ErrorId::ALL
            .iter()
            .map(|&t| self.build_classification_prompt(sample, t))
            .collect()
    }

    pub fn build_augmentation_prompt(
        &self,
        source: CodeSample<'_>,
        target: ErrorId,
        remarks: &str,
    ) -> Result<AugmentationPrompt, PromptError> {
        if remarks.trim().is_empty() {
            return Err(PromptError::Config(
                "augmentation remarks must list the errors possible for this problem".into(),
            ));
        }
        let descriptions = self.anonymized_descriptions();
        let ordering = self.taxonomy.ordering_string();
        let letter = target.to_string();
        let vars: BTreeMap<&str, &str> = BTreeMap::from([
            ("descriptions", descriptions.as_str()),
            ("ordering", ordering.as_str()),
            ("problem", source.problem),
            ("code", source.code),
            ("target", letter.as_str()),
            ("remarks", remarks),
        ]);
        let sections: Vec<(AugmentSection, String)> = AugmentSection::ORDER
            .iter()
            .map(|&s| (s, self.templates.augment(s).render(&vars)))
            .collect();
        let rendered = assemble(&sections, AugmentSection::title);
        let report = anonymization_check(&rendered);
        if !report.passed() {
            return Err(PromptError::Anonymization {
                offenders: report.offenders,
            });
        }
        Ok(AugmentationPrompt {
            target_type: target,
            sections,
            rendered,
        })
    }

    fn error_names(&self) -> String {
        self.taxonomy
            .types()
            .iter()
            .map(|t| format!("({}) {}", t.id, t.name))
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Definition, occurrence examples and the restrictions implied by every
    /// higher-ranked coincidence neighbour.
    pub fn classification_description(&self, target: ErrorId) -> String {
        let t = self.taxonomy.get(target);
        let mut out = format!(
            "({}) {} error: {}\nOccurrence examples:\n",
            t.id, t.name, t.description
        );
        for (i, ex) in t.occurrence_examples.iter().enumerate() {
            let _ = writeln!(out, "{}. {}", i + 1, ex);
        }
        out.push_str("Restrictions:\n");
        let higher = self.taxonomy.higher_ranked_neighbors(target);
        if higher.is_empty() {
            out.push_str("- None. No other type takes priority over this one.\n");
        }
        for (n, edge) in higher {
            let _ = writeln!(
                out,
                "- Do not report this type when {}. That case belongs to ({}) {}, which has higher priority.",
                edge.note,
                n,
                self.taxonomy.get(n).name
            );
        }
        out
    }

    fn anonymized_descriptions(&self) -> String {
        let mut out = String::new();
        for t in self.taxonomy.types() {
            let _ = writeln!(out, "({}) {}", t.id, t.description);
            for (i, ex) in t.occurrence_examples.iter().enumerate() {
                let _ = writeln!(out, "    {}. {}", i + 1, ex);
            }
        }
        out
    }
}

fn render_shots(shots: &[FewShotExample]) -> String {
    let mut out = String::new();
    for (i, ex) in shots.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = write!(
            out,
            "Example {}\nProblem: {}\nCode:\n```\n{}\n```\nReasoning:\n{}\nAnswer: {}\n",
            i + 1,
            ex.problem_summary,
            ex.code_snippet.trim_end(),
            ex.reasoning.trim_end(),
            ex.verdict.as_str()
        );
    }
    out
}

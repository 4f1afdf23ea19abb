//! Classification metrics and augmentation outcome tables.
//!
//! Every metric is kept as an exact integer pair; rounding happens only when
//! rendering.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{AugmentedSample, LabeledSample, Outcome};
use crate::pipeline::ClassificationResult;
use crate::taxonomy::{ErrorId, Taxonomy};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no labeled sample {0}")]
    Unlabeled(String),
    #[error("augmentations still unresolved: {}", .0.join(", "))]
    Unresolved(Vec<String>),
    #[error("unknown {kind} {value:?}")]
    InvalidArgument { kind: &'static str, value: String },
}

/// `correct` out of `total`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Fraction {
    pub correct: u64,
    pub total: u64,
}

impl Fraction {
    pub fn new(correct: u64, total: u64) -> Self {
        Self { correct, total }
    }

    /// Nearest whole percent, halves rounded up.
    pub fn percent(&self) -> Option<u64> {
        (self.total > 0).then(|| (200 * self.correct + self.total) / (2 * self.total))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.percent() {
            Some(p) => write!(f, "{p}% ({}/{})", self.correct, self.total),
            None => write!(f, "n/a ({}/{})", self.correct, self.total),
        }
    }
}

/// `numerator / denominator` with a non-zero denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rate {
    pub numerator: u64,
    pub denominator: u64,
}

impl Rate {
    /// `None` when the denominator is zero (not applicable).
    pub fn new(numerator: u64, denominator: u64) -> Option<Self> {
        (denominator > 0).then_some(Self {
            numerator,
            denominator,
        })
    }

    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

/// Three decimals with trailing zeros dropped, or `n/a`.
pub fn format_rate(rate: Option<f64>) -> String {
    match rate {
        None => "n/a".into(),
        Some(v) => {
            let s = format!("{v:.3}");
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FprMode {
    /// Yes answers on prompts for types the sample is not labeled with, over
    /// the number of such samples.
    Negatives,
    /// Yes answers on incorrect prompts among samples labeled with the type,
    /// over ten times the number of those samples.
    PaperRowwise,
}

impl FprMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FprMode::Negatives => "negatives",
            FprMode::PaperRowwise => "paper-rowwise",
        }
    }
}

impl FromStr for FprMode {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "negatives" => Ok(FprMode::Negatives),
            "paper-rowwise" => Ok(FprMode::PaperRowwise),
            _ => Err(EvalError::InvalidArgument {
                kind: "FPR mode",
                value: s.into(),
            }),
        }
    }
}

fn labels_for<'a>(
    results: &'a [ClassificationResult],
    samples: &'a [LabeledSample],
) -> Result<Vec<(&'a ClassificationResult, &'a LabeledSample)>, EvalError> {
    let by_id: HashMap<&str, &LabeledSample> = samples.iter().map(|s| (s.id.as_str(), s)).collect();
    results
        .iter()
        .map(|r| match by_id.get(r.sample_ref.as_str()) {
            Some(s) if !s.label.is_empty() => Ok((r, *s)),
            _ => Err(EvalError::Unlabeled(r.sample_ref.clone())),
        })
        .collect()
}

/// Per-type recall: of the samples labeled with a type, how many got Yes on
/// that type's prompt.
pub fn accuracy(
    results: &[ClassificationResult],
    samples: &[LabeledSample],
) -> Result<BTreeMap<ErrorId, Fraction>, EvalError> {
    let mut out: BTreeMap<ErrorId, Fraction> = ErrorId::ALL
        .iter()
        .map(|&t| (t, Fraction::default()))
        .collect();
    for (r, s) in labels_for(results, samples)? {
        for t in s.label.types() {
            let cell = out.get_mut(&t).expect("all types present");
            cell.total += 1;
            cell.correct += r.said_yes(t) as u64;
        }
    }
    Ok(out)
}

pub fn fpr(
    results: &[ClassificationResult],
    samples: &[LabeledSample],
    mode: FprMode,
) -> Result<BTreeMap<ErrorId, Option<Rate>>, EvalError> {
    let pairs = labels_for(results, samples)?;
    let mut counts: BTreeMap<ErrorId, (u64, u64)> =
        ErrorId::ALL.iter().map(|&t| (t, (0, 0))).collect();
    for (r, s) in pairs {
        match mode {
            FprMode::Negatives => {
                for t in ErrorId::ALL.into_iter().filter(|t| !s.label.has(*t)) {
                    let c = counts.get_mut(&t).expect("all types present");
                    c.0 += r.said_yes(t) as u64;
                    c.1 += 1;
                }
            }
            FprMode::PaperRowwise => {
                let false_yes = ErrorId::ALL
                    .into_iter()
                    .filter(|u| !s.label.has(*u) && r.said_yes(*u))
                    .count() as u64;
                for t in s.label.types() {
                    let c = counts.get_mut(&t).expect("all types present");
                    c.0 += false_yes;
                    c.1 += ErrorId::ALL.len() as u64;
                }
            }
        }
    }
    Ok(counts
        .into_iter()
        .map(|(t, (n, d))| (t, Rate::new(n, d)))
        .collect())
}

/// Mean over the types where the rate is applicable.
pub fn mean_rate(rates: &BTreeMap<ErrorId, Option<Rate>>) -> Option<f64> {
    let vals: Vec<f64> = rates.values().flatten().map(Rate::value).collect();
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeMetrics {
    pub accuracy: Fraction,
    pub fpr_negatives: Option<Rate>,
    pub fpr_paper_rowwise: Option<Rate>,
}

impl TypeMetrics {
    pub fn fpr(&self, mode: FprMode) -> Option<Rate> {
        match mode {
            FprMode::Negatives => self.fpr_negatives,
            FprMode::PaperRowwise => self.fpr_paper_rowwise,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub fpr_mode: FprMode,
    pub per_type: BTreeMap<ErrorId, TypeMetrics>,
    pub average_accuracy: Fraction,
    pub average_fpr_negatives: Option<f64>,
    pub average_fpr_paper_rowwise: Option<f64>,
    /// Samples with at least one Unparseable verdict.
    pub samples_with_unparseable: u64,
    pub config_snapshot: String,
}

impl EvalReport {
    pub fn average_fpr(&self, mode: FprMode) -> Option<f64> {
        match mode {
            FprMode::Negatives => self.average_fpr_negatives,
            FprMode::PaperRowwise => self.average_fpr_paper_rowwise,
        }
    }
}

pub fn evaluate(
    results: &[ClassificationResult],
    samples: &[LabeledSample],
    fpr_mode: FprMode,
    config_snapshot: impl Into<String>,
) -> Result<EvalReport, EvalError> {
    let acc = accuracy(results, samples)?;
    let neg = fpr(results, samples, FprMode::Negatives)?;
    let row = fpr(results, samples, FprMode::PaperRowwise)?;
    let per_type = ErrorId::ALL
        .iter()
        .map(|t| {
            let m = TypeMetrics {
                accuracy: acc[t],
                fpr_negatives: neg[t],
                fpr_paper_rowwise: row[t],
            };
            (*t, m)
        })
        .collect();
    let average_accuracy = acc.values().fold(Fraction::default(), |a, f| {
        Fraction::new(a.correct + f.correct, a.total + f.total)
    });
    Ok(EvalReport {
        fpr_mode,
        per_type,
        average_accuracy,
        average_fpr_negatives: mean_rate(&neg),
        average_fpr_paper_rowwise: mean_rate(&row),
        samples_with_unparseable: results.iter().filter(|r| r.unparseable_count > 0).count() as u64,
        config_snapshot: config_snapshot.into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AugmentationRow {
    pub augmented: u64,
    pub right: u64,
    pub other: u64,
    pub not_logical: u64,
}

impl AugmentationRow {
    fn add(&mut self, o: &AugmentationRow) {
        self.augmented += o.augmented;
        self.right += o.right;
        self.other += o.other;
        self.not_logical += o.not_logical;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentationReport {
    pub per_type: BTreeMap<ErrorId, AugmentationRow>,
    pub totals: AugmentationRow,
    /// Attempts that produced no code, by target type. Not part of the table.
    pub failed: BTreeMap<ErrorId, u64>,
}

impl AugmentationReport {
    pub fn failed_total(&self) -> u64 {
        self.failed.values().sum()
    }
}

pub fn augmentation_table(augmented: &[AugmentedSample]) -> Result<AugmentationReport, EvalError> {
    let unresolved: Vec<String> = augmented
        .iter()
        .filter(|a| !a.is_failed() && a.outcome == Outcome::Unresolved)
        .map(|a| a.id.clone())
        .collect();
    if !unresolved.is_empty() {
        return Err(EvalError::Unresolved(unresolved));
    }
    let mut per_type: BTreeMap<ErrorId, AugmentationRow> = ErrorId::ALL
        .iter()
        .map(|&t| (t, AugmentationRow::default()))
        .collect();
    let mut failed: BTreeMap<ErrorId, u64> = ErrorId::ALL.iter().map(|&t| (t, 0)).collect();
    for a in augmented {
        if a.is_failed() {
            *failed.get_mut(&a.target_type).expect("all types present") += 1;
            continue;
        }
        let row = per_type.get_mut(&a.target_type).expect("all types present");
        row.augmented += 1;
        match a.outcome {
            Outcome::RightAugmentation => row.right += 1,
            Outcome::OtherTypeOfLogicalError => row.other += 1,
            Outcome::NotALogicalError => row.not_logical += 1,
            Outcome::Unresolved => unreachable!("rejected above"),
        }
    }
    let mut totals = AugmentationRow::default();
    for row in per_type.values() {
        totals.add(row);
    }
    Ok(AugmentationReport {
        per_type,
        totals,
        failed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

impl FromStr for ReportFormat {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "json" => Ok(ReportFormat::Json),
            _ => Err(EvalError::InvalidArgument {
                kind: "report format",
                value: s.into(),
            }),
        }
    }
}

fn type_label(taxonomy: &Taxonomy, t: ErrorId) -> String {
    format!("({t}) {}", taxonomy.get(t).name)
}

const LABEL_WIDTH: usize = 24;

/// Accuracy and FPR table. `verbose` adds the FPR column of the other mode
/// and the unparseable count.
pub fn render_report(
    report: &EvalReport,
    format: ReportFormat,
    taxonomy: &Taxonomy,
    verbose: bool,
) -> String {
    if format == ReportFormat::Json {
        return serde_json::to_string_pretty(report).expect("report serializes") + "\n";
    }
    let modes: Vec<FprMode> = if verbose {
        vec![report.fpr_mode, other_mode(report.fpr_mode)]
    } else {
        vec![report.fpr_mode]
    };
    let mut out = format!("{:<LABEL_WIDTH$}{:<16}", "Type", "Accuracy");
    for m in &modes {
        let _ = write!(out, "{:<22}", format!("FPR ({})", m.as_str()));
    }
    push_line_end(&mut out);
    for (t, m) in &report.per_type {
        let _ = write!(
            out,
            "{:<LABEL_WIDTH$}{:<16}",
            type_label(taxonomy, *t),
            m.accuracy.to_string()
        );
        for mode in &modes {
            let _ = write!(out, "{:<22}", format_rate(m.fpr(*mode).map(|r| r.value())));
        }
        push_line_end(&mut out);
    }
    let _ = write!(
        out,
        "{:<LABEL_WIDTH$}{:<16}",
        "AVG",
        report.average_accuracy.to_string()
    );
    for mode in &modes {
        let _ = write!(out, "{:<22}", format_rate(report.average_fpr(*mode)));
    }
    push_line_end(&mut out);
    if verbose {
        let _ = writeln!(
            out,
            "Samples with unparseable verdicts: {}",
            report.samples_with_unparseable
        );
    }
    out
}

fn other_mode(m: FprMode) -> FprMode {
    match m {
        FprMode::Negatives => FprMode::PaperRowwise,
        FprMode::PaperRowwise => FprMode::Negatives,
    }
}

fn push_line_end(out: &mut String) {
    let trimmed = out.trim_end_matches(' ').len();
    out.truncate(trimmed);
    out.push('\n');
}

pub fn render_augmentation(
    report: &AugmentationReport,
    format: ReportFormat,
    taxonomy: &Taxonomy,
) -> String {
    if format == ReportFormat::Json {
        return serde_json::to_string_pretty(report).expect("report serializes") + "\n";
    }
    let mut out = format!(
        "{:<LABEL_WIDTH$}{:>10}{:>8}{:>8}{:>12}\n",
        "Type", "Augmented", "Right", "Other", "NotLogical"
    );
    let mut row = |label: &str, r: &AugmentationRow| {
        let _ = writeln!(
            out,
            "{label:<LABEL_WIDTH$}{:>10}{:>8}{:>8}{:>12}",
            r.augmented, r.right, r.other, r.not_logical
        );
    };
    for (t, r) in &report.per_type {
        row(&type_label(taxonomy, *t), r);
    }
    row("Total", &report.totals);
    let _ = writeln!(
        out,
        "Failed augmentations (not tabulated): {}",
        report.failed_total()
    );
    out
}

//! On-disk data model.
//!
//! A dataset directory holds `problems.jsonl`, `samples.jsonl` and
//! `augmented.jsonl` (one JSON record per line) plus test cases as paired
//! files `tests/<problem id>/<n>.in` and `tests/<problem id>/<n>.out`.
//! Missing files mean "no records". [`Dataset::store`] writes records sorted
//! by id, which is the canonical form.

pub mod aoj;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::judge::{JudgeStatus, JudgeVerdict, TestCase};
use crate::taxonomy::ErrorId;

pub const PROBLEMS_FILE: &str = "problems.jsonl";
pub const SAMPLES_FILE: &str = "samples.jsonl";
pub const AUGMENTED_FILE: &str = "augmented.jsonl";
pub const TESTS_DIR: &str = "tests";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{file} line {line}: {message}")]
    Record {
        file: String,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("ingestion error: {0}")]
    Ingest(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Presence flags for the ten error types, indexed `A..J`. Serialized as an
/// array of ten 0/1 integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Label([bool; 10]);

impl Label {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_types(ids: impl IntoIterator<Item = ErrorId>) -> Self {
        let mut bits = [false; 10];
        for id in ids {
            bits[id.index()] = true;
        }
        Self(bits)
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self, String> {
        if bits.len() != 10 {
            return Err(format!("label length {}, expected 10", bits.len()));
        }
        let mut out = [false; 10];
        for (i, &b) in bits.iter().enumerate() {
            out[i] = match b {
                0 => false,
                1 => true,
                other => return Err(format!("label entry {i} is {other}, expected 0 or 1")),
            };
        }
        Ok(Self(out))
    }

    pub fn has(&self, id: ErrorId) -> bool {
        self.0[id.index()]
    }

    pub fn set(&mut self, id: ErrorId, present: bool) {
        self.0[id.index()] = present;
    }

    pub fn types(&self) -> impl Iterator<Item = ErrorId> + '_ {
        ErrorId::ALL.into_iter().filter(|id| self.has(*id))
    }

    pub fn is_empty(&self) -> bool {
        !self.0.iter().any(|b| *b)
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let bits: Vec<u8> = self.0.iter().map(|&b| b as u8).collect();
        bits.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let bits = Vec::<u8>::deserialize(d)?;
        Label::from_bits(&bits).map_err(serde::de::Error::custom)
    }
}

/// Judge status of a stored submission. Unmapped statuses from an online
/// judge are kept verbatim in `Unknown`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SubmissionStatus {
    Judged(JudgeStatus),
    Unknown(String),
}

impl SubmissionStatus {
    pub const ACCEPTED: SubmissionStatus = SubmissionStatus::Judged(JudgeStatus::Accepted);

    pub fn as_str(&self) -> &str {
        match self {
            SubmissionStatus::Judged(JudgeStatus::Accepted) => "Accepted",
            SubmissionStatus::Judged(JudgeStatus::WrongAnswer) => "WrongAnswer",
            SubmissionStatus::Judged(JudgeStatus::CompileError) => "CompileError",
            SubmissionStatus::Judged(JudgeStatus::RuntimeError) => "RuntimeError",
            SubmissionStatus::Judged(JudgeStatus::TimeLimit) => "TimeLimit",
            SubmissionStatus::Unknown(raw) => raw,
        }
    }

    /// Parses the stored spelling; anything unrecognised becomes `Unknown`.
    pub fn parse(s: &str) -> Self {
        let judged = match s.to_ascii_lowercase().replace(['_', '-', ' '], "").as_str() {
            "accepted" => JudgeStatus::Accepted,
            "wronganswer" => JudgeStatus::WrongAnswer,
            "compileerror" => JudgeStatus::CompileError,
            "runtimeerror" => JudgeStatus::RuntimeError,
            "timelimit" => JudgeStatus::TimeLimit,
            _ => return SubmissionStatus::Unknown(s.to_string()),
        };
        SubmissionStatus::Judged(judged)
    }
}

impl fmt::Display for SubmissionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for SubmissionStatus {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for SubmissionStatus {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(SubmissionStatus::parse(&String::deserialize(d)?))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub id: String,
    #[serde(default)]
    pub course: String,
    pub statement: String,
    /// Augmentation remarks: which errors can be injected for this problem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remarks: Option<String>,
    /// Stored as paired files under `tests/<id>/`, not in the JSON record.
    #[serde(skip)]
    pub io_examples: Vec<TestCase>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub submitter_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub submission_id: Option<String>,
    #[serde(default)]
    pub annotator_agreement: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabeledSample {
    pub id: String,
    pub problem_ref: String,
    pub source_code: String,
    #[serde(default)]
    pub source_language: String,
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<SubmissionStatus>,
    #[serde(default)]
    pub provenance: Provenance,
}

impl LabeledSample {
    pub fn is_accepted(&self) -> bool {
        self.status.as_ref() == Some(&SubmissionStatus::ACCEPTED)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    RightAugmentation,
    OtherTypeOfLogicalError,
    NotALogicalError,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Evidence {
    #[serde(default)]
    pub judge_verdict: Option<JudgeVerdict>,
    #[serde(default)]
    pub classifier_dominant: Option<ErrorId>,
    #[serde(default)]
    pub classifier_detected: Vec<ErrorId>,
    pub identical_to_source: bool,
}

/// A model call that did not yield code. Kept for audit and reported apart
/// from the outcome table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentFailure {
    pub message: String,
    #[serde(default)]
    pub raw_response: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentedSample {
    pub id: String,
    pub source_ref: String,
    pub target_type: ErrorId,
    pub generated_code: String,
    pub outcome: Outcome,
    pub evidence: Evidence,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<AugmentFailure>,
}

impl AugmentedSample {
    pub fn is_failed(&self) -> bool {
        self.failure.is_some()
    }

    /// NotALogicalError needs a compile error, an Accepted verdict or an
    /// unchanged program as evidence.
    pub fn check_evidence(&self) -> Result<(), String> {
        if self.outcome != Outcome::NotALogicalError {
            return Ok(());
        }
        let judged = self
            .evidence
            .judge_verdict
            .as_ref()
            .map(|v| v.value)
            .is_some_and(|s| matches!(s, JudgeStatus::CompileError | JudgeStatus::Accepted));
        if judged || self.evidence.identical_to_source {
            Ok(())
        } else {
            Err(
                "outcome NotALogicalError without compile-error, accepted or identical evidence"
                    .into(),
            )
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    pub problems: Vec<Problem>,
    pub samples: Vec<LabeledSample>,
    pub augmented: Vec<AugmentedSample>,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && !id.starts_with('.')
        && id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-' | b'.'))
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(
    dir: &Path,
    file: &str,
) -> Result<Vec<(usize, T)>, DatasetError> {
    let path = dir.join(file);
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(line).map_err(|e| DatasetError::Record {
            file: file.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push((i + 1, record));
    }
    Ok(out)
}

fn write_jsonl<T: Serialize>(dir: &Path, file: &str, records: &[&T]) -> Result<(), DatasetError> {
    let path = dir.join(file);
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r).expect("records serialize"));
        text.push('\n');
    }
    std::fs::write(&path, text).map_err(io_err(&path))
}

fn read_tests(dir: &Path) -> Result<Vec<TestCase>, DatasetError> {
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut indices: BTreeSet<u32> = BTreeSet::new();
    for entry in std::fs::read_dir(dir).map_err(io_err(dir))? {
        let entry = entry.map_err(io_err(dir))?;
        let name = entry.file_name().to_string_lossy().to_string();
        if let Some(stem) = name.strip_suffix(".in") {
            let n: u32 = stem.parse().map_err(|_| {
                DatasetError::Integrity(format!(
                    "{}: test file {name} is not numbered",
                    dir.display()
                ))
            })?;
            indices.insert(n);
        }
    }
    let mut tests = Vec::with_capacity(indices.len());
    for n in indices {
        let input = dir.join(format!("{n}.in"));
        let output = dir.join(format!("{n}.out"));
        if !output.is_file() {
            return Err(DatasetError::Integrity(format!(
                "{} has no matching .out",
                input.display()
            )));
        }
        tests.push(TestCase {
            stdin: std::fs::read_to_string(&input).map_err(io_err(&input))?,
            expected_stdout: std::fs::read_to_string(&output).map_err(io_err(&output))?,
        });
    }
    Ok(tests)
}

impl Dataset {
    pub fn load(dir: impl AsRef<Path>) -> Result<Self, DatasetError> {
        let dir = dir.as_ref();
        let mut problems = Vec::new();
        let mut seen = BTreeSet::new();
        for (line, mut p) in read_jsonl::<Problem>(dir, PROBLEMS_FILE)? {
            let bad = |message: String| DatasetError::Record {
                file: PROBLEMS_FILE.into(),
                line,
                message,
            };
            if !valid_id(&p.id) {
                return Err(bad(format!("invalid problem id {:?}", p.id)));
            }
            if p.statement.trim().is_empty() {
                return Err(bad(format!("problem {} has an empty statement", p.id)));
            }
            if !seen.insert(p.id.clone()) {
                return Err(bad(format!("duplicate problem id {}", p.id)));
            }
            p.io_examples = read_tests(&dir.join(TESTS_DIR).join(&p.id))?;
            problems.push(p);
        }

        let mut samples = Vec::new();
        let mut sample_ids = BTreeSet::new();
        for (line, s) in read_jsonl::<LabeledSample>(dir, SAMPLES_FILE)? {
            let bad = |message: String| DatasetError::Record {
                file: SAMPLES_FILE.into(),
                line,
                message,
            };
            if s.id.is_empty() {
                return Err(bad("empty sample id".into()));
            }
            if !seen.contains(&s.problem_ref) {
                return Err(bad(format!(
                    "sample {} references unknown problem {}",
                    s.id, s.problem_ref
                )));
            }
            if !sample_ids.insert(s.id.clone()) {
                return Err(bad(format!("duplicate sample id {}", s.id)));
            }
            samples.push(s);
        }

        let mut augmented = Vec::new();
        let mut aug_ids = BTreeSet::new();
        for (line, a) in read_jsonl::<AugmentedSample>(dir, AUGMENTED_FILE)? {
            let bad = |message: String| DatasetError::Record {
                file: AUGMENTED_FILE.into(),
                line,
                message,
            };
            if !sample_ids.contains(&a.source_ref) {
                return Err(bad(format!(
                    "augmented sample {} references unknown source sample {}",
                    a.id, a.source_ref
                )));
            }
            if !aug_ids.insert(a.id.clone()) {
                return Err(bad(format!("duplicate augmented id {}", a.id)));
            }
            a.check_evidence().map_err(bad)?;
            augmented.push(a);
        }

        Ok(Self {
            problems,
            samples,
            augmented,
        })
    }

    /// Writes every record kind in canonical (id-sorted) order, replacing
    /// existing files.
    pub fn store(&self, dir: impl AsRef<Path>) -> Result<(), DatasetError> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mut problems: Vec<&Problem> = self.problems.iter().collect();
        problems.sort_by(|a, b| a.id.cmp(&b.id));
        let mut samples: Vec<&LabeledSample> = self.samples.iter().collect();
        samples.sort_by(|a, b| a.id.cmp(&b.id));
        let mut augmented: Vec<&AugmentedSample> = self.augmented.iter().collect();
        augmented.sort_by(|a, b| a.id.cmp(&b.id));
        write_jsonl(dir, PROBLEMS_FILE, &problems)?;
        write_jsonl(dir, SAMPLES_FILE, &samples)?;
        write_jsonl(dir, AUGMENTED_FILE, &augmented)?;

        for p in &problems {
            if !valid_id(&p.id) {
                return Err(DatasetError::Integrity(format!(
                    "invalid problem id {:?}",
                    p.id
                )));
            }
            if p.io_examples.is_empty() {
                continue;
            }
            let tdir = dir.join(TESTS_DIR).join(&p.id);
            std::fs::create_dir_all(&tdir).map_err(io_err(&tdir))?;
            for (i, t) in p.io_examples.iter().enumerate() {
                let input = tdir.join(format!("{}.in", i + 1));
                let output = tdir.join(format!("{}.out", i + 1));
                std::fs::write(&input, &t.stdin).map_err(io_err(&input))?;
                std::fs::write(&output, &t.expected_stdout).map_err(io_err(&output))?;
            }
        }
        Ok(())
    }

    /// Same records in canonical order.
    pub fn canonical(&self) -> Self {
        let mut c = self.clone();
        c.problems.sort_by(|a, b| a.id.cmp(&b.id));
        c.samples.sort_by(|a, b| a.id.cmp(&b.id));
        c.augmented.sort_by(|a, b| a.id.cmp(&b.id));
        c
    }

    pub fn problem(&self, id: &str) -> Option<&Problem> {
        self.problems.iter().find(|p| p.id == id)
    }

    pub fn sample(&self, id: &str) -> Option<&LabeledSample> {
        self.samples.iter().find(|s| s.id == id)
    }

    /// Samples with at least one positive label.
    pub fn evaluation_set(&self) -> impl Iterator<Item = &LabeledSample> {
        self.samples.iter().filter(|s| !s.label.is_empty())
    }

    /// Accepted submissions usable as augmentation sources.
    pub fn accepted_sources(&self) -> impl Iterator<Item = &LabeledSample> {
        self.samples.iter().filter(|s| s.is_accepted())
    }

    /// Inserts or replaces an augmented record by id.
    pub fn upsert_augmented(&mut self, record: AugmentedSample) {
        match self.augmented.iter_mut().find(|a| a.id == record.id) {
            Some(slot) => *slot = record,
            None => self.augmented.push(record),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub counts_by_type: BTreeMap<ErrorId, usize>,
    pub total: usize,
}

/// Per-type positive counts; a multi-label sample counts once per type and
/// once in the total.
pub fn distribution<'a>(samples: impl IntoIterator<Item = &'a LabeledSample>) -> DatasetManifest {
    let mut counts_by_type: BTreeMap<ErrorId, usize> =
        ErrorId::ALL.iter().map(|&id| (id, 0)).collect();
    let mut total = 0;
    for s in samples {
        total += 1;
        for id in s.label.types() {
            *counts_by_type.entry(id).or_default() += 1;
        }
    }
    DatasetManifest {
        counts_by_type,
        total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ErrorId::*;

    pub(crate) fn problem(id: &str) -> Problem {
        Problem {
            id: id.into(),
            course: "ITP1".into(),
            statement: format!("statement of {id}"),
            remarks: None,
            io_examples: vec![TestCase::new("1 2\n", "3\n"), TestCase::new("", "\n")],
        }
    }

    fn sample(id: &str, labels: &[ErrorId]) -> LabeledSample {
        LabeledSample {
            id: id.into(),
            problem_ref: "ITP1_1_A".into(),
            source_code: "int main(){}".into(),
            source_language: "C++".into(),
            label: Label::from_types(labels.iter().copied()),
            status: Some(SubmissionStatus::Judged(JudgeStatus::WrongAnswer)),
            provenance: Provenance {
                submitter_hash: Some("ab".into()),
                submission_id: Some("1".into()),
                annotator_agreement: true,
            },
        }
    }

    fn augmented(id: &str, source: &str) -> AugmentedSample {
        AugmentedSample {
            id: id.into(),
            source_ref: source.into(),
            target_type: D,
            generated_code: "x".into(),
            outcome: Outcome::Unresolved,
            evidence: Evidence::default(),
            failure: None,
        }
    }

    fn dataset() -> Dataset {
        Dataset {
            problems: vec![problem("ITP1_1_A")],
            samples: vec![sample("s2", &[E]), sample("s1", &[E, J])],
            augmented: vec![augmented("a1", "s1")],
        }
    }

    #[test]
    fn round_trip_is_canonical() {
        let tmp = tempfile::tempdir().unwrap();
        let d = dataset();
        d.store(tmp.path()).unwrap();
        let loaded = Dataset::load(tmp.path()).unwrap();
        assert_eq!(loaded, d.canonical());
        let first = std::fs::read(tmp.path().join(SAMPLES_FILE)).unwrap();
        loaded.store(tmp.path()).unwrap();
        assert_eq!(std::fs::read(tmp.path().join(SAMPLES_FILE)).unwrap(), first);
    }

    #[test]
    fn empty_directory_is_empty_dataset() {
        let tmp = tempfile::tempdir().unwrap();
        assert_eq!(Dataset::load(tmp.path()).unwrap(), Dataset::default());
        std::fs::write(tmp.path().join(SAMPLES_FILE), "").unwrap();
        assert_eq!(Dataset::load(tmp.path()).unwrap(), Dataset::default());
    }

    #[test]
    fn short_label_names_line_and_length() {
        let tmp = tempfile::tempdir().unwrap();
        dataset().store(tmp.path()).unwrap();
        let path = tmp.path().join(SAMPLES_FILE);
        let text = std::fs::read_to_string(&path).unwrap();
        let broken = text.replacen("[0,0,0,0,1,0,0,0,0,1]", "[0,0,0,0,1,0,0,0,1]", 1);
        assert_ne!(text, broken);
        std::fs::write(&path, broken).unwrap();
        let err = Dataset::load(tmp.path()).unwrap_err().to_string();
        assert!(err.contains("samples.jsonl line 1"), "{err}");
        assert!(err.contains("label length 9, expected 10"), "{err}");
    }

    #[test]
    fn label_entries_must_be_binary() {
        assert!(Label::from_bits(&[0, 0, 2, 0, 0, 0, 0, 0, 0, 0]).is_err());
        let l = Label::from_bits(&[1, 0, 0, 0, 0, 0, 0, 0, 0, 1]).unwrap();
        assert_eq!(l.types().collect::<Vec<_>>(), vec![A, J]);
    }

    #[test]
    fn dangling_references_are_rejected() {
        let tmp = tempfile::tempdir().unwrap();
        let mut d = dataset();
        d.augmented.push(augmented("a2", "missing"));
        d.store(tmp.path()).unwrap();
        let err = Dataset::load(tmp.path()).unwrap_err().to_string();
        assert!(err.contains("unknown source sample missing"), "{err}");

        let mut d = dataset();
        d.samples[0].problem_ref = "NOPE".into();
        d.store(tmp.path()).unwrap();
        assert!(Dataset::load(tmp.path())
            .unwrap_err()
            .to_string()
            .contains("unknown problem NOPE"));
    }

    #[test]
    fn not_logical_requires_evidence() {
        let tmp = tempfile::tempdir().unwrap();
        let mut d = dataset();
        d.augmented[0].outcome = Outcome::NotALogicalError;
        d.store(tmp.path()).unwrap();
        assert!(Dataset::load(tmp.path()).is_err());
        d.augmented[0].evidence.identical_to_source = true;
        d.store(tmp.path()).unwrap();
        assert!(Dataset::load(tmp.path()).is_ok());
    }

    #[test]
    fn statuses_round_trip_and_keep_unknown() {
        assert_eq!(
            SubmissionStatus::parse("Accepted"),
            SubmissionStatus::ACCEPTED
        );
        assert_eq!(
            SubmissionStatus::parse("Time_Limit"),
            SubmissionStatus::Judged(JudgeStatus::TimeLimit)
        );
        let odd = SubmissionStatus::parse("Presentation Error");
        assert_eq!(odd, SubmissionStatus::Unknown("Presentation Error".into()));
        let json = serde_json::to_string(&odd).unwrap();
        assert_eq!(
            serde_json::from_str::<SubmissionStatus>(&json).unwrap(),
            odd
        );
    }

    #[test]
    fn distribution_counts() {
        let d = dataset();
        let m = distribution(&d.samples);
        assert_eq!(m.total, 2);
        assert_eq!(m.counts_by_type[&E], 2);
        assert_eq!(m.counts_by_type[&J], 1);
        assert_eq!(m.counts_by_type[&A], 0);

        let empty = distribution(std::iter::empty());
        assert_eq!(empty.total, 0);
        assert!(empty.counts_by_type.values().all(|&c| c == 0));
        assert_eq!(empty.counts_by_type.len(), 10);
    }

    #[test]
    fn reference_distribution() {
        let counts = [10, 10, 5, 9, 12, 8, 10, 8, 8, 6];
        let samples: Vec<LabeledSample> = ErrorId::ALL
            .iter()
            .zip(counts)
            .flat_map(|(&id, n)| (0..n).map(move |i| sample(&format!("{id}{i}"), &[id])))
            .collect();
        let m = distribution(&samples);
        assert_eq!(m.total, 86);
        let got: Vec<usize> = m.counts_by_type.values().copied().collect();
        assert_eq!(got, counts);
    }

    #[test]
    fn test_cases_round_trip_in_numeric_order() {
        let tmp = tempfile::tempdir().unwrap();
        let mut d = dataset();
        d.problems[0].io_examples = (1..=11)
            .map(|i| TestCase::new(format!("{i}"), format!("{i}")))
            .collect();
        d.store(tmp.path()).unwrap();
        let loaded = Dataset::load(tmp.path()).unwrap();
        assert_eq!(loaded.problems[0].io_examples, d.problems[0].io_examples);
    }
}

//! Classification and augmentation runs.
//!
//! [`Pipeline::classify`] sends the ten per-type prompts for one sample and
//! resolves the dominant type. [`Pipeline::augment`] asks for code with one
//! injected error type; [`categorize`] then sorts the result into the
//! augmentation outcome table using the judge verdict and a classification of
//! the generated code.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Problem;
pub use crate::dataset::{AugmentFailure, AugmentedSample, Evidence, Outcome};
use crate::judge::{judge, JudgeError, JudgeStatus, JudgeVerdict, ToolchainProfile};
use crate::llm::{
    parse_augmentation, parse_verdict, Client, LlmError, ModelConfig, Verdict, VerdictValue,
};
use crate::prompts::{CodeSample, PromptBuilder, PromptError};
use crate::taxonomy::ErrorId;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Judge(#[from] JudgeError),
    #[error("sample {sample}: every prompt failed; last error: {message}")]
    AllPromptsFailed { sample: String, message: String },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("{path}: {message}")]
    File { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub sample_ref: String,
    pub verdicts: BTreeMap<ErrorId, Verdict>,
    pub detected: BTreeSet<ErrorId>,
    pub dominant_set: BTreeSet<ErrorId>,
    pub dominant: Option<ErrorId>,
    /// Unparseable verdicts, transport failures included. They count as No.
    pub unparseable_count: usize,
    /// Types whose prompt could not be sent, with the error message.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub failed_types: BTreeMap<ErrorId, String>,
}

impl ClassificationResult {
    pub fn is_partial(&self) -> bool {
        !self.failed_types.is_empty()
    }

    pub fn said_yes(&self, id: ErrorId) -> bool {
        self.verdicts.get(&id).is_some_and(Verdict::is_yes)
    }
}

/// Stateless run context shared by all samples of one run.
#[derive(Clone, Copy)]
pub struct Pipeline<'a> {
    pub builder: PromptBuilder<'a>,
    pub client: &'a Client,
    pub model: &'a ModelConfig,
}

impl<'a> Pipeline<'a> {
    pub fn new(builder: PromptBuilder<'a>, client: &'a Client, model: &'a ModelConfig) -> Self {
        Self {
            builder,
            client,
            model,
        }
    }

    /// Sends the ten prompts concurrently (bounded by the client) and
    /// assembles the verdicts by type.
    ///
    /// A transport failure on some prompts yields a partial result with those
    /// verdicts Unparseable. Missing mock fixtures and credential problems
    /// abort the sample.
    pub fn classify(
        &self,
        sample_ref: &str,
        sample: CodeSample<'_>,
    ) -> Result<ClassificationResult, PipelineError> {
        let prompts = self.builder.build_all_classification_prompts(sample)?;
        let replies: Vec<Result<String, LlmError>> = std::thread::scope(|scope| {
            let handles: Vec<_> = prompts
                .iter()
                .map(|p| {
                    scope.spawn(move || {
                        self.client
                            .complete(&p.rendered, self.model)
                            .map(|ex| ex.raw_response)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("classification worker panicked"))
                .collect()
        });

        let mut verdicts = BTreeMap::new();
        let mut failed_types = BTreeMap::new();
        for (prompt, reply) in prompts.iter().zip(replies) {
            let verdict = match reply {
                Ok(raw) => parse_verdict(&raw),
                Err(
                    e @ (LlmError::Fixture { .. } | LlmError::Credential(_) | LlmError::Config(_)),
                ) => return Err(e.into()),
                Err(e) => {
                    failed_types.insert(prompt.target_type, e.to_string());
                    Verdict::unparseable("")
                }
            };
            verdicts.insert(prompt.target_type, verdict);
        }
        if failed_types.len() == ErrorId::ALL.len() {
            let message = failed_types.values().last().cloned().unwrap_or_default();
            return Err(PipelineError::AllPromptsFailed {
                sample: sample_ref.to_string(),
                message,
            });
        }
        Ok(self.assemble(sample_ref, verdicts, failed_types))
    }

    fn assemble(
        &self,
        sample_ref: &str,
        verdicts: BTreeMap<ErrorId, Verdict>,
        failed_types: BTreeMap<ErrorId, String>,
    ) -> ClassificationResult {
        let detected: BTreeSet<ErrorId> = verdicts
            .iter()
            .filter(|(_, v)| v.is_yes())
            .map(|(k, _)| *k)
            .collect();
        let unparseable_count = verdicts
            .values()
            .filter(|v| v.value == VerdictValue::Unparseable)
            .count();
        let dominant = self.builder.taxonomy.dominant(detected.iter().copied());
        ClassificationResult {
            sample_ref: sample_ref.to_string(),
            verdicts,
            detected,
            dominant_set: dominant.maximal_set,
            dominant: dominant.canonical,
            unparseable_count,
            failed_types,
        }
    }

    /// Classifies many samples with up to `parallelism` samples in flight.
    /// Results keep the input order.
    pub fn classify_many(
        &self,
        samples: &[(String, CodeSample<'_>)],
        parallelism: usize,
    ) -> Vec<Result<ClassificationResult, PipelineError>> {
        let next = AtomicUsize::new(0);
        let slots: Vec<Mutex<Option<Result<ClassificationResult, PipelineError>>>> =
            samples.iter().map(|_| Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..parallelism.clamp(1, samples.len().max(1)) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some((id, sample)) = samples.get(i) else {
                        break;
                    };
                    let r = self.classify(id, *sample);
                    *slots[i].lock().unwrap_or_else(|e| e.into_inner()) = Some(r);
                });
            }
        });
        slots
            .into_iter()
            .map(|s| {
                s.into_inner()
                    .unwrap_or_else(|e| e.into_inner())
                    .expect("every sample processed")
            })
            .collect()
    }

    /// Requests code with `target` injected into the accepted `source`. The
    /// returned record is Unresolved; a response without usable code yields a
    /// failed record carrying the raw text.
    pub fn augment(
        &self,
        id: &str,
        source_ref: &str,
        source: CodeSample<'_>,
        target: ErrorId,
        remarks: &str,
    ) -> Result<AugmentedSample, PipelineError> {
        let prompt = self
            .builder
            .build_augmentation_prompt(source, target, remarks)?;
        let mut record = AugmentedSample {
            id: id.to_string(),
            source_ref: source_ref.to_string(),
            target_type: target,
            generated_code: String::new(),
            outcome: Outcome::Unresolved,
            evidence: Evidence::default(),
            failure: None,
        };
        let raw = match self.client.complete(&prompt.rendered, self.model) {
            Ok(ex) => ex.raw_response,
            Err(e @ LlmError::Transport { .. }) => {
                record.failure = Some(AugmentFailure {
                    message: e.to_string(),
                    raw_response: None,
                });
                return Ok(record);
            }
            Err(e) => return Err(e.into()),
        };
        match parse_augmentation(&raw) {
            Ok(payload) => {
                record.evidence.identical_to_source = same_tokens(&payload.code, source.code);
                record.generated_code = payload.code;
            }
            Err(e) => {
                record.failure = Some(AugmentFailure {
                    message: e.to_string(),
                    raw_response: Some(raw),
                })
            }
        }
        Ok(record)
    }

    /// Judges an augmented program against the problem's tests, classifies it
    /// when it compiles but misbehaves, and categorizes the outcome.
    pub fn resolve(
        &self,
        aug: &AugmentedSample,
        problem: &Problem,
        profile: &ToolchainProfile,
    ) -> Result<(AugmentedSample, Option<ClassificationResult>), PipelineError> {
        if aug.is_failed() {
            return Err(PipelineError::Precondition(format!(
                "augmentation {} failed and has no code to judge",
                aug.id
            )));
        }
        let verdict = judge(&aug.generated_code, profile, &problem.io_examples)?;
        let classification = if verdict.value.is_failing_run() && !aug.evidence.identical_to_source
        {
            let sample = CodeSample {
                problem: &problem.statement,
                code: &aug.generated_code,
            };
            Some(self.classify(&aug.id, sample)?)
        } else {
            None
        };
        let resolved = categorize(aug, &verdict, classification.as_ref())?;
        Ok((resolved, classification))
    }
}

/// Equal after collapsing all whitespace runs.
pub fn same_tokens(a: &str, b: &str) -> bool {
    a.split_whitespace().eq(b.split_whitespace())
}

/// Sets the outcome from the judge verdict and, for programs that compile and
/// misbehave, the classification of the generated code.
pub fn categorize(
    aug: &AugmentedSample,
    judge_result: &JudgeVerdict,
    classification: Option<&ClassificationResult>,
) -> Result<AugmentedSample, PipelineError> {
    let mut out = aug.clone();
    out.evidence.judge_verdict = Some(judge_result.clone());
    if let Some(c) = classification {
        out.evidence.classifier_dominant = c.dominant;
        out.evidence.classifier_detected = c.detected.iter().copied().collect();
    }
    let not_logical = matches!(
        judge_result.value,
        JudgeStatus::CompileError | JudgeStatus::Accepted
    ) || aug.evidence.identical_to_source;
    out.outcome = if not_logical {
        Outcome::NotALogicalError
    } else {
        let c = classification.ok_or_else(|| {
            PipelineError::Precondition(format!(
                "augmentation {} was judged {:?} but has no classification",
                aug.id, judge_result.value
            ))
        })?;
        if c.detected.contains(&aug.target_type) {
            Outcome::RightAugmentation
        } else {
            Outcome::OtherTypeOfLogicalError
        }
    };
    Ok(out)
}

fn file_err(path: &Path, message: impl ToString) -> PipelineError {
    PipelineError::File {
        path: path.display().to_string(),
        message: message.to_string(),
    }
}

/// Writes results one JSON object per line, sorted by sample id.
pub fn write_results(
    path: impl AsRef<Path>,
    results: &[ClassificationResult],
) -> Result<(), PipelineError> {
    let path = path.as_ref();
    let mut sorted: Vec<&ClassificationResult> = results.iter().collect();
    sorted.sort_by(|a, b| a.sample_ref.cmp(&b.sample_ref));
    let mut text = String::new();
    for r in sorted {
        text.push_str(&serde_json::to_string(r).map_err(|e| file_err(path, e))?);
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| file_err(path, e))
}

pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<ClassificationResult>, PipelineError> {
    let path = path.as_ref();
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = std::fs::read_to_string(path).map_err(|e| file_err(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| file_err(path, format!("line {}: {e}", i + 1)))
        })
        .collect()
}

/// Reproducibility record written next to every run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub command: String,
    /// The effective configuration, serialized.
    pub config_snapshot: String,
    pub sample_ids: Vec<String>,
    /// Seconds since the Unix epoch.
    pub started_at: u64,
    pub finished_at: u64,
}

impl RunManifest {
    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), PipelineError> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).map_err(|e| file_err(path, e))?;
        std::fs::write(path, text + "\n").map_err(|e| file_err(path, e))
    }
}

pub fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{MockTransport, Transport};
    use crate::prompts::{FewShotBank, Templates};
    use crate::taxonomy::Taxonomy;
    use ErrorId::*;

    const CODE: &str = "#include <cstdio>\nint main(){int a;scanf(\"%d\",&a);printf(\"%d\\n\",a);}";
    const PROBLEM: &str = "Read an integer and print it.";

    struct Fixture {
        taxonomy: Taxonomy,
        templates: Templates,
        bank: FewShotBank,
        model: ModelConfig,
    }

    impl Fixture {
        fn new() -> Self {
            Self {
                taxonomy: Taxonomy::builtin(),
                templates: Templates::builtin(),
                bank: FewShotBank::builtin(),
                model: ModelConfig::default(),
            }
        }

        fn builder(&self) -> PromptBuilder<'_> {
            PromptBuilder::new(&self.taxonomy, &self.templates, &self.bank)
        }

        /// Mock answering Yes for the listed types and No otherwise.
        fn mock(&self, yes: &[ErrorId], code: &str) -> MockTransport {
            let mut m = MockTransport::new();
            let sample = CodeSample {
                problem: PROBLEM,
                code,
            };
            for p in self
                .builder()
                .build_all_classification_prompts(sample)
                .unwrap()
            {
                let ans = if yes.contains(&p.target_type) {
                    "Yes"
                } else {
                    "No"
                };
                m.insert(&p.rendered, format!("Reasoning...\nAnswer: {ans}"));
            }
            m
        }
    }

    /// Mock wrapper counting every send.
    struct Counting {
        inner: MockTransport,
        sent: std::sync::Arc<AtomicUsize>,
    }

    impl Transport for Counting {
        fn send(
            &self,
            prompt: &str,
            config: &ModelConfig,
        ) -> Result<String, crate::llm::SendError> {
            self.sent.fetch_add(1, Ordering::SeqCst);
            self.inner.send(prompt, config)
        }
    }

    fn run(fx: &Fixture, yes: &[ErrorId]) -> ClassificationResult {
        let client = Client::new(Box::new(fx.mock(yes, CODE)), 4);
        Pipeline::new(fx.builder(), &client, &fx.model)
            .classify(
                "S1",
                CodeSample {
                    problem: PROBLEM,
                    code: CODE,
                },
            )
            .unwrap()
    }

    #[test]
    fn single_yes() {
        let fx = Fixture::new();
        let r = run(&fx, &[E]);
        assert_eq!(r.detected, BTreeSet::from([E]));
        assert_eq!(r.dominant, Some(E));
        assert_eq!(r.verdicts.len(), 10);
        assert_eq!(r.unparseable_count, 0);
    }

    #[test]
    fn highest_rank_dominates() {
        let fx = Fixture::new();
        assert_eq!(run(&fx, &[E, B, J]).dominant, Some(J));
        let r = run(&fx, &[E, G]);
        assert_eq!(r.dominant_set, BTreeSet::from([E, G]));
        assert_eq!(r, run(&fx, &[E, G]));
    }

    #[test]
    fn dominant_matches_taxonomy() {
        let fx = Fixture::new();
        for mask in [0u16, 0b1, 0b10_0001_0000, 0b11_1111_1111, 0b00_0101_1000] {
            let yes: Vec<ErrorId> = ErrorId::ALL
                .into_iter()
                .filter(|t| mask >> t.index() & 1 == 1)
                .collect();
            let r = run(&fx, &yes);
            let d = fx.taxonomy.dominant(r.detected.iter().copied());
            assert_eq!((r.dominant_set, r.dominant), (d.maximal_set, d.canonical));
        }
    }

    #[test]
    fn all_no() {
        let fx = Fixture::new();
        let r = run(&fx, &[]);
        assert!(r.detected.is_empty());
        assert_eq!(r.dominant, None);
    }

    #[test]
    fn exactly_ten_exchanges_per_sample() {
        let fx = Fixture::new();
        let sent = std::sync::Arc::new(AtomicUsize::new(0));
        let counting = Counting {
            inner: fx.mock(&[A], CODE),
            sent: sent.clone(),
        };
        let client = Client::new(Box::new(counting), 3);
        let p = Pipeline::new(fx.builder(), &client, &fx.model);
        p.classify(
            "S1",
            CodeSample {
                problem: PROBLEM,
                code: CODE,
            },
        )
        .unwrap();
        assert_eq!(sent.load(Ordering::SeqCst), 10);

        let samples: Vec<(String, CodeSample)> = (0..3)
            .map(|i| {
                (
                    format!("S{i}"),
                    CodeSample {
                        problem: PROBLEM,
                        code: CODE,
                    },
                )
            })
            .collect();
        let results = p.classify_many(&samples, 2);
        assert_eq!(sent.load(Ordering::SeqCst), 40);
        let ids: Vec<&str> = results
            .iter()
            .map(|r| r.as_ref().unwrap().sample_ref.as_str())
            .collect();
        assert_eq!(ids, ["S0", "S1", "S2"]);
    }

    #[test]
    fn unparseable_counts_as_no_and_is_reported() {
        let fx = Fixture::new();
        let mut mock = fx.mock(&[C], CODE);
        let prompts = fx
            .builder()
            .build_all_classification_prompts(CodeSample {
                problem: PROBLEM,
                code: CODE,
            })
            .unwrap();
        mock.insert(&prompts[3].rendered, "I cannot tell.");
        let client = Client::new(Box::new(mock), 4);
        let r = Pipeline::new(fx.builder(), &client, &fx.model)
            .classify(
                "S1",
                CodeSample {
                    problem: PROBLEM,
                    code: CODE,
                },
            )
            .unwrap();
        assert_eq!(r.unparseable_count, 1);
        assert_eq!(r.verdicts[&D].value, VerdictValue::Unparseable);
        assert_eq!(r.detected, BTreeSet::from([C]));
    }

    #[test]
    fn missing_fixture_names_hash() {
        let fx = Fixture::new();
        let client = Client::new(Box::new(MockTransport::new()), 4);
        let err = Pipeline::new(fx.builder(), &client, &fx.model)
            .classify(
                "S1",
                CodeSample {
                    problem: PROBLEM,
                    code: CODE,
                },
            )
            .unwrap_err();
        assert!(
            matches!(err, PipelineError::Llm(LlmError::Fixture { .. })),
            "{err}"
        );
    }

    struct Flaky {
        inner: MockTransport,
        fail_for: Vec<String>,
    }

    impl Transport for Flaky {
        fn send(
            &self,
            prompt: &str,
            config: &ModelConfig,
        ) -> Result<String, crate::llm::SendError> {
            if self.fail_for.iter().any(|p| p == prompt) {
                return Err(crate::llm::SendError::Fatal("boom".into()));
            }
            self.inner.send(prompt, config)
        }
    }

    #[test]
    fn transport_failures_mark_partial_then_total() {
        let fx = Fixture::new();
        let prompts = fx
            .builder()
            .build_all_classification_prompts(CodeSample {
                problem: PROBLEM,
                code: CODE,
            })
            .unwrap();
        let flaky = Flaky {
            inner: fx.mock(&[A, B], CODE),
            fail_for: vec![prompts[0].rendered.clone()],
        };
        let client = Client::new(Box::new(flaky), 4);
        let r = Pipeline::new(fx.builder(), &client, &fx.model)
            .classify(
                "S1",
                CodeSample {
                    problem: PROBLEM,
                    code: CODE,
                },
            )
            .unwrap();
        assert!(r.is_partial());
        assert!(r.failed_types.contains_key(&A));
        assert_eq!(r.detected, BTreeSet::from([B]));
        assert_eq!(r.unparseable_count, 1);

        let flaky = Flaky {
            inner: MockTransport::new(),
            fail_for: prompts.iter().map(|p| p.rendered.clone()).collect(),
        };
        let client = Client::new(Box::new(flaky), 4);
        let err = Pipeline::new(fx.builder(), &client, &fx.model)
            .classify(
                "S1",
                CodeSample {
                    problem: PROBLEM,
                    code: CODE,
                },
            )
            .unwrap_err();
        assert!(matches!(err, PipelineError::AllPromptsFailed { .. }));
    }

    fn augment_with(fx: &Fixture, response: &str) -> AugmentedSample {
        let source = CodeSample {
            problem: PROBLEM,
            code: CODE,
        };
        let prompt = fx
            .builder()
            .build_augmentation_prompt(source, A, "Any type.")
            .unwrap();
        let mut mock = MockTransport::new();
        mock.insert(&prompt.rendered, response);
        let client = Client::new(Box::new(mock), 1);
        Pipeline::new(fx.builder(), &client, &fx.model)
            .augment("aug-1", "S1", source, A, "Any type.")
            .unwrap()
    }

    #[test]
    fn augmentation_records() {
        let fx = Fixture::new();
        let changed = CODE.replace("%d\\n\",a", "%d\\n\",a+1");
        let a = augment_with(&fx, &serde_json::json!({ "code": changed }).to_string());
        assert_eq!(a.generated_code, changed);
        assert_eq!(a.outcome, Outcome::Unresolved);
        assert!(!a.evidence.identical_to_source);
        assert!(!a.is_failed());

        let reformatted = CODE.replace('\n', "\n\n  ");
        let a = augment_with(&fx, &serde_json::json!({ "code": reformatted }).to_string());
        assert!(a.evidence.identical_to_source);

        let a = augment_with(&fx, "Sorry, here is prose only.");
        assert!(a.is_failed());
        assert_eq!(
            a.failure.unwrap().raw_response.as_deref(),
            Some("Sorry, here is prose only.")
        );
    }

    fn verdict(value: JudgeStatus) -> JudgeVerdict {
        JudgeVerdict {
            value,
            failed_test: None,
            detail: String::new(),
        }
    }

    fn classification(detected: &[ErrorId]) -> ClassificationResult {
        let taxonomy = Taxonomy::builtin();
        let verdicts = ErrorId::ALL
            .iter()
            .map(|&t| {
                let ans = if detected.contains(&t) {
                    "Answer: Yes"
                } else {
                    "Answer: No"
                };
                (t, parse_verdict(ans))
            })
            .collect();
        let d = taxonomy.dominant(detected.iter().copied());
        ClassificationResult {
            sample_ref: "aug".into(),
            verdicts,
            detected: detected.iter().copied().collect(),
            dominant_set: d.maximal_set,
            dominant: d.canonical,
            unparseable_count: 0,
            failed_types: BTreeMap::new(),
        }
    }

    fn unresolved(target: ErrorId, identical: bool) -> AugmentedSample {
        AugmentedSample {
            id: "aug".into(),
            source_ref: "S1".into(),
            target_type: target,
            generated_code: "code".into(),
            outcome: Outcome::Unresolved,
            evidence: Evidence {
                identical_to_source: identical,
                ..Evidence::default()
            },
            failure: None,
        }
    }

    #[test]
    fn categorize_branches() {
        let aug = unresolved(D, false);
        let r = categorize(&aug, &verdict(JudgeStatus::CompileError), None).unwrap();
        assert_eq!(r.outcome, Outcome::NotALogicalError);
        let r = categorize(&aug, &verdict(JudgeStatus::Accepted), None).unwrap();
        assert_eq!(r.outcome, Outcome::NotALogicalError);
        let r = categorize(
            &aug,
            &verdict(JudgeStatus::WrongAnswer),
            Some(&classification(&[E])),
        )
        .unwrap();
        assert_eq!(r.outcome, Outcome::OtherTypeOfLogicalError);
        assert_eq!(r.evidence.classifier_dominant, Some(E));
        let r = categorize(
            &aug,
            &verdict(JudgeStatus::TimeLimit),
            Some(&classification(&[D, J])),
        )
        .unwrap();
        assert_eq!(r.outcome, Outcome::RightAugmentation);
        assert!(r.check_evidence().is_ok());
        let err = categorize(&aug, &verdict(JudgeStatus::RuntimeError), None).unwrap_err();
        assert!(matches!(err, PipelineError::Precondition(_)));
        let r = categorize(
            &unresolved(D, true),
            &verdict(JudgeStatus::WrongAnswer),
            None,
        )
        .unwrap();
        assert_eq!(r.outcome, Outcome::NotALogicalError);
    }

    #[test]
    fn results_file_round_trip() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("classifications.jsonl");
        let mut b = classification(&[E]);
        b.sample_ref = "b".into();
        let mut a = classification(&[J, B]);
        a.sample_ref = "a".into();
        write_results(&path, &[b.clone(), a.clone()]).unwrap();
        assert_eq!(read_results(&path).unwrap(), vec![a, b]);
        assert!(read_results(tmp.path().join("none")).unwrap().is_empty());
    }

    #[test]
    fn token_comparison() {
        assert!(same_tokens("int  a;\n", " int a;"));
        assert!(!same_tokens("int a;", "int b;"));
    }
}

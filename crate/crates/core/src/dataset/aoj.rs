//! Submission ingestion from an AOJ-style online-judge API.
//!
//! Endpoint paths, pagination and the status vocabulary come from
//! [`AojConfig`]. Every response body is cached on disk keyed by URL, and in
//! offline mode only the cache is consulted, so an ingest can be replayed
//! from a recorded cache directory without network access.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::{Dataset, DatasetError, Label, LabeledSample, Problem, Provenance, SubmissionStatus};
use crate::judge::JudgeStatus;
use crate::llm::RetryPolicy;

/// Sample ids of ingested submissions are `aoj-<submission id>`.
pub const SAMPLE_PREFIX: &str = "aoj-";

fn default_status_map() -> BTreeMap<String, JudgeStatus> {
    use JudgeStatus::*;
    [
        ("0", CompileError),
        ("1", WrongAnswer),
        ("2", TimeLimit),
        ("3", RuntimeError),
        ("4", Accepted),
        ("6", RuntimeError),
        ("7", RuntimeError),
        ("8", WrongAnswer),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

fn default_courses() -> BTreeMap<String, Vec<String>> {
    let itp1 = (1..=11)
        .flat_map(|topic| ["A", "B", "C", "D"].map(|p| format!("ITP1_{topic}_{p}")))
        .collect();
    BTreeMap::from([("ITP1".to_string(), itp1)])
}

/// Names of the fields read from submission records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AojFields {
    pub submission_id: String,
    pub user: String,
    pub status: String,
    pub language: String,
    pub source_code: String,
    pub statement: String,
}

impl Default for AojFields {
    fn default() -> Self {
        Self {
            submission_id: "judgeId".into(),
            user: "userId".into(),
            status: "status".into(),
            language: "language".into(),
            source_code: "sourceCode".into(),
            statement: "html".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AojConfig {
    pub base_url: String,
    /// Listing endpoint; `{problem_id}`, `{page}` and `{size}` are filled in.
    /// The response is a JSON array of submission records.
    pub submissions_path: String,
    /// Per-submission endpoint returning the source code; `{judge_id}`.
    pub source_path: String,
    /// Optional problem description endpoint; `{problem_id}`.
    pub description_path: Option<String>,
    pub page_size: usize,
    pub max_pages: usize,
    /// Raw status value (as text) to judge status. Values not listed are kept
    /// as `Unknown`.
    pub status_map: BTreeMap<String, JudgeStatus>,
    /// Course id to problem ids.
    pub courses: BTreeMap<String, Vec<String>>,
    pub fields: AojFields,
    pub cache_dir: Option<PathBuf>,
    /// Serve only from `cache_dir`; a cache miss is an error.
    pub offline: bool,
    pub retry: RetryPolicy,
    /// Per-request timeout in seconds.
    pub timeout: f64,
}

impl Default for AojConfig {
    fn default() -> Self {
        Self {
            base_url: "https://judgeapi.u-aizu.ac.jp".into(),
            submissions_path: "/submission_records/problems/{problem_id}?page={page}&size={size}"
                .into(),
            source_path: "/reviews/{judge_id}".into(),
            description_path: None,
            page_size: 100,
            max_pages: 10,
            status_map: default_status_map(),
            courses: default_courses(),
            fields: AojFields::default(),
            cache_dir: None,
            offline: false,
            retry: RetryPolicy::default(),
            timeout: 30.0,
        }
    }
}

impl AojConfig {
    pub fn course(&self, id: &str) -> Result<&[String], DatasetError> {
        self.courses
            .get(id)
            .map(Vec::as_slice)
            .ok_or_else(|| DatasetError::Ingest(format!("unknown course id {id:?}")))
    }
}

/// One submission as fetched, before it becomes a [`LabeledSample`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawSubmission {
    pub submission_id: String,
    pub problem_id: String,
    /// SHA-256 of the judge's user id.
    pub submitter_hash: String,
    pub status: SubmissionStatus,
    pub language: String,
    pub source_code: String,
}

pub fn hash_submitter(user: &str) -> String {
    hex::encode(Sha256::digest(user.as_bytes()))
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

struct Fetcher<'a> {
    cfg: &'a AojConfig,
    http: Option<reqwest::blocking::Client>,
}

impl<'a> Fetcher<'a> {
    fn new(cfg: &'a AojConfig) -> Result<Self, DatasetError> {
        let http = if cfg.offline {
            None
        } else {
            let client = reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs_f64(cfg.timeout))
                .build()
                .map_err(|e| DatasetError::Ingest(format!("cannot build HTTP client: {e}")))?;
            Some(client)
        };
        Ok(Self { cfg, http })
    }

    fn cache_path(&self, url: &str) -> Option<PathBuf> {
        let dir = self.cfg.cache_dir.as_ref()?;
        Some(dir.join(format!(
            "{}.json",
            hex::encode(Sha256::digest(url.as_bytes()))
        )))
    }

    fn get_json(&self, path: &str) -> Result<Value, DatasetError> {
        let url = format!("{}{}", self.cfg.base_url.trim_end_matches('/'), path);
        let cached = self.cache_path(&url);
        if let Some(p) = cached.as_ref().filter(|p| p.is_file()) {
            let text = std::fs::read_to_string(p).map_err(super::io_err(p))?;
            return serde_json::from_str(&text).map_err(|e| {
                DatasetError::Ingest(format!("corrupt cache entry {}: {e}", p.display()))
            });
        }
        let Some(http) = &self.http else {
            return Err(DatasetError::Ingest(format!(
                "offline and not cached: {url}"
            )));
        };
        let text = self.fetch(http, &url)?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| DatasetError::Ingest(format!("{url}: invalid JSON: {e}")))?;
        if let Some(p) = cached {
            if let Some(dir) = p.parent() {
                std::fs::create_dir_all(dir).map_err(super::io_err(dir))?;
            }
            std::fs::write(&p, &text).map_err(super::io_err(&p))?;
        }
        Ok(value)
    }

    fn fetch(&self, http: &reqwest::blocking::Client, url: &str) -> Result<String, DatasetError> {
        let max = self.cfg.retry.max_attempts.max(1);
        let mut attempt = 0;
        loop {
            attempt += 1;
            let failure = match http.get(url).send() {
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_success() {
                        return resp
                            .text()
                            .map_err(|e| DatasetError::Ingest(format!("{url}: {e}")));
                    }
                    let code = status.as_u16();
                    if !(code == 408 || code == 429 || status.is_server_error()) {
                        return Err(DatasetError::Ingest(format!("{url}: HTTP {status}")));
                    }
                    format!("HTTP {status}")
                }
                Err(e) => e.to_string(),
            };
            if attempt >= max {
                return Err(DatasetError::Ingest(format!(
                    "{url}: giving up after {attempt} attempt(s): {failure}"
                )));
            }
            let delay = self.cfg.retry.backoff * 2f64.powi(attempt as i32 - 1);
            log::warn!("{url}: {failure}; retrying in {delay:.3}s");
            std::thread::sleep(Duration::from_secs_f64(delay));
        }
    }

    fn field(&self, record: &Value, name: &str, context: &str) -> Result<String, DatasetError> {
        record
            .get(name)
            .and_then(scalar_text)
            .ok_or_else(|| DatasetError::Ingest(format!("{context}: record has no field {name:?}")))
    }

    fn list_page(&self, problem_id: &str, page: usize) -> Result<Vec<Value>, DatasetError> {
        let path = self
            .cfg
            .submissions_path
            .replace("{problem_id}", problem_id)
            .replace("{page}", &page.to_string())
            .replace("{size}", &self.cfg.page_size.to_string());
        match self.get_json(&path)? {
            Value::Array(items) => Ok(items),
            other => Err(DatasetError::Ingest(format!(
                "{path}: expected a JSON array, got {}",
                short_kind(&other)
            ))),
        }
    }

    fn map_status(&self, raw: &str, submission: &str) -> SubmissionStatus {
        match self.cfg.status_map.get(raw) {
            Some(s) => SubmissionStatus::Judged(*s),
            None => {
                log::warn!("submission {submission}: unmapped status {raw:?} kept as Unknown");
                SubmissionStatus::Unknown(raw.to_string())
            }
        }
    }
}

fn short_kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

/// Fetches submissions for `problem_ids`, keeping only those whose status
/// equals `filter` when one is given. Source code is fetched only for kept
/// submissions. Results are in listing order with duplicates removed.
pub fn ingest_aoj(
    problem_ids: &[String],
    cfg: &AojConfig,
    filter: Option<&SubmissionStatus>,
) -> Result<Vec<RawSubmission>, DatasetError> {
    if problem_ids.is_empty() {
        return Ok(Vec::new());
    }
    if cfg.page_size == 0 {
        return Err(DatasetError::Ingest("page_size must be positive".into()));
    }
    let fetcher = Fetcher::new(cfg)?;
    let f = &cfg.fields;
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for problem_id in problem_ids {
        for page in 0..cfg.max_pages {
            let items = fetcher.list_page(problem_id, page)?;
            let n = items.len();
            for item in items {
                let context = format!("problem {problem_id} page {page}");
                let id = fetcher.field(&item, &f.submission_id, &context)?;
                let raw_status = fetcher.field(&item, &f.status, &context)?;
                let status = fetcher.map_status(&raw_status, &id);
                if filter.is_some_and(|want| *want != status) || !seen.insert(id.clone()) {
                    continue;
                }
                let user = fetcher.field(&item, &f.user, &context)?;
                let language = item
                    .get(&f.language)
                    .and_then(scalar_text)
                    .unwrap_or_default();
                let review = fetcher.get_json(&cfg.source_path.replace("{judge_id}", &id))?;
                let source_code =
                    fetcher.field(&review, &f.source_code, &format!("submission {id}"))?;
                out.push(RawSubmission {
                    submission_id: id,
                    problem_id: problem_id.clone(),
                    submitter_hash: hash_submitter(&user),
                    status,
                    language,
                    source_code,
                });
            }
            if n < cfg.page_size {
                break;
            }
        }
    }
    Ok(out)
}

/// Problem statement from the description endpoint, when one is configured.
pub fn fetch_statement(problem_id: &str, cfg: &AojConfig) -> Result<Option<String>, DatasetError> {
    let Some(template) = &cfg.description_path else {
        return Ok(None);
    };
    let fetcher = Fetcher::new(cfg)?;
    let value = fetcher.get_json(&template.replace("{problem_id}", problem_id))?;
    fetcher
        .field(
            &value,
            &cfg.fields.statement,
            &format!("problem {problem_id}"),
        )
        .map(Some)
}

/// Adds submissions not yet present as unlabeled samples and returns how many
/// were new. Problems missing from the dataset get a stub record.
pub fn merge_submissions(
    dataset: &mut Dataset,
    course: &str,
    submissions: &[RawSubmission],
    statements: &BTreeMap<String, String>,
) -> usize {
    let mut added = 0;
    for sub in submissions {
        if dataset.problem(&sub.problem_id).is_none() {
            let statement = statements
                .get(&sub.problem_id)
                .cloned()
                .unwrap_or_else(|| format!("Problem {} of course {course}.", sub.problem_id));
            dataset.problems.push(Problem {
                id: sub.problem_id.clone(),
                course: course.to_string(),
                statement,
                remarks: None,
                io_examples: Vec::new(),
            });
        }
        let id = format!("{SAMPLE_PREFIX}{}", sub.submission_id);
        if dataset.sample(&id).is_some() {
            continue;
        }
        dataset.samples.push(LabeledSample {
            id,
            problem_ref: sub.problem_id.clone(),
            source_code: sub.source_code.clone(),
            source_language: sub.language.clone(),
            label: Label::empty(),
            status: Some(sub.status.clone()),
            provenance: Provenance {
                submitter_hash: Some(sub.submitter_hash.clone()),
                submission_id: Some(sub.submission_id.clone()),
                annotator_agreement: false,
            },
        });
        added += 1;
    }
    added
}

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use logicerr::dataset::aoj::AojConfig;
use logicerr::evaluate::FprMode;
use logicerr::judge::ToolchainProfile;
use logicerr::llm::{ModelConfig, API_BASE_ENV};
use logicerr::prompts::{FewShotBank, Templates};
use logicerr::taxonomy::{ErrorId, Taxonomy};

pub const CONFIG_ENV: &str = "LOGICERR_CONFIG";
pub const DEFAULT_CONFIG_FILE: &str = "logicerr.toml";

const DEFAULT_REMARKS: &str =
    "Any of the listed error types may be introduced, as long as it fits what this problem asks for.";

fn builtin_profiles() -> BTreeMap<String, ToolchainProfile> {
    let cpp = |id: &str, std: &str| ToolchainProfile {
        language_id: id.into(),
        source_file: "main.cpp".into(),
        compile: Some(format!("g++ -std={std} -O2 -o {{out}} {{src}}")),
        run: "{bin}".into(),
        time_limit: 2.0,
        memory_limit: 512 << 20,
        compile_time_limit: 30.0,
    };
    BTreeMap::from([
        ("cpp17".to_string(), cpp("cpp17", "c++17")),
        ("cpp14".to_string(), cpp("cpp14", "c++14")),
        (
            "c11".to_string(),
            ToolchainProfile {
                language_id: "c11".into(),
                source_file: "main.c".into(),
                compile: Some("gcc -std=c11 -O2 -o {out} {src} -lm".into()),
                run: "{bin}".into(),
                time_limit: 2.0,
                memory_limit: 512 << 20,
                compile_time_limit: 30.0,
            },
        ),
        (
            "python3".to_string(),
            ToolchainProfile {
                language_id: "python3".into(),
                source_file: "main.py".into(),
                compile: None,
                run: "python3 {src}".into(),
                time_limit: 2.0,
                memory_limit: 512 << 20,
                compile_time_limit: 30.0,
            },
        ),
    ])
}

/// Contents of `logicerr.toml`. Every field is optional.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub dataset_dir: PathBuf,
    /// Directory with `classify/*.tmpl` and `augment/*.tmpl`; bundled
    /// templates when unset.
    pub template_dir: Option<PathBuf>,
    pub taxonomy_file: Option<PathBuf>,
    pub fewshot_file: Option<PathBuf>,
    pub parallelism: usize,
    pub fpr_mode: FprMode,
    /// Augmentation attempts per target type.
    pub quotas: BTreeMap<ErrorId, u32>,
    /// Remarks used for problems that carry none.
    pub default_remarks: String,
    pub model: ModelConfig,
    pub aoj: AojConfig,
    /// Merged over the built-in `cpp17`, `cpp14`, `c11` and `python3`.
    pub profiles: BTreeMap<String, ToolchainProfile>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset_dir: PathBuf::from("dataset"),
            template_dir: None,
            taxonomy_file: None,
            fewshot_file: None,
            parallelism: 4,
            fpr_mode: FprMode::Negatives,
            quotas: BTreeMap::new(),
            default_remarks: DEFAULT_REMARKS.into(),
            model: ModelConfig::default(),
            aoj: AojConfig::default(),
            profiles: BTreeMap::new(),
        }
    }
}

impl RunConfig {
    /// File named by `--config`, else `$LOGICERR_CONFIG`, else
    /// `./logicerr.toml` when present, else defaults. The endpoint is then
    /// overridden by `$LOGICERR_API_BASE`.
    pub fn resolve(flag: Option<&Path>) -> Result<Self> {
        let env_path = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
        let path = match (flag, env_path) {
            (Some(p), _) => Some(p.to_path_buf()),
            (None, Some(p)) => Some(p),
            (None, None) => Some(PathBuf::from(DEFAULT_CONFIG_FILE)).filter(|p| p.is_file()),
        };
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(&p)
                    .with_context(|| format!("cannot read config {}", p.display()))?;
                let cfg: RunConfig = toml::from_str(&text)
                    .with_context(|| format!("invalid config {}", p.display()))?;
                let base = p.parent().unwrap_or(Path::new("."));
                cfg.relative_to(base)
            }
            None => RunConfig::default(),
        };
        if let Ok(base) = std::env::var(API_BASE_ENV) {
            cfg.model.endpoint_base = base;
        }
        Ok(cfg)
    }

    fn relative_to(mut self, base: &Path) -> Self {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.dataset_dir);
        for p in [
            &mut self.template_dir,
            &mut self.taxonomy_file,
            &mut self.fewshot_file,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        if let Some(p) = self.aoj.cache_dir.as_mut() {
            fix(p);
        }
        if let logicerr::llm::TransportKind::Mock { fixture_path } = &mut self.model.transport {
            fix(fixture_path);
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.parallelism < 1 {
            bail!("parallelism must be at least 1");
        }
        for (what, path) in [
            ("template_dir", &self.template_dir),
            ("taxonomy_file", &self.taxonomy_file),
            ("fewshot_file", &self.fewshot_file),
        ] {
            if let Some(p) = path {
                if !p.exists() {
                    bail!("{what} {} does not exist", p.display());
                }
            }
        }
        self.model.validate()?;
        Ok(())
    }

    pub fn profile(&self, name: &str) -> Result<ToolchainProfile> {
        let mut all = builtin_profiles();
        all.extend(self.profiles.clone());
        let known: Vec<String> = all.keys().cloned().collect();
        let p = all.remove(name).with_context(|| {
            format!(
                "unknown toolchain profile {name:?} (known: {})",
                known.join(", ")
            )
        })?;
        p.validate()?;
        Ok(p)
    }

    pub fn taxonomy(&self) -> Result<Taxonomy> {
        Ok(match &self.taxonomy_file {
            Some(p) => Taxonomy::load(p)?,
            None => Taxonomy::builtin(),
        })
    }

    pub fn templates(&self) -> Result<Templates> {
        Ok(match &self.template_dir {
            Some(p) => Templates::load_dir(p)?,
            None => Templates::builtin(),
        })
    }

    pub fn fewshot(&self) -> Result<FewShotBank> {
        Ok(match &self.fewshot_file {
            Some(p) => FewShotBank::load(p)?,
            None => FewShotBank::builtin(),
        })
    }

    /// Serialized effective configuration, for run manifests and reports.
    pub fn snapshot(&self) -> String {
        toml::to_string(self).unwrap_or_else(|e| format!("<unserializable config: {e}>"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_defaults() {
        let cfg: RunConfig = toml::from_str("").unwrap();
        assert_eq!(cfg.parallelism, 4);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("paralelism = 2").is_err());
    }

    #[test]
    fn quotas_and_profiles_parse() {
        let cfg: RunConfig = toml::from_str(
            r#"
            fpr_mode = "paper-rowwise"
            [quotas]
            A = 10
            J = 13
            [profiles.sh]
            language_id = "sh"
            source_file = "main.sh"
            run = "sh {src}"
            time_limit = 1.0
            memory_limit = 268435456
            "#,
        )
        .unwrap();
        assert_eq!(cfg.fpr_mode, FprMode::PaperRowwise);
        assert_eq!(cfg.quotas[&ErrorId::J], 13);
        assert_eq!(cfg.profile("sh").unwrap().source_file, "main.sh");
        assert!(cfg.profile("cpp17").is_ok());
        assert!(cfg
            .profile("cobol")
            .unwrap_err()
            .to_string()
            .contains("cobol"));
    }

    #[test]
    fn snapshot_round_trips() {
        let cfg = RunConfig::default();
        let back: RunConfig = toml::from_str(&cfg.snapshot()).unwrap();
        assert_eq!(back.snapshot(), cfg.snapshot());
    }
}

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::backends::{BackendSpec, PlannerKind, TranslatorKind};
use crate::datasets::{NoiseConfig, Setting};
use crate::prover::{PromptSpec, SuccessCriterion};

use super::EvalError;

/// One evaluation run over a curated split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Path to the split's `manifest.json`.
    pub split: PathBuf,
    /// Bucket names to run; all buckets when absent.
    pub buckets: Option<Vec<String>>,
    /// Overrides the manifest setting.
    pub setting: Option<Setting>,
    pub prompt: PromptSpec,
    /// Ensemble sizes reported; the largest one is run.
    pub k_values: Vec<usize>,
    pub backend: BackendSpec,
    pub noise: NoiseConfig,
    pub success: SuccessCriterion,
    /// Record wall-clock time per step. Off keeps reports byte-stable.
    pub timing: bool,
    /// Worker threads; the number of cores when absent.
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            split: PathBuf::new(),
            buckets: None,
            setting: None,
            prompt: PromptSpec::default(),
            k_values: vec![1, 3, 5, 10],
            backend: BackendSpec::default(),
            noise: NoiseConfig::default(),
            success: SuccessCriterion::Reach,
            timing: false,
            workers: None,
        }
    }
}

impl RunConfig {
    pub fn new(split: impl Into<PathBuf>) -> Self {
        Self {
            split: split.into(),
            ..Self::default()
        }
    }

    /// Reads a JSON config; relative paths resolve against the config's directory.
    pub fn load(path: &Path) -> Result<Self, EvalError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| EvalError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        cfg.rebase(base);
        Ok(cfg)
    }

    pub(crate) fn rebase(&mut self, base: &Path) {
        if self.split.is_relative() && !self.split.as_os_str().is_empty() {
            self.split = base.join(&self.split);
        }
        if let Some(f) = &self.backend.fixtures {
            if f.is_relative() {
                self.backend.fixtures = Some(base.join(f));
            }
        }
    }

    pub fn max_k(&self) -> usize {
        self.k_values.iter().copied().max().unwrap_or(1)
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        if !self.split.is_file() {
            return Err(EvalError::Config(format!(
                "split manifest {} does not exist",
                self.split.display()
            )));
        }
        if self.k_values.is_empty() || self.k_values.contains(&0) {
            return Err(EvalError::Config("k_values must be non-empty and positive".into()));
        }
        if !(0.0..=1.0).contains(&self.noise.rate) {
            return Err(EvalError::Config(format!(
                "noise rate {} outside [0, 1]",
                self.noise.rate
            )));
        }
        if self.workers == Some(0) {
            return Err(EvalError::Config("workers must be positive".into()));
        }
        let replay = self.backend.planner == PlannerKind::Replay
            || self.backend.translator == TranslatorKind::Replay;
        if replay {
            match &self.backend.fixtures {
                Some(f) if f.is_file() => {}
                Some(f) => {
                    return Err(EvalError::Config(format!(
                        "fixture file {} does not exist",
                        f.display()
                    )))
                }
                None => return Err(EvalError::Config("replay backends need a fixture file".into())),
            }
        }
        let mut spec = self.prompt.clone();
        spec.k = self.max_k();
        spec.validate()?;
        Ok(())
    }
}

use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::kb::VerbalizationSchema;

use super::{
    BackendError, ExactTranslator, FixtureStore, HashTranslator, OraclePlanner, Planner,
    RecordingPlanner, RecordingTranslator, RemoteConfig, RemotePlanner, RemoteTranslator,
    ReplayPlanner, ReplayTranslator, TemplatePlanner, Translator, DEFAULT_HASH_DIM,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlannerKind {
    Template,
    Replay,
    Remote,
    /// Replays ground-truth proofs supplied by the caller.
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TranslatorKind {
    Exact,
    Hash,
    Remote,
    Replay,
}

/// Backend selection, written `planner=template translator=hash` on the command line.
pub type BackendPair = (Arc<dyn Planner>, Arc<dyn Translator>);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendSpec {
    pub planner: PlannerKind,
    pub translator: TranslatorKind,
    pub hash_dim: u64,
    /// Fixture file served by replay backends.
    pub fixtures: Option<PathBuf>,
}

impl Default for BackendSpec {
    fn default() -> Self {
        Self {
            planner: PlannerKind::Template,
            translator: TranslatorKind::Hash,
            hash_dim: DEFAULT_HASH_DIM,
            fixtures: None,
        }
    }
}

fn kind<T: for<'de> Deserialize<'de>>(value: &str) -> Result<T, BackendError> {
    serde_json::from_value(serde_json::Value::String(value.to_string()))
        .map_err(|_| BackendError::Config(format!("unknown backend {value:?}")))
}

impl FromStr for BackendSpec {
    type Err = BackendError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut spec = BackendSpec::default();
        for part in text.split(|c: char| c.is_whitespace() || c == ',').filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| BackendError::Config(format!("expected key=value, got {part:?}")))?;
            match key {
                "planner" => spec.planner = kind(value)?,
                "translator" => spec.translator = kind(value)?,
                "dim" => {
                    spec.hash_dim = value
                        .parse()
                        .map_err(|_| BackendError::Config(format!("bad dim {value:?}")))?
                }
                "fixtures" => spec.fixtures = Some(PathBuf::from(value)),
                _ => return Err(BackendError::Config(format!("unknown backend key {key:?}"))),
            }
        }
        Ok(spec)
    }
}

impl BackendSpec {
    pub fn is_deterministic(&self) -> bool {
        self.planner != PlannerKind::Remote && self.translator != TranslatorKind::Remote
    }

    fn store(&self) -> Result<Arc<FixtureStore>, BackendError> {
        let path = self
            .fixtures
            .as_ref()
            .ok_or_else(|| BackendError::Config("replay backends need fixtures=<file>".into()))?;
        if !path.exists() {
            return Err(BackendError::Config(format!(
                "fixture file {} does not exist",
                path.display()
            )));
        }
        FixtureStore::open(path)
    }

    /// Builds the planner; `oracle` gets its proofs through `oracle`.
    pub fn planner(
        &self,
        schema: &VerbalizationSchema,
        oracle: Option<OraclePlanner>,
    ) -> Result<Arc<dyn Planner>, BackendError> {
        Ok(match self.planner {
            PlannerKind::Template => Arc::new(TemplatePlanner::new(schema.clone())),
            PlannerKind::Replay => Arc::new(ReplayPlanner::new(self.store()?)),
            PlannerKind::Remote => Arc::new(RemotePlanner::new(RemoteConfig::from_env("PLANNER")?)?),
            PlannerKind::Oracle => Arc::new(
                oracle.unwrap_or_else(|| OraclePlanner::new(schema.clone())),
            ),
        })
    }

    pub fn translator(&self) -> Result<Arc<dyn Translator>, BackendError> {
        Ok(match self.translator {
            TranslatorKind::Exact => Arc::new(ExactTranslator::new()),
            TranslatorKind::Hash => Arc::new(HashTranslator::new(self.hash_dim)?),
            TranslatorKind::Remote => {
                Arc::new(RemoteTranslator::new(RemoteConfig::from_env("EMBED")?)?)
            }
            TranslatorKind::Replay => Arc::new(ReplayTranslator::new(self.store()?)),
        })
    }

    /// Planner and translator that record every call into `store`.
    pub fn recording(
        &self,
        schema: &VerbalizationSchema,
        oracle: Option<OraclePlanner>,
        store: Arc<FixtureStore>,
    ) -> Result<BackendPair, BackendError> {
        let planner = self.planner(schema, oracle)?;
        let translator = self.translator()?;
        Ok((
            Arc::new(RecordingPlanner::new(planner, store.clone())),
            Arc::new(RecordingTranslator::new(translator, store)),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flag_syntax() {
        let spec: BackendSpec = "planner=replay translator=exact fixtures=fx.json".parse().unwrap();
        assert_eq!(spec.planner, PlannerKind::Replay);
        assert_eq!(spec.translator, TranslatorKind::Exact);
        assert_eq!(spec.fixtures, Some(PathBuf::from("fx.json")));
        assert!("planner=gpt".parse::<BackendSpec>().is_err());
        assert!("planner".parse::<BackendSpec>().is_err());
        assert_eq!("".parse::<BackendSpec>().unwrap(), BackendSpec::default());
    }
}

use std::collections::BTreeMap;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::report::{finish, write_file};
use super::{evaluate, EvalError, MetricsReport, RunConfig, CSV_COLUMNS};

/// A base config plus a grid of overrides keyed by dotted field paths,
/// e.g. `"prompt.n": [1, 2, 3]` or `"noise.rate": [0.0, 0.5]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: RunConfig,
    #[serde(default)]
    pub grid: BTreeMap<String, Vec<Value>>,
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self, EvalError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| EvalError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg: SweepConfig = serde_json::from_str(&text)?;
        cfg.base.rebase(path.parent().unwrap_or_else(|| Path::new(".")));
        Ok(cfg)
    }

    pub fn cells(&self) -> Result<Vec<SweepCell>, EvalError> {
        expand_grid(&self.base, &self.grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    /// Values of the varied fields for this cell.
    pub key: BTreeMap<String, Value>,
    pub config: RunConfig,
}

fn set_path(root: &mut Value, path: &str, value: Value) -> Result<(), EvalError> {
    let mut node = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| EvalError::Config(format!("grid key {path:?} does not name a field")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj
            .get_mut(*part)
            .ok_or_else(|| EvalError::Config(format!("grid key {path:?} does not name a field")))?;
    }
    Err(EvalError::Config(format!("empty grid key {path:?}")))
}

/// Cartesian product of the grid over `base`; the last key varies fastest.
pub fn expand_grid(
    base: &RunConfig,
    grid: &BTreeMap<String, Vec<Value>>,
) -> Result<Vec<SweepCell>, EvalError> {
    if let Some((k, _)) = grid.iter().find(|(_, v)| v.is_empty()) {
        return Err(EvalError::Config(format!("grid key {k:?} has no values")));
    }
    let base_value = serde_json::to_value(base)?;
    let mut keys: Vec<BTreeMap<String, Value>> = vec![BTreeMap::new()];
    for (name, values) in grid {
        keys = keys
            .into_iter()
            .flat_map(|k| {
                values.iter().map(move |v| {
                    let mut k = k.clone();
                    k.insert(name.clone(), v.clone());
                    k
                })
            })
            .collect();
    }
    keys.into_iter()
        .map(|key| {
            let mut value = base_value.clone();
            for (path, v) in &key {
                set_path(&mut value, path, v.clone())?;
            }
            let config: RunConfig = serde_json::from_value(value)
                .map_err(|e| EvalError::Config(format!("grid cell {key:?}: {e}")))?;
            Ok(SweepCell { key, config })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub key: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<MetricsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub varied: Vec<String>,
    pub outcomes: Vec<SweepOutcome>,
}

/// Evaluates every cell in order. A failing cell is logged and recorded; the
/// sweep moves on.
pub fn sweep(cells: &[SweepCell]) -> Result<SweepReport, EvalError> {
    if cells.is_empty() {
        return Err(EvalError::Config("sweep grid is empty".into()));
    }
    let mut varied: Vec<String> = Vec::new();
    for cell in cells {
        for k in cell.key.keys() {
            if !varied.contains(k) {
                varied.push(k.clone());
            }
        }
    }
    let outcomes = cells
        .iter()
        .map(|cell| match evaluate(&cell.config) {
            Ok(report) => SweepOutcome {
                key: cell.key.clone(),
                report: Some(report),
                error: None,
            },
            Err(e) => {
                warn!("sweep cell {:?} failed: {e}", cell.key);
                SweepOutcome {
                    key: cell.key.clone(),
                    report: None,
                    error: Some(e.to_string()),
                }
            }
        })
        .collect();
    Ok(SweepReport { varied, outcomes })
}

fn key_text(value: Option<&Value>) -> String {
    match value {
        Some(Value::String(s)) => s.clone(),
        Some(v) => v.to_string(),
        None => String::new(),
    }
}

impl SweepReport {
    pub fn failures(&self) -> usize {
        self.outcomes.iter().filter(|o| o.error.is_some()).count()
    }

    /// Summary CSV: varied fields first, then the report columns. Failed
    /// cells contribute no rows.
    pub fn to_csv(&self) -> Result<String, EvalError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = self.varied.clone();
        header.extend(CSV_COLUMNS.iter().map(|c| c.to_string()));
        w.write_record(&header)?;
        for outcome in &self.outcomes {
            let Some(report) = &outcome.report else { continue };
            for row in &report.rows {
                let mut fields: Vec<String> =
                    self.varied.iter().map(|k| key_text(outcome.key.get(k))).collect();
                fields.extend(row.csv_fields());
                w.write_record(&fields)?;
            }
        }
        finish(w)
    }

    pub fn to_json(&self) -> Result<String, EvalError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), EvalError> {
        write_file(path, &self.to_csv()?)
    }

    pub fn write_json(&self, path: &Path) -> Result<(), EvalError> {
        write_file(path, &self.to_json()?)
    }
}

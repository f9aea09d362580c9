//! Grids of experiments: a base config plus axes that overwrite fields by
//! JSON pointer.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::{monte_carlo, ExperimentConfig, HarnessError, RegretReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub name: String,
    /// JSON pointer into the base config, e.g. `/env/graphs/alpha`.
    pub path: String,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: Value,
    pub axes: Vec<SweepAxis>,
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("axis {axis:?}: {message}")]
    Axis { axis: String, message: String },
    #[error("cell {cell}: config field {path}: {message}")]
    CellConfig {
        cell: String,
        path: String,
        message: String,
    },
    #[error("cell {cell}: {source}")]
    Run { cell: String, source: HarnessError },
}

#[derive(Debug, Clone)]
pub struct SweepCell {
    /// Axis values of this cell, in axis order.
    pub params: Vec<Value>,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub params: Vec<Value>,
    pub mean_regret: f64,
    pub se: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub axis_names: Vec<String>,
    pub cells: Vec<(SweepCell, RegretReport)>,
    /// Sorted by parameter values, first axis most significant.
    pub summary: Vec<SummaryRow>,
}

/// Writes `value` at `pointer`, creating the last object key if missing.
pub fn set_pointer(root: &mut Value, pointer: &str, value: Value) -> Result<(), String> {
    if pointer.is_empty() {
        *root = value;
        return Ok(());
    }
    if !pointer.starts_with('/') {
        return Err(format!("{pointer:?} is not a JSON pointer"));
    }
    let (parent, last) = pointer.rsplit_once('/').expect("starts with /");
    let key = last.replace("~1", "/").replace("~0", "~");
    let target = root
        .pointer_mut(parent)
        .ok_or_else(|| format!("{parent:?} does not exist in the base config"))?;
    match target {
        Value::Object(map) => {
            map.insert(key, value);
            Ok(())
        }
        Value::Array(items) => {
            let i: usize = key.parse().map_err(|_| format!("{key:?} is not an array index"))?;
            let slot = items
                .get_mut(i)
                .ok_or_else(|| format!("index {i} out of range at {parent:?}"))?;
            *slot = value;
            Ok(())
        }
        _ => Err(format!("{parent:?} is neither an object nor an array")),
    }
}

/// Parses a config, reporting the path of the offending field (`.t`,
/// `.env.k`, ...). A missing field is named by the path it should have had.
pub fn parse_config(value: Value) -> Result<ExperimentConfig, (String, String)> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let mut path = e.path().to_string();
        let message = e.into_inner().to_string();
        if path == "." {
            path.clear();
        }
        if let Some(field) = message
            .strip_prefix("missing field `")
            .and_then(|rest| rest.split('`').next())
        {
            path.push('.');
            path.push_str(field);
        }
        let path = match path.as_str() {
            "" => ".".to_string(),
            p if p.starts_with('.') => path,
            _ => format!(".{path}"),
        };
        (path, message)
    })
}

fn describe(names: &[String], params: &[Value]) -> String {
    names
        .iter()
        .zip(params)
        .map(|(n, v)| format!("{n}={v}"))
        .collect::<Vec<_>>()
        .join(",")
}

impl SweepConfig {
    pub fn axis_names(&self) -> Vec<String> {
        self.axes.iter().map(|a| a.name.clone()).collect()
    }

    /// Cross product of the axes, first axis outermost.
    pub fn cells(&self) -> Result<Vec<SweepCell>, SweepError> {
        for a in &self.axes {
            if a.values.is_empty() {
                return Err(SweepError::Axis {
                    axis: a.name.clone(),
                    message: "no values".into(),
                });
            }
        }
        let names = self.axis_names();
        let mut combos: Vec<Vec<Value>> = vec![Vec::new()];
        for a in &self.axes {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    a.values.iter().map(move |v| {
                        let mut c = c.clone();
                        c.push(v.clone());
                        c
                    })
                })
                .collect();
        }
        combos
            .into_iter()
            .map(|params| {
                let mut value = self.base.clone();
                for (a, v) in self.axes.iter().zip(&params) {
                    set_pointer(&mut value, &a.path, v.clone()).map_err(|message| SweepError::Axis {
                        axis: a.name.clone(),
                        message,
                    })?;
                }
                let config = parse_config(value).map_err(|(path, message)| SweepError::CellConfig {
                    cell: describe(&names, &params),
                    path,
                    message,
                })?;
                Ok(SweepCell { params, config })
            })
            .collect()
    }
}

fn compare_values(a: &Value, b: &Value) -> Ordering {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap_or(f64::NAN), y.as_f64().unwrap_or(f64::NAN));
            x.total_cmp(&y)
        }
        (Value::String(x), Value::String(y)) => x.cmp(y),
        _ => a.to_string().cmp(&b.to_string()),
    }
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult, SweepError> {
    let names = config.axis_names();
    let mut cells = Vec::new();
    for cell in config.cells()? {
        let report = monte_carlo(&cell.config).map_err(|source| SweepError::Run {
            cell: describe(&names, &cell.params),
            source,
        })?;
        cells.push((cell, report));
    }
    let mut summary: Vec<SummaryRow> = cells
        .iter()
        .map(|(c, r)| SummaryRow {
            params: c.params.clone(),
            mean_regret: r.pseudo_regret.mean,
            se: r.pseudo_regret.se,
        })
        .collect();
    summary.sort_by(|a, b| {
        a.params
            .iter()
            .zip(&b.params)
            .map(|(x, y)| compare_values(x, y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    });
    Ok(SweepResult {
        axis_names: names,
        cells,
        summary,
    })
}

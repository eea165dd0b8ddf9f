//! JSON problem files.
//!
//! ```json
//! {
//!   "dimension": 1,
//!   "box": { "low": -3, "high": 3, "step": 0.01 },
//!   "functions": {
//!     "f": "x1^2",
//!     "g": { "expr": "(x - 2)^2" },
//!     "h": { "values": [1.0, 0.5, "inf", ...] }
//!   },
//!   "saddle": { "labels": ["y1", "y2"], "functions": ["f", "g"], "mixture_step": 0.01 },
//!   "parameters": {
//!     "alpha": 0.5, "gamma": 5, "eta": 0.1, "epsilon": 0.1, "lambda": 1,
//!     "dictionary": { "curvatures": [0, 1], "slope_bound": 4, "slope_step": 0.25 }
//!   }
//! }
//! ```
//!
//! `low`, `high` and `slope_bound` accept a number (same on every axis) or one
//! number per axis. Value tables list the grid in row-major order, the last
//! coordinate varying fastest; `"inf"` marks points outside the domain.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use phimax::minimax::SaddleProblem;
use phimax::primitives::{ExtReal, Grid, SampledFunction, Vector};
use phimax::support::MinorantDictionary;

use crate::expr::Expr;
use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PerAxis {
    Scalar(f64),
    Axes(Vec<f64>),
}

impl PerAxis {
    fn expand(&self, n: usize, what: &str) -> Result<Vec<f64>, CliError> {
        match self {
            PerAxis::Scalar(v) => Ok(vec![*v; n]),
            PerAxis::Axes(v) if v.len() == n => Ok(v.clone()),
            PerAxis::Axes(v) => Err(CliError::Input(format!("{what} has {} entries, expected {n}", v.len()))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub low: PerAxis,
    pub high: PerAxis,
    pub step: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TableValue {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    Text(String),
    Expr { expr: String },
    Values { values: Vec<TableValue> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaddleSpec {
    pub labels: Vec<String>,
    pub functions: Vec<String>,
    #[serde(default)]
    pub mixture_step: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictionarySpec {
    pub curvatures: Vec<f64>,
    pub slope_bound: PerAxis,
    pub slope_step: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub eta: Option<f64>,
    pub epsilon: Option<f64>,
    pub lambda: Option<f64>,
    pub dictionary: Option<DictionarySpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub dimension: usize,
    #[serde(rename = "box")]
    pub bounds: BoxSpec,
    pub functions: BTreeMap<String, FunctionSpec>,
    #[serde(default)]
    pub saddle: Option<SaddleSpec>,
    #[serde(default)]
    pub parameters: Parameters,
}

/// A problem file with its grid built and every function sampled.
#[derive(Debug, Clone)]
pub struct Problem {
    pub file: ProblemFile,
    pub grid: Arc<Grid>,
    pub functions: BTreeMap<String, SampledFunction>,
}

impl Problem {
    pub fn load(path: &Path) -> Result<Problem, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Problem, CliError> {
        let file: ProblemFile =
            serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed problem file: {e}")))?;
        let n = file.dimension;
        let low = Vector::new(file.bounds.low.expand(n, "box.low")?)?;
        let high = Vector::new(file.bounds.high.expand(n, "box.high")?)?;
        let grid = Arc::new(Grid::new(low, high, file.bounds.step)?);
        let mut functions = BTreeMap::new();
        for (name, spec) in &file.functions {
            let f = sample(&grid, spec).map_err(|e| match e {
                CliError::Input(msg) => CliError::Input(format!("function {name}: {msg}")),
                other => other,
            })?;
            functions.insert(name.clone(), f);
        }
        Ok(Problem { file, grid, functions })
    }

    pub fn function(&self, name: &str) -> Result<&SampledFunction, CliError> {
        self.functions.get(name).ok_or_else(|| {
            let known: Vec<&str> = self.functions.keys().map(String::as_str).collect();
            CliError::Input(format!("no function named {name:?} (known: {})", known.join(", ")))
        })
    }

    pub fn saddle(&self) -> Result<SaddleProblem, CliError> {
        let spec = self
            .file
            .saddle
            .as_ref()
            .ok_or_else(|| CliError::Input("problem file has no saddle section".into()))?;
        if spec.labels.len() != spec.functions.len() {
            return Err(CliError::Input(format!(
                "saddle lists {} labels but {} functions",
                spec.labels.len(),
                spec.functions.len()
            )));
        }
        let tables = spec
            .functions
            .iter()
            .map(|name| self.function(name).cloned())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SaddleProblem::new(spec.labels.clone(), tables, spec.mixture_step)?)
    }

    /// The dictionary from the parameters section, if any.
    pub fn dictionary(&self) -> Result<Option<MinorantDictionary>, CliError> {
        let Some(d) = &self.file.parameters.dictionary else { return Ok(None) };
        let bounds = d.slope_bound.expand(self.file.dimension, "dictionary.slope_bound")?;
        Ok(Some(MinorantDictionary::lattice(d.curvatures.clone(), &bounds, d.slope_step)?))
    }
}

fn sample(grid: &Arc<Grid>, spec: &FunctionSpec) -> Result<SampledFunction, CliError> {
    match spec {
        FunctionSpec::Text(src) | FunctionSpec::Expr { expr: src } => {
            let e = Expr::parse(src, grid.dim()).map_err(|e| CliError::Input(format!("{src:?}: {e}")))?;
            let values = (0..grid.len())
                .map(|i| e.eval(grid.point(i)).map(ExtReal::from))
                .collect::<Result<Vec<_>, _>>()
                .map_err(CliError::Input)?;
            Ok(SampledFunction::from_values(grid.clone(), values)?)
        }
        FunctionSpec::Values { values } => {
            if values.len() != grid.len() {
                return Err(CliError::Input(format!(
                    "table has {} values for {} grid points",
                    values.len(),
                    grid.len()
                )));
            }
            let values = values
                .iter()
                .map(|v| match v {
                    TableValue::Number(x) => Ok(ExtReal::from_f64(*x)?),
                    TableValue::Text(s) if matches!(s.as_str(), "inf" | "+inf" | "Infinity" | "+Infinity") => {
                        Ok(ExtReal::PlusInfinity)
                    }
                    TableValue::Text(s) => Err(CliError::Input(format!("bad table value {s:?}"))),
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(SampledFunction::from_values(grid.clone(), values)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_expressions_and_tables() {
        let p = Problem::from_json(
            r#"{"dimension": 1, "box": {"low": -1, "high": 1, "step": 0.5},
                "functions": {"f": "x^2", "g": {"expr": "abs(x1)"},
                              "h": {"values": [1, 0.5, 0, "inf", 2]}}}"#,
        )
        .unwrap();
        assert_eq!(p.grid.len(), 5);
        assert_eq!(p.function("f").unwrap().value(0), ExtReal::Finite(1.0));
        assert_eq!(p.function("g").unwrap().value(1), ExtReal::Finite(0.5));
        assert_eq!(p.function("h").unwrap().value(3), ExtReal::PlusInfinity);
        assert!(p.function("k").is_err());
        assert!(p.saddle().is_err());
    }

    #[test]
    fn rejects_malformed_files() {
        for bad in [
            r#"{"dimension": 1}"#,
            r#"{"dimension": 1, "box": {"low": 0, "high": 1, "step": 0.5}, "functions": {"f": "y"}}"#,
            r#"{"dimension": 1, "box": {"low": 0, "high": 1, "step": 0.5}, "functions": {"f": {"values": [1]}}}"#,
            r#"{"dimension": 1, "box": {"low": 0, "high": 1, "step": 0.5}, "functions": {"f": "inf"}}"#,
            r#"{"dimension": 2, "box": {"low": [0], "high": 1, "step": 0.5}, "functions": {}}"#,
        ] {
            assert_eq!(Problem::from_json(bad).err().map(|e| e.exit_code()), Some(1), "{bad}");
        }
    }

    #[test]
    fn builds_saddle_and_dictionary() {
        let p = Problem::from_json(
            r#"{"dimension": 1, "box": {"low": -3, "high": 3, "step": 0.5},
                "functions": {"a": "x^2", "b": "(x-2)^2"},
                "saddle": {"labels": ["y1", "y2"], "functions": ["a", "b"]},
                "parameters": {"dictionary": {"curvatures": [0, 1], "slope_bound": 2, "slope_step": 1}}}"#,
        )
        .unwrap();
        assert_eq!(p.saddle().unwrap().label_count(), 2);
        assert_eq!(p.dictionary().unwrap().unwrap().slopes().len(), 5);
    }
}

//! JSON system description.
//!
//! ```json
//! {
//!   "A": [[0.4, 0.0], [0.0, 0.9]],
//!   "B": [[1.0], [1.0]],
//!   "jordan": { "blocks": [{"lambda": 0.4, "size": 1}, ...], "P": [[...]] },
//!   "labels": { ... }
//! }
//! ```
//!
//! `jordan` and `labels` are optional. Numbers are written back with 17
//! significant digits so a written file re-parses to the same bits.

use std::path::Path;

use ctlvol::{DenseMatrix, JordanBlock, JordanStructure, LdtSystem};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jordan: Option<JordanSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JordanSpec {
    pub blocks: Vec<BlockSpec>,
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub lambda: f64,
    pub size: usize,
}

/// A parsed and validated system, with its optional explicit structure.
#[derive(Debug, Clone)]
pub struct LoadedSystem {
    pub system: LdtSystem,
    pub jordan: Option<JordanStructure>,
}

impl SystemFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn from_system(sys: &LdtSystem) -> Self {
        Self {
            a: sys.a().to_rows(),
            b: sys.b().to_rows(),
            jordan: None,
            labels: None,
        }
    }

    /// Builds the system and checks the explicit Jordan structure, if any.
    pub fn load(&self) -> Result<LoadedSystem, CliError> {
        let a = DenseMatrix::from_rows(&self.a)?;
        let b = DenseMatrix::from_rows(&self.b)?;
        let system = LdtSystem::new(a, b)?;
        let jordan = match &self.jordan {
            None => None,
            Some(spec) => {
                let blocks = spec
                    .blocks
                    .iter()
                    .map(|b| JordanBlock::new(b.lambda, b.size))
                    .collect();
                let p = DenseMatrix::from_rows(&spec.p)?;
                let js = JordanStructure::from_parts(system.a(), blocks, p).map_err(|e| {
                    CliError::Parse(format!("explicit Jordan structure rejected: {e}"))
                })?;
                Some(js)
            }
        };
        Ok(LoadedSystem { system, jordan })
    }

    pub fn to_value(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("A".into(), matrix_value(&self.a));
        obj.insert("B".into(), matrix_value(&self.b));
        if let Some(j) = &self.jordan {
            let blocks = j
                .blocks
                .iter()
                .map(|b| {
                    let mut m = Map::new();
                    m.insert("lambda".into(), number(b.lambda));
                    m.insert("size".into(), Value::from(b.size));
                    Value::Object(m)
                })
                .collect();
            let mut m = Map::new();
            m.insert("blocks".into(), Value::Array(blocks));
            m.insert("P".into(), matrix_value(&j.p));
            obj.insert("jordan".into(), Value::Object(m));
        }
        if let Some(labels) = &self.labels {
            obj.insert("labels".into(), labels.clone());
        }
        Value::Object(obj)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("serializable value")
    }
}

fn matrix_value(rows: &[Vec<f64>]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| Value::Array(r.iter().map(|&x| number(x)).collect()))
            .collect(),
    )
}

/// Decimal text with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON number carrying exactly the [`fmt17`] text; non-finite values map to null.
pub fn number(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let n: Number = fmt17(x).parse().expect("valid JSON number");
    Value::Number(n)
}

pub fn opt_number(x: Option<f64>) -> Value {
    x.map_or(Value::Null, number)
}

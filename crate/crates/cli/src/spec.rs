//! Game-spec documents.
//!
//! ```json
//! {
//!   "version": 1,
//!   "n": 5,
//!   "costs": [0.5, 0.8, 1.0, 1.2, 1.5],
//!   "risk_model": { "family": "total_effort_exp", "params": { "alpha": 1, "beta": 1 } },
//!   "solver": { "grad_tol": 1e-10 },
//!   "seed": 7
//! }
//! ```
//!
//! `solver` and `seed` are optional. The weighted family takes
//! `params: { "alphas": [..n], "weights": [[..n]; n] }`.

use std::path::Path;

use idsgame::game::{GameSpec, RiskModel};
use idsgame::solvers::SolverConfig;
use serde_json::{Map, Value};

use crate::error::CliError;

pub const VERSION: u64 = 1;
pub const FAMILIES: [&str; 2] = ["total_effort_exp", "weighted_effort_exp"];

#[derive(Debug, Clone)]
pub struct SpecDocument {
    pub game: GameSpec,
    pub solver: SolverConfig,
    pub seed: Option<u64>,
    /// Raw bytes of the file, for the input digest.
    pub bytes: Vec<u8>,
}

pub fn read(path: &Path) -> Result<SpecDocument, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Unreadable {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let mut doc = parse(&bytes)?;
    doc.bytes = bytes;
    Ok(doc)
}

pub fn parse(bytes: &[u8]) -> Result<SpecDocument, CliError> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| CliError::Malformed {
        line: e.line(),
        column: e.column(),
        reason: e.to_string(),
    })?;
    let root = value
        .as_object()
        .ok_or_else(|| invalid("$", "expected an object"))?;
    for key in root.keys() {
        if !["version", "n", "costs", "risk_model", "solver", "seed"].contains(&key.as_str()) {
            return Err(invalid(key, "unknown field"));
        }
    }

    let version = uint(required(root, "version")?, "version")?;
    if version != VERSION {
        return Err(invalid(
            "version",
            format!("unsupported version {version}, expected {VERSION}"),
        ));
    }
    let n = uint(required(root, "n")?, "n")? as usize;
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    let costs = float_array(required(root, "costs")?, "costs", n)?;
    for (i, c) in costs.iter().enumerate() {
        if *c <= 0.0 {
            return Err(invalid(
                &format!("costs[{i}]"),
                format!("must be positive, got {c}"),
            ));
        }
    }
    let risk_model = risk_model(required(root, "risk_model")?, n)?;
    let game = GameSpec::new(costs, risk_model)
        .map_err(|e| invalid("risk_model.params", e.to_string()))?;

    let solver = match root.get("solver") {
        None | Some(Value::Null) => SolverConfig::default(),
        Some(v) => serde_json::from_value::<SolverConfig>(v.clone())
            .map_err(|e| invalid("solver", e.to_string()))?,
    };
    solver
        .validate()
        .map_err(|e| invalid("solver", e.to_string()))?;
    let seed = match root.get("seed") {
        None | Some(Value::Null) => None,
        Some(v) => Some(uint(v, "seed")?),
    };
    Ok(SpecDocument {
        game,
        solver,
        seed,
        bytes: Vec::new(),
    })
}

fn invalid(field: &str, reason: impl Into<String>) -> CliError {
    CliError::Invalid {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn required<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value, CliError> {
    obj.get(key).ok_or_else(|| invalid(key, "missing"))
}

fn uint(v: &Value, field: &str) -> Result<u64, CliError> {
    v.as_u64()
        .ok_or_else(|| invalid(field, format!("expected a nonnegative integer, got {v}")))
}

fn float(v: &Value, field: &str) -> Result<f64, CliError> {
    v.as_f64()
        .ok_or_else(|| invalid(field, format!("expected a number, got {v}")))
}

fn float_array(v: &Value, field: &str, len: usize) -> Result<Vec<f64>, CliError> {
    let arr = v
        .as_array()
        .ok_or_else(|| invalid(field, "expected an array"))?;
    if arr.len() != len {
        return Err(invalid(
            field,
            format!("expected {len} entries, got {}", arr.len()),
        ));
    }
    arr.iter()
        .enumerate()
        .map(|(i, x)| float(x, &format!("{field}[{i}]")))
        .collect()
}

fn risk_model(v: &Value, n: usize) -> Result<RiskModel, CliError> {
    let obj = v
        .as_object()
        .ok_or_else(|| invalid("risk_model", "expected an object"))?;
    let family = required(obj, "family")
        .map_err(|_| invalid("risk_model.family", "missing"))?
        .as_str()
        .ok_or_else(|| invalid("risk_model.family", "expected a string"))?;
    let params = obj
        .get("params")
        .ok_or_else(|| invalid("risk_model.params", "missing"))?
        .as_object()
        .ok_or_else(|| invalid("risk_model.params", "expected an object"))?;
    let param = |key: &str| {
        params
            .get(key)
            .ok_or_else(|| invalid(&format!("risk_model.params.{key}"), "missing"))
    };
    match family {
        "total_effort_exp" => Ok(RiskModel::TotalEffortExp {
            alpha: float(param("alpha")?, "risk_model.params.alpha")?,
            beta: float(param("beta")?, "risk_model.params.beta")?,
        }),
        "weighted_effort_exp" => {
            let alphas = float_array(param("alphas")?, "risk_model.params.alphas", n)?;
            let rows = param("weights")?
                .as_array()
                .ok_or_else(|| invalid("risk_model.params.weights", "expected an array"))?;
            if rows.len() != n {
                return Err(invalid(
                    "risk_model.params.weights",
                    format!("expected {n} rows, got {}", rows.len()),
                ));
            }
            let weights = rows
                .iter()
                .enumerate()
                .map(|(i, r)| float_array(r, &format!("risk_model.params.weights[{i}]"), n))
                .collect::<Result<_, _>>()?;
            Ok(RiskModel::WeightedEffortExp { alphas, weights })
        }
        other => Err(CliError::UnknownFamily {
            family: other.to_string(),
        }),
    }
}

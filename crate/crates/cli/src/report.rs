//! Run reports.
//!
//! Every number under `outputs` and `certification` is rounded to nine
//! significant digits. `raw` (opt-in) keeps the unrounded outputs.
//! `digest` is the SHA-256 of the report serialized without `digest` and
//! `timing`, so two runs on the same input and seed share it.

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const SIGNIFICANT_DIGITS: usize = 9;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: &'static str, value: f64, tolerance: f64) -> Self {
        Self {
            name,
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

pub struct Report {
    pub command: &'static str,
    pub input_digest: String,
    pub config: Value,
    pub outputs: Value,
    pub checks: Vec<Check>,
    /// Set when the run did not converge; takes precedence over failed checks.
    pub not_converged: Option<String>,
}

impl Report {
    pub fn certified(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// The error the process should exit with, if any.
    pub fn failure(&self) -> Option<CliError> {
        if let Some(msg) = &self.not_converged {
            return Some(CliError::NotConverged(msg.clone()));
        }
        let failed: Vec<&str> = self
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect();
        (!failed.is_empty()).then(|| {
            CliError::Certification(format!("certification failed: {}", failed.join(", ")))
        })
    }

    pub fn to_json(&self, raw: bool, seconds: f64) -> Value {
        let mut body = Map::new();
        body.insert("command".into(), json!(self.command));
        body.insert("input_digest".into(), json!(self.input_digest));
        body.insert("config".into(), self.config.clone());
        body.insert("outputs".into(), round_value(&self.outputs));
        body.insert(
            "certification".into(),
            round_value(&json!({
                "passed": self.certified(),
                "converged": self.not_converged.is_none(),
                "checks": self.checks,
            })),
        );
        if raw {
            body.insert("raw".into(), self.outputs.clone());
        }
        let digest = sha256_hex(&serde_json::to_vec(&body).expect("report serializes"));
        body.insert("digest".into(), json!(digest));
        body.insert("timing".into(), json!({ "wall_clock_seconds": seconds }));
        Value::Object(body)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

fn round_value(v: &Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => json!(round_sig(n.as_f64().unwrap())),
        Value::Array(a) => Value::Array(a.iter().map(round_value).collect()),
        Value::Object(o) => {
            Value::Object(o.iter().map(|(k, v)| (k.clone(), round_value(v))).collect())
        }
        other => other.clone(),
    }
}

//! Run reports, serialized either as flat `key=value` lines or as JSON.

use serde::{Serialize, Serializer};
use serde_json::Value;

use crate::error::CliResult;

/// Condition number; written as the string `inf` when infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cond(pub f64);

impl Serialize for Cond {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str("inf")
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InfoReport {
    pub dims: [usize; 3],
    pub entries: usize,
    pub hs_norm: f64,
    pub multilinear_rank: [usize; 3],
}

#[derive(Clone, Debug, Serialize)]
pub struct BstaDetails {
    pub init: &'static str,
    pub sweeps: usize,
    pub max_sweeps: usize,
    pub rel_tol: f64,
    pub converged: bool,
    pub critical_point_residual: f64,
    pub crit_tol: f64,
    pub subspace_gap: f64,
    pub objective_history: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlrtaDetails {
    pub trials: usize,
    /// `None` means the default relative cutoff.
    pub pinv_tol: Option<f64>,
    pub i_set: Vec<usize>,
    pub j_set: Vec<usize>,
    pub k_set: Vec<usize>,
    pub e_cond: Cond,
    pub slice_conds: Vec<Cond>,
    pub worst_cond: Cond,
    /// Every trial was rank deficient; the least bad one was used anyway.
    pub singular_selection: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub method: &'static str,
    pub dims: [usize; 3],
    pub ranks: [usize; 3],
    pub seed: u64,
    pub norm: f64,
    pub error: f64,
    pub rel_error: f64,
    pub storage_dense: usize,
    pub storage_factorized: usize,
    #[serde(skip_serializing_if = "Option::is_none", flatten)]
    pub bsta: Option<BstaDetails>,
    #[serde(skip_serializing_if = "Option::is_none", flatten)]
    pub flrta: Option<FlrtaDetails>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

/// `error / norm`, or 0 / ∞ for a zero reference norm.
pub fn relative(error: f64, norm: f64) -> f64 {
    if norm > 0.0 {
        error / norm
    } else if error == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => "none".to_owned(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}

fn flatten_into(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten_into(&key, child, out);
            }
        }
        leaf => {
            out.push_str(prefix);
            out.push('=');
            out.push_str(&scalar(leaf));
            out.push('\n');
        }
    }
}

/// One `key=value` line per field; lists are comma separated.
pub fn to_kv<T: Serialize>(value: &T) -> CliResult<String> {
    let mut out = String::new();
    flatten_into("", &serde_json::to_value(value)?, &mut out);
    Ok(out)
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_layout() {
        let r = InfoReport {
            dims: [2, 3, 4],
            entries: 24,
            hs_norm: 1.5,
            multilinear_rank: [1, 1, 1],
        };
        assert_eq!(
            to_kv(&r).unwrap(),
            "dims=2,3,4\nentries=24\nhs_norm=1.5\nmultilinear_rank=1,1,1\n"
        );
        let v: Value = serde_json::from_str(&to_json(&r).unwrap()).unwrap();
        assert_eq!(v["hs_norm"], 1.5);
    }

    #[test]
    fn infinite_conditions_are_strings() {
        assert_eq!(
            serde_json::to_string(&vec![Cond(2.0), Cond(f64::INFINITY)]).unwrap(),
            "[2.0,\"inf\"]"
        );
        assert_eq!(relative(0.0, 0.0), 0.0);
        assert_eq!(relative(1.0, 0.0), f64::INFINITY);
        assert_eq!(relative(1.0, 4.0), 0.25);
    }
}

//! Reports: a stable record of what was run and what was found, rendered as
//! text or JSON.

use hqcqp::etls::EtlsSolution;
use hqcqp::oracle::{OracleReport, ProbeReport};
use hqcqp::qq2::global::{Compactness, Qq2Outcome};
use hqcqp::qq2::local::{LocalCandidate, PointClassification};
use hqcqp::qq2::Tolerances;
use hqcqp::trs::{SoscReport, TrsSolution};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::fmt::Write;

pub const REPORT_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    InternalError,
    AssumptionFailure,
    Infeasible,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::InternalError => 1,
            Status::AssumptionFailure => 2,
            Status::Infeasible => 3,
        }
    }
}

/// The command and every flag that can affect the result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandEcho {
    pub command: String,
    pub file: String,
    pub problem_kind: Option<String>,
    pub seed: u64,
    pub starts: usize,
    pub resolution: f64,
    pub probe_radius: f64,
    pub probe_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub oracle: OracleReport,
    /// `solver value − oracle value`
    pub gap: f64,
    /// `|gap| ≤ max(1e-6, 2·error_bound)` and no oracle sample below the
    /// solver value by more than that.
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Body {
    Solve(Qq2Outcome),
    Classify {
        point: Vec<f64>,
        classification: PointClassification,
        probe: Option<ProbeReport>,
    },
    Compactness(Compactness),
    FindLocal {
        n_starts: usize,
        count: usize,
        points: Vec<LocalCandidate>,
    },
    Trs {
        solution: TrsSolution,
        sosc: SoscReport,
    },
    Etls(EtlsSolution),
    Tls {
        x: Vec<f64>,
        value: f64,
    },
    Oracle {
        global: OracleReport,
        probe: Option<ProbeReport>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub report_version: String,
    pub command: CommandEcho,
    pub tolerances: Tolerances,
    pub status: Status,
    pub exit_code: i32,
    pub warnings: Vec<String>,
    pub error: Option<String>,
    pub result: Option<Body>,
    pub oracle_check: Option<OracleCheck>,
    /// Only filled with `--timing`, so default output is reproducible.
    pub wall_time_s: Option<f64>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// One `path = value` line per leaf, in field order.
    pub fn to_text(&self) -> String {
        let v = serde_json::to_value(self).expect("reports serialize");
        let mut out = String::new();
        render(&mut out, "", &v);
        out
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn render(out: &mut String, path: &str, v: &Value) {
    let join = |k: &str| {
        if path.is_empty() {
            k.to_string()
        } else {
            format!("{path}.{k}")
        }
    };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                render(out, &join(k), x);
            }
        }
        Value::Array(a) if a.iter().all(|x| scalar(x).is_some()) => {
            let items: Vec<String> = a.iter().filter_map(scalar).collect();
            let _ = writeln!(out, "{path} = [{}]", items.join(", "));
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                render(out, &join(&i.to_string()), x);
            }
        }
        leaf => {
            let _ = writeln!(out, "{path} = {}", scalar(leaf).expect("leaf"));
        }
    }
}

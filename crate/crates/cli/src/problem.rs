//! Problem files: versioned JSON holding exactly one of a QQ2 instance, a
//! trust-region subproblem, a TLS or a regularized TLS instance.

use hqcqp::etls::EtlsProblem;
use hqcqp::qq2::{Mode, Qq2Problem};
use hqcqp::trs::TrsProblem;
use hqcqp::{Matrix, SymMat, Vector};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

pub const SCHEMA_VERSION: &str = "1";
pub const ASYMMETRY_WARN: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse problem file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid problem file: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] hqcqp::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(rename = "A0", default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<Vec<Vec<f64>>>,
    #[serde(rename = "A1", default, skip_serializing_if = "Option::is_none")]
    pub a1: Option<Vec<Vec<f64>>>,
    #[serde(rename = "A2", default, skip_serializing_if = "Option::is_none")]
    pub a2: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trs: Option<TrsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub etls: Option<EtlsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tls: Option<TlsSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrsSection {
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtlsSection {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    #[serde(rename = "L")]
    pub l: Vec<Vec<f64>>,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TlsSection {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

/// A validated problem.
#[derive(Debug, Clone)]
pub enum Loaded {
    Qq2 {
        problem: Qq2Problem,
        x: Option<Vector>,
    },
    Trs(TrsProblem),
    Etls {
        problem: EtlsProblem,
        x: Option<Vector>,
    },
    Tls {
        a: Matrix,
        b: Vector,
    },
}

impl Loaded {
    pub fn kind(&self) -> &'static str {
        match self {
            Loaded::Qq2 { .. } => "qq2",
            Loaded::Trs(_) => "trs",
            Loaded::Etls { .. } => "etls",
            Loaded::Tls { .. } => "tls",
        }
    }
}

fn dense(name: &str, rows: &[Vec<f64>]) -> Result<Matrix, LoadError> {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    if r == 0 || c == 0 {
        return Err(LoadError::Invalid(format!("{name} is empty")));
    }
    if rows.iter().any(|row| row.len() != c) {
        return Err(LoadError::Invalid(format!(
            "{name} has rows of unequal length"
        )));
    }
    Ok(Matrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn symmetric(
    name: &str,
    rows: &[Vec<f64>],
    n: usize,
    warnings: &mut Vec<String>,
) -> Result<SymMat, LoadError> {
    let m = dense(name, rows)?;
    if m.nrows() != n || m.ncols() != n {
        return Err(LoadError::Invalid(format!(
            "{name} is {}x{}, expected {n}x{n}",
            m.nrows(),
            m.ncols()
        )));
    }
    let asym = SymMat::asymmetry(&m);
    if asym > ASYMMETRY_WARN {
        warnings.push(format!("{name} symmetrized (max asymmetry {asym:e})"));
    }
    Ok(SymMat::new(m)?)
}

fn point(x: &Option<Vec<f64>>, n: usize) -> Result<Option<Vector>, LoadError> {
    match x {
        None => Ok(None),
        Some(v) if v.len() == n => Ok(Some(Vector::from_column_slice(v))),
        Some(v) => Err(LoadError::Invalid(format!(
            "x has length {}, expected {n}",
            v.len()
        ))),
    }
}

impl ProblemFile {
    pub fn validate(&self) -> Result<(Loaded, Vec<String>), LoadError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(LoadError::Invalid(format!(
                "unsupported schema_version {:?}, expected {SCHEMA_VERSION:?}",
                self.schema_version
            )));
        }
        let qq2 = self.a0.is_some() || self.a1.is_some() || self.a2.is_some();
        let present = [
            qq2,
            self.trs.is_some(),
            self.etls.is_some(),
            self.tls.is_some(),
        ];
        if present.iter().filter(|&&p| p).count() != 1 {
            return Err(LoadError::Invalid(
                "exactly one of {A0/A1/A2, trs, etls, tls} must be present".into(),
            ));
        }
        let mut warnings = Vec::new();
        if qq2 {
            let (Some(a0), Some(a1), Some(a2)) = (&self.a0, &self.a1, &self.a2) else {
                return Err(LoadError::Invalid(
                    "A0, A1 and A2 must all be present".into(),
                ));
            };
            let n = self
                .n
                .ok_or_else(|| LoadError::Invalid("n is required".into()))?;
            let mode = self
                .mode
                .ok_or_else(|| LoadError::Invalid("mode is required".into()))?;
            let a0 = symmetric("A0", a0, n, &mut warnings)?;
            let a1 = symmetric("A1", a1, n, &mut warnings)?;
            let a2 = symmetric("A2", a2, n, &mut warnings)?;
            let problem = Qq2Problem::with_any_dim(a0, a1, a2, mode)?;
            let x = point(&self.x, n)?;
            return Ok((Loaded::Qq2 { problem, x }, warnings));
        }
        if self.n.is_some() || self.mode.is_some() {
            return Err(LoadError::Invalid(
                "n and mode apply to A0/A1/A2 problems only".into(),
            ));
        }
        if let Some(t) = &self.trs {
            if self.x.is_some() {
                return Err(LoadError::Invalid("x is not used by trs problems".into()));
            }
            let q = symmetric("trs.Q", &t.q, t.b.len(), &mut warnings)?;
            return Ok((
                Loaded::Trs(TrsProblem::new(q, Vector::from_column_slice(&t.b))?),
                warnings,
            ));
        }
        if let Some(e) = &self.etls {
            let a = dense("etls.A", &e.a)?;
            let l = dense("etls.L", &e.l)?;
            let x = point(&self.x, a.ncols())?;
            let problem = EtlsProblem::new(a, Vector::from_column_slice(&e.b), l, e.rho)?;
            return Ok((Loaded::Etls { problem, x }, warnings));
        }
        let t = self.tls.as_ref().expect("one section present");
        if self.x.is_some() {
            return Err(LoadError::Invalid("x is not used by tls problems".into()));
        }
        let a = dense("tls.A", &t.a)?;
        if a.nrows() != t.b.len() {
            return Err(LoadError::Invalid(format!(
                "tls.b has length {}, expected {}",
                t.b.len(),
                a.nrows()
            )));
        }
        Ok((
            Loaded::Tls {
                a,
                b: Vector::from_column_slice(&t.b),
            },
            warnings,
        ))
    }
}

pub fn parse(text: &str) -> Result<(Loaded, Vec<String>), LoadError> {
    serde_json::from_str::<ProblemFile>(text)?.validate()
}

pub fn load(path: &Path) -> Result<(Loaded, Vec<String>), LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text)
}

//! Two-constraint problems: `min xᵀA0x  s.t.  xᵀA1x = 1,  xᵀA2x ≤ 1` (or
//! `= 1` in equality mode).

pub mod global;
pub mod local;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{SymMat, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `q2(x) ≤ 1`
    Inequality,
    /// `q2(x) = 1`
    Equality,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Qq2Problem {
    pub a0: SymMat,
    pub a1: SymMat,
    pub a2: SymMat,
    pub mode: Mode,
}

impl Qq2Problem {
    /// Checked constructor; the theory needs `n ≥ 3`.
    pub fn new(a0: SymMat, a1: SymMat, a2: SymMat, mode: Mode) -> Result<Self> {
        let p = Self::with_any_dim(a0, a1, a2, mode)?;
        if p.dim() < 3 {
            return Err(Error::InvalidInput(format!(
                "dimension must be at least 3, got {}",
                p.dim()
            )));
        }
        Ok(p)
    }

    /// Same as [`Qq2Problem::new`] without the `n ≥ 3` floor. Used by
    /// reductions whose lifted dimension may be 2.
    pub fn with_any_dim(a0: SymMat, a1: SymMat, a2: SymMat, mode: Mode) -> Result<Self> {
        let n = a0.dim();
        for m in [&a1, &a2] {
            if m.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: m.dim(),
                });
            }
        }
        Ok(Qq2Problem { a0, a1, a2, mode })
    }

    pub fn dim(&self) -> usize {
        self.a0.dim()
    }

    pub fn q0(&self, x: &Vector) -> f64 {
        self.a0.quad(x)
    }

    pub fn q1(&self, x: &Vector) -> f64 {
        self.a1.quad(x)
    }

    pub fn q2(&self, x: &Vector) -> f64 {
        self.a2.quad(x)
    }

    /// `A0 + αA1 + βA2`
    pub fn lagrangian(&self, alpha: f64, beta: f64) -> SymMat {
        SymMat::lincomb(&[(1.0, &self.a0), (alpha, &self.a1), (beta, &self.a2)])
    }

    /// Norm scale used by relative residual tests at multipliers `(α, β)`.
    pub fn scale_at(&self, alpha: f64, beta: f64) -> f64 {
        (self.a0.norm() + alpha.abs() * self.a1.norm() + beta.abs() * self.a2.norm()).max(1.0)
    }

    pub fn scale(&self) -> f64 {
        (self.a0.norm() + self.a1.norm() + self.a2.norm()).max(1.0)
    }

    /// Applies `M ↦ PᵀMP` to all three matrices.
    pub fn congruence(&self, p: &crate::linalg::Matrix) -> Qq2Problem {
        Qq2Problem {
            a0: self.a0.congruence(p),
            a1: self.a1.congruence(p),
            a2: self.a2.congruence(p),
            mode: self.mode,
        }
    }

    pub fn check_point(&self, x: &Vector) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }
}

/// Tolerances shared by the solvers and classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute feasibility tolerance on `q1 = 1` and `q2 ≤ 1`.
    pub feas: f64,
    /// Relative tolerance for semidefiniteness, stationarity and
    /// complementarity tests.
    pub psd: f64,
    /// Relative tolerance for null spaces and inertia counts.
    pub rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            feas: 1e-9,
            psd: 1e-7,
            rank: 1e-8,
        }
    }
}

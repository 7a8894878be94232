//! Single-constraint problems: `min xᵀA0x  s.t.  xᵀA1x = 1`, its inequality
//! variant, the generalized Rayleigh quotient and total least squares.
//!
//! A feasible `x*` is globally optimal iff there is `α` with
//! `(A0 + αA1)x* = 0` and `A0 + αA1 ⪰ 0`; then `q0(x*) = −α`. The set of such
//! `α` is an interval because `α ↦ λ_min(A0 + αA1)` is concave, and the
//! optimal multiplier is its left endpoint.

use nalgebra::SVD;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inv_sqrt, nullspace_basis, sym_eig, Matrix, SymMat, Vector, DEFAULT_TOL};
use crate::manifold::{DescentOptions, DescentResult, QuadManifold};
use crate::pencil::golden_max;

#[derive(Debug, Clone, PartialEq)]
pub struct Qq1Problem {
    pub a0: SymMat,
    pub a1: SymMat,
}

impl Qq1Problem {
    pub fn new(a0: SymMat, a1: SymMat) -> Result<Self> {
        if a0.dim() != a1.dim() {
            return Err(Error::DimensionMismatch {
                expected: a0.dim(),
                found: a1.dim(),
            });
        }
        Ok(Qq1Problem { a0, a1 })
    }

    pub fn dim(&self) -> usize {
        self.a0.dim()
    }

    fn scale(&self, alpha: f64) -> f64 {
        (self.a0.norm() + alpha.abs() * self.a1.norm()).max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Qq1Status {
    Attained,
    /// No `α` makes `A0 + αA1` semidefinite: the objective is unbounded below.
    Unbounded,
    /// `−α*` is the infimum but no feasible point attains it.
    Unattained,
    /// `q1(x) = 1` has no solution.
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Qq1Solution {
    pub status: Qq1Status,
    pub x_star: Option<Vector>,
    /// Optimal multiplier; `None` when unbounded or infeasible.
    pub alpha: Option<f64>,
    /// Optimal value or infimum; `-inf` when unbounded, `+inf` when infeasible.
    pub value: f64,
}

impl Qq1Solution {
    fn unbounded() -> Self {
        Qq1Solution {
            status: Qq1Status::Unbounded,
            x_star: None,
            alpha: None,
            value: f64::NEG_INFINITY,
        }
    }
}

const POS_TOL: f64 = 1e-12;
const UNATTAINED_TOL: f64 = 1e-10;
const DEGENERATE_TOL: f64 = 1e-6;

/// `q1(x) = 1` is solvable iff `A1` has a positive eigenvalue.
pub fn qq1_feasible(a1: &SymMat) -> bool {
    a1.lambda_max() > POS_TOL
}

fn lmin_at(p: &Qq1Problem, alpha: f64) -> f64 {
    SymMat::lincomb(&[(1.0, &p.a0), (alpha, &p.a1)])
        .lambda_min()
        .0
}

/// Left endpoint of `{α : λ_min(A0 + αA1) ≥ 0}`, or `None` when the set is
/// empty. The flag marks a numerically single-point interval, whose location
/// is only known to about `sqrt(eps)` because the maximum of a concave
/// function is flat.
fn alpha_star(p: &Qq1Problem) -> Option<(f64, bool)> {
    let e1 = sym_eig(&p.a1).expect("finite by construction");
    let (lmin1, lmax1) = (e1.min(), e1.max());
    let n1 = p.a1.norm().max(1.0);
    let r0 = p.a0.gershgorin_radius() + 1.0;
    // Along the top eigenvector of A1, vᵀ(A0 + αA1)v < 0 for α ≤ a_lo.
    let a_lo = -r0 / lmax1;
    let f = |a: f64| lmin_at(p, a);
    let thr = 1e-14 * p.a0.norm().max(1.0);

    let (a_feas, f_feas) = if lmin1 < -POS_TOL * n1 {
        let a_hi = r0 / (-lmin1);
        golden_max(f, a_lo, a_hi, 200)
    } else if lmin1 > POS_TOL * n1 {
        let a = r0 / lmin1;
        (a, f(a))
    } else {
        let mut a = (r0 / lmax1).max(1.0);
        let mut fa = f(a);
        for _ in 0..200 {
            if fa >= 0.0 {
                break;
            }
            a *= 2.0;
            fa = f(a);
        }
        (a, fa)
    };
    if f_feas < -thr {
        return None;
    }
    if f_feas < 1e-10 * p.a0.norm().max(1.0) {
        // A single-point (or numerically single-point) interval.
        return Some((a_feas, true));
    }
    let (mut lo, mut hi) = (a_lo, a_feas);
    while hi - lo > 1e-12 * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some((hi, false))
}

/// Global solution of `min q0 s.t. q1 = 1`.
pub fn solve_qq1(p: &Qq1Problem) -> Result<Qq1Solution> {
    if !qq1_feasible(&p.a1) {
        return Err(Error::InfeasibleConstraint);
    }
    let Some((alpha, degenerate)) = alpha_star(p) else {
        return Ok(Qq1Solution::unbounded());
    };
    let g = SymMat::lincomb(&[(1.0, &p.a0), (alpha, &p.a1)]);
    let mut basis = nullspace_basis(&g, DEFAULT_TOL)?;
    if basis.ncols() == 0 {
        basis = Matrix::from_columns(&[g.lambda_min().1]);
    }
    let unattained = Qq1Solution {
        status: Qq1Status::Unattained,
        x_star: None,
        alpha: Some(alpha),
        value: -alpha,
    };
    let m1 = p.a1.congruence(&basis);
    let e1 = sym_eig(&m1)?;
    let flat = if degenerate {
        DEGENERATE_TOL
    } else {
        UNATTAINED_TOL
    };
    if e1.max() <= flat * p.a1.norm().max(1.0) {
        return Ok(unattained);
    }
    let y = if e1.min() > UNATTAINED_TOL * p.a1.norm().max(1.0) {
        // Pick the best direction inside the null space.
        let m0 = p.a0.congruence(&basis);
        let r = inv_sqrt(&m1)?;
        let c = m0.congruence(&r);
        &r * c.lambda_min().1
    } else {
        e1.vector(e1.values.len() - 1)
    };
    let mut x = &basis * &y;
    x /= p.a1.quad(&x).sqrt();
    let value = p.a0.quad(&x);

    // A near-degenerate null space can produce a point that is feasible but
    // far from stationary; that means the infimum is not attained.
    let resid = (p.a0.apply(&x) + p.a1.apply(&x) * alpha).norm();
    if resid > 1e-8 * p.scale(alpha) * x.norm().max(1.0) {
        return Ok(unattained);
    }
    let refined = -value;
    let alpha = if lmin_at(p, refined) >= -1e-12 * p.scale(refined) {
        refined
    } else {
        alpha
    };
    Ok(Qq1Solution {
        status: Qq1Status::Attained,
        x_star: Some(x),
        alpha: Some(alpha),
        value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Qq1Verdict {
    Infeasible,
    NotStationary,
    /// A saddle or maximizer: stationary but above the global value. No
    /// local non-global minimizer exists for this problem class.
    StationaryNotGlobal,
    Global,
}

/// Classifies a candidate point. Every local minimizer is global here, so
/// the only stationary verdicts are `Global` and `StationaryNotGlobal`.
pub fn classify_qq1_point(p: &Qq1Problem, x: &Vector, tol: f64) -> Result<Qq1Verdict> {
    if x.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: x.len(),
        });
    }
    if (p.a1.quad(x) - 1.0).abs() > tol {
        return Ok(Qq1Verdict::Infeasible);
    }
    let q0 = p.a0.quad(x);
    let resid = (p.a0.apply(x) - p.a1.apply(x) * q0).norm();
    if resid > tol * p.scale(q0) {
        return Ok(Qq1Verdict::NotStationary);
    }
    let sol = solve_qq1(p)?;
    Ok(if q0 <= sol.value + tol * sol.value.abs().max(1.0) {
        Qq1Verdict::Global
    } else {
        Qq1Verdict::StationaryNotGlobal
    })
}

/// `min q0 s.t. q1 ≤ 1`.
pub fn solve_qc1qp_ineq(a0: &SymMat, a1: &SymMat) -> Result<Qq1Solution> {
    let p = Qq1Problem::new(a0.clone(), a1.clone())?;
    let n = p.dim();
    if a0.lambda_min().0 >= -DEFAULT_TOL * a0.norm().max(1.0) {
        return Ok(Qq1Solution {
            status: Qq1Status::Attained,
            x_star: Some(Vector::zeros(n)),
            alpha: Some(0.0),
            value: 0.0,
        });
    }
    if !qq1_feasible(a1) {
        // Every x is feasible and q0 has a negative direction.
        return Ok(Qq1Solution::unbounded());
    }
    let sol = solve_qq1(&p)?;
    // The inequality multiplier must be nonnegative; the boundary interval
    // lying entirely left of 0 means no semidefinite certificate with α ≥ 0.
    match (sol.status, sol.alpha) {
        (Qq1Status::Attained | Qq1Status::Unattained, Some(a))
            if a >= -DEFAULT_TOL * p.scale(a) =>
        {
            Ok(sol)
        }
        _ => Ok(Qq1Solution::unbounded()),
    }
}

/// Minimum generalized Rayleigh quotient `xᵀA0x / xᵀA1x` for `A1 ≻ 0`,
/// with the minimizer normalized to `xᵀA1x = 1`.
pub fn solve_rq(a0: &SymMat, a1: &SymMat) -> Result<(f64, Vector)> {
    if a0.dim() != a1.dim() {
        return Err(Error::DimensionMismatch {
            expected: a0.dim(),
            found: a1.dim(),
        });
    }
    if a1.lambda_min().0 <= POS_TOL * a1.norm().max(1.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let r = inv_sqrt(a1)?;
    let (value, y) = a0.congruence(&r).lambda_min();
    let mut x = &r * y;
    x /= a1.quad(&x).sqrt();
    Ok((value, x))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TlsSolution {
    pub x: Vector,
    /// `‖Ax − b‖² / (‖x‖² + 1)` at `x`.
    pub value: f64,
}

/// Total least squares `min ‖Ax − b‖² / (‖x‖² + 1)` through the smallest
/// singular value of `[A, −b]`.
pub fn solve_tls(a: &Matrix, b: &Vector) -> Result<TlsSolution> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: b.len(),
        });
    }
    if !a.iter().chain(b.iter()).all(|v| v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let rows = m.max(n + 1);
    let mut aug = Matrix::zeros(rows, n + 1);
    aug.view_mut((0, 0), (m, n)).copy_from(a);
    for i in 0..m {
        aug[(i, n)] = -b[i];
    }
    let svd = SVD::new(aug, false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let gap = DEFAULT_TOL * smax.max(1.0);
    // Right singular vectors of the minimal singular value cluster.
    let cols: Vec<Vector> = (0..sv.len())
        .filter(|&k| sv[k] - smin <= gap)
        .map(|k| vt.row(k).transpose())
        .collect();
    // Pick the unit vector in that subspace with the largest last component:
    // the projection of e_{n+1}.
    let mut w = Vector::zeros(n + 1);
    for c in &cols {
        w += c * c[n];
    }
    let wn = w.norm();
    if wn <= 1e-10 {
        return Err(Error::TlsAtInfinity);
    }
    let v = w / wn;
    let z = v[n];
    let x = v.rows(0, n) / z;
    let r = a * &x - b;
    let value = r.norm_squared() / (x.norm_squared() + 1.0);
    Ok(TlsSolution { x, value })
}

/// Projected-gradient descent on `{q1 = 1}` from `x0`; requires `A1 ≻ 0` so
/// that the manifold is an ellipsoid.
pub fn descend_qq1(p: &Qq1Problem, x0: &Vector, opts: &DescentOptions) -> Result<DescentResult> {
    if p.a1.lambda_min().0 <= POS_TOL * p.a1.norm().max(1.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let cs = [&p.a1];
    QuadManifold::new(&p.a0, &cs)
        .descend(x0, opts)
        .ok_or_else(|| Error::InvalidInput("descent start could not be projected".into()))
}

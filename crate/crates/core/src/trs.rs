//! Trust-region subproblem `min yᵀQy + 2bᵀy  s.t.  ‖y‖ ≤ 1`.
//!
//! The global solve goes through the homogenized two-constraint problem
//! `min yᵀQy + 2bᵀyz  s.t.  z² = 1, ‖y‖² ≤ 1` and is then polished in the
//! eigenbasis of `Q`. The local non-global minimizer, when it exists, has a
//! multiplier `μ ∈ (max(0, −λ2), −λ1)` solving the secular equation
//! `‖(Q + μI)⁻¹b‖ = 1` with `Q + μI` positive definite on `y⊥`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{complement_fixed, sym_eig, EigDecomp, Matrix, SymMat, Vector};
use crate::qq2::global::{solve_qq2_with, Qq2Options, Qq2Outcome};
use crate::qq2::{Mode, Qq2Problem};

#[derive(Debug, Clone, PartialEq)]
pub struct TrsProblem {
    pub q: SymMat,
    pub b: Vector,
}

impl TrsProblem {
    pub fn new(q: SymMat, b: Vector) -> Result<Self> {
        if b.len() != q.dim() {
            return Err(Error::DimensionMismatch {
                expected: q.dim(),
                found: b.len(),
            });
        }
        if !q.is_finite() || !b.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(TrsProblem { q, b })
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    pub fn value(&self, y: &Vector) -> f64 {
        self.q.quad(y) + 2.0 * self.b.dot(y)
    }

    fn scale(&self) -> f64 {
        (self.q.norm() + self.b.norm()).max(1.0)
    }
}

/// `A0 = [[Q, b], [bᵀ, 0]]`, `A1 = diag(0, …, 0, 1)`, `A2 = diag(1, …, 1, 0)`
/// in inequality mode, so that `q1 = z²` and `q2 = ‖y‖²`.
pub fn homogenize_trs(t: &TrsProblem) -> Qq2Problem {
    let n = t.dim();
    let mut a0 = Matrix::zeros(n + 1, n + 1);
    a0.view_mut((0, 0), (n, n)).copy_from(t.q.as_matrix());
    a0.view_mut((0, n), (n, 1)).copy_from(&t.b);
    a0.view_mut((n, 0), (1, n)).copy_from(&t.b.transpose());
    let mut d1 = vec![0.0; n + 1];
    d1[n] = 1.0;
    let mut d2 = vec![1.0; n + 1];
    d2[n] = 0.0;
    Qq2Problem::with_any_dim(
        SymMat::new(a0).expect("symmetric by construction"),
        SymMat::from_diagonal(&d1).expect("finite"),
        SymMat::from_diagonal(&d2).expect("finite"),
        Mode::Inequality,
    )
    .expect("consistent dimensions")
}

/// Residuals of the global optimality conditions: `(Q + μI)y + b = 0`,
/// `‖y‖ ≤ 1`, `μ(1 − ‖y‖²) = 0`, `μ ≥ 0`, `Q + μI ⪰ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoreSorensenCheck {
    pub stationarity: f64,
    pub norm_excess: f64,
    pub complementarity: f64,
    pub mu: f64,
    pub lambda_min_shifted: f64,
    pub pass: bool,
}

pub fn more_sorensen_check(t: &TrsProblem, y: &Vector, mu: f64, tol: f64) -> MoreSorensenCheck {
    let s = t.scale();
    let shifted = SymMat::lincomb(&[(1.0, &t.q), (mu, &SymMat::identity(t.dim()))]);
    let stationarity = (shifted.apply(y) + &t.b).norm();
    let ny = y.norm_squared();
    let norm_excess = (ny - 1.0).max(0.0);
    let complementarity = (mu * (1.0 - ny)).abs();
    let lambda_min_shifted = shifted.lambda_min().0;
    let pass = stationarity <= tol * s
        && norm_excess <= tol
        && complementarity <= tol * s
        && mu >= -tol * s
        && lambda_min_shifted >= -tol * s;
    MoreSorensenCheck {
        stationarity,
        norm_excess,
        complementarity,
        mu,
        lambda_min_shifted,
        pass,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrsGlobal {
    pub x: Vec<f64>,
    pub value: f64,
    pub mu: f64,
    pub check: MoreSorensenCheck,
}

/// Eigen-data of `Q` reused by the polish, the secular equation and the
/// hard-case analysis.
struct Spectrum {
    e: EigDecomp,
    /// `Uᵀb`
    c: Vector,
    /// Multiplicity of the smallest eigenvalue.
    m: usize,
    gap_tol: f64,
}

impl Spectrum {
    fn new(t: &TrsProblem) -> Result<Self> {
        let e = sym_eig(&t.q)?;
        let c = e.vectors.transpose() * &t.b;
        let gap_tol = 1e-9 * t.q.norm().max(1.0);
        let l1 = e.values[0];
        let m = e.values.iter().take_while(|&&l| l - l1 <= gap_tol).count();
        Ok(Spectrum { e, c, m, gap_tol })
    }

    fn l1(&self) -> f64 {
        self.e.values[0]
    }

    /// `−(Q + μI)⁻¹b`, skipping components whose shifted eigenvalue is zero.
    fn y_of(&self, mu: f64) -> Vector {
        let coef = Vector::from_iterator(
            self.c.len(),
            self.e.values.iter().zip(self.c.iter()).map(|(l, c)| {
                let d = l + mu;
                if d.abs() <= self.gap_tol {
                    0.0
                } else {
                    -c / d
                }
            }),
        );
        &self.e.vectors * coef
    }

    /// `b ⊥ u1..um`
    fn bottom_orthogonal(&self, b_norm: f64) -> bool {
        self.c
            .iter()
            .take(self.m)
            .all(|c| c.abs() <= 1e-9 * b_norm.max(1.0))
    }

    /// `ȳ = −Σ_{j>m} (u_jᵀb / (λj − λ1)) u_j`
    fn y_bar(&self) -> Vector {
        self.y_of(-self.l1())
    }

    fn bottom_projection(&self, y: &Vector) -> Vector {
        let u = self.e.vectors.columns(0, self.m);
        u * (u.transpose() * y)
    }
}

/// Moré–Sorensen polish of a solution produced by the homogenized solve.
fn polish(t: &TrsProblem, sp: &Spectrum, y0: &Vector, mu0: f64) -> (Vector, f64) {
    let s = t.scale();
    let l1 = sp.l1();
    if mu0 <= 1e-7 * s && y0.norm() < 1.0 - 1e-7 {
        if l1 > sp.gap_tol {
            return (sp.y_of(0.0), 0.0);
        }
        return (y0.clone(), mu0);
    }
    if (mu0 + l1).abs() <= 1e-6 * s && sp.bottom_orthogonal(t.b.norm()) {
        let ybar = sp.y_bar();
        let rest = 1.0 - ybar.norm_squared();
        if rest >= -1e-9 {
            let bottom = sp.bottom_projection(y0);
            let bn = bottom.norm();
            let fill = if bn > 1e-12 && rest > 0.0 {
                bottom * (rest.sqrt() / bn)
            } else {
                Vector::zeros(t.dim())
            };
            return (ybar + fill, (-l1).max(0.0));
        }
    }
    // Newton on 1/‖y(μ)‖ − 1, which is nearly linear in μ.
    let mut mu = mu0.max(-l1 + sp.gap_tol);
    for _ in 0..100 {
        let y = sp.y_of(mu);
        let ny = y.norm();
        if ny == 0.0 {
            break;
        }
        let dy: f64 =
            sp.e.values
                .iter()
                .zip(sp.c.iter())
                .map(|(l, c)| c * c / (l + mu).powi(3))
                .sum::<f64>();
        // d‖y‖/dμ = −Σ c²/(λ+μ)³ / ‖y‖
        let dpsi = dy / ny.powi(3);
        let psi = 1.0 / ny - 1.0;
        if dpsi.abs() < 1e-300 {
            break;
        }
        let next = mu - psi / dpsi;
        let next = if next <= -l1 { 0.5 * (mu - l1) } else { next };
        if (next - mu).abs() <= 1e-16 * mu.abs().max(1.0) {
            mu = next;
            break;
        }
        mu = next;
    }
    (sp.y_of(mu), mu)
}

/// Global minimizer through the homogenized problem, polished and checked
/// against the Moré–Sorensen conditions.
pub fn solve_trs_global(t: &TrsProblem) -> Result<TrsGlobal> {
    let h = homogenize_trs(t);
    let cert = match solve_qq2_with(&h, &Qq2Options::default())? {
        Qq2Outcome::Global(c) => c,
        Qq2Outcome::Infeasible { reason } => {
            return Err(Error::Contradiction(format!(
                "homogenized TRS infeasible: {reason}"
            )))
        }
        Qq2Outcome::AssumptionFailure(_) => {
            return Err(Error::Contradiction(
                "homogenized TRS violates its standing assumptions".into(),
            ))
        }
    };
    let n = t.dim();
    let x = cert.x();
    let z = x[n];
    if z.abs() < 0.5 {
        return Err(Error::Contradiction(format!("homogenizing coordinate z = {z}")).at("trs"));
    }
    let y0: Vector = x.rows(0, n) / z;
    let sp = Spectrum::new(t)?;
    let (mut y, mut mu) = (y0.clone(), cert.beta.max(0.0));
    let (yp, mup) = polish(t, &sp, &y0, mu);
    let before = more_sorensen_check(t, &y, mu, 1e-8);
    let after = more_sorensen_check(t, &yp, mup, 1e-8);
    if after.pass && (!before.pass || t.value(&yp) <= t.value(&y) + 1e-12 * t.scale()) {
        y = yp;
        mu = mup;
    }
    let check = more_sorensen_check(t, &y, mu, 1e-8);
    if !check.pass {
        return Err(Error::Contradiction(format!(
            "global TRS point fails the Moré–Sorensen conditions: {check:?}"
        ))
        .at("trs"));
    }
    Ok(TrsGlobal {
        value: t.value(&y),
        x: y.iter().copied().collect(),
        mu,
        check,
    })
}

/// Residuals of the local non-global conditions at `(y, μ)`:
/// `(Q + μI)y + b = 0`, `‖y‖ = 1`, `Q + μI ≻ 0` on `y⊥`, `Q + μI` not
/// positive semidefinite, `μ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalTrsCheck {
    pub stationarity: f64,
    pub norm_residual: f64,
    pub projected_lambda_min: f64,
    pub lambda_min_shifted: f64,
    pub mu: f64,
    pub pass: bool,
}

pub fn local_trs_check(t: &TrsProblem, y: &Vector, mu: f64, tol: f64) -> LocalTrsCheck {
    let n = t.dim();
    let s = t.scale();
    let shifted = SymMat::lincomb(&[(1.0, &t.q), (mu, &SymMat::identity(n))]);
    let stationarity = (shifted.apply(y) + &t.b).norm();
    let norm_residual = (y.norm_squared() - 1.0).abs();
    let w = complement_fixed(n, std::slice::from_ref(y));
    let projected_lambda_min = if w.ncols() == 0 {
        f64::INFINITY
    } else {
        shifted.congruence(&w).lambda_min().0
    };
    let lambda_min_shifted = shifted.lambda_min().0;
    let pass = stationarity <= tol * s
        && norm_residual <= tol
        && projected_lambda_min > tol * s
        && lambda_min_shifted < -tol * s
        && mu > tol * s;
    LocalTrsCheck {
        stationarity,
        norm_residual,
        projected_lambda_min,
        lambda_min_shifted,
        mu,
        pass,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrsLocalCandidate {
    pub y: Vec<f64>,
    pub mu: f64,
    pub check: LocalTrsCheck,
}

impl TrsLocalCandidate {
    pub fn y(&self) -> Vector {
        Vector::from_column_slice(&self.y)
    }
}

pub const DEFAULT_MU_GRID: usize = 1024;

/// Every root of the secular equation on `(max(0, −λ2), −λ1)`, each with
/// its certificate check. Empty unless `λ1 < 0` is simple.
pub fn trs_local_candidates(t: &TrsProblem, grid: usize) -> Result<Vec<TrsLocalCandidate>> {
    let sp = Spectrum::new(t)?;
    let n = t.dim();
    if n < 2 || sp.l1() >= 0.0 || sp.m > 1 {
        return Ok(Vec::new());
    }
    let l = &sp.e.values;
    let (lo, hi) = ((-l[1]).max(0.0), -l[0]);
    if hi <= lo {
        return Ok(Vec::new());
    }
    let eps = 1e-9 * l[0].abs().max(l[1].abs()).max(1.0);
    let (a, b) = (lo + eps, hi - eps);
    if b <= a {
        return Ok(Vec::new());
    }
    let phi = |mu: f64| -> f64 {
        l.iter()
            .zip(sp.c.iter())
            .map(|(li, ci)| (ci / (li + mu)).powi(2))
            .sum::<f64>()
            - 1.0
    };
    let dphi = |mu: f64| -> f64 {
        -2.0 * l
            .iter()
            .zip(sp.c.iter())
            .map(|(li, ci)| ci * ci / (li + mu).powi(3))
            .sum::<f64>()
    };
    let grid = grid.max(2);
    let pts: Vec<f64> = (0..grid)
        .map(|k| a + (b - a) * k as f64 / (grid - 1) as f64)
        .collect();
    let vals: Vec<f64> = pts.iter().map(|&m| phi(m)).collect();
    let mut roots = Vec::new();
    for k in 0..grid - 1 {
        let (mut x0, mut x1) = (pts[k], pts[k + 1]);
        let (f0, f1) = (vals[k], vals[k + 1]);
        if f0 == 0.0 {
            roots.push(x0);
            continue;
        }
        if f0.signum() == f1.signum() {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (x0 + x1);
            if phi(mid).signum() == f0.signum() {
                x0 = mid;
            } else {
                x1 = mid;
            }
            if x1 - x0 <= 1e-15 * mid.abs().max(1.0) {
                break;
            }
        }
        let mut r = 0.5 * (x0 + x1);
        for _ in 0..5 {
            let d = dphi(r);
            if d == 0.0 {
                break;
            }
            let next = r - phi(r) / d;
            if !(pts[k]..=pts[k + 1]).contains(&next) {
                break;
            }
            r = next;
        }
        roots.push(r);
    }
    Ok(roots
        .into_iter()
        .map(|mu| {
            let y = sp.y_of(mu);
            TrsLocalCandidate {
                check: local_trs_check(t, &y, mu, 1e-8),
                y: y.iter().copied().collect(),
                mu,
            }
        })
        .collect())
}

/// The local non-global minimizer, if one is certified. More than one
/// certified root contradicts uniqueness and is reported as an error.
pub fn find_trs_local_nonglobal(t: &TrsProblem) -> Result<Option<TrsLocalCandidate>> {
    find_trs_local_nonglobal_with(t, DEFAULT_MU_GRID)
}

pub fn find_trs_local_nonglobal_with(
    t: &TrsProblem,
    grid: usize,
) -> Result<Option<TrsLocalCandidate>> {
    let mut certified: Vec<TrsLocalCandidate> = trs_local_candidates(t, grid)?
        .into_iter()
        .filter(|c| c.check.pass)
        .collect();
    if certified.len() > 1 {
        return Err(Error::Contradiction(format!(
            "{} certified local non-global minimizers (multipliers {:?})",
            certified.len(),
            certified.iter().map(|c| c.mu).collect::<Vec<_>>()
        )));
    }
    Ok(certified.pop())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrsSolution {
    pub global: TrsGlobal,
    pub local_nonglobal: Option<TrsLocalCandidate>,
    pub hard_case: bool,
}

pub fn solve_trs(t: &TrsProblem) -> Result<TrsSolution> {
    let global = solve_trs_global(t)?;
    let local_nonglobal = find_trs_local_nonglobal(t)?;
    let sp = Spectrum::new(t)?;
    let hard_case = sp.l1() < 0.0
        && sp.bottom_orthogonal(t.b.norm())
        && (global.mu + sp.l1()).abs() <= 1e-6 * t.scale();
    Ok(TrsSolution {
        global,
        local_nonglobal,
        hard_case,
    })
}

/// Builds `Q = U diag(λ) Uᵀ` and `b` in the span of the eigenvectors above
/// the bottom eigenspace, scaled so that `Σ_{j>m} (u_jᵀb / (λj − λ1))² = 1`.
/// Weights on the bottom eigenvectors are ignored.
pub fn generate_trs_hard_case(lambda: &[f64], u: &Matrix, weights: &[f64]) -> Result<TrsProblem> {
    let n = lambda.len();
    if u.nrows() != n || u.ncols() != n || weights.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if u.nrows() != n {
                u.nrows()
            } else {
                weights.len()
            },
        });
    }
    if lambda.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("eigenvalues must be ascending".into()));
    }
    let orth = (u.transpose() * u - Matrix::identity(n, n)).norm();
    if orth > 1e-10 * n as f64 {
        return Err(Error::InvalidInput(format!(
            "U is not orthogonal (‖UᵀU − I‖ = {orth:.3e})"
        )));
    }
    let l1 = lambda[0];
    if l1 >= 0.0 {
        return Err(Error::NoHardCase(
            "smallest eigenvalue must be negative".into(),
        ));
    }
    let tol = 1e-12 * lambda.iter().fold(1.0f64, |a, l| a.max(l.abs()));
    let m = lambda.iter().take_while(|&&l| l - l1 <= tol).count();
    let sum: f64 = (m..n)
        .map(|j| (weights[j] / (lambda[j] - l1)).powi(2))
        .sum();
    if m == n || sum == 0.0 {
        return Err(Error::NoHardCase(
            "b would vanish: no weight above the bottom eigenspace".into(),
        ));
    }
    let s = 1.0 / sum.sqrt();
    let mut b = Vector::zeros(n);
    for (j, w) in weights.iter().enumerate().skip(m) {
        b += u.column(j) * (s * w);
    }
    let q = u * Matrix::from_diagonal(&Vector::from_column_slice(lambda)) * u.transpose();
    TrsProblem::new(SymMat::new((&q + q.transpose()) * 0.5)?, b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoscReport {
    pub global_x: Vec<f64>,
    pub global_value: f64,
    pub mu: f64,
    /// The global minimizer is isolated (the solution set is finite).
    pub strict_global: bool,
    /// Positive definiteness of the Lagrangian Hessian on the critical cone.
    pub sosc_holds: bool,
    pub hard_case: bool,
    /// `‖ȳ‖` in the hard case.
    pub y_bar_norm: Option<f64>,
    /// Smallest eigenvalue of `Q + μI` on `y⊥` (or of `Q` at an interior point).
    pub projected_lambda_min: f64,
}

/// Global solve followed by a strictness test on the solution set and the
/// standard second-order sufficient condition at the returned minimizer.
pub fn check_sosc_at_global(t: &TrsProblem) -> Result<SoscReport> {
    let g = solve_trs_global(t)?;
    let sp = Spectrum::new(t)?;
    let n = t.dim();
    let y = Vector::from_column_slice(&g.x);
    let s = t.scale();
    let thr = 1e-8 * s;
    let hard =
        sp.l1() < 0.0 && sp.bottom_orthogonal(t.b.norm()) && (g.mu + sp.l1()).abs() <= 1e-6 * s;
    let y_bar_norm = hard.then(|| sp.y_bar().norm());
    let strict_global = match y_bar_norm {
        // Solutions ȳ + a, a in the bottom eigenspace, ‖a‖² = 1 − ‖ȳ‖²: a
        // continuum exactly when that sphere has dimension ≥ 1.
        Some(nb) => !(sp.m > 1 && nb < 1.0 - 1e-9),
        None => {
            let shifted = SymMat::lincomb(&[(1.0, &t.q), (g.mu, &SymMat::identity(n))]);
            shifted.lambda_min().0 > thr || sp.e.values[0] > thr
        }
    };
    let interior = g.mu <= thr && y.norm() < 1.0 - 1e-7;
    let projected_lambda_min = if interior || g.mu <= thr {
        sp.e.values[0]
    } else {
        local_trs_check(t, &y, g.mu, 1e-8).projected_lambda_min
    };
    Ok(SoscReport {
        global_value: g.value,
        global_x: g.x,
        mu: g.mu,
        strict_global,
        sosc_holds: projected_lambda_min > thr,
        hard_case: hard,
        y_bar_norm,
        projected_lambda_min,
    })
}

//! Ellipsoid-regularized total least squares
//! `min ‖Ax − b‖² / (1 + ‖x‖²)  s.t.  ‖Lx‖² ≤ ρ`.
//!
//! With `y = x/√(1 + ‖x‖²)` and `z = 1/√(1 + ‖x‖²)` this becomes
//! `min ‖Ay − bz‖²  s.t.  ‖y‖² + z² = 1,  (‖y‖² + z²) + (‖Ly‖² − ρz²) ≤ 1`,
//! a two-constraint problem in `(y, z)`. Under the existence assumption
//! every local minimizer of the lifted problem has `z ≠ 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{nullspace_basis, Matrix, SymMat, Vector};
use crate::qq2::global::{solve_qq2_with, GlobalCertificate, Qq2Options, Qq2Outcome};
use crate::qq2::local::{classify_point, PointClassification, Verdict};
use crate::qq2::{Mode, Qq2Problem, Tolerances};

#[derive(Debug, Clone, PartialEq)]
pub struct EtlsProblem {
    pub a: Matrix,
    pub b: Vector,
    pub l: Matrix,
    pub rho: f64,
}

const RANK_TOL: f64 = 1e-10;
const Z_MIN: f64 = 1e-10;

impl EtlsProblem {
    pub fn new(a: Matrix, b: Vector, l: Matrix, rho: f64) -> Result<Self> {
        let n = a.ncols();
        if b.len() != a.nrows() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: b.len(),
            });
        }
        if l.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: l.ncols(),
            });
        }
        let finite = a
            .iter()
            .chain(b.iter())
            .chain(l.iter())
            .all(|v| v.is_finite());
        if !finite || !rho.is_finite() {
            return Err(Error::NonFinite);
        }
        if rho <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "rho must be positive, got {rho}"
            )));
        }
        let r = l.nrows();
        if r == 0 || r > n {
            return Err(Error::InvalidInput(format!(
                "L must have between 1 and {n} rows, got {r}"
            )));
        }
        let sv = l.singular_values();
        if sv.min() <= RANK_TOL * sv.max().max(1.0) {
            return Err(Error::InvalidInput("L does not have full row rank".into()));
        }
        Ok(EtlsProblem { a, b, l, rho })
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    /// `‖Ax − b‖² / (1 + ‖x‖²)`
    pub fn objective(&self, x: &Vector) -> f64 {
        (&self.a * x - &self.b).norm_squared() / (1.0 + x.norm_squared())
    }

    pub fn regularizer(&self, x: &Vector) -> f64 {
        (&self.l * x).norm_squared()
    }

    /// The lifted problem in `(y, z)`.
    pub fn lift(&self) -> Qq2Problem {
        let n = self.dim();
        let ata = self.a.transpose() * &self.a;
        let atb = self.a.transpose() * &self.b;
        let mut a0 = Matrix::zeros(n + 1, n + 1);
        a0.view_mut((0, 0), (n, n)).copy_from(&ata);
        a0.view_mut((0, n), (n, 1)).copy_from(&(-&atb));
        a0.view_mut((n, 0), (1, n)).copy_from(&(-atb.transpose()));
        a0[(n, n)] = self.b.norm_squared();
        let mut a2 = Matrix::identity(n + 1, n + 1);
        a2.view_mut((0, 0), (n, n))
            .copy_from(&(Matrix::identity(n, n) + self.l.transpose() * &self.l));
        a2[(n, n)] -= self.rho;
        let sym = |m: Matrix| SymMat::new((&m + m.transpose()) * 0.5).expect("finite");
        Qq2Problem::with_any_dim(sym(a0), SymMat::identity(n + 1), sym(a2), Mode::Inequality)
            .expect("consistent dimensions")
    }
}

/// `x ↦ (x, 1) / √(1 + ‖x‖²)`
pub fn charnes_cooper(x: &Vector) -> Vector {
    let n = x.len();
    let s = (1.0 + x.norm_squared()).sqrt();
    let mut v = Vector::zeros(n + 1);
    v.rows_mut(0, n).copy_from(&(x / s));
    v[n] = 1.0 / s;
    v
}

/// Either `L` is square, or appending `b` strictly lowers the smallest
/// eigenvalue of the least-squares matrix restricted to `null(L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExistenceCheck {
    pub square: bool,
    pub lambda_aug: Option<f64>,
    pub lambda_restricted: Option<f64>,
    pub holds: bool,
}

pub fn check_existence(e: &EtlsProblem) -> Result<ExistenceCheck> {
    let n = e.dim();
    if e.l.nrows() == n {
        return Ok(ExistenceCheck {
            square: true,
            lambda_aug: None,
            lambda_restricted: None,
            holds: true,
        });
    }
    let ltl = SymMat::new(e.l.transpose() * &e.l)?;
    let f = nullspace_basis(&ltl, RANK_TOL)?;
    let af = &e.a * &f;
    let k = f.ncols();
    let mut aug = Matrix::zeros(k + 1, k + 1);
    aug.view_mut((0, 0), (k, k))
        .copy_from(&(af.transpose() * &af));
    let afb = af.transpose() * &e.b;
    aug.view_mut((0, k), (k, 1)).copy_from(&afb);
    aug.view_mut((k, 0), (1, k)).copy_from(&afb.transpose());
    aug[(k, k)] = e.b.norm_squared();
    let la = SymMat::new((&aug + aug.transpose()) * 0.5)?.lambda_min().0;
    let lr = SymMat::new(af.transpose() * &af)?.lambda_min().0;
    let scale = aug.norm().max(1.0);
    Ok(ExistenceCheck {
        square: false,
        lambda_aug: Some(la),
        lambda_restricted: Some(lr),
        holds: la < lr - 1e-12 * scale,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtlsSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub y: Vec<f64>,
    pub z: f64,
    pub certificate: GlobalCertificate,
}

pub fn solve_etls(e: &EtlsProblem) -> Result<EtlsSolution> {
    let ex = check_existence(e)?;
    if !ex.holds {
        return Err(Error::ExistenceAssumption(format!(
            "λ_min of the augmented matrix {:?} is not below λ_min on null(L) {:?}",
            ex.lambda_aug, ex.lambda_restricted
        )));
    }
    let p = e.lift();
    let cert = match solve_qq2_with(&p, &Qq2Options::default()).map_err(|err| err.at("etls"))? {
        Qq2Outcome::Global(c) => c,
        Qq2Outcome::Infeasible { reason } => {
            return Err(Error::Contradiction(format!(
                "lifted problem reported infeasible: {reason}"
            )))
        }
        Qq2Outcome::AssumptionFailure(r) => {
            return Err(Error::Contradiction(format!(
                "lifted problem violates its standing assumptions: {r:?}"
            )))
        }
    };
    let n = e.dim();
    let v = cert.x();
    let z = v[n];
    if z.abs() <= Z_MIN {
        return Err(Error::Contradiction(format!(
            "global minimizer of the lifted problem has z = {z:e}"
        ))
        .at("etls"));
    }
    let y = v.rows(0, n).into_owned();
    let x = &y / z;
    let value = (&e.a * &y - &e.b * z).norm_squared();
    let (y, z) = if z < 0.0 { (-y, -z) } else { (y, z) };
    Ok(EtlsSolution {
        x: x.iter().copied().collect(),
        value,
        y: y.iter().copied().collect(),
        z,
        certificate: cert,
    })
}

/// Classifies `x` through its image in the lifted problem. An `x` outside
/// `‖Lx‖² ≤ ρ` (beyond `tol.feas`) is reported as infeasible.
pub fn classify_etls_point(
    e: &EtlsProblem,
    x: &Vector,
    tol: &Tolerances,
) -> Result<PointClassification> {
    if x.len() != e.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            found: x.len(),
        });
    }
    let p = e.lift();
    let v = charnes_cooper(x);
    if e.regularizer(x) > e.rho + tol.feas * e.rho.max(1.0) {
        let mut c = classify_point(&p, &v, tol)?;
        c.verdict = Verdict::Infeasible;
        return Ok(c);
    }
    // The lifted point can sit a rounding error outside q2 ≤ 1 when the
    // regularizer is active; snap it back onto the constraint.
    let q2 = p.q2(&v);
    let v = if q2 > 1.0 && q2 - 1.0 <= tol.feas {
        project_onto_boundary(&p, &v).unwrap_or(v)
    } else {
        v
    };
    classify_point(&p, &v, tol)
}

fn project_onto_boundary(p: &Qq2Problem, v: &Vector) -> Option<Vector> {
    let cs = [&p.a1, &p.a2];
    crate::manifold::QuadManifold::new(&p.a0, &cs).project(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(a: &[f64], b: &[f64], l: &[f64], rho: f64) -> EtlsProblem {
        let n = 2;
        EtlsProblem::new(
            Matrix::from_row_slice(a.len() / n, n, a),
            Vector::from_column_slice(b),
            Matrix::from_row_slice(l.len() / n, n, l),
            rho,
        )
        .unwrap()
    }

    #[test]
    fn consistent_system_with_inactive_regularizer() {
        let e = problem(
            &[1.0, 0.0, 0.0, 1.0],
            &[1.0, 0.0],
            &[1.0, 0.0, 0.0, 1.0],
            100.0,
        );
        let s = solve_etls(&e).unwrap();
        assert!(s.value < 1e-12, "{s:?}");
        assert!((s.x[0] - 1.0).abs() < 1e-8 && s.x[1].abs() < 1e-8);
    }

    #[test]
    fn active_regularizer_keeps_the_charnes_cooper_identity() {
        let e = problem(
            &[1.0, 0.0, 0.0, 1.0],
            &[2.0, 0.0],
            &[1.0, 0.0, 0.0, 1.0],
            1.0,
        );
        let s = solve_etls(&e).unwrap();
        let x = Vector::from_column_slice(&s.x);
        assert!((s.value - e.objective(&x)).abs() < 1e-9);
        assert!(e.regularizer(&x) <= 1.0 + 1e-8);
        // Along the ray x = (t, 0) the objective is (2 − t)²/(1 + t²), decreasing on [0, 1].
        assert!(
            (x[0] - 1.0).abs() < 1e-6 && (s.value - 0.5).abs() < 1e-8,
            "{s:?}"
        );
        let c = classify_etls_point(&e, &x, &Tolerances::default()).unwrap();
        assert!(
            matches!(c.verdict, Verdict::GlobalBoundary | Verdict::InteriorGlobal),
            "{c:?}"
        );
    }

    #[test]
    fn classification_of_bad_points() {
        let e = problem(
            &[1.0, 0.0, 0.0, 1.0],
            &[2.0, 0.0],
            &[1.0, 0.0, 0.0, 1.0],
            1.0,
        );
        let tol = Tolerances::default();
        let out = Vector::from_vec(vec![2.0, 0.0]);
        assert_eq!(
            classify_etls_point(&e, &out, &tol).unwrap().verdict,
            Verdict::Infeasible
        );
        let th: f64 = 0.3;
        let moved = Vector::from_vec(vec![th.cos(), th.sin()]);
        assert_eq!(
            classify_etls_point(&e, &moved, &tol).unwrap().verdict,
            Verdict::NotLocalMinimizer
        );
    }

    #[test]
    fn existence_assumption() {
        // L = [1 0]: null(L) = span(e2). With A = I and b = (1, 0) the
        // restricted and augmented minima coincide.
        let bad = problem(&[1.0, 0.0, 0.0, 1.0], &[1.0, 0.0], &[1.0, 0.0], 1.0);
        assert!(!check_existence(&bad).unwrap().holds);
        assert!(matches!(
            solve_etls(&bad),
            Err(Error::ExistenceAssumption(_))
        ));
        let good = problem(&[1.0, 0.0, 0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0], 1.0);
        assert!(check_existence(&good).unwrap().holds);
        let s = solve_etls(&good).unwrap();
        assert!(s.value < 1e-12 && (s.x[1] - 1.0).abs() < 1e-8, "{s:?}");
    }
}

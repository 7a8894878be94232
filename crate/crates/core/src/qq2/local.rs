//! Local optimality analysis: multipliers, constraint qualification, the
//! point classifier and a multistart search for local non-global minimizers.
//!
//! On the boundary `q1 = q2 = 1` with linearly independent gradients
//! `A1x, A2x`, a local non-global minimizer has a positive inequality
//! multiplier and a Lagrangian Hessian `G = A0 + αA1 + βA2` with exactly one
//! negative eigenvalue; it is strict iff `G` is positive definite on the
//! tangent space `{v : vᵀA1x = vᵀA2x = 0}`. When `G` is only semidefinite
//! there, non-strictness is equivalent to a tangent direction `v̄` with
//! `v̄ᵀGv̄ = 0` and `v̄ᵀ(A2 − A1)v̄ = 0`.
//!
//! In equality mode the constraint pair `{q1 = 1, q2 = 1}` is the same as
//! `{q1 = 1, (2A1 − A2)-form = 1}`. When the multiplier of `q2` is negative
//! the analysis runs on that reflected pair, where `G` is unchanged and the
//! multiplier becomes `−β > 0`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::global::{
    check_assumptions, solve_qq2_with, AssumptionReport, Qq2Options, Qq2Outcome, WITNESS_MARGIN,
};
use super::{Mode, Qq2Problem, Tolerances};
use crate::error::{Error, Result};
use crate::linalg::{
    complement_fixed, inertia_of_values, sym_eig, Inertia, Matrix, SymMat, Vector,
};
use crate::manifold::{DescentOptions, QuadManifold};
use crate::par::{map_indexed, Execution};
use crate::pencil::PencilOptions;
use crate::qq1::{solve_qq1, Qq1Problem};

fn to_vec(x: &Vector) -> Vec<f64> {
    x.iter().copied().collect()
}

/// Multipliers and first-order data at a boundary point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktData {
    pub x: Vec<f64>,
    pub alpha: f64,
    /// Multiplier of the second constraint in the orientation used for the
    /// analysis (see `reflected`).
    pub beta: f64,
    pub stationarity_residual: f64,
    pub licq_ok: bool,
    /// Smallest eigenvalue of the Gram matrix of `{A1x, A2x}`.
    pub licq_gram_min: f64,
    /// Orthonormal tangent basis, stored by columns.
    pub tangent_basis: Vec<Vec<f64>>,
    /// Equality mode only: the analysis uses `2A1 − A2` in place of `A2`,
    /// with `α ← α + 2β` and `β ← −β`.
    pub reflected: bool,
}

impl KktData {
    pub fn w(&self, n: usize) -> Matrix {
        if self.tangent_basis.is_empty() {
            return Matrix::zeros(n, 0);
        }
        Matrix::from_columns(
            &self
                .tangent_basis
                .iter()
                .map(|c| Vector::from_column_slice(c))
                .collect::<Vec<_>>(),
        )
    }

    pub fn point(&self) -> Vector {
        Vector::from_column_slice(&self.x)
    }
}

/// Second-constraint matrix in the orientation recorded by `kkt`.
fn oriented_a2(p: &Qq2Problem, reflected: bool) -> SymMat {
    if reflected {
        SymMat::lincomb(&[(2.0, &p.a1), (-1.0, &p.a2)])
    } else {
        p.a2.clone()
    }
}

fn feasibility(p: &Qq2Problem, x: &Vector, tol: &Tolerances) -> Result<()> {
    p.check_point(x)?;
    let q1 = p.q1(x);
    let q2 = p.q2(x);
    if (q1 - 1.0).abs() > tol.feas {
        return Err(Error::InfeasiblePoint(format!("q1(x) = {q1}")));
    }
    let bad = match p.mode {
        Mode::Inequality => q2 > 1.0 + tol.feas,
        Mode::Equality => (q2 - 1.0).abs() > tol.feas,
    };
    if bad {
        return Err(Error::InfeasiblePoint(format!("q2(x) = {q2}")));
    }
    Ok(())
}

/// Least-squares multipliers, LICQ test and tangent basis at a feasible
/// point with an active second constraint.
pub fn compute_kkt(p: &Qq2Problem, x: &Vector, tol: &Tolerances) -> Result<KktData> {
    feasibility(p, x, tol)?;
    let q2 = p.q2(x);
    if p.mode == Mode::Inequality && q2 < 1.0 - tol.feas {
        return Err(Error::InteriorPoint { q2 });
    }
    let n = p.dim();
    let g1 = p.a1.apply(x);
    let g2 = p.a2.apply(x);
    let g0 = p.a0.apply(x);
    let j = Matrix::from_columns(&[g1.clone(), g2.clone()]);
    let gram = SymMat::new(j.transpose() * &j)?;
    let ge = sym_eig(&gram)?;
    let licq_gram_min = ge.min();
    let licq_ok = licq_gram_min > tol.rank * ge.max().max(1.0);
    // Minimum-norm least squares for Jλ = −A0x.
    let svd = j.clone().svd(true, true);
    let ab = svd
        .solve(&(-&g0), tol.rank * svd.singular_values.max())
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let (mut alpha, mut beta) = (ab[0], ab[1]);
    let stationarity_residual = (&g0 + &g1 * alpha + &g2 * beta).norm();
    let mut reflected = false;
    if p.mode == Mode::Equality && beta < 0.0 {
        reflected = true;
        alpha += 2.0 * beta;
        beta = -beta;
    }
    let w = if licq_ok {
        complement_fixed(n, &[g1, g2])
    } else {
        let g = if g1.norm() >= g2.norm() { g1 } else { g2 };
        complement_fixed(n, &[g])
    };
    Ok(KktData {
        x: to_vec(x),
        alpha,
        beta,
        stationarity_residual,
        licq_ok,
        licq_gram_min,
        tangent_basis: w
            .column_iter()
            .map(|c| c.iter().copied().collect())
            .collect(),
        reflected,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Infeasible,
    InteriorGlobal,
    InteriorNotLocal,
    GlobalBoundary,
    StrictLocalNonGlobal,
    /// Satisfies the necessary conditions for a non-strict local non-global
    /// minimizer, including a flat tangent direction; local minimality
    /// itself is not certified.
    NonStrictLocalNonGlobalCandidate,
    NotLocalMinimizer,
    #[serde(rename = "licq_fail_global")]
    LicqFailGlobal,
    #[serde(rename = "licq_fail_not_global")]
    LicqFailNotGlobal,
}

impl Verdict {
    pub fn is_local_nonglobal(self) -> bool {
        matches!(
            self,
            Verdict::StrictLocalNonGlobal | Verdict::NonStrictLocalNonGlobalCandidate
        )
    }
}

/// A flat tangent direction at a candidate point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonStrictDirection {
    pub v_bar: Vec<f64>,
    /// `|v̄ᵀA1x|`
    pub r_a1: f64,
    /// `|v̄ᵀA2x|`
    pub r_a2: f64,
    /// `|v̄ᵀGv̄|`
    pub r_g: f64,
    /// `|v̄ᵀ(A2 − A1)v̄|`
    pub r_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointClassification {
    pub verdict: Verdict,
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub global_value: Option<f64>,
    pub kkt: Option<KktData>,
    pub g_inertia: Option<Inertia>,
    pub g_lambda_min: Option<f64>,
    /// Eigenvalues of `WᵀGW`, ascending.
    pub projected_hessian: Vec<f64>,
    pub v_bar: Option<NonStrictDirection>,
}

impl PointClassification {
    fn bare(verdict: Verdict, p: &Qq2Problem, x: &Vector) -> Self {
        PointClassification {
            verdict,
            q0: p.q0(x),
            q1: p.q1(x),
            q2: p.q2(x),
            global_value: None,
            kkt: None,
            g_inertia: None,
            g_lambda_min: None,
            projected_hessian: Vec::new(),
            v_bar: None,
        }
    }
}

/// Global information shared by repeated classifications of one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalContext {
    pub global_value: Option<f64>,
    pub assumptions: AssumptionReport,
}

impl GlobalContext {
    pub fn new(p: &Qq2Problem, opts: &Qq2Options) -> Result<Self> {
        let assumptions = check_assumptions(p, &opts.pencil)?;
        let global_value = match solve_qq2_with(p, opts) {
            Ok(Qq2Outcome::Global(c)) => Some(c.value),
            _ => None,
        };
        Ok(GlobalContext {
            global_value,
            assumptions,
        })
    }

    fn require_global(&self) -> Result<f64> {
        self.global_value.ok_or_else(|| {
            Error::InvalidInput(
                "global value unavailable (assumptions fail or solve failed)".into(),
            )
            .at("global")
        })
    }
}

fn value_tol(v: f64, tol: &Tolerances) -> f64 {
    tol.psd * v.abs().max(1.0)
}

pub fn classify_point(p: &Qq2Problem, x: &Vector, tol: &Tolerances) -> Result<PointClassification> {
    let ctx = GlobalContext::new(
        p,
        &Qq2Options {
            tol: *tol,
            ..Qq2Options::default()
        },
    )?;
    classify_point_with(p, x, tol, &ctx)
}

/// Decision tree: feasibility; interior points (local iff global for the
/// single-constraint relaxation); LICQ failure (local implies global);
/// first order; sign of the multiplier; semidefiniteness and inertia of
/// `G`; definiteness of `G` on the tangent space; flat directions.
pub fn classify_point_with(
    p: &Qq2Problem,
    x: &Vector,
    tol: &Tolerances,
    ctx: &GlobalContext,
) -> Result<PointClassification> {
    if feasibility(p, x, tol).is_err() {
        p.check_point(x)?;
        return Ok(PointClassification::bare(Verdict::Infeasible, p, x));
    }
    let q0 = p.q0(x);
    let q2 = p.q2(x);
    let mut out = PointClassification::bare(Verdict::NotLocalMinimizer, p, x);
    out.global_value = ctx.global_value;

    if p.mode == Mode::Inequality && q2 < 1.0 - tol.feas {
        let rel = solve_qq1(&Qq1Problem::new(p.a0.clone(), p.a1.clone())?)
            .map_err(|e| e.at("relaxation"))?;
        out.verdict = if q0 <= rel.value + value_tol(rel.value, tol) {
            Verdict::InteriorGlobal
        } else {
            Verdict::InteriorNotLocal
        };
        return Ok(out);
    }

    let kkt = compute_kkt(p, x, tol)?;
    let is_global = |ctx: &GlobalContext| -> Result<bool> {
        let g = ctx.require_global()?;
        Ok(q0 <= g + value_tol(g, tol))
    };

    if !kkt.licq_ok {
        let global = is_global(ctx)?;
        let a = &ctx.assumptions;
        out.verdict = if global {
            Verdict::LicqFailGlobal
        } else if p.mode == Mode::Inequality && a.c1.is_some() && a.c2.is_some() {
            // A local minimizer without LICQ is global; when the level set
            // q2 > 1 is empty the problem has no local non-global minimizer.
            Verdict::NotLocalMinimizer
        } else {
            Verdict::LicqFailNotGlobal
        };
        out.kkt = Some(kkt);
        return Ok(out);
    }

    let scale = p.scale_at(kkt.alpha, kkt.beta);
    if kkt.stationarity_residual > tol.psd * scale * x.norm().max(1.0) {
        out.kkt = Some(kkt);
        return Ok(out);
    }

    let a2o = oriented_a2(p, kkt.reflected);
    let g = SymMat::lincomb(&[(1.0, &p.a0), (kkt.alpha, &p.a1), (kkt.beta, &a2o)]);
    let ge = sym_eig(&g)?;
    let thr = tol.psd * scale;
    out.g_lambda_min = Some(ge.min());
    out.g_inertia = Some(inertia_of_values(&ge.values, tol.rank * g.norm().max(1.0)));
    let w = kkt.w(p.dim());
    let h = g.congruence(&w);
    let he = sym_eig(&h)?;
    out.projected_hessian = he.values.clone();

    let beta_thr = tol.psd * scale;
    if kkt.beta < -beta_thr {
        out.kkt = Some(kkt);
        return Ok(out);
    }
    if kkt.beta <= beta_thr {
        // Without strict complementarity a local minimizer is global.
        out.verdict = if is_global(ctx)? {
            Verdict::GlobalBoundary
        } else {
            Verdict::NotLocalMinimizer
        };
        out.kkt = Some(kkt);
        return Ok(out);
    }
    if ge.min() >= -thr {
        out.verdict = Verdict::GlobalBoundary;
        out.kkt = Some(kkt);
        return Ok(out);
    }
    let n_neg = out.g_inertia.map(|i| i.n_neg).unwrap_or(0);
    if n_neg != 1 {
        out.kkt = Some(kkt);
        return Ok(out);
    }
    let hmin = if he.values.is_empty() {
        f64::INFINITY
    } else {
        he.min()
    };
    if hmin > thr {
        out.verdict = Verdict::StrictLocalNonGlobal;
    } else if hmin >= -thr {
        let dir = find_nonstrict_direction(p, x, &kkt, tol);
        if dir.is_some() {
            out.verdict = Verdict::NonStrictLocalNonGlobalCandidate;
        }
        out.v_bar = dir;
    }
    out.kkt = Some(kkt);
    Ok(out)
}

/// Searches the null space of `WᵀGW` for `v̄` with `v̄ᵀ(A2 − A1)v̄ = 0`.
///
/// On that null space the constraint is a single quadratic form `B`; a
/// nonzero root exists iff `B` is not definite, and one is given in closed
/// form by mixing the extreme eigenvectors of `B`.
pub fn find_nonstrict_direction(
    p: &Qq2Problem,
    x: &Vector,
    kkt: &KktData,
    tol: &Tolerances,
) -> Option<NonStrictDirection> {
    let n = p.dim();
    let a2o = oriented_a2(p, kkt.reflected);
    let g = SymMat::lincomb(&[(1.0, &p.a0), (kkt.alpha, &p.a1), (kkt.beta, &a2o)]);
    let w = kkt.w(n);
    if w.ncols() == 0 {
        return None;
    }
    let h = g.congruence(&w);
    let he = sym_eig(&h).ok()?;
    let thr = tol.psd * p.scale_at(kkt.alpha, kkt.beta);
    let cols: Vec<Vector> = (0..he.values.len())
        .filter(|&k| he.values[k].abs() <= thr)
        .map(|k| &w * he.vector(k))
        .collect();
    if cols.is_empty() {
        return None;
    }
    let v = Matrix::from_columns(&cols);
    let diff = a2o.sub(&p.a1);
    let b = diff.congruence(&v);
    let be = sym_eig(&b).ok()?;
    let dthr = tol.rank * diff.norm().max(1.0);
    let (lmin, lmax) = (be.min(), be.max());
    let u = if lmin.abs() <= dthr {
        be.vector(0)
    } else if lmax.abs() <= dthr {
        be.vector(be.values.len() - 1)
    } else if lmin < 0.0 && lmax > 0.0 {
        // cos²θ λmin + sin²θ λmax = 0
        let theta = (-lmin / lmax).sqrt().atan();
        be.vector(0) * theta.cos() + be.vector(be.values.len() - 1) * theta.sin()
    } else {
        return None;
    };
    let mut vb = &v * u;
    vb /= vb.norm();
    let dir = NonStrictDirection {
        r_a1: vb.dot(&p.a1.apply(x)).abs(),
        r_a2: vb.dot(&a2o.apply(x)).abs(),
        r_g: g.quad(&vb).abs(),
        r_diff: diff.quad(&vb).abs(),
        v_bar: to_vec(&vb),
    };
    let ok = dir.r_a1 <= tol.rank * p.a1.norm().max(1.0)
        && dir.r_a2 <= tol.rank * a2o.norm().max(1.0)
        && dir.r_g <= tol.psd * g.norm().max(1.0)
        && dir.r_diff <= tol.rank * diff.norm().max(1.0);
    ok.then_some(dir)
}

#[derive(Debug, Clone, Copy)]
pub struct FinderOptions {
    pub n_starts: usize,
    pub seed: u64,
    pub descent: DescentOptions,
    pub tol: Tolerances,
    pub exec: Execution,
    /// Points closer than this (after sign normalization) are merged.
    pub dedup_distance: f64,
}

impl Default for FinderOptions {
    fn default() -> Self {
        FinderOptions {
            n_starts: 200,
            seed: 0,
            descent: DescentOptions::default(),
            tol: Tolerances::default(),
            exec: Execution::default(),
            dedup_distance: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalCandidate {
    pub x: Vec<f64>,
    pub value: f64,
    pub classification: PointClassification,
}

/// Flips `x` so that its first entry of significant size is positive.
fn sign_normalized(x: &Vector) -> Vector {
    let lead = x.iter().copied().find(|v| v.abs() > 1e-8).unwrap_or(0.0);
    if lead < 0.0 {
        -x
    } else {
        x.clone()
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Multistart Riemannian descent on `{q1 = 1, q2 = 1}` followed by
/// classification. Returns the local non-global minimizers found (both
/// members of each `±x` pair), sorted by value and then lexicographically.
pub fn find_local_nonglobal(p: &Qq2Problem, opts: &FinderOptions) -> Result<Vec<LocalCandidate>> {
    let qopts = Qq2Options {
        tol: opts.tol,
        pencil: PencilOptions {
            exec: opts.exec,
            ..PencilOptions::default()
        },
        ..Qq2Options::default()
    };
    let ctx = GlobalContext::new(p, &qopts)?;
    if ctx.assumptions.c1.is_none() {
        return Err(Error::PencilNotDefinite.at("finder"));
    }
    // Without boundary points every feasible point is interior, and interior
    // local minimizers are global.
    if p.mode == Mode::Inequality
        && ctx.assumptions.c3.is_none()
        && ctx.assumptions.q2_range[1] < 1.0 - WITNESS_MARGIN
    {
        return Ok(Vec::new());
    }
    let cs = [&p.a1, &p.a2];
    let m = QuadManifold::new(&p.a0, &cs);
    let ends: Vec<Option<Vector>> = map_indexed(opts.exec, opts.n_starts, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(i as u64);
        let x0 = m.random_point(&mut rng, 20)?;
        m.descend(&x0, &opts.descent).map(|r| sign_normalized(&r.x))
    });
    let mut pts: Vec<Vector> = ends.into_iter().flatten().collect();
    if pts.is_empty() && opts.n_starts > 0 {
        return Err(Error::InvalidInput(
            "no start could be projected onto {q1 = 1, q2 = 1}".into(),
        )
        .at("finder"));
    }
    pts.sort_by(|a, b| {
        p.q0(a)
            .total_cmp(&p.q0(b))
            .then_with(|| lex_cmp(a.as_slice(), b.as_slice()))
    });
    let mut unique: Vec<Vector> = Vec::new();
    for x in pts {
        if unique.iter().all(|u| (u - &x).norm() > opts.dedup_distance) {
            unique.push(x);
        }
    }
    let classified: Vec<Result<PointClassification>> = map_indexed(opts.exec, unique.len(), |i| {
        classify_point_with(p, &unique[i], &opts.tol, &ctx)
    });
    let mut out = Vec::new();
    for (x, c) in unique.iter().zip(classified) {
        let c = c?;
        if c.verdict.is_local_nonglobal() {
            for s in [x.clone(), -x] {
                let mut cs = c.clone();
                if let Some(k) = cs.kkt.as_mut() {
                    k.x = to_vec(&s);
                }
                out.push(LocalCandidate {
                    x: to_vec(&s),
                    value: p.q0(&s),
                    classification: cs,
                });
            }
        }
    }
    out.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then_with(|| lex_cmp(&a.x, &b.x))
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: &[f64]) -> SymMat {
        SymMat::from_diagonal(d).unwrap()
    }

    #[test]
    fn licq_fails_for_parallel_gradients() {
        let p = Qq2Problem::new(
            diag(&[1.0, 2.0, 3.0]),
            SymMat::identity(3),
            SymMat::identity(3),
            Mode::Inequality,
        )
        .unwrap();
        let x = Vector::from_vec(vec![0.6, 0.8, 0.0]);
        let k = compute_kkt(&p, &x, &Tolerances::default()).unwrap();
        assert!(!k.licq_ok);
    }

    #[test]
    fn interior_point_is_rejected() {
        let p = Qq2Problem::new(
            SymMat::zeros(3),
            SymMat::identity(3),
            diag(&[-20.0, 0.0, 10.0]),
            Mode::Inequality,
        )
        .unwrap();
        let x = Vector::from_vec(vec![0.0, 1.0, 0.0]);
        assert!(matches!(
            compute_kkt(&p, &x, &Tolerances::default()),
            Err(Error::InteriorPoint { .. })
        ));
    }

    #[test]
    fn flat_direction_absent_when_form_is_definite() {
        // W'GW = 0 on the single tangent direction e3, but (A2 - A1) = 0.5 there.
        let a1 = SymMat::identity(3);
        let a2 = diag(&[1.0, 1.5, 1.5]);
        let a0 = diag(&[-1.0, 0.0, 0.0]);
        let p = Qq2Problem::new(a0, a1, a2, Mode::Inequality).unwrap();
        let x = Vector::from_vec(vec![1.0, 0.0, 0.0]);
        let kkt = KktData {
            x: vec![1.0, 0.0, 0.0],
            alpha: 1.0,
            beta: 0.0,
            stationarity_residual: 0.0,
            licq_ok: true,
            licq_gram_min: 1.0,
            tangent_basis: vec![vec![0.0, 0.0, 1.0]],
            reflected: false,
        };
        assert!(find_nonstrict_direction(&p, &x, &kkt, &Tolerances::default()).is_none());
    }
    fn curve_problem(mode: Mode) -> Qq2Problem {
        let a0 = SymMat::from_rows(&[
            vec![0.0, 0.5, 0.0],
            vec![0.5, 0.0, 1.5],
            vec![0.0, 1.5, 0.0],
        ])
        .unwrap();
        Qq2Problem::new(a0, SymMat::identity(3), diag(&[-20.0, 0.0, 10.0]), mode).unwrap()
    }

    fn curve(t: f64, branch: f64) -> Vector {
        Vector::from_vec(vec![
            t,
            branch * (0.9 - 3.0 * t * t).sqrt(),
            (0.1 + 2.0 * t * t).sqrt(),
        ])
    }

    #[test]
    fn finder_on_equality_example() {
        let p = curve_problem(Mode::Equality);
        let found = find_local_nonglobal(
            &p,
            &FinderOptions {
                n_starts: 64,
                seed: 7,
                ..FinderOptions::default()
            },
        )
        .unwrap();
        assert!(!found.is_empty());
        assert_eq!(found.len(), 4);
        let ts: Vec<f64> = found.iter().map(|c| -c.x[0].abs()).collect();
        assert!(
            (ts[0] + 0.339364).abs() < 1e-5 && (ts[2] + 0.066375).abs() < 1e-5,
            "{ts:?}"
        );
        for c in &found {
            assert_eq!(c.classification.verdict, Verdict::StrictLocalNonGlobal);
            let k = c.classification.kkt.as_ref().unwrap();
            assert!(k.beta > 0.0);
            assert_eq!(c.classification.g_inertia.unwrap().n_neg, 1);
        }
        let g = c_global(&p);
        assert!((g - (-1.542950)).abs() < 1e-5, "{g}");
    }

    fn c_global(p: &Qq2Problem) -> f64 {
        match super::super::global::solve_qq2(p).unwrap() {
            Qq2Outcome::Global(c) => c.value,
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn global_point_on_curve_is_recognized() {
        let p = curve_problem(Mode::Equality);
        let x = curve(0.361146, -1.0);
        let tol = Tolerances {
            feas: 1e-6,
            psd: 1e-5,
            ..Tolerances::default()
        };
        let c = classify_point(&p, &x, &tol).unwrap();
        assert_eq!(c.verdict, Verdict::GlobalBoundary, "{c:?}");
    }

    #[test]
    fn flat_problem_special_points() {
        let s2 = 2f64.sqrt();
        let a0 = SymMat::from_rows(&[
            vec![-s2, 0.5, 0.0],
            vec![0.5, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        let p = Qq2Problem::new(
            a0,
            SymMat::identity(3),
            diag(&[2.0, 0.5, 1.0]),
            Mode::Inequality,
        )
        .unwrap();
        let tol = Tolerances::default();
        let t: f64 = 0.7;
        let x = Vector::from_vec(vec![s2, 2.0, t]) / (6.0 + t * t).sqrt();
        let c = classify_point(&p, &x, &tol).unwrap();
        assert_eq!(
            c.verdict,
            Verdict::NonStrictLocalNonGlobalCandidate,
            "{c:?}"
        );
        let v = c.v_bar.unwrap();
        assert!(v.r_g < 1e-9 && v.r_diff < 1e-9);
        let e3 = Vector::from_vec(vec![0.0, 0.0, 1.0]);
        assert_eq!(
            classify_point(&p, &e3, &tol).unwrap().verdict,
            Verdict::NotLocalMinimizer
        );
        let g = Vector::from_vec(vec![1.0, -s2, 0.0]) / 3f64.sqrt();
        assert_eq!(
            classify_point(&p, &g, &tol).unwrap().verdict,
            Verdict::GlobalBoundary
        );
    }
}

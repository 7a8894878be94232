//! Global solution of the two-constraint problem through its two-variable
//! dual and a rank-one primal recovery.
//!
//! Dual objective: if `(A0 + αA1 + βA2)x* = 0`, multiplying by `x*ᵀ` gives
//! `q0(x*) = −α q1(x*) − β q2(x*) = −α − β` whenever `q1(x*) = 1` and
//! `β(q2(x*) − 1) = 0`. For any feasible `x` and any `(α, β)` with
//! `A0 + αA1 + βA2 ⪰ 0` (and `β ≥ 0` in inequality mode),
//! `q0(x) ≥ −α q1(x) − β q2(x) ≥ −α − β`, so `−α − β` is a lower bound and
//! the best one is `max −α − β  s.t.  λ_min(A0 + αA1 + βA2) ≥ 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Mode, Qq2Problem, Tolerances};
use crate::error::{Error, Result};
use crate::linalg::{inv_sqrt, nullspace_basis, sym_eig, Matrix, SymMat, Vector};
use crate::pencil::{
    congruence_diagonalize, find_definite_pencil2_with, find_definite_shift, PencilOptions,
    PencilSearch,
};
use crate::qq1::{qq1_feasible, solve_qq1, Qq1Problem, Qq1Status};

pub(crate) const WITNESS_MARGIN: f64 = 1e-9;
const WITNESS_SAMPLES: usize = 4096;
const WITNESS_SEED: u64 = 0x5eed_c0de;

/// Which standing assumptions hold, with witnesses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// Unit `(μ1, μ2)` with `μ1A1 + μ2A2 ≻ 0`.
    pub c1: Option<[f64; 2]>,
    /// A definite direction with `μ2 ≥ 0`, when one exists.
    pub c1_nonnegative: Option<[f64; 2]>,
    pub c1_search: PencilSearch,
    /// `q1 = 1`, `q2 < 1`.
    pub c2: Option<Vec<f64>>,
    /// `q1 = 1`, `q2 > 1`.
    pub c3: Option<Vec<f64>>,
    /// Infimum and supremum of `q2` over `{q1 = 1}`.
    pub q2_range: [f64; 2],
    pub a2_minus_a1_indefinite: bool,
}

impl AssumptionReport {
    /// The hypotheses of the global optimality certificate for `mode`.
    pub fn holds(&self, mode: Mode) -> bool {
        match mode {
            Mode::Inequality => self.c1.is_some() && self.c2.is_some(),
            Mode::Equality => self.c1.is_some() && self.c2.is_some() && self.c3.is_some(),
        }
    }
}

fn vec_of(x: &Vector) -> Vec<f64> {
    x.iter().copied().collect()
}

/// Looks for `x` with `q1(x) = 1` and `sign * (q2(x) - 1) < 0`, starting from
/// the exact extremum and falling back to seeded sampling when the extremum
/// is not attained.
fn level_witness(a1: &SymMat, a2: &SymMat, sign: f64) -> Result<(f64, Option<Vector>)> {
    let obj = a2.scale(sign);
    let sol = solve_qq1(&Qq1Problem::new(obj, a1.clone())?)?;
    let bound = sign * sol.value;
    let target = |q2: f64| sign * (q2 - 1.0) < -WITNESS_MARGIN;
    if let Some(x) = &sol.x_star {
        if target(a2.quad(x)) {
            return Ok((bound, Some(x.clone())));
        }
    }
    if sol.status == Qq1Status::Attained || !target(bound) {
        return Ok((bound, None));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(WITNESS_SEED);
    let n = a1.dim();
    for _ in 0..WITNESS_SAMPLES {
        let v = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let q1 = a1.quad(&v);
        if q1 <= 1e-9 * v.norm_squared() {
            continue;
        }
        let x = v / q1.sqrt();
        if target(a2.quad(&x)) {
            return Ok((bound, Some(x)));
        }
    }
    Ok((bound, None))
}

/// Checks the definite-pencil, strict-feasibility and level-crossing
/// assumptions.
pub fn check_assumptions(p: &Qq2Problem, opts: &PencilOptions) -> Result<AssumptionReport> {
    let c1_search = find_definite_pencil2_with(&p.a1, &p.a2, opts)?;
    let c1 = c1_search.direction();
    let c1_nonnegative = if c1.is_some_and(|m| m[1] >= 0.0) {
        c1
    } else if c1.is_some() {
        let half = PencilOptions {
            nonnegative_second: true,
            ..*opts
        };
        find_definite_pencil2_with(&p.a1, &p.a2, &half)?.direction()
    } else {
        None
    };
    let d = sym_eig(&p.a2.sub(&p.a1))?;
    let thr = 1e-12 * p.a2.sub(&p.a1).norm().max(1.0);
    let a2_minus_a1_indefinite = d.min() < -thr && d.max() > thr;

    if !qq1_feasible(&p.a1) {
        return Ok(AssumptionReport {
            c1,
            c1_nonnegative,
            c1_search,
            c2: None,
            c3: None,
            q2_range: [f64::INFINITY, f64::NEG_INFINITY],
            a2_minus_a1_indefinite,
        });
    }
    let (lo, c2) = level_witness(&p.a1, &p.a2, 1.0).map_err(|e| e.at("assumption C2"))?;
    let (hi, c3) = level_witness(&p.a1, &p.a2, -1.0).map_err(|e| e.at("assumption C3"))?;
    Ok(AssumptionReport {
        c1,
        c1_nonnegative,
        c1_search,
        c2: c2.as_ref().map(vec_of),
        c3: c3.as_ref().map(vec_of),
        q2_range: [lo, hi],
        a2_minus_a1_indefinite,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Compactness {
    /// The feasible set is empty.
    Empty,
    /// `{q1 = 1, q2 = 1}` is compact; `μ1A1 + μ2A2 ≻ 0`.
    CompactE {
        mu: [f64; 2],
    },
    /// `{q1 = 1, q2 ≤ 1}` is compact; `μA1 + A2 ≻ 0`.
    CompactF {
        mu: f64,
    },
    NotCompact,
    /// No definite direction found at this grid resolution.
    Unknown {
        resolution: usize,
    },
}

/// Compactness of the feasible set (dimension at least 3).
pub fn check_compactness(p: &Qq2Problem, opts: &PencilOptions) -> Result<Compactness> {
    if !qq1_feasible(&p.a1) {
        return Ok(Compactness::Empty);
    }
    let lo = level_bound(&p.a1, &p.a2, 1.0)?;
    let hi = level_bound(&p.a1, &p.a2, -1.0)?;
    let nonempty = match p.mode {
        Mode::Inequality => lo.reaches(1.0, 1.0),
        Mode::Equality => lo.reaches(1.0, 1.0) && hi.reaches(1.0, -1.0),
    };
    if !nonempty {
        return Ok(Compactness::Empty);
    }
    match p.mode {
        Mode::Equality => Ok(match find_definite_pencil2_with(&p.a1, &p.a2, opts)? {
            PencilSearch::Found(c) => Compactness::CompactE {
                mu: [c.mu[0], c.mu[1]],
            },
            PencilSearch::NotFound { resolution, .. } => Compactness::Unknown { resolution },
            PencilSearch::None { .. } => Compactness::NotCompact,
        }),
        Mode::Inequality => Ok(match find_definite_shift(&p.a2, &p.a1)? {
            Some((mu, _)) => Compactness::CompactF { mu },
            None => Compactness::NotCompact,
        }),
    }
}

struct LevelBound {
    value: f64,
    attained: bool,
}

impl LevelBound {
    /// Whether `q2 = level` (or beyond it in direction `-sign`) is reachable.
    fn reaches(&self, level: f64, sign: f64) -> bool {
        let gap = sign * (self.value - level);
        if self.attained {
            gap <= WITNESS_MARGIN
        } else {
            gap < 0.0
        }
    }
}

fn level_bound(a1: &SymMat, a2: &SymMat, sign: f64) -> Result<LevelBound> {
    let sol = solve_qq1(&Qq1Problem::new(a2.scale(sign), a1.clone())?)?;
    Ok(LevelBound {
        value: sign * sol.value,
        attained: sol.status == Qq1Status::Attained,
    })
}

/// Record of a cutting-plane run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualTrace {
    pub iterations: usize,
    pub upper_bound: f64,
    pub lower_bound: f64,
    /// Every dual-feasible `(α, β)` produced, with its objective `−α − β`.
    pub feasible_points: Vec<[f64; 3]>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSolution {
    pub alpha: f64,
    pub beta: f64,
    pub dual_value: f64,
    pub lambda_min_g: f64,
    pub trace: DualTrace,
}

#[derive(Debug, Clone, Copy)]
pub struct DualOptions {
    pub max_iter: usize,
    pub gap_tol: f64,
    /// A definite direction `(μ1, μ2)` used to restore feasibility.
    pub direction: [f64; 2],
}

type Pt = [f64; 2];

/// Keeps the part of a convex polygon with `a·p ≥ c`.
fn clip(poly: &[Pt], a: Pt, c: f64) -> Vec<Pt> {
    let side = |p: &Pt| a[0] * p[0] + a[1] * p[1] - c;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let (sp, sq) = (side(&p), side(&q));
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp >= 0.0) != (sq >= 0.0) {
            let t = sp / (sp - sq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

fn dual_objective(p: &Pt) -> f64 {
    -p[0] - p[1]
}

/// Vertex maximizing `−α − β`; near-ties go to the vertex of smallest norm
/// so that an optimal edge running into the bounding box does not look like
/// unboundedness.
fn best_vertex(poly: &[Pt]) -> Pt {
    let top = poly
        .iter()
        .map(dual_objective)
        .fold(f64::NEG_INFINITY, f64::max);
    let slack = 1e-12 * top.abs().max(1.0);
    let mut best: Option<Pt> = None;
    for v in poly {
        if dual_objective(v) >= top - slack
            && best.is_none_or(|b| v[0].hypot(v[1]) < b[0].hypot(b[1]))
        {
            best = Some(*v);
        }
    }
    best.expect("nonempty polygon")
}

/// Maximizes `−α − β` subject to `λ_min(A0 + αA1 + βA2) ≥ 0` (and `β ≥ 0`
/// in inequality mode) by Kelley's cutting-plane method on the plane.
///
/// Cuts use the supergradient `(vᵀA1v, vᵀA2v)` of the concave function
/// `λ_min` at a unit minimal eigenvector `v`. Lower bounds come from moving
/// each iterate along the definite direction until `λ_min` reaches zero.
pub fn solve_dual_with(p: &Qq2Problem, opts: &DualOptions) -> Result<DualSolution> {
    let mu = opts.direction;
    let m = SymMat::lincomb(&[(mu[0], &p.a1), (mu[1], &p.a2)]);
    let m_half = inv_sqrt(&m).map_err(|_| Error::PencilNotDefinite)?;
    let lam_m = m.lambda_min().0;
    let scale = p.a0.norm().max(1.0);
    let mut bound = 1e3 * (1.0 + p.a0.norm()) / lam_m;

    let restore = |pt: &Pt| -> Option<Pt> {
        let g = p.lagrangian(pt[0], pt[1]);
        let mut t = -g.congruence(&m_half).lambda_min().0;
        // Any t above −λ_min keeps G ⪰ 0, so a backward step may stop at β = 0.
        if p.mode == Mode::Inequality && t < 0.0 && mu[1] > 0.0 {
            t = t.max(-pt[1] / mu[1]);
        }
        let r = [pt[0] + t * mu[0], pt[1] + t * mu[1]];
        if p.mode == Mode::Inequality && r[1] < 0.0 {
            return None;
        }
        Some(r)
    };

    let mut feasible_points = Vec::new();
    let mut total_iter = 0;
    for _growth in 0..4 {
        let mut poly: Vec<Pt> = vec![
            [-bound, -bound],
            [bound, -bound],
            [bound, bound],
            [-bound, bound],
        ];
        if p.mode == Mode::Inequality {
            poly = clip(&poly, [0.0, 1.0], 0.0);
        }
        let mut best: Option<(Pt, f64)> = None;
        let mut ub = f64::INFINITY;
        let mut converged = false;
        let mut last = poly[0];
        for _ in 0..opts.max_iter {
            total_iter += 1;
            if poly.len() < 3 {
                return Err(Error::InfeasibleDual);
            }
            let pk = best_vertex(&poly);
            last = pk;
            ub = dual_objective(&pk);
            if let Some(r) = restore(&pk) {
                let v = dual_objective(&r);
                feasible_points.push([r[0], r[1], v]);
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((r, v));
                }
            }
            if let Some((_, lb)) = best {
                if ub - lb <= opts.gap_tol * scale {
                    converged = true;
                    break;
                }
            }
            let g = p.lagrangian(pk[0], pk[1]);
            let (gk, v) = g.lambda_min();
            let s = [p.a1.quad(&v), p.a2.quad(&v)];
            if s[0].abs() + s[1].abs() <= f64::EPSILON && gk < 0.0 {
                return Err(Error::InfeasibleDual);
            }
            // λ_min(p) ≤ gk + s·(p − pk), so λ_min(p) ≥ 0 needs s·p ≥ s·pk − gk.
            let c = s[0] * pk[0] + s[1] * pk[1] - gk;
            poly = clip(&poly, s, c);
        }
        let Some((pt, lb)) = best else {
            return Err(Error::InfeasibleDual);
        };
        let on_box = last[0].abs() >= bound * (1.0 - 1e-9) || last[1].abs() >= bound * (1.0 - 1e-9);
        let pt_on_box = pt[0].abs() >= bound * 0.999 || pt[1].abs() >= bound * 0.999;
        if on_box || pt_on_box {
            bound *= 1e3;
            continue;
        }
        let lambda_min_g = p.lagrangian(pt[0], pt[1]).lambda_min().0;
        return Ok(DualSolution {
            alpha: pt[0],
            beta: pt[1],
            dual_value: lb,
            lambda_min_g,
            trace: DualTrace {
                iterations: total_iter,
                upper_bound: ub,
                lower_bound: lb,
                feasible_points,
                converged,
            },
        });
    }
    Err(Error::UnboundedDual)
}

/// Dual solve using the definite direction from `report`, preferring one
/// with `μ2 ≥ 0` in inequality mode.
pub fn solve_dual(p: &Qq2Problem, report: &AssumptionReport) -> Result<DualSolution> {
    let direction = match p.mode {
        Mode::Inequality => report.c1_nonnegative.or(report.c1),
        Mode::Equality => report.c1,
    }
    .ok_or(Error::PencilNotDefinite)?;
    solve_dual_with(
        p,
        &DualOptions {
            max_iter: 500,
            gap_tol: 1e-9,
            direction,
        },
    )
}

/// Finds `s ≥ 0` with `Σ d1ᵢsᵢ = 1` and `Σ d2ᵢsᵢ = target` (or `≤ target`
/// when `at_most`), trying single coordinates and pairs, which covers every
/// vertex of this two-row system.
fn two_row_feasibility(
    d1: &[f64],
    d2: &[f64],
    target: f64,
    at_most: bool,
    tol: f64,
) -> Option<Vec<f64>> {
    let k = d1.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |s: Vec<f64>| {
        let q2: f64 = s.iter().zip(d2).map(|(a, b)| a * b).sum();
        let err = if at_most {
            (q2 - target).max(0.0)
        } else {
            (q2 - target).abs()
        };
        if err <= tol && best.as_ref().is_none_or(|(e, _)| err < *e) {
            best = Some((err, s));
        }
    };
    for i in 0..k {
        if d1[i] > 0.0 {
            let mut s = vec![0.0; k];
            s[i] = 1.0 / d1[i];
            consider(s);
        }
    }
    for i in 0..k {
        for j in (i + 1)..k {
            let det = d1[i] * d2[j] - d1[j] * d2[i];
            if det.abs() <= 1e-14 * (d1[i].abs() + d2[i].abs()) * (d1[j].abs() + d2[j].abs()) {
                continue;
            }
            let si = (d2[j] - d1[j] * target) / det;
            let sj = (d1[i] * target - d2[i]) / det;
            let slack = 1e-12 * (si.abs() + sj.abs());
            if si >= -slack && sj >= -slack {
                let mut s = vec![0.0; k];
                s[i] = si.max(0.0);
                s[j] = sj.max(0.0);
                consider(s);
            }
        }
    }
    best.map(|(_, s)| s)
}

/// Seeded search in the null space: samples `y` on `{yᵀM1y = 1}`, then
/// bisects between a point below and a point above the `q2` target.
fn sampled_recovery(
    m1: &SymMat,
    m2: &SymMat,
    target: f64,
    at_most: bool,
    seed: u64,
) -> (Option<Vector>, [f64; 2]) {
    let d = m1.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut below: Option<(f64, Vector)> = None;
    let mut above: Option<(f64, Vector)> = None;
    let mut range = [f64::INFINITY, f64::NEG_INFINITY];
    for _ in 0..10_000 {
        let v = Vector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let q1 = m1.quad(&v);
        if q1 <= 1e-12 * v.norm_squared() {
            continue;
        }
        let y = v / q1.sqrt();
        let q2 = m2.quad(&y);
        range[0] = range[0].min(q2);
        range[1] = range[1].max(q2);
        if at_most && q2 <= target {
            return (Some(y), range);
        }
        if q2 <= target && below.as_ref().is_none_or(|(b, _)| q2 > *b) {
            below = Some((q2, y));
        } else if q2 > target && above.as_ref().is_none_or(|(a, _)| q2 < *a) {
            above = Some((q2, y));
        }
    }
    let (Some((_, ya)), Some((_, yb))) = (below, above) else {
        return (None, range);
    };
    let point = |t: f64| -> Option<Vector> {
        let v = &ya * (1.0 - t) + &yb * t;
        let q1 = m1.quad(&v);
        (q1 > 0.0).then(|| v / q1.sqrt())
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        match point(mid) {
            Some(y) if m2.quad(&y) <= target => lo = mid,
            Some(_) => hi = mid,
            None => return (None, range),
        }
    }
    (point(lo), range)
}

/// Recovers `x*` in the null space of `G = A0 + αA1 + βA2` with `q1 = 1` and
/// `q2 = 1` (or `q2 ≤ 1` when the inequality multiplier is zero).
pub fn recover_primal(
    p: &Qq2Problem,
    alpha: f64,
    beta: f64,
    tol: &Tolerances,
    seed: u64,
) -> Result<Vector> {
    let g = p.lagrangian(alpha, beta);
    let active = p.mode == Mode::Equality || beta > tol.psd * p.scale_at(alpha, beta);
    let mut last_err = None;
    for rank_tol in [tol.rank, tol.rank * 1e2, tol.rank * 1e4] {
        let basis = nullspace_basis(&g, rank_tol)?;
        match recover_in_basis(p, &basis, active, tol, seed) {
            Ok(x)
                if g.apply(&x).norm() <= tol.psd * p.scale_at(alpha, beta) * x.norm().max(1.0) =>
            {
                return Ok(x)
            }
            Ok(x) => {
                last_err = Some(Error::Contradiction(format!(
                    "null-space point is not stationary (residual {:.3e})",
                    g.apply(&x).norm()
                )))
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

fn recover_in_basis(
    p: &Qq2Problem,
    basis: &Matrix,
    active: bool,
    tol: &Tolerances,
    seed: u64,
) -> Result<Vector> {
    let d = basis.ncols();
    if d == 0 {
        return Err(Error::RecoveryFailed {
            dim: 0,
            q2_lo: f64::NAN,
            q2_hi: f64::NAN,
        });
    }
    let m1 = p.a1.congruence(basis);
    let m2 = p.a2.congruence(basis);
    let at_most = !active;
    let finish = |y: &Vector| -> Option<Vector> {
        let x = basis * y;
        let q1 = p.a1.quad(&x);
        if q1 <= 0.0 {
            return None;
        }
        let x = x / q1.sqrt();
        let q2 = p.a2.quad(&x);
        let ok = if at_most {
            q2 <= 1.0 + tol.feas
        } else {
            (q2 - 1.0).abs() <= tol.feas
        };
        ok.then_some(x)
    };

    let pencil = find_definite_pencil2_with(&m1, &m2, &PencilOptions::default())?;
    if let PencilSearch::Found(cert) = &pencil {
        let c = congruence_diagonalize(&m1, &m2, [cert.mu[0], cert.mu[1]])?;
        let d1: Vec<f64> = c.d1.to_vec();
        let d2: Vec<f64> = c.d2.to_vec();
        if let Some(s) = two_row_feasibility(&d1, &d2, 1.0, at_most, 1e-9) {
            let z = Vector::from_iterator(d, s.iter().map(|v| v.sqrt()));
            if let Some(x) = finish(&(&c.p * z)) {
                return Ok(x);
            }
        }
    }
    let (y, range) = sampled_recovery(&m1, &m2, 1.0, at_most, seed);
    if let Some(x) = y.as_ref().and_then(finish) {
        return Ok(x);
    }
    Err(Error::RecoveryFailed {
        dim: d,
        q2_lo: range[0],
        q2_hi: range[1],
    })
}

/// Itemized check of the global optimality certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub stationarity_residual: f64,
    pub stationarity: bool,
    pub q1: f64,
    pub q2: f64,
    pub feasibility: bool,
    pub complementarity_residual: f64,
    pub complementarity: bool,
    /// `β ≥ 0` in inequality mode; always true in equality mode.
    pub multiplier_sign: bool,
    pub lambda_min_g: f64,
    pub psd: bool,
    pub pass: bool,
}

pub fn verify_global_certificate(
    p: &Qq2Problem,
    x: &Vector,
    alpha: f64,
    beta: f64,
    tol: &Tolerances,
) -> Result<CertificateCheck> {
    p.check_point(x)?;
    let g = p.lagrangian(alpha, beta);
    let scale = p.scale_at(alpha, beta);
    let stationarity_residual = g.apply(x).norm();
    let stationarity = stationarity_residual <= tol.psd * scale * x.norm().max(1.0);
    let q1 = p.q1(x);
    let q2 = p.q2(x);
    let feasibility = (q1 - 1.0).abs() <= tol.feas
        && match p.mode {
            Mode::Inequality => q2 <= 1.0 + tol.feas,
            Mode::Equality => (q2 - 1.0).abs() <= tol.feas,
        };
    let complementarity_residual = match p.mode {
        Mode::Inequality => (beta * (q2 - 1.0)).abs(),
        Mode::Equality => 0.0,
    };
    let complementarity = complementarity_residual <= tol.psd * scale * (q2 - 1.0).abs().max(1.0);
    let multiplier_sign = p.mode == Mode::Equality || beta >= -tol.feas;
    let lambda_min_g = g.lambda_min().0;
    let psd = lambda_min_g >= -tol.psd * scale;
    Ok(CertificateCheck {
        stationarity_residual,
        stationarity,
        q1,
        q2,
        feasibility,
        complementarity_residual,
        complementarity,
        multiplier_sign,
        lambda_min_g,
        psd,
        pass: stationarity && feasibility && complementarity && multiplier_sign && psd,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalCertificate {
    pub x_star: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    /// `q0(x*)`
    pub value: f64,
    pub dual_value: f64,
    pub lambda_min_g: f64,
    pub check: CertificateCheck,
    pub dual_iterations: usize,
}

impl GlobalCertificate {
    pub fn x(&self) -> Vector {
        Vector::from_column_slice(&self.x_star)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Qq2Outcome {
    Global(GlobalCertificate),
    Infeasible { reason: String },
    AssumptionFailure(AssumptionReport),
}

impl Qq2Outcome {
    pub fn certificate(&self) -> Option<&GlobalCertificate> {
        match self {
            Qq2Outcome::Global(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Qq2Options {
    pub tol: Tolerances,
    pub pencil: PencilOptions,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for Qq2Options {
    fn default() -> Self {
        Qq2Options {
            tol: Tolerances::default(),
            pencil: PencilOptions::default(),
            seed: 0,
            max_iter: 500,
        }
    }
}

pub fn solve_qq2(p: &Qq2Problem) -> Result<Qq2Outcome> {
    solve_qq2_with(p, &Qq2Options::default())
}

/// Assumption check, dual solve, primal recovery and certificate check.
pub fn solve_qq2_with(p: &Qq2Problem, opts: &Qq2Options) -> Result<Qq2Outcome> {
    if !qq1_feasible(&p.a1) {
        return Ok(Qq2Outcome::Infeasible {
            reason: "q1(x) = 1 has no solution".into(),
        });
    }
    let report = check_assumptions(p, &opts.pencil).map_err(|e| e.at("assumptions"))?;
    let [lo, hi] = report.q2_range;
    if report.c2.is_none() && lo > 1.0 + WITNESS_MARGIN {
        return Ok(Qq2Outcome::Infeasible {
            reason: format!("q2 ≥ {lo} > 1 on {{q1 = 1}}"),
        });
    }
    if p.mode == Mode::Equality && report.c3.is_none() && hi < 1.0 - WITNESS_MARGIN {
        return Ok(Qq2Outcome::Infeasible {
            reason: format!("q2 ≤ {hi} < 1 on {{q1 = 1}}"),
        });
    }
    if !report.holds(p.mode) {
        return Ok(Qq2Outcome::AssumptionFailure(report));
    }
    let direction = match p.mode {
        Mode::Inequality => report.c1_nonnegative.or(report.c1),
        Mode::Equality => report.c1,
    }
    .expect("checked by holds");
    let dual = match solve_dual_with(
        p,
        &DualOptions {
            max_iter: opts.max_iter,
            gap_tol: 1e-9,
            direction,
        },
    ) {
        Ok(d) => d,
        Err(Error::UnboundedDual) => {
            return Ok(Qq2Outcome::Infeasible {
                reason: "dual objective is unbounded".into(),
            })
        }
        Err(e) => return Err(e.at("dual")),
    };
    let recovered = recover_primal(p, dual.alpha, dual.beta, &opts.tol, opts.seed).map(|x| {
        let (a, b) = refine_multipliers(p, &x, dual.alpha, dual.beta, &opts.tol);
        (x, a, b)
    });
    let first = match &recovered {
        Ok((x, a, b)) => Some(verify_global_certificate(p, x, *a, *b, &opts.tol)?),
        Err(_) => None,
    };
    let (x, alpha, beta, check) = match (recovered, first) {
        (Ok((x, a, b)), Some(c)) if c.pass => (x, a, b, c),
        (rec, first) => match polish_from_spectrum(p, dual.alpha, dual.beta, &opts.tol) {
            Some((x, a, b)) => {
                let c = verify_global_certificate(p, &x, a, b, &opts.tol)?;
                (x, a, b, c)
            }
            None => match (rec, first) {
                (Ok((x, a, b)), Some(c)) => (x, a, b, c),
                (Err(e), _) => return Err(e.at("recovery")),
                (Ok(_), None) => unreachable!("verified whenever recovery succeeds"),
            },
        },
    };
    let (x, alpha, beta, check) = polish_accepted(p, x, alpha, beta, check, &opts.tol)?;
    if !check.pass {
        return Err(Error::Contradiction(format!(
            "recovered point fails the certificate (stationarity {:.3e}, q1 {}, q2 {}, λ_min(G) {:.3e})",
            check.stationarity_residual, check.q1, check.q2, check.lambda_min_g
        ))
        .at("verify"));
    }
    Ok(Qq2Outcome::Global(GlobalCertificate {
        x_star: vec_of(&x),
        alpha,
        beta,
        value: p.q0(&x),
        dual_value: dual.dual_value,
        lambda_min_g: check.lambda_min_g,
        check,
        dual_iterations: dual.trace.iterations,
    }))
}

/// Gauss-Newton on `Gx = 0`, `q1(x) = 1` and `q2(x) = 1` (with `β` frozen
/// when the second constraint is inactive) in the unknowns `(x, α, β)`.
///
/// The dual value is accurate to the cutting-plane gap, but the dual point
/// itself only to roughly its square root, which can leave the null vector
/// of `G` visibly off the `q2 = 1` level set.
pub fn polish_kkt(
    p: &Qq2Problem,
    x0: &Vector,
    alpha: f64,
    beta: f64,
    active: bool,
) -> Option<(Vector, f64, f64)> {
    let n = p.dim();
    let k = if active { 2 } else { 1 };
    let (mut x, mut a, mut b) = (x0.clone(), alpha, beta);
    let scale = p.scale_at(alpha, beta);
    for _ in 0..50 {
        let g = p.lagrangian(a, b);
        let g1 = p.a1.apply(&x);
        let g2 = p.a2.apply(&x);
        let mut r = Vector::zeros(n + k);
        r.rows_mut(0, n).copy_from(&g.apply(&x));
        r[n] = g1.dot(&x) - 1.0;
        if active {
            r[n + 1] = g2.dot(&x) - 1.0;
        }
        if r.norm() <= 1e-15 * scale * x.norm().max(1.0) {
            break;
        }
        let mut j = Matrix::zeros(n + k, n + k);
        j.view_mut((0, 0), (n, n)).copy_from(g.as_matrix());
        j.view_mut((0, n), (n, 1)).copy_from(&g1);
        j.view_mut((n, 0), (1, n))
            .copy_from(&(g1.transpose() * 2.0));
        if active {
            j.view_mut((0, n + 1), (n, 1)).copy_from(&g2);
            j.view_mut((n + 1, 0), (1, n))
                .copy_from(&(g2.transpose() * 2.0));
        }
        let svd = j.svd(true, true);
        let eps = 1e-13 * svd.singular_values.max();
        let step = svd.solve(&r, eps).ok()?;
        x -= step.rows(0, n);
        a -= step[n];
        if active {
            b -= step[n + 1];
        }
        if !x.iter().all(|v| v.is_finite()) {
            return None;
        }
    }
    Some((x, a, b))
}

/// Polishes from the lowest eigenvectors of `G` and keeps the first result
/// that passes the certificate check. In inequality mode both the active
/// system and the one with `β = 0` are tried, since a small dual `β` does
/// not reveal which one holds.
fn polish_from_spectrum(
    p: &Qq2Problem,
    alpha: f64,
    beta: f64,
    tol: &Tolerances,
) -> Option<(Vector, f64, f64)> {
    let e = sym_eig(&p.lagrangian(alpha, beta)).ok()?;
    let modes: &[bool] = match p.mode {
        Mode::Equality => &[true],
        Mode::Inequality => &[true, false],
    };
    for &active in modes {
        for k in 0..e.values.len().min(3) {
            let v = e.vector(k);
            let q1 = p.a1.quad(&v);
            if q1 <= 0.0 {
                continue;
            }
            let b0 = if active { beta } else { 0.0 };
            let Some((x, a, b)) = polish_kkt(p, &(v / q1.sqrt()), alpha, b0, active) else {
                continue;
            };
            let check = verify_global_certificate(p, &x, a, b, tol).ok()?;
            if check.pass {
                return Some((x, a, b));
            }
        }
    }
    None
}

/// Newton polish of an accepted certificate. Scale-relative tolerances can
/// accept a point that is only accurate to about the square root of the dual
/// gap on badly scaled problems; the polished point replaces it when it also
/// certifies and is more stationary.
fn polish_accepted(
    p: &Qq2Problem,
    x: Vector,
    alpha: f64,
    beta: f64,
    check: CertificateCheck,
    tol: &Tolerances,
) -> Result<(Vector, f64, f64, CertificateCheck)> {
    if !check.pass {
        return Ok((x, alpha, beta, check));
    }
    let residual = |c: &CertificateCheck| c.stationarity_residual + c.complementarity_residual;
    let mut best = (x.clone(), alpha, beta, check);
    let systems: &[(bool, f64)] = match p.mode {
        Mode::Equality => &[(true, beta)],
        Mode::Inequality => &[(true, beta), (false, 0.0)],
    };
    for &(active, b0) in systems {
        if let Some((y, a, b)) = polish_kkt(p, &x, alpha, b0, active) {
            let c = verify_global_certificate(p, &y, a, b, tol)?;
            if c.pass && residual(&c) < residual(&best.3) {
                best = (y, a, b, c);
            }
        }
    }
    Ok(best)
}

/// Least-squares multipliers at `x`, kept only if they still certify.
fn refine_multipliers(
    p: &Qq2Problem,
    x: &Vector,
    alpha: f64,
    beta: f64,
    tol: &Tolerances,
) -> (f64, f64) {
    let g1 = p.a1.apply(x);
    let g2 = p.a2.apply(x);
    let rhs = -p.a0.apply(x);
    let active = p.mode == Mode::Equality || beta > tol.psd * p.scale_at(alpha, beta);
    let cand = if active {
        let j = Matrix::from_columns(&[g1, g2]);
        let gram = j.transpose() * &j;
        match gram.clone().try_inverse() {
            Some(inv) if gram.determinant().abs() > 1e-12 * gram.norm().powi(2) => {
                let ab = inv * (j.transpose() * rhs);
                (ab[0], ab[1])
            }
            _ => return (alpha, beta),
        }
    } else {
        (g1.dot(&rhs) / g1.norm_squared(), 0.0)
    };
    let keeps_sign = p.mode == Mode::Equality || cand.1 >= 0.0;
    let psd =
        p.lagrangian(cand.0, cand.1).lambda_min().0 >= -tol.psd * 1e-2 * p.scale_at(cand.0, cand.1);
    if keeps_sign && psd {
        cand
    } else {
        (alpha, beta)
    }
}

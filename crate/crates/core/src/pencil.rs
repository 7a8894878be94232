//! Definite-pencil searches and simultaneous congruence diagonalization.
//!
//! `μ ↦ λ_min(A + μB)` is concave (a pointwise minimum of affine functions
//! `μ ↦ vᵀAv + μ vᵀBv` over unit `v`), so the one-parameter search is a
//! bracketing + golden-section maximization. The two-parameter search runs
//! on the unit circle, where the set of valid directions is an open arc.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inv_sqrt, sym_eig, zero_threshold, Matrix, SymMat, DEFAULT_TOL};
use crate::par::{map_indexed, Execution};

/// Fixed golden-section budget for every 1-D search.
pub const GOLDEN_ITERS: usize = 200;
/// Default angular grid size for the two-parameter search (0.5° spacing).
pub const DEFAULT_PENCIL_GRID: usize = 720;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
/// Returns the best abscissa visited and its value.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for _ in 0..iters {
        if hi - lo <= f64::EPSILON * (lo.abs() + hi.abs()).max(1e-300) {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
            if f1 > best.1 {
                best = (x1, f1);
            }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
            if f2 > best.1 {
                best = (x2, f2);
            }
        }
    }
    best
}

/// Coefficients `μ` and the smallest eigenvalue achieved by `Σ μᵢ Mᵢ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PencilCertificate {
    pub mu: Vec<f64>,
    pub lambda_min_achieved: f64,
}

impl PencilCertificate {
    /// Re-evaluates `λ_min(Σ μᵢ Mᵢ)`.
    pub fn reevaluate(&self, mats: &[&SymMat]) -> f64 {
        let terms: Vec<(f64, &SymMat)> =
            self.mu.iter().copied().zip(mats.iter().copied()).collect();
        SymMat::lincomb(&terms).lambda_min().0
    }
}

fn check_dims(a: &SymMat, b: &SymMat) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// Maximizes the concave function `λ_min(A + μB)` over `μ`.
/// Returns `(μ, λ_min)`; `μ` may be large when the supremum is approached
/// only asymptotically.
pub fn maximize_shift(a: &SymMat, b: &SymMat) -> Result<(f64, f64)> {
    check_dims(a, b)?;
    let f = |mu: f64| SymMat::lincomb(&[(1.0, a), (mu, b)]).lambda_min().0;
    let nb = b.norm();
    if nb == 0.0 {
        return Ok((0.0, f(0.0)));
    }
    let h = a.norm().max(1.0) / nb;
    let f0 = f(0.0);
    let fp = f(h);
    let fm = f(-h);
    let (lo, hi) = if fp <= f0 && fm <= f0 {
        (-h, h)
    } else {
        let dir = if fp > f0 { 1.0 } else { -1.0 };
        // Expand until the function turns down.
        let mut prev = 0.0;
        let mut cur = dir * h;
        let mut fcur = if dir > 0.0 { fp } else { fm };
        let mut step = h;
        let mut bracket = None;
        for _ in 0..60 {
            step *= 2.0;
            let next = cur + dir * step;
            let fnext = f(next);
            if fnext <= fcur {
                bracket = Some(if dir > 0.0 {
                    (prev, next)
                } else {
                    (next, prev)
                });
                break;
            }
            prev = cur;
            cur = next;
            fcur = fnext;
        }
        match bracket {
            Some(b) => b,
            // Still increasing after 2^60 h: supremum at infinity.
            None => return Ok((cur, fcur)),
        }
    };
    Ok(golden_max(f, lo, hi, GOLDEN_ITERS))
}

/// Finds `μ` with `A + μB ≻ 0` (near the maximizer of `λ_min`), or `None`
/// when the maximized `λ_min` is not positive. The certificate carries the
/// coefficients `(1, μ)` on `(A, B)`.
pub fn find_definite_shift(a: &SymMat, b: &SymMat) -> Result<Option<(f64, PencilCertificate)>> {
    let (mu, lmin) = maximize_shift(a, b)?;
    let thr = 1e-12 * (a.norm() + mu.abs() * b.norm()).max(1.0);
    if lmin > thr {
        Ok(Some((
            mu,
            PencilCertificate {
                mu: vec![1.0, mu],
                lambda_min_achieved: lmin,
            },
        )))
    } else {
        Ok(None)
    }
}

/// Outcome of the two-parameter definite-pencil search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PencilSearch {
    /// Unit direction `μ` with `λ_min(μ₁A₁ + μ₂A₂) > 0`.
    Found(PencilCertificate),
    /// No direction found at this grid resolution; nonexistence not proven.
    NotFound {
        resolution: usize,
        best_lambda_min: f64,
    },
    /// Provably none: the grid maximum plus the Lipschitz slack over half a
    /// grid cell is still negative.
    None { best_lambda_min: f64, margin: f64 },
}

impl PencilSearch {
    pub fn found(&self) -> Option<&PencilCertificate> {
        match self {
            PencilSearch::Found(c) => Some(c),
            _ => None,
        }
    }

    pub fn direction(&self) -> Option<[f64; 2]> {
        self.found().map(|c| [c.mu[0], c.mu[1]])
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PencilOptions {
    pub resolution: usize,
    /// Restrict the search to `μ₂ ≥ 0` (half circle).
    pub nonnegative_second: bool,
    pub exec: Execution,
}

impl Default for PencilOptions {
    fn default() -> Self {
        PencilOptions {
            resolution: DEFAULT_PENCIL_GRID,
            nonnegative_second: false,
            exec: Execution::Sequential,
        }
    }
}

pub fn find_definite_pencil2(a1: &SymMat, a2: &SymMat) -> Result<PencilSearch> {
    find_definite_pencil2_with(a1, a2, &PencilOptions::default())
}

pub fn find_definite_pencil2_with(
    a1: &SymMat,
    a2: &SymMat,
    opts: &PencilOptions,
) -> Result<PencilSearch> {
    check_dims(a1, a2)?;
    let k = opts.resolution.max(8);
    let span = if opts.nonnegative_second {
        std::f64::consts::PI
    } else {
        2.0 * std::f64::consts::PI
    };
    let f = |theta: f64| {
        SymMat::lincomb(&[(theta.cos(), a1), (theta.sin(), a2)])
            .lambda_min()
            .0
    };
    let npts = if opts.nonnegative_second {
        k / 2 + 1
    } else {
        k
    };
    let h = 2.0 * std::f64::consts::PI / k as f64;
    let vals = map_indexed(opts.exec, npts, |i| f(h * i as f64));
    let (best_i, best_v) =
        vals.iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
            );

    let (mut lo, mut hi) = (h * best_i as f64 - h, h * best_i as f64 + h);
    if opts.nonnegative_second {
        lo = lo.max(0.0);
        hi = hi.min(span);
    }
    let (theta_r, v_r) = golden_max(f, lo, hi, GOLDEN_ITERS);
    let (theta, lmin) = if v_r > best_v {
        (theta_r, v_r)
    } else {
        (h * best_i as f64, best_v)
    };

    let thr = 1e-12 * (a1.norm() + a2.norm()).max(1.0);
    if lmin > thr {
        return Ok(PencilSearch::Found(PencilCertificate {
            mu: vec![theta.cos(), theta.sin()],
            lambda_min_achieved: lmin,
        }));
    }
    // |d/dθ λ_min| ≤ ‖−sinθ A1 + cosθ A2‖ ≤ sqrt(‖A1‖² + ‖A2‖²).
    let lip = (a1.norm().powi(2) + a2.norm().powi(2)).sqrt();
    let margin = lip * h / 2.0;
    if best_v + margin < 0.0 {
        Ok(PencilSearch::None {
            best_lambda_min: lmin,
            margin,
        })
    } else {
        Ok(PencilSearch::NotFound {
            resolution: k,
            best_lambda_min: lmin,
        })
    }
}

/// Congruence `P` with `Pᵀ(μ₁A₁+μ₂A₂)P = I`, `PᵀA₂P = diag(d2)` and
/// `PᵀA₁P = diag(d1)`.
#[derive(Debug, Clone)]
pub struct Congruence {
    pub p: Matrix,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

pub fn congruence_diagonalize(a1: &SymMat, a2: &SymMat, mu: [f64; 2]) -> Result<Congruence> {
    check_dims(a1, a2)?;
    let m = SymMat::lincomb(&[(mu[0], a1), (mu[1], a2)]);
    let (lmin, _) = m.lambda_min();
    if lmin <= zero_threshold(&m, DEFAULT_TOL) {
        return Err(Error::PencilNotDefinite);
    }
    let r = inv_sqrt(&m)?;
    let c = a2.congruence(&r);
    let e = sym_eig(&c)?;
    let p = r * &e.vectors;
    let d2 = e.values.clone();
    let mnorm = (mu[0] * mu[0] + mu[1] * mu[1]).sqrt();
    let d1 = if mu[0].abs() >= 1e-3 * mnorm {
        d2.iter().map(|d| (1.0 - mu[1] * d) / mu[0]).collect()
    } else {
        let t = a1.congruence(&p);
        (0..t.dim()).map(|i| t.get(i, i)).collect()
    };
    Ok(Congruence { p, d1, d2 })
}

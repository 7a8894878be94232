//! Riemannian projected-gradient descent of a quadratic form on the
//! manifold `{x : xᵀCᵢx = 1 for every constraint i}`.
//!
//! The retraction is a minimum-norm Newton projection along the span of the
//! constraint gradients `Cᵢx`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{SymMat, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentOptions {
    pub max_iter: usize,
    /// Stop when the projected gradient norm is below `tol * max(1, ‖A0‖)`.
    pub tol: f64,
    pub initial_step: f64,
    pub shrink: f64,
    /// Armijo sufficient-decrease constant.
    pub slope: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        DescentOptions {
            max_iter: 20_000,
            tol: 1e-9,
            initial_step: 1.0,
            shrink: 0.5,
            slope: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentResult {
    pub x: Vector,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

const PROJ_ITERS: usize = 60;
const PROJ_TOL: f64 = 1e-14;

/// Minimize `xᵀA0x` subject to `xᵀCᵢx = 1`.
#[derive(Debug, Clone, Copy)]
pub struct QuadManifold<'a> {
    pub objective: &'a SymMat,
    pub constraints: &'a [&'a SymMat],
}

impl<'a> QuadManifold<'a> {
    pub fn new(objective: &'a SymMat, constraints: &'a [&'a SymMat]) -> Self {
        QuadManifold {
            objective,
            constraints,
        }
    }

    pub fn residuals(&self, x: &Vector) -> Vec<f64> {
        self.constraints.iter().map(|c| c.quad(x) - 1.0).collect()
    }

    fn jacobian(&self, x: &Vector) -> DMatrix<f64> {
        let rows: Vec<Vector> = self.constraints.iter().map(|c| c.apply(x) * 2.0).collect();
        DMatrix::from_fn(rows.len(), x.len(), |i, j| rows[i][j])
    }

    /// Newton projection onto the manifold; `None` when it stalls or the
    /// constraint gradients become dependent.
    pub fn project(&self, x: &Vector) -> Option<Vector> {
        let mut y = x.clone();
        let start_norm = x.norm().max(1.0);
        for _ in 0..PROJ_ITERS {
            let r = Vector::from_vec(self.residuals(&y));
            if r.amax() <= PROJ_TOL {
                return Some(y);
            }
            let j = self.jacobian(&y);
            let jjt = &j * j.transpose();
            let step = jjt.cholesky()?.solve(&r);
            y -= j.transpose() * step;
            if !y.iter().all(|v| v.is_finite()) || y.norm() > 1e6 * start_norm {
                return None;
            }
        }
        let r = Vector::from_vec(self.residuals(&y));
        (r.amax() <= 1e-11).then_some(y)
    }

    /// Orthogonal projection of `g` onto the tangent space at `x`.
    pub fn tangent(&self, x: &Vector, g: &Vector) -> Option<Vector> {
        let j = self.jacobian(x);
        let jjt = &j * j.transpose();
        let coef = jjt.cholesky()?.solve(&(&j * g));
        Some(g - j.transpose() * coef)
    }

    pub fn riemannian_gradient(&self, x: &Vector) -> Option<Vector> {
        self.tangent(x, &(self.objective.apply(x) * 2.0))
    }

    /// Armijo descent with Barzilai–Borwein trial steps.
    pub fn descend(&self, x0: &Vector, opts: &DescentOptions) -> Option<DescentResult> {
        let mut x = self.project(x0)?;
        let mut f = self.objective.quad(&x);
        let stop = opts.tol * self.objective.norm().max(1.0);
        let mut prev: Option<(Vector, Vector)> = None;
        let mut g = self.riemannian_gradient(&x)?;
        for it in 0..opts.max_iter {
            let gn = g.norm();
            if gn <= stop {
                return Some(DescentResult {
                    x,
                    value: f,
                    grad_norm: gn,
                    iterations: it,
                    converged: true,
                });
            }
            let mut t = match &prev {
                Some((xp, gp)) => {
                    let s = &x - xp;
                    let y = &g - gp;
                    let sy = s.dot(&y);
                    if sy.abs() > 1e-300 {
                        (s.norm_squared() / sy).abs().clamp(1e-10, 1e10)
                    } else {
                        opts.initial_step
                    }
                }
                None => opts.initial_step / gn.max(1.0),
            };
            let mut accepted = None;
            for _ in 0..60 {
                if let Some(xn) = self.project(&(&x - &g * t)) {
                    let fnew = self.objective.quad(&xn);
                    if fnew <= f - opts.slope * t * gn * gn {
                        accepted = Some((xn, fnew));
                        break;
                    }
                }
                t *= opts.shrink;
            }
            let Some((xn, fnew)) = accepted else {
                // No decrease representable in floating point: stationary to
                // working precision.
                return Some(DescentResult {
                    x,
                    value: f,
                    grad_norm: gn,
                    iterations: it,
                    converged: gn <= stop.sqrt() * 1e-2,
                });
            };
            let gnew = self.riemannian_gradient(&xn)?;
            prev = Some((x, g));
            x = xn;
            f = fnew;
            g = gnew;
        }
        let gn = g.norm();
        Some(DescentResult {
            x,
            value: f,
            grad_norm: gn,
            iterations: opts.max_iter,
            converged: gn <= stop,
        })
    }

    /// A random point projected onto the manifold; retries up to `tries`
    /// Gaussian draws.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R, tries: usize) -> Option<Vector> {
        let n = self.objective.dim();
        for _ in 0..tries {
            let v = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
            if let Some(x) = self.project(&v) {
                return Some(x);
            }
        }
        None
    }
}

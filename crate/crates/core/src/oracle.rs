//! Brute-force checks for small dimensions: global value by enumerating a
//! grid of unit directions, random feasible-neighborhood probes, and
//! finite-difference gradient checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{SymMat, Vector};
use crate::manifold::QuadManifold;
use crate::par::{map_indexed, Execution};
use crate::qq2::{Mode, Qq2Problem};

pub const MAX_ORACLE_DIM: usize = 4;
/// Absolute tolerance on `q2 ≤ 1` in inequality mode.
pub const ORACLE_FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub value: f64,
    pub argmin_direction: Vec<f64>,
    /// `argmin_direction` scaled onto `q1 = 1`.
    pub argmin_point: Vec<f64>,
    pub n_feasible_samples: usize,
    pub n_samples: usize,
    pub resolution: f64,
    /// Steps per angle; the angular spacing is `π / steps`.
    pub steps: usize,
    /// Heuristic bound `2·L·δ` on the objective gap, with `δ` the covering
    /// radius of the grid and `L` a Lipschitz constant of `q0/q1` on the
    /// sphere near the minimizer. Not a certified bound.
    pub error_bound: f64,
}

/// Hyperspherical grid over a hemisphere of `S^{n−1}`: polar angles
/// `k·π/N`, `k = 0..=N`, and the last angle `k·π/N`, `k = 0..N`. Doubling
/// `N` refines the grid to a superset.
#[derive(Debug, Clone, Copy)]
struct HemisphereGrid {
    n: usize,
    steps: usize,
}

impl HemisphereGrid {
    fn len(&self) -> usize {
        (self.steps + 1).pow((self.n - 2) as u32) * self.steps
    }

    /// Number of slices along the first angle (the unit of parallel work).
    fn outer(&self) -> usize {
        if self.n == 2 {
            self.steps
        } else {
            self.steps + 1
        }
    }

    fn direction(&self, mut idx: usize, d: &mut [f64; MAX_ORACLE_DIM]) {
        let h = std::f64::consts::PI / self.steps as f64;
        let n = self.n;
        let mut angles = [0.0; MAX_ORACLE_DIM];
        let last = idx % self.steps;
        idx /= self.steps;
        angles[n - 2] = last as f64 * h;
        for k in (0..n - 2).rev() {
            angles[k] = (idx % (self.steps + 1)) as f64 * h;
            idx /= self.steps + 1;
        }
        let mut s = 1.0;
        for k in 0..n - 1 {
            d[k] = s * angles[k].cos();
            s *= angles[k].sin();
        }
        d[n - 1] = s;
    }
}

fn dense(m: &SymMat) -> [[f64; MAX_ORACLE_DIM]; MAX_ORACLE_DIM] {
    let mut out = [[0.0; MAX_ORACLE_DIM]; MAX_ORACLE_DIM];
    for (i, row) in out.iter_mut().enumerate().take(m.dim()) {
        for (j, v) in row.iter_mut().enumerate().take(m.dim()) {
            *v = m.get(i, j);
        }
    }
    out
}

fn quad(m: &[[f64; MAX_ORACLE_DIM]; MAX_ORACLE_DIM], d: &[f64; MAX_ORACLE_DIM], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        let mut r = 0.0;
        for j in 0..n {
            r += m[i][j] * d[j];
        }
        s += d[i] * r;
    }
    s
}

/// Minimum of `q0` over the grid directions scaled onto `q1 = 1` that meet
/// the second constraint (within `ORACLE_FEAS_TOL` in inequality mode,
/// within the band `10·resolution·‖A2‖` in equality mode).
pub fn oracle_global(p: &Qq2Problem, resolution: f64, exec: Execution) -> Result<OracleReport> {
    let n = p.dim();
    if !(2..=MAX_ORACLE_DIM).contains(&n) {
        return Err(Error::InvalidInput(format!(
            "oracle supports 2 ≤ n ≤ {MAX_ORACLE_DIM}, got {n}"
        )));
    }
    if !(resolution > 0.0 && resolution < 1.0) {
        return Err(Error::InvalidInput(format!(
            "resolution must lie in (0, 1), got {resolution}"
        )));
    }
    let steps = (std::f64::consts::PI / resolution).round().max(2.0) as usize;
    oracle_global_steps(p, steps, exec)
}

/// [`oracle_global`] with the number of steps per angle given directly.
pub fn oracle_global_steps(p: &Qq2Problem, steps: usize, exec: Execution) -> Result<OracleReport> {
    let n = p.dim();
    if !(2..=MAX_ORACLE_DIM).contains(&n) {
        return Err(Error::InvalidInput(format!(
            "oracle supports 2 ≤ n ≤ {MAX_ORACLE_DIM}, got {n}"
        )));
    }
    let resolution = std::f64::consts::PI / steps as f64;
    let grid = HemisphereGrid { n, steps };
    let (m0, m1, m2) = (dense(&p.a0), dense(&p.a1), dense(&p.a2));
    let pos_tol = 1e-12 * p.a1.norm().max(1.0);
    let band = match p.mode {
        Mode::Inequality => ORACLE_FEAS_TOL,
        Mode::Equality => 10.0 * resolution * p.a2.norm().max(f64::MIN_POSITIVE),
    };
    let feasible = |q2: f64| match p.mode {
        Mode::Inequality => q2 <= 1.0 + band,
        Mode::Equality => (q2 - 1.0).abs() <= band,
    };
    let outer = grid.outer();
    let per = grid.len() / outer;
    let slices: Vec<(Option<(f64, usize)>, usize)> = map_indexed(exec, outer, |o| {
        let mut best: Option<(f64, usize)> = None;
        let mut count = 0;
        let mut d = [0.0; MAX_ORACLE_DIM];
        for idx in o * per..(o + 1) * per {
            grid.direction(idx, &mut d);
            let a1 = quad(&m1, &d, n);
            if a1 <= pos_tol {
                continue;
            }
            if !feasible(quad(&m2, &d, n) / a1) {
                continue;
            }
            count += 1;
            let v = quad(&m0, &d, n) / a1;
            if best.is_none_or(|(b, _)| v < b) {
                best = Some((v, idx));
            }
        }
        (best, count)
    });
    let mut best: Option<(f64, usize)> = None;
    let mut n_feasible = 0;
    for (b, c) in slices {
        n_feasible += c;
        if let Some((v, i)) = b {
            if best.is_none_or(|(bv, _)| v < bv) {
                best = Some((v, i));
            }
        }
    }
    let Some((_, idx)) = best else {
        return Err(Error::InvalidInput(format!(
            "no feasible grid direction at resolution {resolution:.3e}: the problem may be infeasible or the grid too coarse"
        )));
    };
    let mut d = [0.0; MAX_ORACLE_DIM];
    grid.direction(idx, &mut d);
    let dir = Vector::from_column_slice(&d[..n]);
    let a1 = p.a1.quad(&dir);
    let x = &dir / a1.sqrt();
    let value = p.q0(&x);
    if (p.q1(&x) - 1.0).abs() > 1e-9 || !feasible(p.q2(&x)) {
        return Err(Error::Contradiction(
            "oracle minimizer fails re-validation".into(),
        ));
    }
    let ratio = p.a0.norm() / a1;
    let lip = 2.0 * ratio * (1.0 + p.a1.norm() / a1);
    let delta = resolution * ((n - 1) as f64).sqrt() / 2.0;
    Ok(OracleReport {
        value,
        argmin_direction: d[..n].to_vec(),
        argmin_point: x.iter().copied().collect(),
        n_feasible_samples: n_feasible,
        n_samples: grid.len(),
        resolution,
        steps,
        error_bound: 2.0 * lip * delta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub is_local_min_at_resolution: bool,
    /// Largest `q0(x) − q0(x')` over the feasible samples `x'`.
    pub best_violation: f64,
    pub best_point: Option<Vec<f64>>,
    pub n_feasible: usize,
    pub retraction_failures: usize,
}

pub const PROBE_DESCENT_TOL: f64 = 1e-9;

/// Random feasible points near `x`: tangent steps of length log-uniform in
/// `[radius·1e-3, radius]` retracted onto `{q1 = 1, q2 = 1}`, and in
/// inequality mode also onto `{q1 = 1}` keeping those with `q2 ≤ 1`.
pub fn oracle_local_probe(
    p: &Qq2Problem,
    x: &Vector,
    radius: f64,
    n_samples: usize,
    seed: u64,
) -> Result<ProbeReport> {
    p.check_point(x)?;
    let q1 = p.q1(x);
    let q2 = p.q2(x);
    let bad_q2 = match p.mode {
        Mode::Inequality => q2 > 1.0 + 1e-8,
        Mode::Equality => (q2 - 1.0).abs() > 1e-8,
    };
    if (q1 - 1.0).abs() > 1e-8 || bad_q2 {
        return Err(Error::InfeasiblePoint(format!("q1 = {q1}, q2 = {q2}")));
    }
    let both = [&p.a1, &p.a2];
    let first = [&p.a1];
    let on_boundary = (q2 - 1.0).abs() <= 1e-8;
    let m_both = QuadManifold::new(&p.a0, &both);
    let m_first = QuadManifold::new(&p.a0, &first);
    let f0 = p.q0(x);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.dim();
    let mut best_violation = f64::NEG_INFINITY;
    let mut best_point = None;
    let mut n_feasible = 0;
    let mut failures = 0;
    for k in 0..n_samples {
        let use_both = match p.mode {
            Mode::Equality => true,
            Mode::Inequality => on_boundary && k % 2 == 0,
        };
        let m = if use_both { &m_both } else { &m_first };
        let g = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let Some(t) = m.tangent(x, &g) else {
            failures += 1;
            continue;
        };
        let tn = t.norm();
        if tn == 0.0 {
            failures += 1;
            continue;
        }
        let r = radius * 10f64.powf(-3.0 * rng.random::<f64>());
        let Some(xn) = m.project(&(x + t * (r / tn))) else {
            failures += 1;
            continue;
        };
        if (&xn - x).norm() > 2.0 * radius {
            failures += 1;
            continue;
        }
        if !use_both && p.q2(&xn) > 1.0 + 1e-12 {
            continue;
        }
        n_feasible += 1;
        let v = f0 - p.q0(&xn);
        if v > best_violation {
            best_violation = v;
            best_point = Some(xn.iter().copied().collect());
        }
    }
    Ok(ProbeReport {
        is_local_min_at_resolution: n_feasible > 0 && best_violation <= PROBE_DESCENT_TOL,
        best_violation,
        best_point,
        n_feasible,
        retraction_failures: failures,
    })
}

/// Largest relative error between the analytic gradients `2Aᵢx` and
/// central differences with step `1e-5·max(1, ‖x‖)`.
pub fn fd_check(p: &Qq2Problem, x: &Vector) -> Result<f64> {
    p.check_point(x)?;
    let n = p.dim();
    let h = 1e-5 * x.norm().max(1.0);
    let mut worst: f64 = 0.0;
    for m in [&p.a0, &p.a1, &p.a2] {
        let analytic = m.apply(x) * 2.0;
        let mut fd = Vector::zeros(n);
        for i in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            fd[i] = (m.quad(&xp) - m.quad(&xm)) / (2.0 * h);
        }
        let err = (&analytic - &fd).norm() / analytic.norm().max(m.norm()).max(1.0);
        worst = worst.max(err);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_directions_are_unit_and_nested() {
        let g = HemisphereGrid { n: 4, steps: 6 };
        let g2 = HemisphereGrid { n: 4, steps: 12 };
        let mut d = [0.0; 4];
        let mut fine = Vec::new();
        for i in 0..g2.len() {
            g2.direction(i, &mut d);
            fine.push(d);
        }
        for i in 0..g.len() {
            g.direction(i, &mut d);
            let norm: f64 = d.iter().map(|v| v * v).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            assert!(fine
                .iter()
                .any(|f| f.iter().zip(&d).all(|(a, b)| (a - b).abs() < 1e-12)));
        }
    }

    #[test]
    fn identity_instance_value() {
        let id = SymMat::identity(3);
        let p = Qq2Problem::new(id.clone(), id.clone(), id, Mode::Inequality).unwrap();
        let r = oracle_global(&p, 0.05, Execution::Sequential).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let a0 = SymMat::from_rows(&[
            vec![0.0, 0.5, 0.0],
            vec![0.5, 0.0, 1.5],
            vec![0.0, 1.5, 0.0],
        ])
        .unwrap();
        let p = Qq2Problem::new(
            a0,
            SymMat::identity(3),
            SymMat::from_diagonal(&[-20.0, 0.0, 10.0]).unwrap(),
            Mode::Inequality,
        )
        .unwrap();
        let a = oracle_global(&p, 0.01, Execution::Sequential).unwrap();
        let b = oracle_global(&p, 0.01, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn finite_differences_are_exact_for_quadratics() {
        let a0 = SymMat::from_rows(&[
            vec![1.0, 2.0, 0.0],
            vec![2.0, -1.0, 0.5],
            vec![0.0, 0.5, 3.0],
        ])
        .unwrap();
        let p = Qq2Problem::new(
            a0,
            SymMat::identity(3),
            SymMat::identity(3),
            Mode::Inequality,
        )
        .unwrap();
        assert!(fd_check(&p, &Vector::from_vec(vec![0.3, -1.2, 2.0])).unwrap() < 1e-8);
        assert!(fd_check(&p, &Vector::zeros(3)).unwrap() < 1e-12);
    }
}

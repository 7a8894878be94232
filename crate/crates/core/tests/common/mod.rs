#![allow(dead_code)]

use hqcqp::qq2::{Mode, Qq2Problem};
use hqcqp::{Matrix, SymMat, Vector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn diag(d: &[f64]) -> SymMat {
    SymMat::from_diagonal(d).unwrap()
}

/// q0 = x1x2 + 3x2x3, q1 = ‖x‖², q2 = −20x1² + 10x3².
pub fn curve_problem(mode: Mode) -> Qq2Problem {
    let a0 = SymMat::from_rows(&[
        vec![0.0, 0.5, 0.0],
        vec![0.5, 0.0, 1.5],
        vec![0.0, 1.5, 0.0],
    ])
    .unwrap();
    Qq2Problem::new(a0, SymMat::identity(3), diag(&[-20.0, 0.0, 10.0]), mode).unwrap()
}

/// Points of {q1 = 1, q2 = 1}: (t, ±√(0.9 − 3t²), √(0.1 + 2t²)).
pub fn curve_point(t: f64, branch: f64) -> Vector {
    Vector::from_vec(vec![
        t,
        branch * (0.9 - 3.0 * t * t).sqrt(),
        (0.1 + 2.0 * t * t).sqrt(),
    ])
}

/// q0 = −√2x1² + x1x2, q1 = ‖x‖², q2 = 2x1² + x2²/2 + x3².
pub fn flat_problem() -> Qq2Problem {
    let s2 = 2f64.sqrt();
    let a0 = SymMat::from_rows(&[
        vec![-s2, 0.5, 0.0],
        vec![0.5, 0.0, 0.0],
        vec![0.0, 0.0, 0.0],
    ])
    .unwrap();
    Qq2Problem::new(
        a0,
        SymMat::identity(3),
        diag(&[2.0, 0.5, 1.0]),
        Mode::Inequality,
    )
    .unwrap()
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
    Matrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> SymMat {
    let g = gaussian_matrix(rng, n, n);
    SymMat::new((&g + g.transpose()) * 0.5).unwrap()
}

pub fn random_pd(rng: &mut ChaCha8Rng, n: usize) -> SymMat {
    let g = gaussian_matrix(rng, n, n);
    SymMat::new(&g * g.transpose() / n as f64 + Matrix::identity(n, n) * 0.5).unwrap()
}

/// `A1 ≻ 0` (compact feasible set) and a second constraint whose smallest
/// generalized eigenvalue against `A1` is below 1, so a point with
/// `q1 = 1, q2 < 1` exists.
pub fn random_compact_instance(rng: &mut ChaCha8Rng, n: usize) -> Qq2Problem {
    let a0 = random_sym(rng, n);
    let a1 = random_pd(rng, n);
    let mut a2 = random_sym(rng, n).scale(2.0);
    let lmin = hqcqp::qq1::solve_rq(&a2, &a1).unwrap().0;
    let target = rng.random_range(-1.0..0.8);
    a2 = SymMat::lincomb(&[(1.0, &a2), (target - lmin, &a1)]);
    Qq2Problem::new(a0, a1, a2, Mode::Inequality).unwrap()
}

/// Random invertible matrix with condition number at most `cond`.
pub fn random_conditioned(rng: &mut ChaCha8Rng, n: usize, cond: f64) -> Matrix {
    let q1 = gaussian_matrix(rng, n, n).qr().q();
    let q2 = gaussian_matrix(rng, n, n).qr().q();
    let s = Vector::from_fn(n, |i, _| {
        if n == 1 {
            1.0
        } else {
            cond.powf(i as f64 / (n - 1) as f64)
        }
    });
    q1 * Matrix::from_diagonal(&s) * q2
}

/// Equality-mode instance with `A1 ≻ 0` and the generalized spectrum of
/// `(A2, A1)` straddling 1, so both `q2 < 1` and `q2 > 1` occur on `q1 = 1`.
pub fn random_equality_instance(rng: &mut ChaCha8Rng, n: usize) -> Qq2Problem {
    let a0 = random_sym(rng, n);
    let a1 = random_pd(rng, n);
    let a2 = random_sym(rng, n);
    let lo = hqcqp::qq1::solve_rq(&a2, &a1).unwrap().0;
    let hi = -hqcqp::qq1::solve_rq(&a2.scale(-1.0), &a1).unwrap().0;
    let t = rng.random_range(0.15..0.85);
    // Affine map sending lo + t(hi − lo) to 1.
    let s = rng.random_range(0.5..3.0) / (hi - lo);
    let shift = 1.0 - s * (lo + t * (hi - lo));
    let a2 = SymMat::lincomb(&[(s, &a2), (shift, &a1)]);
    Qq2Problem::new(a0, a1, a2, Mode::Equality).unwrap()
}

/// Random symmetric `A1, A2` with `μ1A1 + μ2A2 = M ≻ 0` planted, scaled so
/// that a random `x0` has `q1(x0) = q2(x0) = 1`.
pub fn planted_definite_pencil(rng: &mut ChaCha8Rng, n: usize, mode: Mode) -> Qq2Problem {
    let x0 = gaussian_vector(rng, n).normalize();
    let a0 = random_sym(rng, n);
    let m = random_pd(rng, n);
    let mut a1 = random_sym(rng, n);
    let q1 = a1.quad(&x0);
    if q1.abs() < 0.1 {
        a1 = SymMat::lincomb(&[(1.0, &a1), (0.5 - q1, &SymMat::identity(n))]);
    }
    let q1 = a1.quad(&x0);
    a1 = a1.scale(1.0 / q1);
    let mx = m.quad(&x0);
    let mu1 = mx - rng.random_range(0.2..1.0) * mx.abs().max(1.0);
    let mu2 = mx - mu1;
    let a2 = SymMat::lincomb(&[(1.0 / mu2, &m), (-mu1 / mu2, &a1)]);
    Qq2Problem::new(a0, a1, a2, mode).unwrap()
}

/// Inequality-mode instance with a planted direction `d`, `d'A1d = 0`,
/// `d'A2d = −1`, along which the feasible set is unbounded.
pub fn planted_ray(rng: &mut ChaCha8Rng, n: usize) -> (Qq2Problem, Vector) {
    let u = gaussian_matrix(rng, n, n).qr().q();
    let mut ev: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..2.0)).collect();
    ev[1] = -ev[1];
    let a1 = SymMat::new(&u * Matrix::from_diagonal(&Vector::from_vec(ev.clone())) * u.transpose())
        .unwrap();
    let d = u.column(0) * (-ev[1]).sqrt() + u.column(1) * ev[0].sqrt();
    let d = d.normalize();
    let mut a2 = random_sym(rng, n);
    let dd = a2.quad(&d);
    a2 = SymMat::lincomb(&[
        (1.0, &a2),
        (-(dd + 1.0), &SymMat::new(&d * d.transpose()).unwrap()),
    ]);
    (
        Qq2Problem::new(random_sym(rng, n), a1, a2, Mode::Inequality).unwrap(),
        d,
    )
}

/// Feasible point `t·d + s·A1d` on `q1 = 1` with `s > 0` solving the
/// quadratic in `s`.
pub fn ray_point(p: &Qq2Problem, d: &Vector, t: f64) -> Vector {
    let w = p.a1.apply(d);
    let c = p.a1.bilinear(d, &w);
    let e = p.a1.quad(&w);
    // e s² + 2tc s − 1 = 0
    let b = 2.0 * t * c;
    let s = if e.abs() < 1e-14 {
        1.0 / b
    } else {
        let disc = (b * b + 4.0 * e).sqrt();
        2.0 / (b + b.signum() * disc)
    };
    d * t + w * s
}

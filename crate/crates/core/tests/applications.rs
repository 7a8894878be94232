mod common;

use common::*;
use hqcqp::etls::{charnes_cooper, classify_etls_point, solve_etls, EtlsProblem};
use hqcqp::manifold::DescentOptions;
use hqcqp::oracle::oracle_global;
use hqcqp::par::Execution;
use hqcqp::pencil::PencilOptions;
use hqcqp::qq1::{descend_qq1, solve_tls, Qq1Problem};
use hqcqp::qq2::global::{check_compactness, Compactness};
use hqcqp::qq2::local::{classify_point, Verdict};
use hqcqp::qq2::{Mode, Tolerances};
use hqcqp::trs::{
    check_sosc_at_global, find_trs_local_nonglobal, generate_trs_hard_case, homogenize_trs,
    solve_trs_global, trs_local_candidates, TrsProblem, DEFAULT_MU_GRID,
};
use hqcqp::{Matrix, SymMat, Vector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn lift(y: &Vector) -> Vector {
    let n = y.len();
    let mut v = Vector::zeros(n + 1);
    v.rows_mut(0, n).copy_from(y);
    v[n] = 1.0;
    v
}

/// Minimum over a polar grid of the closed unit disk.
fn disk_oracle(t: &TrsProblem, rings: usize, spokes: usize) -> f64 {
    let mut best = t.value(&Vector::zeros(2));
    for i in 1..=rings {
        let r = i as f64 / rings as f64;
        for j in 0..spokes {
            let th = 2.0 * std::f64::consts::PI * j as f64 / spokes as f64;
            best = best.min(t.value(&Vector::from_vec(vec![r * th.cos(), r * th.sin()])));
        }
    }
    best
}

#[test]
fn trs_global_agrees_with_the_disk_grid() {
    let t = TrsProblem::new(diag(&[-1.0, 1.0]), Vector::from_vec(vec![0.0, 2.0])).unwrap();
    let g = solve_trs_global(&t).unwrap();
    assert!((g.value + 3.0).abs() < 1e-9);
    let o = disk_oracle(&t, 400, 4000);
    assert!(o >= g.value - 1e-12 && o - g.value < 1e-3);
    let mut r = rng(4);
    for _ in 0..20 {
        let q = random_sym(&mut r, 2);
        let b = gaussian_vector(&mut r, 2);
        let t = TrsProblem::new(q, b).unwrap();
        let g = solve_trs_global(&t).unwrap();
        let o = disk_oracle(&t, 300, 2000);
        assert!(
            o >= g.value - 1e-9 && o - g.value < 1e-2,
            "{o} vs {}",
            g.value
        );
    }
}

#[test]
fn homogenized_round_trip_preserves_the_objective() {
    let mut r = rng(8);
    let t = TrsProblem::new(random_sym(&mut r, 3), gaussian_vector(&mut r, 3)).unwrap();
    let h = homogenize_trs(&t);
    let y = gaussian_vector(&mut r, 3);
    for z in [1.0, -1.0] {
        let mut v = lift(&y) * z;
        v[3] = z;
        assert!((h.q0(&v) - t.value(&(&y * (z * z)))).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn trs_local_certificate_matches_homogenized_classification(seed in any::<u64>(), n in 2usize..7) {
        let mut r = rng(seed);
        let t = TrsProblem::new(random_sym(&mut r, n), gaussian_vector(&mut r, n).scale(r.random_range(0.05..2.0))).unwrap();
        let cands = trs_local_candidates(&t, DEFAULT_MU_GRID).unwrap();
        prop_assert!(cands.iter().filter(|c| c.check.pass).count() <= 1);
        let h = homogenize_trs(&t);
        for c in &cands {
            let v = classify_point(&h, &lift(&c.y()), &Tolerances::default()).unwrap();
            prop_assert_eq!(v.verdict == Verdict::StrictLocalNonGlobal, c.check.pass, "{:?} {:?}", c, v.verdict);
        }
        if let Some(c) = find_trs_local_nonglobal(&t).unwrap() {
            let g = solve_trs_global(&t).unwrap();
            prop_assert!(t.value(&c.y()) > g.value);
        }
    }

    #[test]
    fn generated_hard_cases_have_a_strict_minimizer_without_sosc(seed in any::<u64>(), n in 2usize..6) {
        let mut r = rng(seed);
        let u = gaussian_matrix(&mut r, n, n).qr().q();
        let mut lambda: Vec<f64> = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
        lambda.sort_by(f64::total_cmp);
        lambda[0] = lambda[0].min(-0.5);
        if n > 1 {
            lambda[1] = lambda[1].max(lambda[0] + 0.5);
            lambda.sort_by(f64::total_cmp);
        }
        let w: Vec<f64> = (0..n).map(|_| r.random_range(0.1..1.0)).collect();
        let t = generate_trs_hard_case(&lambda, &u, &w).unwrap();
        let rep = check_sosc_at_global(&t).unwrap();
        prop_assert!(rep.hard_case && rep.strict_global && !rep.sosc_holds, "{:?}", rep);
        prop_assert!((rep.y_bar_norm.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tls_recovers_consistent_solutions(seed in any::<u64>(), n in 1usize..5, extra in 0usize..4) {
        let mut r = rng(seed);
        let a = gaussian_matrix(&mut r, n + extra + 1, n);
        let x0 = gaussian_vector(&mut r, n);
        let s = solve_tls(&a, &(&a * &x0)).unwrap();
        prop_assert!(s.value <= 1e-12);
        prop_assert!((s.x - x0).norm() <= 1e-8);
    }

    #[test]
    fn sphere_descent_never_ends_above_the_tls_value(seed in any::<u64>(), n in 1usize..5) {
        let mut r = rng(seed);
        let m = n + 3;
        let a = gaussian_matrix(&mut r, m, n);
        let b = gaussian_vector(&mut r, m);
        let tls = solve_tls(&a, &b).unwrap();
        let mut aug = Matrix::zeros(m, n + 1);
        aug.view_mut((0, 0), (m, n)).copy_from(&a);
        aug.column_mut(n).copy_from(&(-&b));
        let p = Qq1Problem::new(SymMat::new(aug.transpose() * &aug).unwrap(), SymMat::identity(n + 1)).unwrap();
        for _ in 0..5 {
            let x0 = gaussian_vector(&mut r, n + 1);
            let d = descend_qq1(&p, &x0, &DescentOptions::default()).unwrap();
            prop_assert!(d.value <= tls.value + 1e-6, "{} vs {}", d.value, tls.value);
        }
    }

    #[test]
    fn etls_value_is_the_charnes_cooper_objective(seed in any::<u64>(), n in 2usize..5) {
        let mut r = rng(seed);
        let a = gaussian_matrix(&mut r, n + 2, n);
        let b = gaussian_vector(&mut r, n + 2);
        let l = random_pd(&mut r, n).into_inner();
        let e = EtlsProblem::new(a, b, l, r.random_range(0.1..2.0)).unwrap();
        let s = solve_etls(&e).unwrap();
        let x = Vector::from_column_slice(&s.x);
        prop_assert!((s.value - e.objective(&x)).abs() <= 1e-9 * (1.0 + s.value));
        prop_assert!(e.regularizer(&x) <= e.rho * (1.0 + 1e-7));
        let c = classify_etls_point(&e, &x, &Tolerances::default()).unwrap();
        prop_assert!(matches!(c.verdict, Verdict::GlobalBoundary | Verdict::InteriorGlobal), "{:?}", c.verdict);
    }
}

#[test]
fn etls_constrained_example_matches_the_grid() {
    let e = EtlsProblem::new(
        Matrix::identity(2, 2),
        Vector::from_vec(vec![2.0, 0.0]),
        Matrix::identity(2, 2),
        1.0,
    )
    .unwrap();
    let s = solve_etls(&e).unwrap();
    let o = oracle_global(&e.lift(), 1e-3, Execution::Parallel).unwrap();
    assert!(o.value >= s.value - 1e-9 && o.value - s.value < 1e-2);
    let v = charnes_cooper(&Vector::from_column_slice(&s.x));
    assert!((e.lift().q0(&v) - s.value).abs() < 1e-9);
}

#[test]
fn planted_definite_combinations_are_detected() {
    let mut r = rng(10);
    for i in 0..50 {
        let mode = if i % 2 == 0 {
            Mode::Equality
        } else {
            Mode::Inequality
        };
        let n = 3 + i % 4;
        let p = planted_definite_pencil(&mut r, n, mode);
        let c = check_compactness(&p, &PencilOptions::default()).unwrap();
        match (mode, &c) {
            (Mode::Equality, Compactness::CompactE { mu }) => {
                let g = SymMat::lincomb(&[(mu[0], &p.a1), (mu[1], &p.a2)]);
                assert!(g.as_matrix().clone().symmetric_eigenvalues().min() > 0.0);
            }
            (Mode::Inequality, Compactness::CompactF { mu }) => {
                let g = SymMat::lincomb(&[(*mu, &p.a1), (1.0, &p.a2)]);
                assert!(g.as_matrix().clone().symmetric_eigenvalues().min() > 0.0);
            }
            _ => panic!("instance {i}: {c:?}"),
        }
    }
}

#[test]
fn planted_rays_are_not_compact() {
    let mut r = rng(11);
    for i in 0..20 {
        let (p, d) = planted_ray(&mut r, 3 + i % 3);
        assert!(p.a1.quad(&d).abs() < 1e-12);
        assert_eq!(
            check_compactness(&p, &PencilOptions::default()).unwrap(),
            Compactness::NotCompact,
            "instance {i}"
        );
        let mut last = 0.0;
        for t in [10.0, 100.0, 1e3, 1e4] {
            let x = ray_point(&p, &d, t);
            assert!((p.q1(&x) - 1.0).abs() < 1e-8 * t * t, "{}", p.q1(&x));
            assert!(p.q2(&x) <= 1.0);
            assert!(x.norm() > last);
            last = x.norm();
        }
    }
}

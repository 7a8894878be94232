mod common;

use common::{curve_point, curve_problem, flat_problem};
use hqcqp::oracle::{oracle_global, oracle_local_probe};
use hqcqp::par::Execution;
use hqcqp::qq2::global::{solve_qq2, GlobalCertificate, Qq2Outcome};
use hqcqp::qq2::local::{classify_point, find_local_nonglobal, FinderOptions, Verdict};
use hqcqp::qq2::{Mode, Qq2Problem, Tolerances};
use hqcqp::Vector;

fn global(p: &Qq2Problem) -> GlobalCertificate {
    match solve_qq2(p).unwrap() {
        Qq2Outcome::Global(c) => c,
        o => panic!("{o:?}"),
    }
}

#[test]
fn curve_problem_global_minimizer_on_second_branch() {
    let p = curve_problem(Mode::Equality);
    let c = global(&p);
    let x = c.x();
    let x = if x[2] < 0.0 { -x } else { x };
    assert!((x[0] - 0.3611).abs() < 5e-4, "{x}");
    assert!(x[1] < 0.0);
    assert!((c.value - p.q0(&curve_point(x[0], -1.0))).abs() < 1e-8);
    // The equality band of the oracle shrinks with the resolution.
    let o = oracle_global(&p, 5e-4, Execution::Parallel).unwrap();
    assert!(
        (o.value - c.value).abs() < 1e-2,
        "{} vs {}",
        o.value,
        c.value
    );
}

#[test]
fn curve_problem_has_two_pairs_of_strict_local_nonglobal_minimizers() {
    let p = curve_problem(Mode::Equality);
    let found = find_local_nonglobal(&p, &FinderOptions::default()).unwrap();
    assert_eq!(found.len(), 4);
    let mut ts: Vec<f64> = found.iter().map(|c| -c.x[0].abs()).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    assert_eq!(ts.len(), 2);
    assert!(
        (ts[0] + 0.339364).abs() < 1e-5 && (ts[1] + 0.066375).abs() < 1e-5,
        "{ts:?}"
    );
    for c in &found {
        assert_eq!(c.classification.verdict, Verdict::StrictLocalNonGlobal);
        let x = Vector::from_column_slice(&c.x);
        // Each lies on the curve through the branch given by the sign of x2x3.
        let branch = (x[1] * x[2]).signum();
        let on = curve_point(x[0] * x[2].signum(), branch);
        assert!((&x * x[2].signum() - on).norm() < 1e-8);
        let r = oracle_local_probe(&p, &x, 1e-2, 2000, 3).unwrap();
        assert!(r.is_local_min_at_resolution, "{r:?}");
    }
}

#[test]
fn curve_problem_inequality_version_is_classified_consistently() {
    let p = curve_problem(Mode::Inequality);
    let found = find_local_nonglobal(&p, &FinderOptions::default()).unwrap();
    for c in &found {
        let k = c.classification.kkt.as_ref().unwrap();
        assert!(k.beta > 1e-8 && !k.reflected);
        assert_eq!(c.classification.g_inertia.unwrap().n_neg, 1);
    }
}

#[test]
fn flat_problem_global_and_special_points() {
    let p = flat_problem();
    let c = global(&p);
    assert!(
        (c.value + 2.0 * 2f64.sqrt() / 3.0).abs() < 1e-8,
        "{}",
        c.value
    );
    let s2 = 2f64.sqrt();
    let x = Vector::from_vec(vec![s2, 2.0, 0.0]) / 6f64.sqrt();
    let k = classify_point(&p, &x, &Tolerances::default()).unwrap();
    assert_eq!(k.verdict, Verdict::NonStrictLocalNonGlobalCandidate);
    let v = k.v_bar.unwrap();
    assert!(v.r_a1 <= 1e-8 && v.r_a2 <= 1e-8 && v.r_g <= 1e-8 && v.r_diff <= 1e-8);
    let r = oracle_local_probe(&p, &x, 1e-2, 4000, 1).unwrap();
    assert!(
        r.is_local_min_at_resolution && r.best_violation.abs() < 1e-9,
        "{r:?}"
    );

    let e3 = Vector::from_vec(vec![0.0, 0.0, 1.0]);
    let k = classify_point(&p, &e3, &Tolerances::default()).unwrap();
    assert_eq!(k.verdict, Verdict::NotLocalMinimizer);
    assert!(!k.kkt.unwrap().licq_ok);
    let r = oracle_local_probe(&p, &e3, 1e-2, 4000, 1).unwrap();
    assert!(!r.is_local_min_at_resolution);

    let o = oracle_global(&p, 1e-3, Execution::Parallel).unwrap();
    assert!((o.value - c.value).abs() < 1e-2);
    assert!(o.value >= c.value - 1e-12);
}

#[test]
fn flat_problem_whole_flat_curve_is_flagged() {
    let p = flat_problem();
    let s2 = 2f64.sqrt();
    for t in [-2.0, -0.5, 0.3, 1.7] {
        let x = Vector::from_vec(vec![s2, 2.0, t]) / (6.0 + t * t).sqrt();
        assert!((p.q2(&x) - 1.0).abs() < 1e-12);
        let k = classify_point(&p, &x, &Tolerances::default()).unwrap();
        assert_eq!(
            k.verdict,
            Verdict::NonStrictLocalNonGlobalCandidate,
            "t = {t}"
        );
        assert!(k.kkt.unwrap().beta > 1e-8);
        assert_eq!(k.g_inertia.unwrap().n_neg, 1);
    }
}

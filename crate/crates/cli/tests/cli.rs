use hqcqp_cli::report::{Body, Report};
use hqcqp_cli::Status;
use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn hqcqp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hqcqp"))
        .args(args)
        .output()
        .unwrap()
}

fn json(cmd: &str, file: &str, extra: &[&str]) -> (i32, Report, Vec<u8>) {
    let f = fixture(file);
    let mut args = vec![cmd, f.to_str().unwrap(), "--format", "json"];
    args.extend_from_slice(extra);
    let out = hqcqp(&args);
    let report: Report = serde_json::from_slice(&out.stdout).unwrap();
    (out.status.code().unwrap(), report, out.stdout)
}

#[test]
fn solve_flat_problem() {
    let (code, r, _) = json("solve", "flat_inequality.json", &[]);
    assert_eq!(code, 0);
    let Some(Body::Solve(o)) = r.result else {
        panic!()
    };
    let c = o.certificate().unwrap();
    assert!((c.value + 2.0 * 2f64.sqrt() / 3.0).abs() < 1e-8);
    assert!(c.check.pass);
}

#[test]
fn exit_codes() {
    assert_eq!(json("solve", "infeasible.json", &[]).0, 3);
    let (code, r, _) = json("solve", "c1_fail.json", &[]);
    assert_eq!(code, 2);
    assert_eq!(r.status, Status::AssumptionFailure);
    assert!(matches!(
        r.result,
        Some(Body::Solve(
            hqcqp::qq2::global::Qq2Outcome::AssumptionFailure(_)
        ))
    ));
    assert_eq!(json("find-local", "c1_fail.json", &[]).0, 2);
    assert_eq!(json("trs", "flat_inequality.json", &[]).0, 1);
    assert_eq!(json("classify", "flat_inequality.json", &[]).0, 1);
    let missing = hqcqp(&["solve", "/nonexistent/problem.json", "--format", "json"]);
    assert_eq!(missing.status.code(), Some(1));
    let bad_flag = hqcqp(&["solve", "--no-such-flag"]);
    assert_eq!(bad_flag.status.code(), Some(1));
    assert_eq!(hqcqp(&["--help"]).status.code(), Some(0));
}

#[test]
fn json_round_trips_and_is_reproducible() {
    for (cmd, file) in [
        ("solve", "curve_equality.json"),
        ("classify", "flat_candidate.json"),
        ("compactness", "flat_inequality.json"),
        ("find-local", "curve_equality.json"),
        ("trs", "trs_hard_case.json"),
        ("etls", "etls.json"),
        ("tls", "tls_consistent.json"),
    ] {
        let (_, r, bytes) = json(cmd, file, &[]);
        let again = serde_json::to_string_pretty(&r).unwrap();
        assert_eq!(
            again.trim_end(),
            String::from_utf8(bytes.clone()).unwrap().trim_end(),
            "{cmd}"
        );
        let (_, _, second) = json(cmd, file, &[]);
        assert_eq!(bytes, second, "{cmd} differs between runs");
        let (_, _, seq) = json(cmd, file, &["--jobs", "1"]);
        assert_eq!(bytes, seq, "{cmd} differs between execution policies");
    }
}

#[test]
fn text_output_lists_every_field() {
    let f = fixture("flat_e3.json");
    let out = hqcqp(&["classify", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("result.data.classification.verdict = not_local_minimizer"));
    assert!(text.contains("tolerances.psd = 1e-7"));
    assert!(text.contains("wall_time_s = -"));
    assert_eq!(
        text,
        String::from_utf8(hqcqp(&["classify", f.to_str().unwrap()]).stdout).unwrap()
    );
}

#[test]
fn tolerance_flags_reach_the_report() {
    let (_, r, _) = json(
        "solve",
        "flat_inequality.json",
        &[
            "--tol-psd",
            "1e-6",
            "--tol-feas",
            "1e-8",
            "--tol-rank",
            "1e-7",
        ],
    );
    assert_eq!(
        (r.tolerances.feas, r.tolerances.psd, r.tolerances.rank),
        (1e-8, 1e-6, 1e-7)
    );
    let (_, r, _) = json("solve", "flat_inequality.json", &["--timing"]);
    assert!(r.wall_time_s.is_some());
}

#[test]
fn oracle_cross_check_agrees() {
    let (code, r, _) = json(
        "solve",
        "flat_inequality.json",
        &["--oracle-check", "--resolution", "5e-3"],
    );
    assert_eq!(code, 0);
    let c = r.oracle_check.unwrap();
    assert!(c.agrees, "{c:?}");
    let (_, r, _) = json("oracle", "flat_inequality.json", &["--resolution", "5e-3"]);
    let Some(Body::Oracle { global, .. }) = r.result else {
        panic!()
    };
    assert!(global.value >= -2.0 * 2f64.sqrt() / 3.0 - 1e-12);
}

#[test]
fn probe_confirms_classification() {
    let (_, r, _) = json("classify", "flat_candidate.json", &["--probe"]);
    let Some(Body::Classify { probe, .. }) = r.result else {
        panic!()
    };
    assert!(probe.unwrap().is_local_min_at_resolution);
    let (_, r, _) = json("classify", "flat_e3.json", &["--probe"]);
    let Some(Body::Classify { probe, .. }) = r.result else {
        panic!()
    };
    assert!(!probe.unwrap().is_local_min_at_resolution);
}

#[test]
fn asymmetric_matrices_warn() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("asym.json");
    let text = std::fs::read_to_string(fixture("flat_inequality.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let mut v = v;
    v["A0"][0][1] = serde_json::json!(1.0);
    v["A0"][1][0] = serde_json::json!(0.0);
    std::fs::write(&p, v.to_string()).unwrap();
    let out = hqcqp(&["solve", p.to_str().unwrap(), "--format", "json"]);
    let r: Report = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r.warnings.len(), 1);
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("warning: A0 symmetrized"));
    assert_eq!(out.status.code(), Some(0));
}

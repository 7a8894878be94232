//! One function per command, each wrapping a single library operation.

use crate::problem::{load, Loaded};
use crate::report::{Body, CommandEcho, OracleCheck, Report, Status, REPORT_VERSION};
use hqcqp::etls::{classify_etls_point, solve_etls};
use hqcqp::oracle::{oracle_global, oracle_local_probe, ProbeReport, MAX_ORACLE_DIM};
use hqcqp::par::Execution;
use hqcqp::pencil::PencilOptions;
use hqcqp::qq1::solve_tls;
use hqcqp::qq2::global::{check_compactness, solve_qq2_with, Compactness, Qq2Options, Qq2Outcome};
use hqcqp::qq2::local::{
    classify_point_with, find_local_nonglobal, FinderOptions, GlobalContext, Verdict,
};
use hqcqp::qq2::{Qq2Problem, Tolerances};
use hqcqp::trs::{check_sosc_at_global, solve_trs};
use hqcqp::{Error, Vector};
use std::path::Path;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Classify,
    Compactness,
    FindLocal,
    Trs,
    Etls,
    Tls,
    Oracle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Classify => "classify",
            Command::Compactness => "compactness",
            Command::FindLocal => "find-local",
            Command::Trs => "trs",
            Command::Etls => "etls",
            Command::Tls => "tls",
            Command::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub seed: u64,
    pub starts: usize,
    /// Angular resolution of the brute-force oracle.
    pub resolution: f64,
    pub tol: Tolerances,
    /// Worker threads; `Some(1)` runs everything sequentially.
    pub jobs: Option<usize>,
    pub timing: bool,
    /// Cross-check `solve` against the oracle (n ≤ 4).
    pub oracle_check: bool,
    /// Probe classified points with random feasible neighbours.
    pub probe: bool,
    pub probe_radius: f64,
    pub probe_samples: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            seed: 0,
            starts: FinderOptions::default().n_starts,
            resolution: 1e-2,
            tol: Tolerances::default(),
            jobs: None,
            timing: false,
            oracle_check: false,
            probe: false,
            probe_radius: 1e-2,
            probe_samples: 2000,
        }
    }
}

impl Options {
    fn exec(&self) -> Execution {
        if self.jobs == Some(1) {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    fn pencil(&self) -> PencilOptions {
        PencilOptions {
            exec: self.exec(),
            ..PencilOptions::default()
        }
    }

    fn qq2(&self) -> Qq2Options {
        Qq2Options {
            tol: self.tol,
            pencil: self.pencil(),
            seed: self.seed,
            ..Qq2Options::default()
        }
    }
}

/// Outcome of a command before it is wrapped into a report.
struct Outcome {
    status: Status,
    body: Option<Body>,
    error: Option<String>,
    oracle_check: Option<OracleCheck>,
}

impl Outcome {
    fn ok(status: Status, body: Body) -> Self {
        Outcome {
            status,
            body: Some(body),
            error: None,
            oracle_check: None,
        }
    }

    fn fail(status: Status, msg: String) -> Self {
        Outcome {
            status,
            body: None,
            error: Some(msg),
            oracle_check: None,
        }
    }
}

fn status_of(e: &Error) -> Status {
    match e.root() {
        Error::PencilNotDefinite | Error::ExistenceAssumption(_) | Error::TlsAtInfinity => {
            Status::AssumptionFailure
        }
        Error::InfeasibleConstraint | Error::UnboundedDual => Status::Infeasible,
        _ => Status::InternalError,
    }
}

fn from_error(e: Error) -> Outcome {
    Outcome::fail(status_of(&e), e.to_string())
}

fn wrong_kind(cmd: Command, l: &Loaded) -> Outcome {
    Outcome::fail(
        Status::InternalError,
        format!(
            "command {} does not accept {} problem files",
            cmd.name(),
            l.kind()
        ),
    )
}

fn need_point(x: &Option<Vector>) -> Result<&Vector, String> {
    x.as_ref()
        .ok_or_else(|| "the problem file has no point x".to_string())
}

fn probe(p: &Qq2Problem, x: &Vector, opts: &Options) -> Option<ProbeReport> {
    oracle_local_probe(p, x, opts.probe_radius, opts.probe_samples, opts.seed).ok()
}

fn cmd_solve(p: &Qq2Problem, opts: &Options) -> Outcome {
    let outcome = match solve_qq2_with(p, &opts.qq2()) {
        Ok(o) => o,
        Err(e) => return from_error(e),
    };
    let status = match &outcome {
        Qq2Outcome::Global(_) => Status::Ok,
        Qq2Outcome::Infeasible { .. } => Status::Infeasible,
        Qq2Outcome::AssumptionFailure(_) => Status::AssumptionFailure,
    };
    let check = match (&outcome, opts.oracle_check) {
        (Qq2Outcome::Global(c), true) if p.dim() <= MAX_ORACLE_DIM => {
            match oracle_global(p, opts.resolution, opts.exec()) {
                Ok(o) => {
                    let gap = c.value - o.value;
                    let allowed = (2.0 * o.error_bound).max(1e-6);
                    let agrees = gap.abs() <= allowed;
                    Some(OracleCheck {
                        oracle: o,
                        gap,
                        agrees,
                    })
                }
                Err(e) => return from_error(e),
            }
        }
        _ => None,
    };
    Outcome {
        oracle_check: check,
        ..Outcome::ok(status, Body::Solve(outcome))
    }
}

fn cmd_classify(l: &Loaded, opts: &Options) -> Outcome {
    let (classification, point, probe_report) = match l {
        Loaded::Qq2 { problem, x } => {
            let x = match need_point(x) {
                Ok(x) => x,
                Err(m) => return Outcome::fail(Status::InternalError, m),
            };
            let c = match GlobalContext::new(problem, &opts.qq2())
                .and_then(|ctx| classify_point_with(problem, x, &opts.tol, &ctx))
            {
                Ok(c) => c,
                Err(e) => return from_error(e),
            };
            let pr = if opts.probe && c.verdict != Verdict::Infeasible {
                probe(problem, x, opts)
            } else {
                None
            };
            (c, x, pr)
        }
        Loaded::Etls { problem, x } => {
            let x = match need_point(x) {
                Ok(x) => x,
                Err(m) => return Outcome::fail(Status::InternalError, m),
            };
            match classify_etls_point(problem, x, &opts.tol) {
                Ok(c) => (c, x, None),
                Err(e) => return from_error(e),
            }
        }
        other => return wrong_kind(Command::Classify, other),
    };
    let status = if classification.verdict == Verdict::Infeasible {
        Status::Infeasible
    } else {
        Status::Ok
    };
    Outcome::ok(
        status,
        Body::Classify {
            point: point.iter().copied().collect(),
            classification,
            probe: probe_report,
        },
    )
}

fn cmd_compactness(p: &Qq2Problem, opts: &Options) -> Outcome {
    match check_compactness(p, &opts.pencil()) {
        Ok(c) => {
            let status = if c == Compactness::Empty {
                Status::Infeasible
            } else {
                Status::Ok
            };
            Outcome::ok(status, Body::Compactness(c))
        }
        Err(e) => from_error(e),
    }
}

fn cmd_find_local(p: &Qq2Problem, opts: &Options) -> Outcome {
    let f = FinderOptions {
        n_starts: opts.starts,
        seed: opts.seed,
        tol: opts.tol,
        exec: opts.exec(),
        ..FinderOptions::default()
    };
    match find_local_nonglobal(p, &f) {
        Ok(points) => Outcome::ok(
            Status::Ok,
            Body::FindLocal {
                n_starts: opts.starts,
                count: points.len(),
                points,
            },
        ),
        Err(e) => from_error(e),
    }
}

fn cmd_oracle(p: &Qq2Problem, x: &Option<Vector>, opts: &Options) -> Outcome {
    match oracle_global(p, opts.resolution, opts.exec()) {
        Ok(global) => {
            let pr = x.as_ref().and_then(|x| probe(p, x, opts));
            Outcome::ok(Status::Ok, Body::Oracle { global, probe: pr })
        }
        Err(e) => from_error(e),
    }
}

fn dispatch(cmd: Command, l: &Loaded, opts: &Options) -> Outcome {
    match (cmd, l) {
        (Command::Solve, Loaded::Qq2 { problem, .. }) => cmd_solve(problem, opts),
        (Command::Classify, _) => cmd_classify(l, opts),
        (Command::Compactness, Loaded::Qq2 { problem, .. }) => cmd_compactness(problem, opts),
        (Command::FindLocal, Loaded::Qq2 { problem, .. }) => cmd_find_local(problem, opts),
        (Command::Oracle, Loaded::Qq2 { problem, x }) => cmd_oracle(problem, x, opts),
        (Command::Trs, Loaded::Trs(t)) => {
            match solve_trs(t).and_then(|s| Ok((s, check_sosc_at_global(t)?))) {
                Ok((solution, sosc)) => Outcome::ok(Status::Ok, Body::Trs { solution, sosc }),
                Err(e) => from_error(e),
            }
        }
        (Command::Etls, Loaded::Etls { problem, .. }) => match solve_etls(problem) {
            Ok(s) => Outcome::ok(Status::Ok, Body::Etls(s)),
            Err(e) => from_error(e),
        },
        (Command::Tls, Loaded::Tls { a, b }) => match solve_tls(a, b) {
            Ok(s) => Outcome::ok(
                Status::Ok,
                Body::Tls {
                    x: s.x.iter().copied().collect(),
                    value: s.value,
                },
            ),
            Err(e) => from_error(e),
        },
        (cmd, other) => wrong_kind(cmd, other),
    }
}

/// Loads `file`, runs `cmd` and reports. Never panics on bad input; every
/// failure becomes a report with the matching exit code.
pub fn run(cmd: Command, file: &Path, opts: &Options) -> Report {
    let start = Instant::now();
    let mut echo = CommandEcho {
        command: cmd.name().into(),
        file: file.display().to_string(),
        problem_kind: None,
        seed: opts.seed,
        starts: opts.starts,
        resolution: opts.resolution,
        probe_radius: opts.probe_radius,
        probe_samples: opts.probe_samples,
    };
    let (outcome, warnings) = match load(file) {
        Ok((l, w)) => {
            echo.problem_kind = Some(l.kind().into());
            (with_jobs(opts.jobs, || dispatch(cmd, &l, opts)), w)
        }
        Err(e) => (
            Outcome::fail(Status::InternalError, e.to_string()),
            Vec::new(),
        ),
    };
    Report {
        report_version: REPORT_VERSION.into(),
        command: echo,
        tolerances: opts.tol,
        status: outcome.status,
        exit_code: outcome.status.exit_code(),
        warnings,
        error: outcome.error,
        result: outcome.body,
        oracle_check: outcome.oracle_check,
        wall_time_s: opts.timing.then(|| start.elapsed().as_secs_f64()),
    }
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match jobs {
        Some(k) if k > 1 => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}

use clap::{Args, Parser, Subcommand, ValueEnum};
use hqcqp::qq2::Tolerances;
use hqcqp_cli::{run, Command, Options};
use std::path::PathBuf;
use std::process::ExitCode;

/// Global solvers and local-optimality certificates for homogeneous
/// quadratic programs with one or two quadratic-form constraints.
#[derive(Parser)]
#[command(name = "hqcqp", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Cmd {
    /// Global minimizer with its optimality certificate.
    Solve { file: PathBuf },
    /// Local optimality verdict for the point `x` in the file.
    Classify { file: PathBuf },
    /// Compactness of the feasible set.
    Compactness { file: PathBuf },
    /// Multistart search for local non-global minimizers.
    FindLocal { file: PathBuf },
    /// Trust-region subproblem: global, local non-global and hard case.
    Trs { file: PathBuf },
    /// Regularized total least squares.
    Etls { file: PathBuf },
    /// Total least squares.
    Tls { file: PathBuf },
    /// Brute-force grid minimum (n ≤ 4).
    Oracle { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct Flags {
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    /// Worker threads (1 runs sequentially).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = Options::default().starts)]
    starts: usize,
    #[arg(long, global = true, default_value_t = Options::default().resolution)]
    resolution: f64,
    #[arg(long, global = true, default_value_t = Tolerances::default().feas)]
    tol_feas: f64,
    #[arg(long, global = true, default_value_t = Tolerances::default().psd)]
    tol_psd: f64,
    #[arg(long, global = true, default_value_t = Tolerances::default().rank)]
    tol_rank: f64,
    /// Include wall time in the report.
    #[arg(long, global = true)]
    timing: bool,
    /// Cross-check `solve` against the grid oracle.
    #[arg(long, global = true)]
    oracle_check: bool,
    /// Probe classified points with random feasible neighbours.
    #[arg(long, global = true)]
    probe: bool,
    #[arg(long, global = true, default_value_t = Options::default().probe_radius)]
    probe_radius: f64,
    #[arg(long, global = true, default_value_t = Options::default().probe_samples)]
    probe_samples: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let f = cli.flags;
    let opts = Options {
        seed: f.seed,
        starts: f.starts,
        resolution: f.resolution,
        tol: Tolerances {
            feas: f.tol_feas,
            psd: f.tol_psd,
            rank: f.tol_rank,
        },
        jobs: f.jobs,
        timing: f.timing,
        oracle_check: f.oracle_check,
        probe: f.probe,
        probe_radius: f.probe_radius,
        probe_samples: f.probe_samples,
    };
    let (cmd, file) = match cli.command {
        Cmd::Solve { file } => (Command::Solve, file),
        Cmd::Classify { file } => (Command::Classify, file),
        Cmd::Compactness { file } => (Command::Compactness, file),
        Cmd::FindLocal { file } => (Command::FindLocal, file),
        Cmd::Trs { file } => (Command::Trs, file),
        Cmd::Etls { file } => (Command::Etls, file),
        Cmd::Tls { file } => (Command::Tls, file),
        Cmd::Oracle { file } => (Command::Oracle, file),
    };
    let report = run(cmd, &file, &opts);
    match f.format {
        Format::Json => println!("{}", report.to_json()),
        Format::Text => print!("{}", report.to_text()),
    }
    if let Some(e) = &report.error {
        eprintln!("error: {e}");
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    ExitCode::from(report.exit_code as u8)
}

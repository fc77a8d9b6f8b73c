use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use weyl_lab::{report, run, ExperimentConfig, ExperimentKind, LabError, RunManifest, RunOptions};

/// Dirichlet spectra, heat traces and Weyl asymptotics on model spaces.
#[derive(Parser)]
#[command(name = "weyl-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lowest Dirichlet eigenpairs.
    Solve(RunArgs),
    /// Counting function N(λ).
    Count(RunArgs),
    /// Heat trace and its small-time limit.
    Trace(RunArgs),
    /// Weyl constant and exponent fit.
    Weyl(RunArgs),
    /// Blow-up spectra at a point.
    Blowup(RunArgs),
    /// Spectral convergence of a family of balls.
    Converge(RunArgs),
    /// Ball volumes, b(p,r) and comparison inequalities.
    Geom(RunArgs),
    /// Aggregate manifests into summary.csv and summary.md.
    Report(ReportArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML); repeat for a batch.
    #[arg(long = "config", short = 'c', required = true)]
    configs: Vec<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Parallel runs in a batch.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Overrides the seed in every config.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write SVG plots.
    #[arg(long)]
    plots: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Manifest files or directories searched for manifest.json.
    paths: Vec<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn run_batch(kind: ExperimentKind, args: RunArgs) -> i32 {
    // Every config is parsed and validated before any run starts.
    let mut configs = Vec::with_capacity(args.configs.len());
    for path in &args.configs {
        match ExperimentConfig::load(path).and_then(|c| c.validate(kind).map(|_| c)) {
            Ok(c) => configs.push(c),
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                return e.exit_code();
            }
        }
    }
    let opts = RunOptions { out: args.out, seed: args.seed, plots: args.plots };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(args.workers.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("cannot start workers: {e}");
            return 3;
        }
    };
    let results: Vec<Result<RunManifest, LabError>> =
        pool.install(|| configs.par_iter().map(|c| run(c, kind, &opts)).collect());
    let mut code = 0;
    for (path, r) in args.configs.iter().zip(results) {
        let c = match r {
            Ok(m) => {
                println!("{} {:?} {}", path.display(), m.status, m.directory);
                for a in m.assertions.iter().filter(|a| !a.passed) {
                    println!("  failed {}: measured {:e}, expected {:e} (tolerance {})", a.name, a.measured, a.expected, a.tolerance);
                }
                if let Some(e) = &m.error {
                    eprintln!("  error in {}: {}", e.stage, e.message);
                }
                m.exit_code()
            }
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                e.exit_code()
            }
        };
        code = code.max(c);
    }
    code
}

fn run_report(args: ReportArgs) -> i32 {
    let result = report::find_manifests(&args.paths)
        .and_then(|paths| report::load(&paths))
        .and_then(|s| report::write(&s, &args.out).map(|files| (s, files)));
    match result {
        Ok((summary, files)) => {
            for f in files {
                println!("{}", f.display());
            }
            summary.exit_code()
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve(a) => run_batch(ExperimentKind::Solve, a),
        Command::Count(a) => run_batch(ExperimentKind::Count, a),
        Command::Trace(a) => run_batch(ExperimentKind::Trace, a),
        Command::Weyl(a) => run_batch(ExperimentKind::Weyl, a),
        Command::Blowup(a) => run_batch(ExperimentKind::Blowup, a),
        Command::Converge(a) => run_batch(ExperimentKind::Converge, a),
        Command::Geom(a) => run_batch(ExperimentKind::Geom, a),
        Command::Report(a) => run_report(a),
    };
    ExitCode::from(code as u8)
}

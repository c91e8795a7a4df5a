use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use trsbench::{emit_table, run_bench, BSpec, BenchConfig, OutputFormat, SolverSelection, DEFAULT_SIZE_CAP};

/// Compare GLTR, TRS_IRA and TRS_IRRA at matched accuracy on Matrix Market matrices.
#[derive(Debug, Parser)]
#[command(name = "trsbench", version)]
struct Cli {
    /// Matrix Market files G; the benchmark uses A = G + Gᵀ.
    #[arg(long = "matrix", required = true, num_args = 1..)]
    matrices: Vec<PathBuf>,
    /// identity, tridiag:a,b,c or a Matrix Market file.
    #[arg(long, default_value = "identity")]
    b: BSpec,
    /// Trust-region radii, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,100")]
    delta: Vec<f64>,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Arnoldi subspace dimension.
    #[arg(long, default_value_t = 30)]
    dim: usize,
    #[arg(long, default_value_t = 600)]
    max_restarts: usize,
    /// all, gltr, ira or irra.
    #[arg(long, default_value = "all")]
    solver: SolverSelection,
    /// Seed for the random gradient g.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// csv or md.
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Reject matrices larger than this (at most 20000).
    #[arg(long, default_value_t = DEFAULT_SIZE_CAP)]
    size_cap: usize,
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let cfg = BenchConfig {
        matrices: cli.matrices,
        b_spec: cli.b,
        deltas: cli.delta,
        tol: cli.tol,
        m: cli.dim,
        max_restarts: cli.max_restarts,
        seed: cli.seed,
        format: cli.format,
        solvers: cli.solver,
        size_cap: cli.size_cap,
    };
    let comparisons = run_bench(&cfg)?;
    let records: Vec<_> = comparisons.iter().flat_map(|c| c.records.iter().cloned()).collect();
    let text = emit_table(&records, cfg.format);
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| anyhow::anyhow!("writing {}: {e}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(records.iter().all(|r| r.status.is_converged()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

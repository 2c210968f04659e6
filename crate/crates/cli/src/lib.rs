//! The `rsp` command line: instance generation, solving, projection
//! debugging, certification and benchmark runs.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rsp_core::RspError;

mod bench;
mod gen;
mod project;
mod solve;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "rsp", version, about = "Robust convex programs by saddle-point first-order methods")]
pub struct Cli {
    /// Directory that every relative path is resolved against.
    #[arg(long, global = true, default_value = ".")]
    pub workdir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random instance.
    Gen(GenArgs),
    /// Solve an instance with one algorithm and write its trace.
    Solve(SolveArgs),
    /// Project a point onto a set and its lifted cone.
    Project(ProjectArgs),
    /// Find a strictly feasible point and the dual bounds it implies.
    Certify(CertifyArgs),
    /// Run the robust-QP benchmark grid.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// Robust QP tensors (n, K, L, m).
    Qp,
    /// Robust LP with biaffine constraints over ℓ2 uncertainty.
    Lp,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value = "qp")]
    pub kind: Kind,
    #[arg(long)]
    pub n: usize,
    /// Uncertainty dimension.
    #[arg(long = "K")]
    pub k: usize,
    /// Rows of each P matrix (QP only).
    #[arg(long = "L")]
    pub l: Option<usize>,
    #[arg(long)]
    pub m: usize,
    #[arg(long, env = "RSP_SEED")]
    pub seed: u64,
    #[arg(long, default_value = "instance.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Sgsp,
    Papc,
    CuttingPlanes,
    FoPess,
    Oco,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub algo: Algo,
    #[arg(long)]
    pub instance: PathBuf,
    /// Iterations (outer rounds for cutting planes).
    #[arg(long, default_value_t = 20_000)]
    pub iters: usize,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    pub time_budget: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    #[arg(long, default_value_t = 100)]
    pub checkpoint_every: usize,
    /// Iteration budget of the Slater search when the instance has no x0.
    #[arg(long, default_value_t = 20_000)]
    pub slater_budget: usize,
    #[arg(long, default_value = "trace.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// l2:R, l1:R, linf:R, box:LO/HI (comma-separated vectors) or a JSON set.
    #[arg(long, allow_hyphen_values = true)]
    pub set: String,
    /// Comma-separated point z̃.
    #[arg(long, allow_hyphen_values = true)]
    pub point: String,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
    /// Cap on λ in the lifted cone.
    #[arg(long, default_value_t = f64::INFINITY)]
    pub lambda_cap: f64,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value_t = 20_000)]
    pub budget: usize,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// TOML file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "bench-out")]
    pub out: PathBuf,
    /// Worker threads; 1 gives bitwise reproducible traces, 0 uses every core.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    pub algorithms: Option<Vec<String>>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub time_budget: Option<f64>,
    #[arg(long)]
    pub sgsp_iters: Option<usize>,
    #[arg(long)]
    pub online_iters: Option<usize>,
    #[arg(long)]
    pub cp_rounds: Option<usize>,
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
}

/// Exit code for a library error.
pub fn exit_code(e: &RspError) -> i32 {
    match e {
        RspError::BudgetExhausted(_) => EXIT_BUDGET,
        RspError::NoConvergence(_)
        | RspError::NotStrictlyFeasible(_)
        | RspError::OracleFailure(_)
        | RspError::Unbounded(_)
        | RspError::MasterFailure(_)
        | RspError::RankDeficient { .. } => EXIT_NUMERIC,
        _ => EXIT_USAGE,
    }
}

pub(crate) fn resolve(workdir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        workdir.join(p)
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let wd = &cli.workdir;
    let res = match &cli.command {
        Command::Gen(a) => gen::cmd_gen(wd, a),
        Command::Solve(a) => solve::cmd_solve(wd, a),
        Command::Project(a) => project::cmd_project(a),
        Command::Certify(a) => solve::cmd_certify(wd, a),
        Command::Bench(a) => bench::cmd_bench(wd, a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// DCA and Boosted DCA solvers for smooth DC programs and reaction networks.
#[derive(Debug, Parser)]
#[command(name = "bdca", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one solver on one problem.
    Solve(SolveArgs),
    /// Matched-target comparison of a boosted variant against DCA.
    Compare(CompareArgs),
    /// Write a random mass-conserving network as model JSON.
    Generate(GenerateArgs),
    /// Check a model file; exits 0 valid, 1 schema error, 2 not conservative.
    Validate(ValidateArgs),
    /// Classify the convergence regime of one trace column.
    Rate(RateArgs),
    /// Check a trace against the descent inequalities.
    Audit(AuditArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct SolverFlags {
    /// dca, bdca-b, bdca-qi or fm.
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub lambda_bar: Option<f64>,
    #[arg(long)]
    pub lambda_max: Option<f64>,
    /// Regularization added to both convex parts.
    #[arg(long)]
    pub rho: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Builtin problem name (quartic, expsys).
    #[arg(long, conflicts_with_all = ["model", "config"])]
    pub builtin: Option<String>,
    /// Model JSON file.
    #[arg(long, conflicts_with = "config")]
    pub model: Option<PathBuf>,
    /// A configuration previously printed by `solve`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Stopping tolerance on |d_k| and |x_{k+1} - x_k|.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Starting point, comma separated; a single value is repeated.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "x0_seed")]
    pub x0: Option<String>,
    /// Draw the starting point uniformly from [-2, 2]^m.
    #[arg(long)]
    pub x0_seed: Option<u64>,
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Experiment spec JSON; flags below override its fields.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Builtin problem (repeatable).
    #[arg(long)]
    pub builtin: Vec<String>,
    /// Model JSON file (repeatable).
    #[arg(long)]
    pub model: Vec<PathBuf>,
    /// Generated network `m,n,seed` (repeatable).
    #[arg(long)]
    pub generated: Vec<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub bdca_iters: Option<usize>,
    #[arg(long)]
    pub dca_cap: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Output directory for rows.csv, traces/ and spec.json.
    #[arg(long, default_value = "compare-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub model: PathBuf,
    /// JSON array of positive species masses; all ones when absent.
    #[arg(long)]
    pub l_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    pub trace: PathBuf,
    /// phi_x, phi_y, norm_d, lambda or phi_gap. The gap is phi_x minus the
    /// final phi_x, over all records but the last.
    #[arg(long, default_value = "norm_d")]
    pub column: String,
    #[arg(long)]
    pub min_len: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    pub trace: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub sigma_g: f64,
    #[arg(long, default_value_t = 0.0)]
    pub sigma_h: f64,
    #[arg(long, default_value_t = boosted_dc::harness::DEFAULT_RHO)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.4)]
    pub alpha: f64,
    /// Relative tolerance; violations must exceed tol (1 + |phi|).
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Compare(a) => commands::compare(a),
        Command::Generate(a) => commands::generate(a),
        Command::Validate(a) => commands::validate(a),
        Command::Rate(a) => commands::rate(a),
        Command::Audit(a) => commands::audit(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.exit_code())
        }
    }
}

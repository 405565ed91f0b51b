use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use boosted_dc::analysis::{audit_trace, classify_rate, AuditParams, RateConfig};
use boosted_dc::biochem::{generate_network, load_network, save_network, GeneratorConfig, ModelError};
use boosted_dc::harness::{export_all, run_experiment, ExperimentSpec, ProblemSource};
use boosted_dc::trace::{load_trace, save_trace};
use boosted_dc::{solve as run_solver, SolverConfig, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{AuditArgs, CompareArgs, GenerateArgs, RateArgs, SolveArgs, SolverFlags, ValidateArgs};

/// Failures, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or configuration; exit 2.
    Usage(String),
    /// The command ran and failed; exit 1.
    Failed(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Failed(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Failed(e)
    }
}

type CmdResult = Result<u8, CliError>;

fn usage(msg: impl fmt::Display) -> CliError {
    CliError::Usage(msg.to_string())
}

fn print_config<T: Serialize>(value: &T) {
    println!("resolved configuration:");
    println!("{}", serde_json::to_string_pretty(value).expect("configuration serializes"));
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(CliError::Failed)?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn apply_solver_flags(cfg: &mut SolverConfig, rho: &mut Option<f64>, flags: &SolverFlags) -> Result<(), CliError> {
    if let Some(v) = &flags.variant {
        cfg.variant = v.parse().map_err(usage)?;
    }
    if let Some(a) = flags.alpha {
        cfg.alpha = a;
    }
    if let Some(b) = flags.beta {
        cfg.beta = b;
    }
    if let Some(l) = flags.lambda_bar {
        cfg.lambda_bar = l;
    }
    if let Some(l) = flags.lambda_max {
        cfg.lambda_max = l;
    }
    if flags.rho.is_some() {
        *rho = flags.rho;
    }
    if let Some(r) = *rho {
        if !(r.is_finite() && r >= 0.0) {
            return Err(usage(format!("rho must be finite and >= 0, got {r}")));
        }
    }
    Ok(())
}

/// Everything needed to repeat a `solve` run. Printed before every run and
/// accepted back through `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub problem: ProblemSource,
    pub rho: Option<f64>,
    pub solver: SolverConfig,
    pub x0: Vec<f64>,
}

fn parse_x0(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| usage(format!("--x0: cannot parse '{s}'"))))
        .collect()
}

fn random_x0(seed: u64, m: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect()
}

pub fn solve(args: SolveArgs) -> CmdResult {
    let (problem, mut rho, mut solver, preset_x0) = match &args.config {
        Some(path) => {
            let c: SolveConfig = read_json(path)?;
            (c.problem, c.rho, c.solver, Some(c.x0))
        }
        None => {
            let problem = match (&args.builtin, &args.model) {
                (Some(name), None) => ProblemSource::Builtin { name: name.clone() },
                (None, Some(path)) => ProblemSource::Model { path: path.clone() },
                _ => return Err(usage("exactly one of --builtin, --model or --config is required")),
            };
            (problem, None, SolverConfig::default(), None)
        }
    };
    apply_solver_flags(&mut solver, &mut rho, &args.solver)?;
    if let Some(k) = args.max_iters {
        solver.max_outer_iters = k;
    }
    if let Some(t) = args.tol {
        solver.tol_d = Some(t);
        solver.tol_x = Some(t);
    }
    solver.validate().map_err(usage)?;

    let loaded = problem.load(rho).map_err(|e| CliError::Failed(e.into()))?;
    let m = loaded.m;
    let x0 = match (&args.x0, args.x0_seed, preset_x0) {
        (Some(text), _, _) => parse_x0(text)?,
        (None, Some(seed), _) => random_x0(seed, m),
        (None, None, Some(x)) => x,
        (None, None, None) => random_x0(0, m),
    };
    let x0 = match x0.len() {
        1 if m > 1 => vec![x0[0]; m],
        l if l == m => x0,
        l => return Err(usage(format!("--x0 has {l} entries but the problem has dimension {m}"))),
    };
    let config = SolveConfig {
        problem,
        rho,
        solver,
        x0,
    };
    print_config(&config);

    let x0 = Vector::from_column_slice(&config.x0);
    let res = run_solver(&loaded.problem, &x0, &config.solver).map_err(usage)?;
    println!("problem: {} (m = {m})", loaded.name);
    println!("variant: {}", config.solver.variant);
    println!("status: {}", res.status);
    println!("iterations: {}", res.iterations);
    println!("phi: {:.16e}", res.phi_final);
    if m <= 10 {
        let xs: Vec<String> = res.x_final.iter().map(|v| format!("{v:.12}")).collect();
        println!("x: [{}]", xs.join(", "));
    } else {
        println!("|x|: {:.6e}", res.x_final.norm());
    }
    println!("time_ms: {:.3}", res.elapsed_ms);
    if let Some(msg) = &res.message {
        eprintln!("solver: {msg}");
    }
    if let Some(path) = &args.trace_out {
        save_trace(&res.trace, path).with_context(|| format!("writing {}", path.display()))?;
        println!("trace: {}", path.display());
    }
    Ok(if res.status.is_failure() { 1 } else { 0 })
}

fn parse_generated(text: &str) -> Result<ProblemSource, CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || usage(format!("--generated expects m,n,seed, got '{text}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    Ok(ProblemSource::Generated {
        m: parts[0].parse().map_err(|_| bad())?,
        n: parts[1].parse().map_err(|_| bad())?,
        seed: parts[2].parse().map_err(|_| bad())?,
    })
}

pub fn compare(args: CompareArgs) -> CmdResult {
    let mut spec = match &args.spec {
        Some(path) => read_json::<ExperimentSpec>(path)?,
        None => ExperimentSpec::default(),
    };
    let mut problems: Vec<ProblemSource> = args
        .builtin
        .iter()
        .map(|name| ProblemSource::Builtin { name: name.clone() })
        .collect();
    problems.extend(args.model.iter().map(|path| ProblemSource::Model { path: path.clone() }));
    for g in &args.generated {
        problems.push(parse_generated(g)?);
    }
    if !problems.is_empty() {
        spec.problems = problems;
    }
    if let Some(t) = args.trials {
        spec.trials = t;
    }
    if let Some(k) = args.bdca_iters {
        spec.bdca_iters = k;
    }
    if args.dca_cap.is_some() {
        spec.dca_cap = args.dca_cap;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    apply_solver_flags(&mut spec.solver, &mut spec.rho, &args.solver)?;
    spec.validate().map_err(usage)?;
    let spec = spec.resolved();
    print_config(&spec);

    let out = run_experiment(&spec).map_err(|e| CliError::Failed(e.into()))?;
    export_all(&out, &spec, &args.out).map_err(|e| CliError::Failed(e.into()))?;
    print_table(&out.rows);
    for t in out.trials.iter().filter(|t| t.error.is_some()) {
        eprintln!("trial {} of {} failed: {}", t.trial, t.model, t.error.as_deref().unwrap_or(""));
    }
    println!("output: {}", args.out.display());
    Ok(if out.completed_trials() > 0 { 0 } else { 1 })
}

fn print_table(rows: &[boosted_dc::harness::ComparisonRow]) {
    println!(
        "{:<28} {:>5} {:>5} {:>6} {:>6} {:>6} {:>12} {:>12} {:>8} {:>8}",
        "model", "m", "n", "trials", "failed", "capped", "bdca_iters", "dca_iters", "ratio_it", "ratio_t"
    );
    for r in rows {
        println!(
            "{:<28} {:>5} {:>5} {:>6} {:>6} {:>6} {:>12.1} {:>12.1} {:>8.2} {:>8.2}{}",
            r.data_model,
            r.data_m,
            r.data_n,
            r.instances_trials,
            r.instances_failed,
            r.instances_cap_exceeded,
            r.bdca_iters_avg,
            r.dca_iters_avg,
            r.ratio_iters,
            r.ratio_time,
            if r.is_partial() { "  (partial)" } else { "" }
        );
    }
}

#[derive(Serialize)]
struct GenerateConfig<'a> {
    m: usize,
    n: usize,
    seed: u64,
    generator: &'a GeneratorConfig,
    out: &'a Path,
}

pub fn generate(args: GenerateArgs) -> CmdResult {
    let cfg = GeneratorConfig::default();
    print_config(&GenerateConfig {
        m: args.m,
        n: args.n,
        seed: args.seed,
        generator: &cfg,
        out: &args.out,
    });
    let net = generate_network(args.m, args.n, args.seed, &cfg).map_err(usage)?;
    save_network(&net, &args.out).map_err(|e| CliError::Failed(e.into()))?;
    println!("wrote {} ({} species, {} reactions)", args.out.display(), net.m(), net.n());
    Ok(0)
}

#[derive(Serialize)]
struct ValidateConfig<'a> {
    model: &'a Path,
    l_file: Option<&'a PathBuf>,
}

pub fn validate(args: ValidateArgs) -> CmdResult {
    print_config(&ValidateConfig {
        model: &args.model,
        l_file: args.l_file.as_ref(),
    });
    let net = match load_network(&args.model) {
        Ok(net) => net,
        Err(e @ (ModelError::Schema { .. } | ModelError::Json { .. })) => {
            println!("schema error: {e}");
            return Ok(1);
        }
        Err(e) => return Err(CliError::Failed(e.into())),
    };
    for w in net.cardinality_warnings() {
        println!("warning: {w}");
    }
    // Exit code 2 means "not conservative" here, so a bad mass file is a 1.
    let l: Option<Vec<f64>> = match args.l_file.as_deref().map(read_json) {
        Some(Ok(l)) => Some(l),
        Some(Err(e)) => {
            println!("schema error: {e}");
            return Ok(1);
        }
        None => None,
    };
    let (residual, _) = match net.check_mass_conservation(l.as_deref()) {
        Ok(r) => r,
        Err(e) => {
            println!("schema error: {e}");
            return Ok(1);
        }
    };
    println!("species: {}, reactions: {}", net.m(), net.n());
    println!("conservation residual: {residual:e}");
    if residual == 0.0 {
        println!("valid");
        Ok(0)
    } else {
        println!("warning: mass is not conserved");
        Ok(2)
    }
}

pub fn rate(args: RateArgs) -> CmdResult {
    let mut cfg = RateConfig::default();
    if let Some(n) = args.min_len {
        cfg.min_len = n;
    }
    print_config(&serde_json::json!({
        "trace": args.trace,
        "column": args.column,
        "rate": cfg,
    }));
    let trace = load_trace(&args.trace).with_context(|| format!("reading {}", args.trace.display()))?;
    let s: Vec<f64> = match args.column.as_str() {
        "phi_x" => trace.iter().map(|r| r.phi_x).collect(),
        "phi_y" => trace.iter().map(|r| r.phi_y).collect(),
        "norm_d" => trace.iter().map(|r| r.norm_d).collect(),
        "lambda" => trace.iter().map(|r| r.lambda).collect(),
        "phi_gap" => {
            // The final record is the reference value and is left out.
            let last = trace.last().map_or(0.0, |r| r.phi_x);
            let body = &trace[..trace.len().saturating_sub(1)];
            body.iter().map(|r| (r.phi_x - last).max(0.0)).collect()
        }
        other => return Err(usage(format!("unknown column '{other}'"))),
    };
    if s.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(usage(format!("column {} has negative or non-finite entries", args.column)));
    }
    let report = classify_rate(&s, &cfg);
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(0)
}

pub fn audit(args: AuditArgs) -> CmdResult {
    let params = AuditParams {
        tol: args.tol,
        ..AuditParams::new(args.sigma_g, args.sigma_h, args.rho, args.alpha)
    };
    print_config(&serde_json::json!({ "trace": args.trace, "audit": params }));
    let trace = load_trace(&args.trace).with_context(|| format!("reading {}", args.trace.display()))?;
    let report = audit_trace(&trace, None, &params);
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(if report.passed { 0 } else { 1 })
}

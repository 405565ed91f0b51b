//! DCA versus BDCA comparisons under the matched-target protocol.
//!
//! For every start point, BDCA runs a fixed number of outer iterations and
//! its final objective value becomes the target; DCA then runs from the same
//! start until it reaches that value (or a safety cap). Trials are
//! aggregated into one [`ComparisonRow`] per problem.

mod export;

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::biochem::{generate_network, load_network, GeneratorConfig, NetworkObjective};
use crate::builtins::{builtin, BUILTIN_NAMES};
use crate::error::ConfigError;
use crate::problem::{DcProblem, Vector};
use crate::solver::{solve, SolveResult, SolverConfig, Status, Variant};

pub use export::{export_all, export_table, export_traces, read_table, trace_file_name, write_table};

/// Regularization applied to network problems unless overridden.
pub const DEFAULT_RHO: f64 = 100.0;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("problem {source_desc}: {reason}")]
    Problem { source_desc: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },
}

/// Where a problem comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSource {
    Builtin { name: String },
    Model { path: PathBuf },
    Generated { m: usize, n: usize, seed: u64 },
}

impl std::fmt::Display for ProblemSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProblemSource::Builtin { name } => write!(f, "builtin {name}"),
            ProblemSource::Model { path } => write!(f, "model {}", path.display()),
            ProblemSource::Generated { m, n, seed } => write!(f, "generated m={m} n={n} seed={seed}"),
        }
    }
}

/// Slack when comparing a stationary DCA end point with the target.
pub const MATCH_TOL: f64 = 1e-6;

/// A loaded problem with the labels used in the table.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub name: String,
    pub m: usize,
    /// Reaction count; 0 for non-network problems.
    pub n: usize,
    pub problem: DcProblem,
}

impl ProblemSource {
    /// Builds the problem. `rho` overrides the regularization; when absent
    /// networks use [`DEFAULT_RHO`] and builtins keep their own.
    pub fn load(&self, rho: Option<f64>) -> Result<LoadedProblem, HarnessError> {
        let fail = |reason: String| HarnessError::Problem {
            source_desc: self.to_string(),
            reason,
        };
        let network = match self {
            ProblemSource::Builtin { name } => {
                let problem = builtin(name)
                    .ok_or_else(|| fail(format!("unknown builtin (known: {})", BUILTIN_NAMES.join(", "))))?;
                let problem = match rho {
                    Some(r) => problem.with_rho(r)?,
                    None => problem,
                };
                return Ok(LoadedProblem {
                    name: name.clone(),
                    m: problem.dim(),
                    n: 0,
                    problem,
                });
            }
            ProblemSource::Model { path } => load_network(path).map_err(|e| fail(e.to_string()))?,
            ProblemSource::Generated { m, n, seed } => {
                generate_network(*m, *n, *seed, &GeneratorConfig::default()).map_err(|e| fail(e.to_string()))?
            }
        };
        let (name, m, n) = (network.name.clone(), network.m(), network.n());
        let problem = NetworkObjective::new(network).into_problem(rho.unwrap_or(DEFAULT_RHO))?;
        Ok(LoadedProblem { name, m, n, problem })
    }
}

/// A full experiment description. Serialized with every result set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    pub problems: Vec<ProblemSource>,
    pub trials: usize,
    /// Start points are drawn uniformly from `[lo, hi]^m`.
    pub x0_box: (f64, f64),
    /// Outer iterations of the boosted run.
    pub bdca_iters: usize,
    /// Safety cap on DCA iterations; `None` means `100 * bdca_iters`.
    pub dca_cap: Option<usize>,
    /// Base configuration. `variant` selects the boosted method.
    pub solver: SolverConfig,
    pub rho: Option<f64>,
    pub seed: u64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            problems: Vec::new(),
            trials: 10,
            x0_box: (-2.0, 2.0),
            bdca_iters: 1000,
            dca_cap: None,
            solver: SolverConfig::default(),
            rho: None,
            seed: 0,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.solver.validate()?;
        if self.problems.is_empty() {
            return Err(ConfigError::new("problems", "at least one problem is required"));
        }
        if self.trials == 0 {
            return Err(ConfigError::new("trials", "must be >= 1"));
        }
        let (lo, hi) = self.x0_box;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(ConfigError::new("x0_box", format!("invalid interval [{lo}, {hi}]")));
        }
        if self.bdca_iters == 0 {
            return Err(ConfigError::new("bdca_iters", "must be >= 1"));
        }
        if self.dca_cap == Some(0) {
            return Err(ConfigError::new("dca_cap", "must be >= 1"));
        }
        if self.solver.variant == Variant::Dca {
            return Err(ConfigError::new("solver.variant", "the compared method must be a boosted variant"));
        }
        Ok(())
    }

    pub fn dca_cap(&self) -> usize {
        self.dca_cap.unwrap_or(100 * self.bdca_iters)
    }

    /// A copy with every defaulted field written out.
    pub fn resolved(&self) -> Self {
        let mut out = self.clone();
        out.dca_cap = Some(self.dca_cap());
        out
    }

    /// Start point of `trial` for problem number `problem_index`.
    pub fn start_point(&self, problem_index: usize, trial: usize, m: usize) -> Vector {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(((problem_index as u64) << 32) | trial as u64);
        let (lo, hi) = self.x0_box;
        Vector::from_iterator(m, (0..m).map(|_| if lo == hi { lo } else { rng.gen_range(lo..hi) }))
    }
}

/// Both runs of one matched-target trial.
#[derive(Debug, Clone)]
pub struct MatchedOutcome {
    pub bdca: SolveResult,
    pub dca: SolveResult,
    /// `phi` at the end of the boosted run.
    pub target: f64,
    /// DCA stopped before reaching the target.
    pub dca_cap_exceeded: bool,
}

/// Runs the boosted variant for `spec.bdca_iters` iterations, then DCA from
/// the same point until `phi(x_k) <= target` or `spec.dca_cap()`.
pub fn run_matched_target(problem: &DcProblem, x0: &Vector, spec: &ExperimentSpec) -> Result<MatchedOutcome, ConfigError> {
    let mut bcfg = spec.solver.clone();
    bcfg.max_outer_iters = spec.bdca_iters;
    bcfg.phi_target = None;
    let bdca = solve(problem, x0, &bcfg)?;
    let target = bdca.phi_final;

    let mut dcfg = spec.solver.clone().with_variant(Variant::Dca);
    dcfg.max_outer_iters = spec.dca_cap();
    dcfg.phi_target = target.is_finite().then_some(target);
    let dca = solve(problem, x0, &dcfg)?;
    // DCA may also stop at the same stationary level a rounding error above
    // the target; that counts as reaching it.
    let dca_cap_exceeded = match dca.status {
        Status::TargetReached => false,
        Status::StationaryPoint => !(dca.phi_final <= target + MATCH_TOL * (1.0 + target.abs())),
        _ => !(dca.phi_final <= target),
    };
    Ok(MatchedOutcome {
        bdca,
        dca,
        target,
        dca_cap_exceeded,
    })
}

/// One start point of one problem.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub problem_index: usize,
    pub model: String,
    pub trial: usize,
    pub phi_x0: f64,
    /// `None` when either run failed or could not start.
    pub outcome: Option<MatchedOutcome>,
    pub error: Option<String>,
}

impl TrialRecord {
    /// `iters_DCA / iters_BDCA` for a completed trial.
    pub fn iteration_ratio(&self) -> Option<f64> {
        let o = self.outcome.as_ref()?;
        Some(o.dca.iterations as f64 / o.bdca.iterations.max(1) as f64)
    }
}

/// One line of the comparison table, grouped as
/// data | instances | bdca | dca | ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub data_model: String,
    pub data_m: usize,
    pub data_n: usize,
    pub instances_trials: usize,
    pub instances_failed: usize,
    pub instances_cap_exceeded: usize,
    pub instances_avg_phi_x0: f64,
    pub instances_avg_phi_end_bdca: f64,
    pub instances_avg_phi_end_dca: f64,
    pub bdca_time_min_ms: f64,
    pub bdca_time_max_ms: f64,
    pub bdca_time_avg_ms: f64,
    pub bdca_iters_min: usize,
    pub bdca_iters_max: usize,
    pub bdca_iters_avg: f64,
    pub dca_time_min_ms: f64,
    pub dca_time_max_ms: f64,
    pub dca_time_avg_ms: f64,
    pub dca_iters_min: usize,
    pub dca_iters_max: usize,
    pub dca_iters_avg: f64,
    pub ratio_iters: f64,
    pub ratio_time: f64,
}

impl ComparisonRow {
    /// Some trials failed or never reached the target.
    pub fn is_partial(&self) -> bool {
        self.instances_failed > 0 || self.instances_cap_exceeded > 0
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub rows: Vec<ComparisonRow>,
    pub trials: Vec<TrialRecord>,
}

impl ExperimentOutput {
    pub fn completed_trials(&self) -> usize {
        self.trials.iter().filter(|t| t.outcome.is_some()).count()
    }
}

fn run_trial(index: usize, loaded: &LoadedProblem, trial: usize, spec: &ExperimentSpec) -> TrialRecord {
    let x0 = spec.start_point(index, trial, loaded.m);
    let phi_x0 = loaded.problem.phi(&x0).unwrap_or(f64::NAN);
    let mut rec = TrialRecord {
        problem_index: index,
        model: loaded.name.clone(),
        trial,
        phi_x0,
        outcome: None,
        error: None,
    };
    match run_matched_target(&loaded.problem, &x0, spec) {
        Ok(o) => {
            let failure = [&o.bdca, &o.dca]
                .iter()
                .find(|r| r.status.is_failure())
                .map(|r| format!("{}: {}", r.status, r.message.clone().unwrap_or_default()));
            if let Some(msg) = failure {
                log::warn!("{} trial {trial}: {msg}", loaded.name);
                rec.error = Some(msg);
            }
            rec.outcome = Some(o);
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

fn is_completed(t: &TrialRecord) -> bool {
    t.error.is_none() && t.outcome.is_some()
}

fn stats<T: Copy + PartialOrd + Into<f64>>(v: &[T]) -> (T, T, f64) {
    let mut min = v[0];
    let mut max = v[0];
    for &x in v {
        if x < min {
            min = x;
        }
        if x > max {
            max = x;
        }
    }
    let avg = v.iter().map(|&x| x.into()).sum::<f64>() / v.len() as f64;
    (min, max, avg)
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

/// Aggregates the completed trials of one problem (sorted by trial index).
pub fn aggregate(loaded: &LoadedProblem, trials: &[TrialRecord]) -> ComparisonRow {
    let mut sorted: Vec<&TrialRecord> = trials.iter().collect();
    sorted.sort_by_key(|t| t.trial);
    let done: Vec<&MatchedOutcome> = sorted
        .iter()
        .filter(|t| is_completed(t))
        .filter_map(|t| t.outcome.as_ref())
        .collect();
    let failed = sorted.len() - done.len();
    let cap_exceeded = done.iter().filter(|o| o.dca_cap_exceeded).count();

    let nan3 = (f64::NAN, f64::NAN, f64::NAN);
    let (bt, bi, dt, di) = if done.is_empty() {
        (nan3, (0, 0, f64::NAN), nan3, (0, 0, f64::NAN))
    } else {
        let bt: Vec<f64> = done.iter().map(|o| o.bdca.elapsed_ms).collect();
        let bi: Vec<u32> = done.iter().map(|o| o.bdca.iterations as u32).collect();
        let dt: Vec<f64> = done.iter().map(|o| o.dca.elapsed_ms).collect();
        let di: Vec<u32> = done.iter().map(|o| o.dca.iterations as u32).collect();
        let (a, b, c) = stats(&bi);
        let (d, e, f) = stats(&di);
        (stats(&bt), (a as usize, b as usize, c), stats(&dt), (d as usize, e as usize, f))
    };
    ComparisonRow {
        data_model: loaded.name.clone(),
        data_m: loaded.m,
        data_n: loaded.n,
        instances_trials: sorted.len(),
        instances_failed: failed,
        instances_cap_exceeded: cap_exceeded,
        instances_avg_phi_x0: mean(sorted.iter().map(|t| t.phi_x0)),
        instances_avg_phi_end_bdca: mean(done.iter().map(|o| o.bdca.phi_final)),
        instances_avg_phi_end_dca: mean(done.iter().map(|o| o.dca.phi_final)),
        bdca_time_min_ms: bt.0,
        bdca_time_max_ms: bt.1,
        bdca_time_avg_ms: bt.2,
        bdca_iters_min: bi.0,
        bdca_iters_max: bi.1,
        bdca_iters_avg: bi.2,
        dca_time_min_ms: dt.0,
        dca_time_max_ms: dt.1,
        dca_time_avg_ms: dt.2,
        dca_iters_min: di.0,
        dca_iters_max: di.1,
        dca_iters_avg: di.2,
        ratio_iters: di.2 / bi.2,
        ratio_time: dt.2 / bt.2,
    }
}

/// Runs every trial of every problem (in parallel) and aggregates.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput, HarnessError> {
    spec.validate()?;
    let loaded: Vec<LoadedProblem> = spec
        .problems
        .iter()
        .map(|p| p.load(spec.rho))
        .collect::<Result<_, _>>()?;
    let jobs: Vec<(usize, usize)> = (0..loaded.len())
        .flat_map(|i| (0..spec.trials).map(move |t| (i, t)))
        .collect();
    let trials: Vec<TrialRecord> = jobs
        .par_iter()
        .map(|&(i, t)| run_trial(i, &loaded[i], t, spec))
        .collect();
    let rows = loaded
        .iter()
        .enumerate()
        .map(|(i, lp)| {
            let mine: Vec<TrialRecord> = trials.iter().filter(|t| t.problem_index == i).cloned().collect();
            aggregate(lp, &mine)
        })
        .collect();
    Ok(ExperimentOutput { rows, trials })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quartic_spec(trials: usize) -> ExperimentSpec {
        ExperimentSpec {
            problems: vec![ProblemSource::Builtin { name: "quartic".into() }],
            trials,
            x0_box: (0.1, 2.0),
            bdca_iters: 50,
            ..ExperimentSpec::default()
        }
    }

    #[test]
    fn single_trial_row_has_equal_stats() {
        let out = run_experiment(&quartic_spec(1)).unwrap();
        assert_eq!(out.rows.len(), 1);
        let r = &out.rows[0];
        assert_eq!(r.bdca_iters_min, r.bdca_iters_max);
        assert_eq!(r.bdca_iters_avg, r.bdca_iters_min as f64);
        assert_eq!(r.dca_iters_min, r.dca_iters_max);
        assert_eq!(r.bdca_time_min_ms, r.bdca_time_max_ms);
        assert_eq!(r.bdca_time_avg_ms, r.bdca_time_min_ms);
    }

    #[test]
    fn stationary_start_needs_no_iterations() {
        let spec = ExperimentSpec {
            x0_box: (1.0, 1.0),
            ..quartic_spec(1)
        };
        let o = run_matched_target(&builtin("quartic").unwrap(), &Vector::from_element(1, 1.0), &spec).unwrap();
        assert_eq!(o.bdca.iterations, 0);
        assert_eq!(o.dca.iterations, 0);
        assert!(!o.dca_cap_exceeded);
    }

    #[test]
    fn matched_target_holds_and_is_deterministic() {
        let spec = quartic_spec(4);
        let a = run_experiment(&spec).unwrap();
        let b = run_experiment(&spec).unwrap();
        for (x, y) in a.trials.iter().zip(&b.trials) {
            let (ox, oy) = (x.outcome.as_ref().unwrap(), y.outcome.as_ref().unwrap());
            assert!(!ox.dca_cap_exceeded);
            assert!(ox.dca.phi_final <= ox.bdca.phi_final + MATCH_TOL * (1.0 + ox.bdca.phi_final.abs()));
            assert_eq!(ox.dca.iterations, oy.dca.iterations);
            assert_eq!(ox.bdca.phi_final.to_bits(), oy.bdca.phi_final.to_bits());
        }
    }

    #[test]
    fn spec_validation() {
        let mut spec = quartic_spec(0);
        assert_eq!(spec.validate().unwrap_err().field, "trials");
        spec.trials = 1;
        spec.solver.beta = 1.5;
        assert_eq!(spec.validate().unwrap_err().field, "beta");
        spec.solver.beta = 0.5;
        spec.solver.variant = Variant::Dca;
        assert!(spec.validate().is_err());
        assert_eq!(quartic_spec(1).resolved().dca_cap, Some(5000));
    }

    #[test]
    fn spec_json_round_trip() {
        let mut spec = quartic_spec(3);
        spec.problems.push(ProblemSource::Generated { m: 20, n: 30, seed: 7 });
        spec.rho = Some(10.0);
        let text = serde_json::to_string_pretty(&spec.resolved()).unwrap();
        let back: ExperimentSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec.resolved());
    }
}

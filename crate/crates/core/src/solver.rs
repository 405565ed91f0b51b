//! Outer loops: the classical DC Algorithm, the two Boosted DCA variants and
//! the Fukushima-Mine Armijo baseline.
//!
//! Every variant solves the same subproblem to obtain `y_k` from `x_k`. DCA
//! takes `x_{k+1} = y_k`. BDCA then searches along `d_k = y_k - x_k` from
//! `y_k` with positive step sizes, either starting from a fixed trial step
//! (`BdcaB`) or from the minimizer of a quadratic model of
//! `lambda -> phi(y_k + lambda d_k)` (`BdcaQi`). Fukushima-Mine searches
//! from `x_k` with steps `beta^l`, which never goes past `y_k`.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, EvalError, StepError};
use crate::inner::{minimize_subproblem, InnerConfig, Proximal, SubproblemSpec};
use crate::problem::{DcProblem, Order, Vector};

/// Outer algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "dca")]
    Dca,
    #[serde(rename = "bdca-b")]
    BdcaB,
    #[serde(rename = "bdca-qi")]
    BdcaQi,
    #[serde(rename = "fm")]
    Fm,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Dca, Variant::BdcaB, Variant::BdcaQi, Variant::Fm];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Dca => "dca",
            Variant::BdcaB => "bdca-b",
            Variant::BdcaQi => "bdca-qi",
            Variant::Fm => "fm",
        }
    }

    pub fn is_boosted(self) -> bool {
        matches!(self, Variant::BdcaB | Variant::BdcaQi)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "dca" => Ok(Variant::Dca),
            "bdca-b" | "bdca" => Ok(Variant::BdcaB),
            "bdca-qi" => Ok(Variant::BdcaQi),
            "fm" => Ok(Variant::Fm),
            other => Err(ConfigError::new(
                "variant",
                format!("unknown variant '{other}' (expected dca, bdca-b, bdca-qi or fm)"),
            )),
        }
    }
}

/// Outer-loop parameters. Defaults: `alpha = 0.4`, `beta = 0.5`,
/// `lambda_bar = 50`, `lambda_max = 200`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub variant: Variant,
    /// Armijo constant.
    pub alpha: f64,
    /// Backtracking factor in `(0, 1)`.
    pub beta: f64,
    /// Initial trial step.
    pub lambda_bar: f64,
    /// Cap on the interpolated step (`BdcaQi`).
    pub lambda_max: f64,
    pub max_outer_iters: usize,
    pub max_backtracks: usize,
    /// Stop when `|d_k| <= tol_d`; `None` means `1e-8 * sqrt(m)`.
    pub tol_d: Option<f64>,
    /// Stop when `|x_{k+1} - x_k| <= tol_x`; `None` means `1e-8 * sqrt(m)`.
    pub tol_x: Option<f64>,
    pub inner: InnerConfig,
    /// Adds `|x - x_k|^2 / (2c)` to every subproblem.
    pub proximal_c: Option<f64>,
    /// Stop as soon as `phi(x_k) <= phi_target`.
    pub phi_target: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            variant: Variant::BdcaQi,
            alpha: 0.4,
            beta: 0.5,
            lambda_bar: 50.0,
            lambda_max: 200.0,
            max_outer_iters: 5000,
            max_backtracks: 60,
            tol_d: None,
            tol_x: None,
            inner: InnerConfig::default(),
            proximal_c: None,
            phi_target: None,
        }
    }
}

impl SolverConfig {
    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.alpha) {
            return Err(ConfigError::new("alpha", format!("must be > 0, got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(ConfigError::new("beta", format!("must lie in (0, 1), got {}", self.beta)));
        }
        if !positive(self.lambda_bar) {
            return Err(ConfigError::new(
                "lambda_bar",
                format!("must be > 0, got {}", self.lambda_bar),
            ));
        }
        if !(self.lambda_max.is_finite() && self.lambda_max > self.lambda_bar) {
            return Err(ConfigError::new(
                "lambda_max",
                format!("must exceed lambda_bar = {}, got {}", self.lambda_bar, self.lambda_max),
            ));
        }
        if self.max_outer_iters == 0 {
            return Err(ConfigError::new("max_outer_iters", "must be positive"));
        }
        if self.max_backtracks == 0 {
            return Err(ConfigError::new("max_backtracks", "must be positive"));
        }
        for (field, tol) in [("tol_d", self.tol_d), ("tol_x", self.tol_x)] {
            if let Some(t) = tol {
                if !(t.is_finite() && t >= 0.0) {
                    return Err(ConfigError::new(field, format!("must be >= 0, got {t}")));
                }
            }
        }
        if !positive(self.inner.tol_grad) {
            return Err(ConfigError::new("inner.tol_grad", "must be > 0"));
        }
        if self.inner.max_iters == 0 {
            return Err(ConfigError::new("inner.max_iters", "must be positive"));
        }
        if !positive(self.inner.damping_floor) {
            return Err(ConfigError::new("inner.damping_floor", "must be > 0"));
        }
        if let Some(c) = self.proximal_c {
            if !positive(c) {
                return Err(ConfigError::new("proximal_c", format!("must be > 0, got {c}")));
            }
        }
        Ok(())
    }

    /// Conditions under which the convergence theory does not cover the run.
    /// These are reported, not rejected.
    pub fn warnings(&self, problem: &DcProblem) -> Vec<String> {
        let mut out = Vec::new();
        let mh = problem.modulus_h();
        if self.variant != Variant::Dca && self.alpha >= mh {
            out.push(format!(
                "alpha = {} >= sigma_h + rho = {mh}: finite termination of the line search is not guaranteed",
                self.alpha
            ));
        }
        if problem.modulus_g() == 0.0 && self.proximal_c.is_none() {
            out.push("sigma_g + rho = 0: the subproblem is only strictly convex".to_string());
        }
        out
    }

    pub fn tol_d_for(&self, m: usize) -> f64 {
        self.tol_d.unwrap_or(1e-8 * (m as f64).sqrt())
    }

    pub fn tol_x_for(&self, m: usize) -> f64 {
        self.tol_x.unwrap_or(1e-8 * (m as f64).sqrt())
    }
}

/// One outer iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    /// `phi(x_k)`
    pub phi_x: f64,
    /// `phi(y_k)`
    pub phi_y: f64,
    /// `|d_k|`
    pub norm_d: f64,
    /// Accepted step; 0 for DCA and for the stopping iteration. For
    /// Fukushima-Mine this is `beta^l - 1`, so that `x_{k+1} = y_k + lambda d_k`
    /// holds for every variant.
    pub lambda: f64,
    pub backtracks: usize,
    pub inner_iters: usize,
    /// Wall time since the start of the solve.
    pub elapsed_ms: f64,
    /// `<grad phi(y_k), d_k>`, absent when not evaluated.
    #[serde(skip)]
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    StationaryPoint,
    MaxIters,
    /// `phi(x_k)` reached `SolverConfig::phi_target`.
    TargetReached,
    LineSearchFailure,
    NumericalFailure,
}

impl Status {
    pub fn is_failure(self) -> bool {
        matches!(self, Status::LineSearchFailure | Status::NumericalFailure)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::StationaryPoint => "stationary-point",
            Status::MaxIters => "max-iters",
            Status::TargetReached => "target-reached",
            Status::LineSearchFailure => "line-search-failure",
            Status::NumericalFailure => "numerical-failure",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x_final: Vector,
    pub phi_final: f64,
    pub status: Status,
    /// Number of completed updates `x_k -> x_{k+1}`.
    pub iterations: usize,
    pub trace: Vec<TraceRecord>,
    /// Failure detail for failure statuses.
    pub message: Option<String>,
    pub elapsed_ms: f64,
}

fn subproblem_modulus(problem: &DcProblem, cfg: &SolverConfig) -> f64 {
    problem.modulus_g() + cfg.proximal_c.map_or(0.0, |c| 1.0 / c)
}

/// Solves the DCA subproblem at `x_k`, returning `y_k` and the number of
/// inner iterations.
pub fn dca_step(problem: &DcProblem, x_k: &Vector, cfg: &SolverConfig) -> Result<(Vector, usize), StepError> {
    if x_k.iter().any(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite { what: "iterate" }.into());
    }
    let grad_h = problem.eval_h(x_k, Order::Gradient)?.gradient.unwrap();
    let eval_g = |y: &Vector, order: Order| problem.eval_g(y, order);
    let spec = SubproblemSpec {
        eval_g: &eval_g,
        linear_term: grad_h,
        proximal: cfg.proximal_c.map(|c| Proximal {
            center: x_k.clone(),
            c,
        }),
        modulus: subproblem_modulus(problem, cfg),
    };
    let out = minimize_subproblem(&spec, x_k, &cfg.inner).map_err(|e| StepError::Numerical(e.to_string()))?;
    Ok((out.y, out.iters))
}

/// `<grad phi(y_k), d_k>`.
pub fn descent_slope(problem: &DcProblem, y_k: &Vector, d_k: &Vector) -> Result<f64, EvalError> {
    if d_k.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    Ok(problem.grad_phi(y_k)?.dot(d_k))
}

/// Outcome of a line search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearch {
    pub lambda: f64,
    pub backtracks: usize,
    /// `phi` at the accepted point.
    pub phi: f64,
}

/// Backtracking from `lambda_init`: returns the first `lambda` in
/// `lambda_init * beta^i` with `phi(y + lambda d) <= phi(y) - alpha lambda |d|^2`.
/// Non-finite or failed evaluations count as violations.
pub fn backtrack(
    problem: &DcProblem,
    y_k: &Vector,
    d_k: &Vector,
    lambda_init: f64,
    cfg: &SolverConfig,
) -> Result<(f64, usize), StepError> {
    let phi_y = problem.phi(y_k)?;
    let ls = backtrack_from(problem, y_k, d_k, phi_y, lambda_init, None, cfg)?;
    Ok((ls.lambda, ls.backtracks))
}

fn backtrack_from(
    problem: &DcProblem,
    y: &Vector,
    d: &Vector,
    phi_y: f64,
    lambda_init: f64,
    phi_at_init: Option<f64>,
    cfg: &SolverConfig,
) -> Result<LineSearch, StepError> {
    let dd = d.norm_squared();
    let mut lambda = lambda_init;
    for i in 0..=cfg.max_backtracks {
        let phi = match (i, phi_at_init) {
            (0, Some(v)) => Ok(v),
            _ => problem.phi(&(y + d * lambda)),
        };
        if let Ok(phi) = phi {
            if phi <= phi_y - cfg.alpha * lambda * dd {
                return Ok(LineSearch {
                    lambda,
                    backtracks: i,
                    phi,
                });
            }
        }
        lambda *= cfg.beta;
    }
    Err(StepError::LineSearch {
        trials: cfg.max_backtracks + 1,
    })
}

/// Minimizer of the quadratic interpolating `phi0`, the slope `dphi0` at 0 and
/// `phi_at_lambda_bar`. Absent when the quadratic is not strictly convex.
pub fn quad_interp_lambda(phi0: f64, dphi0: f64, phi_at_lambda_bar: f64, lambda_bar: f64) -> Option<f64> {
    let excess = phi_at_lambda_bar - phi0 - dphi0 * lambda_bar;
    if excess > 0.0 && excess.is_finite() {
        Some(-dphi0 * lambda_bar * lambda_bar / (2.0 * excess))
    } else {
        None
    }
}

/// Initial trial step for `BdcaQi`.
pub fn bdca_qi_select(problem: &DcProblem, y_k: &Vector, d_k: &Vector, cfg: &SolverConfig) -> Result<f64, EvalError> {
    let phi_y = problem.phi(y_k)?;
    let slope = descent_slope(problem, y_k, d_k)?;
    Ok(qi_select(problem, y_k, d_k, phi_y, slope, cfg).0)
}

// Returns the trial step and, when already computed, phi at that step.
fn qi_select(
    problem: &DcProblem,
    y: &Vector,
    d: &Vector,
    phi_y: f64,
    slope: f64,
    cfg: &SolverConfig,
) -> (f64, Option<f64>) {
    let phi_bar = match problem.phi(&(y + d * cfg.lambda_bar)) {
        Ok(v) => v,
        Err(_) => return (cfg.lambda_bar, None),
    };
    let fallback = (cfg.lambda_bar, Some(phi_bar));
    let Some(hat) = quad_interp_lambda(phi_y, slope, phi_bar, cfg.lambda_bar) else {
        return fallback;
    };
    if !(hat > 0.0) {
        return fallback;
    }
    match problem.phi(&(y + d * hat)) {
        Ok(phi_hat) if phi_hat < phi_bar => {
            if hat <= cfg.lambda_max {
                (hat, Some(phi_hat))
            } else {
                (cfg.lambda_max, None)
            }
        }
        _ => fallback,
    }
}

/// Fukushima-Mine step: the smallest `l >= 0` with
/// `phi(x + beta^l d) <= phi(x) - alpha beta^l |d|^2`, `d = y - x`.
pub fn fm_step(problem: &DcProblem, x_k: &Vector, y_k: &Vector, cfg: &SolverConfig) -> Result<(Vector, usize), StepError> {
    let phi_x = problem.phi(x_k)?;
    let (x_next, ls) = fm_search(problem, x_k, y_k, phi_x, cfg)?;
    Ok((x_next, ls.backtracks))
}

fn fm_search(
    problem: &DcProblem,
    x: &Vector,
    y: &Vector,
    phi_x: f64,
    cfg: &SolverConfig,
) -> Result<(Vector, LineSearch), StepError> {
    let d = y - x;
    let ls = backtrack_from(problem, x, &d, phi_x, 1.0, None, cfg)?;
    Ok((x + &d * ls.lambda, ls))
}

/// Runs the configured outer algorithm from `x0`.
///
/// Failures during the run are reported through [`SolveResult::status`] with
/// the partial trace; only invalid configuration or starting points are
/// returned as errors.
pub fn solve(problem: &DcProblem, x0: &Vector, cfg: &SolverConfig) -> Result<SolveResult, ConfigError> {
    cfg.validate()?;
    if x0.len() != problem.dim() {
        return Err(ConfigError::new(
            "x0",
            format!("expected length {}, got {}", problem.dim(), x0.len()),
        ));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(ConfigError::new("x0", "must be finite"));
    }
    if problem.modulus_h() <= 0.0 {
        return Err(ConfigError::new(
            "rho",
            "sigma_h + rho must be positive for d_k to be a descent direction",
        ));
    }
    for w in cfg.warnings(problem) {
        log::warn!("{w}");
    }

    let m = problem.dim();
    let tol_d = cfg.tol_d_for(m);
    let tol_x = cfg.tol_x_for(m);
    let start = Instant::now();
    let ms = |t: &Instant| t.elapsed().as_secs_f64() * 1e3;

    let mut trace = Vec::new();
    let mut x = x0.clone();
    let mut phi_x = match problem.phi(&x) {
        Ok(v) => v,
        Err(e) => {
            return Ok(SolveResult {
                x_final: x,
                phi_final: f64::NAN,
                status: Status::NumericalFailure,
                iterations: 0,
                trace,
                message: Some(format!("phi(x0): {e}")),
                elapsed_ms: ms(&start),
            })
        }
    };
    let finish = |x: Vector, phi: f64, status, iterations, trace, message: Option<String>| SolveResult {
        x_final: x,
        phi_final: phi,
        status,
        iterations,
        trace,
        message,
        elapsed_ms: ms(&start),
    };

    for k in 0..cfg.max_outer_iters {
        if cfg.phi_target.is_some_and(|t| phi_x <= t) {
            return Ok(finish(x, phi_x, Status::TargetReached, k, trace, None));
        }
        let (y, inner_iters) = match dca_step(problem, &x, cfg) {
            Ok(v) => v,
            Err(e) => return Ok(finish(x, phi_x, Status::NumericalFailure, k, trace, Some(e.to_string()))),
        };
        let phi_y = match problem.phi(&y) {
            Ok(v) => v,
            Err(e) => return Ok(finish(x, phi_x, Status::NumericalFailure, k, trace, Some(e.to_string()))),
        };
        let d = &y - &x;
        let norm_d = d.norm();
        let mut record = TraceRecord {
            k,
            phi_x,
            phi_y,
            norm_d,
            lambda: 0.0,
            backtracks: 0,
            inner_iters,
            elapsed_ms: 0.0,
            slope: None,
        };
        if norm_d <= tol_d {
            record.elapsed_ms = ms(&start);
            trace.push(record);
            return Ok(finish(x, phi_x, Status::StationaryPoint, k, trace, None));
        }
        let slope = descent_slope(problem, &y, &d).ok();
        record.slope = slope;

        let step = match cfg.variant {
            Variant::Dca => Ok((y.clone(), 0.0, 0, phi_y)),
            Variant::BdcaB => backtrack_from(problem, &y, &d, phi_y, cfg.lambda_bar, None, cfg)
                .map(|ls| (&y + &d * ls.lambda, ls.lambda, ls.backtracks, ls.phi)),
            Variant::BdcaQi => {
                let (init, known) = match slope {
                    Some(s) => qi_select(problem, &y, &d, phi_y, s, cfg),
                    None => (cfg.lambda_bar, None),
                };
                backtrack_from(problem, &y, &d, phi_y, init, known, cfg)
                    .map(|ls| (&y + &d * ls.lambda, ls.lambda, ls.backtracks, ls.phi))
            }
            Variant::Fm => fm_search(problem, &x, &y, phi_x, cfg)
                .map(|(xn, ls)| (xn, ls.lambda - 1.0, ls.backtracks, ls.phi)),
        };
        let (x_next, lambda, backtracks, phi_next) = match step {
            Ok(s) => s,
            Err(e) => {
                record.elapsed_ms = ms(&start);
                trace.push(record);
                return Ok(finish(y, phi_y, Status::LineSearchFailure, k, trace, Some(e.to_string())));
            }
        };
        record.lambda = lambda;
        record.backtracks = backtracks;
        record.elapsed_ms = ms(&start);
        trace.push(record);

        let moved = (&x_next - &x).norm();
        x = x_next;
        phi_x = phi_next;
        if cfg.variant != Variant::Fm && moved <= tol_x {
            return Ok(finish(x, phi_x, Status::StationaryPoint, k + 1, trace, None));
        }
    }
    let iterations = cfg.max_outer_iters;
    if cfg.phi_target.is_some_and(|t| phi_x <= t) {
        return Ok(finish(x, phi_x, Status::TargetReached, iterations, trace, None));
    }
    Ok(finish(x, phi_x, Status::MaxIters, iterations, trace, None))
}

//! Post-hoc checks of the descent inequalities over a solver trace.

use serde::{Deserialize, Serialize};

use crate::solver::TraceRecord;

/// The inequality a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    /// `phi(y_k) <= phi(x_k) - rho_eff |d_k|^2`
    Decrease,
    /// `<grad phi(y_k), d_k> <= -(sigma_h + rho) |d_k|^2`
    DescentSlope,
    /// `phi(x_{k+1}) <= phi(x_k) - (alpha lambda_k + rho_eff) |d_k|^2`
    CombinedDecrease,
    /// `sum_{k<N} rho_eff |d_k|^2 <= phi(x_0) - phi(x_N)`
    Summability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub iteration: usize,
    pub inequality: Inequality,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub violations: Vec<Violation>,
    /// Relative tolerance: each check allows `audit_tol * (1 + |phi(x_k)|)`.
    pub audit_tol: f64,
    pub passed: bool,
}

/// Moduli and step parameters the inequalities depend on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditParams {
    pub sigma_g: f64,
    pub sigma_h: f64,
    pub rho: f64,
    pub alpha: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-6
}

impl AuditParams {
    pub fn new(sigma_g: f64, sigma_h: f64, rho: f64, alpha: f64) -> Self {
        Self {
            sigma_g,
            sigma_h,
            rho,
            alpha,
            tol: default_tol(),
        }
    }

    pub fn for_problem(problem: &crate::DcProblem, alpha: f64) -> Self {
        Self::new(problem.sigma_g(), problem.sigma_h(), problem.rho(), alpha)
    }

    fn rho_eff(&self) -> f64 {
        0.5 * (self.sigma_g + self.sigma_h) + self.rho
    }
}

/// Checks every record of `trace`.
///
/// `phi(x_{k+1})` is read from the next record; for the last record it is
/// `final_phi` when given, otherwise that check is skipped. The slope check
/// runs only on records that carry a slope (traces read back from CSV do
/// not). A combined-decrease failure at step `k` is reported at iteration
/// `k + 1`, the index of the offending value. Summability is checked on each
/// prefix that is free of per-step violations.
pub fn audit_trace(trace: &[TraceRecord], final_phi: Option<f64>, params: &AuditParams) -> AuditReport {
    let rho_eff = params.rho_eff();
    let mod_h = params.sigma_h + params.rho;
    let tol = params.tol;
    let mut violations = Vec::new();
    let mut clean_until = trace.len();

    for (idx, rec) in trace.iter().enumerate() {
        let d2 = rec.norm_d * rec.norm_d;
        let tol_k = tol * (1.0 + rec.phi_x.abs());
        let mut flag = |v: Violation| {
            clean_until = clean_until.min(v.iteration);
            violations.push(v);
        };

        let rhs = rec.phi_x - rho_eff * d2;
        if rec.phi_y > rhs + tol_k {
            flag(Violation {
                iteration: rec.k,
                inequality: Inequality::Decrease,
                lhs: rec.phi_y,
                rhs,
            });
        }
        if let Some(slope) = rec.slope {
            let rhs = -mod_h * d2;
            if rec.norm_d > 0.0 && slope > rhs + tol * (1.0 + d2) {
                flag(Violation {
                    iteration: rec.k,
                    inequality: Inequality::DescentSlope,
                    lhs: slope,
                    rhs,
                });
            }
        }
        let next = trace.get(idx + 1).map(|r| r.phi_x).or(if idx + 1 == trace.len() { final_phi } else { None });
        if let Some(next) = next {
            let rhs = rec.phi_x - (params.alpha * rec.lambda + rho_eff) * d2;
            if next > rhs + tol_k {
                flag(Violation {
                    iteration: rec.k + 1,
                    inequality: Inequality::CombinedDecrease,
                    lhs: next,
                    rhs,
                });
            }
        }
    }

    if let Some(first) = trace.first() {
        let phi0 = first.phi_x;
        let mut sum = 0.0;
        let mut slack = 0.0;
        for (idx, rec) in trace.iter().enumerate() {
            sum += rho_eff * rec.norm_d * rec.norm_d;
            slack += tol * (1.0 + rec.phi_x.abs());
            let n = rec.k + 1;
            if n >= clean_until {
                break;
            }
            let phi_n = match trace.get(idx + 1) {
                Some(r) => r.phi_x,
                None => match final_phi {
                    Some(v) => v,
                    None => break,
                },
            };
            let rhs = phi0 - phi_n;
            if sum > rhs + slack {
                violations.push(Violation {
                    iteration: n,
                    inequality: Inequality::Summability,
                    lhs: sum,
                    rhs,
                });
                break;
            }
        }
    }

    AuditReport {
        passed: violations.is_empty(),
        violations,
        audit_tol: tol,
    }
}

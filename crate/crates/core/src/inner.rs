//! Damped Newton solver for the strongly convex DCA subproblem
//!
//! ```text
//! minimize F(y) = g(y) - <linear_term, y> + |y - center|^2 / (2c)
//! ```
//!
//! where the proximal term is optional. Each iteration factors the Hessian
//! once (adding diagonal damping only if the factorization fails) and runs an
//! Armijo line search on `F` with slope factor `1e-4` and halving.

use nalgebra::Cholesky;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::EvalError;
use crate::problem::{Evaluation, Matrix, Order, Vector};

const ARMIJO_SLOPE: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const SOLVE_RESIDUAL: f64 = 1e-10;
const MAX_DAMPING_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InnerError {
    #[error("no stationary point within {iters} Newton iterations (residual {residual:e})")]
    MaxIters { iters: usize, residual: f64 },
    #[error("line search stalled at residual {residual:e}")]
    Stalled { residual: f64 },
    #[error("damping exceeded {limit:e} without a successful factorization")]
    Factorization { limit: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Inner solver parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InnerConfig {
    /// Stop when `|grad F(y)| <= tol_grad`.
    pub tol_grad: f64,
    pub max_iters: usize,
    /// First nonzero diagonal shift tried by [`spd_solve`].
    pub damping_floor: f64,
    /// Keep every inner iterate in [`InnerOutcome::path`].
    #[serde(skip)]
    pub record_path: bool,
}

impl Default for InnerConfig {
    fn default() -> Self {
        Self {
            tol_grad: 1e-8,
            max_iters: 200,
            damping_floor: 1e-10,
            record_path: false,
        }
    }
}

/// Proximal term `|y - center|^2 / (2 c)`.
#[derive(Debug, Clone)]
pub struct Proximal {
    pub center: Vector,
    pub c: f64,
}

/// The subproblem `g(y) - <linear_term, y>` (+ proximal term).
pub struct SubproblemSpec<'a> {
    pub eval_g: &'a dyn Fn(&Vector, Order) -> Result<Evaluation, EvalError>,
    pub linear_term: Vector,
    pub proximal: Option<Proximal>,
    /// Lower bound on the spectrum of the Hessian of `F`.
    pub modulus: f64,
}

/// One point visited by the Newton iteration.
#[derive(Debug, Clone)]
pub struct InnerStep {
    pub y: Vector,
    pub objective: f64,
    pub gradient: Vector,
}

#[derive(Debug, Clone)]
pub struct InnerOutcome {
    pub y: Vector,
    pub iters: usize,
    /// `|grad F(y)|` at the returned point.
    pub residual: f64,
    /// Visited iterates, filled only with `record_path`.
    pub path: Vec<InnerStep>,
}

impl SubproblemSpec<'_> {
    /// Value and gradient of `F`, and the Hessian when asked.
    fn evaluate(&self, y: &Vector, order: Order) -> Result<(f64, Option<Vector>, Option<Matrix>), EvalError> {
        let e = (self.eval_g)(y, order)?;
        let mut value = e.value - self.linear_term.dot(y);
        let mut grad = e.gradient.map(|g| g - &self.linear_term);
        let mut hess = e.hessian;
        if let Some(prox) = &self.proximal {
            let diff = y - &prox.center;
            value += diff.norm_squared() / (2.0 * prox.c);
            if let Some(g) = grad.as_mut() {
                g.axpy(1.0 / prox.c, &diff, 1.0);
            }
            if let Some(h) = hess.as_mut() {
                for i in 0..h.nrows() {
                    h[(i, i)] += 1.0 / prox.c;
                }
            }
        }
        if !value.is_finite() {
            return Err(EvalError::NonFinite { what: "subproblem objective" });
        }
        Ok((value, grad, hess))
    }

    /// Value of `F` at `y`.
    pub fn objective(&self, y: &Vector) -> Result<f64, EvalError> {
        Ok(self.evaluate(y, Order::Value)?.0)
    }

    /// Gradient of `F` at `y`.
    pub fn gradient(&self, y: &Vector) -> Result<Vector, EvalError> {
        Ok(self.evaluate(y, Order::Gradient)?.1.unwrap())
    }
}

/// Minimizes the subproblem starting from `x_init`.
pub fn minimize_subproblem(
    spec: &SubproblemSpec<'_>,
    x_init: &Vector,
    cfg: &InnerConfig,
) -> Result<InnerOutcome, InnerError> {
    let mut y = x_init.clone();
    let mut path = Vec::new();
    let scale = 1.0 + spec.linear_term.norm();
    for iter in 0..=cfg.max_iters {
        let (value, grad, hess) = spec.evaluate(&y, Order::Hessian)?;
        let grad = grad.unwrap();
        let residual = grad.norm();
        if cfg.record_path {
            path.push(InnerStep {
                y: y.clone(),
                objective: value,
                gradient: grad.clone(),
            });
        }
        if residual <= cfg.tol_grad {
            return Ok(InnerOutcome {
                y,
                iters: iter,
                residual,
                path,
            });
        }
        if iter == cfg.max_iters {
            return Err(InnerError::MaxIters {
                iters: iter,
                residual,
            });
        }
        let (dir, _) = spd_solve(&hess.unwrap(), &(-&grad), cfg.damping_floor)?;
        let slope = grad.dot(&dir);
        // Once the predicted decrease is below the rounding level of F the
        // Armijo test carries no information, and neither does it when every
        // halving fails; fall back on the residual then.
        let noise = 64.0 * f64::EPSILON * (1.0 + value.abs() + spec.linear_term.dot(&y).abs());
        let next = if -slope > noise { armijo(spec, &y, &dir, value, slope) } else { None };
        let next = next.or_else(|| {
            let trial = &y + &dir;
            match spec.evaluate(&trial, Order::Gradient) {
                Ok((_, Some(g), _)) if g.norm() < residual => Some(trial),
                _ => None,
            }
        });
        match next {
            Some(n) => y = n,
            None if residual <= cfg.tol_grad * scale => {
                return Ok(InnerOutcome {
                    y,
                    iters: iter,
                    residual,
                    path,
                });
            }
            None => return Err(InnerError::Stalled { residual }),
        }
    }
    unreachable!("loop returns on its last iteration")
}

fn armijo(spec: &SubproblemSpec<'_>, y: &Vector, dir: &Vector, value: f64, slope: f64) -> Option<Vector> {
    let mut t = 1.0;
    for _ in 0..MAX_HALVINGS {
        let trial = y + dir * t;
        if let Ok(v) = spec.objective(&trial) {
            if v <= value + ARMIJO_SLOPE * t * slope {
                return Some(trial);
            }
        }
        t *= 0.5;
    }
    None
}

/// Solves `(H + mu I) d = b` for the smallest `mu` in
/// `{0, floor, 4 floor, 16 floor, ...}` whose Cholesky factorization succeeds
/// with relative backward error at most `1e-10`.
pub fn spd_solve(h: &Matrix, b: &Vector, damping_floor: f64) -> Result<(Vector, f64), InnerError> {
    if h.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite { what: "Newton system" }.into());
    }
    let n = h.nrows();
    if b.norm() == 0.0 {
        return Ok((Vector::zeros(n), 0.0));
    }
    let norm_inf = h
        .row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let limit = MAX_DAMPING_FACTOR * norm_inf;
    let mut mu = 0.0;
    while mu <= limit {
        let mut shifted = h.clone();
        for i in 0..n {
            shifted[(i, i)] += mu;
        }
        if let Some(chol) = Cholesky::new(shifted.clone()) {
            let d = chol.solve(b);
            // Backward error, which Cholesky keeps small however badly
            // conditioned the matrix is.
            let res = (&shifted * &d - b).norm() / ((norm_inf + mu) * d.norm() + b.norm());
            if d.iter().all(|v| v.is_finite()) && res <= SOLVE_RESIDUAL {
                return Ok((d, mu));
            }
        }
        mu = if mu == 0.0 { damping_floor } else { 4.0 * mu };
    }
    Err(InnerError::Factorization { limit })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quartic_g(y: &Vector, order: Order) -> Result<Evaluation, EvalError> {
        let t = y[0];
        Ok(Evaluation {
            value: 0.25 * t.powi(4),
            gradient: (order >= Order::Gradient).then(|| Vector::from_element(1, t.powi(3))),
            hessian: (order >= Order::Hessian).then(|| Matrix::from_element(1, 1, 3.0 * t * t)),
        })
    }

    #[test]
    fn quartic_subproblem_solves_cubic() {
        let spec = SubproblemSpec {
            eval_g: &quartic_g,
            linear_term: Vector::from_element(1, 27.0 / 125.0),
            proximal: None,
            modulus: 0.0,
        };
        let out = minimize_subproblem(&spec, &Vector::from_element(1, 27.0 / 125.0), &InnerConfig::default()).unwrap();
        assert!((out.y[0] - 0.6).abs() <= 1e-8, "{}", out.y[0]);
        assert!(out.residual <= 1e-8);
    }

    #[test]
    fn stationary_start_returns_immediately() {
        let x = Vector::from_element(1, 0.8);
        let spec = SubproblemSpec {
            eval_g: &quartic_g,
            linear_term: Vector::from_element(1, 0.8f64.powi(3)),
            proximal: None,
            modulus: 0.0,
        };
        let out = minimize_subproblem(&spec, &x, &InnerConfig::default()).unwrap();
        assert!(out.iters <= 1);
        assert!((out.y[0] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn quadratic_takes_one_newton_step() {
        let a = Matrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let g = {
            let a = a.clone();
            move |y: &Vector, order: Order| -> Result<Evaluation, EvalError> {
                Ok(Evaluation {
                    value: 0.5 * y.dot(&(&a * y)),
                    gradient: (order >= Order::Gradient).then(|| &a * y),
                    hessian: (order >= Order::Hessian).then(|| a.clone()),
                })
            }
        };
        let b = Vector::from_vec(vec![1.0, 2.0]);
        let spec = SubproblemSpec {
            eval_g: &g,
            linear_term: b.clone(),
            proximal: None,
            modulus: 2.0,
        };
        let out = minimize_subproblem(&spec, &Vector::zeros(2), &InnerConfig::default()).unwrap();
        // A^{-1} b by Cramer's rule: det = 11.
        let want = Vector::from_vec(vec![(3.0 - 2.0) / 11.0, (8.0 - 1.0) / 11.0]);
        assert!((out.y - want).norm() <= 1e-10);
        assert_eq!(out.iters, 1);
    }

    #[test]
    fn proximal_term_enters_the_optimality_condition() {
        let center = Vector::from_element(1, 0.5);
        let spec = SubproblemSpec {
            eval_g: &quartic_g,
            linear_term: Vector::from_element(1, 0.3),
            proximal: Some(Proximal {
                center: center.clone(),
                c: 2.0,
            }),
            modulus: 0.5,
        };
        let out = minimize_subproblem(&spec, &center, &InnerConfig::default()).unwrap();
        let y = out.y[0];
        assert!((y.powi(3) - 0.3 + (y - 0.5) / 2.0).abs() <= 1e-8);
    }

    #[test]
    fn spd_solve_identity_and_diagonal() {
        let b = Vector::from_vec(vec![1.5, -2.0, 7.0]);
        let (d, mu) = spd_solve(&Matrix::identity(3, 3), &b, 1e-10).unwrap();
        assert_eq!(mu, 0.0);
        assert_eq!(d, b);

        let h = Matrix::from_diagonal(&Vector::from_vec(vec![2.0, 3.0]));
        let (d, mu) = spd_solve(&h, &Vector::from_vec(vec![2.0, 3.0]), 1e-10).unwrap();
        assert_eq!(mu, 0.0);
        assert!((d - Vector::from_vec(vec![1.0, 1.0])).norm() < 1e-15);
    }

    #[test]
    fn spd_solve_damps_roundoff_indefiniteness() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let q = Matrix::from_row_slice(2, 2, &[s, s, s, -s]);
        let lam = Matrix::from_diagonal(&Vector::from_vec(vec![1.0, -1e-12]));
        let h = &q * lam * q.transpose();
        let b = Vector::from_vec(vec![1.0, 0.5]);
        let (d, mu) = spd_solve(&h, &b, 1e-10).unwrap();
        assert!(mu > 0.0);
        let mut shifted = h.clone();
        shifted[(0, 0)] += mu;
        shifted[(1, 1)] += mu;
        assert!((shifted * d - &b).norm() / b.norm() <= 1e-10);
    }

    #[test]
    fn spd_solve_damping_limits() {
        let h = Matrix::from_diagonal(&Vector::from_vec(vec![-1.0, -2.0]));
        let (_, mu) = spd_solve(&h, &Vector::from_vec(vec![1.0, 1.0]), 1e-10).unwrap();
        assert!(mu > 2.0);
        let err = spd_solve(&Matrix::zeros(2, 2), &Vector::from_vec(vec![1.0, 1.0]), 1e-10).unwrap_err();
        assert!(matches!(err, InnerError::Factorization { .. }));
    }

    #[test]
    fn non_finite_objective_is_a_numerical_failure() {
        let bad = |_: &Vector, _: Order| -> Result<Evaluation, EvalError> { Ok(Evaluation::value(f64::NAN)) };
        let spec = SubproblemSpec {
            eval_g: &bad,
            linear_term: Vector::zeros(1),
            proximal: None,
            modulus: 1.0,
        };
        assert!(minimize_subproblem(&spec, &Vector::zeros(1), &InnerConfig::default()).is_err());
    }
}

//! The DC problem abstraction.
//!
//! A problem is a pair of smooth convex functions `f1`, `f2` with
//! `phi = f1 - f2`. The solvers work with the regularized parts
//!
//! ```text
//! g(x) = f1(x) + (rho/2)|x|^2,    h(x) = f2(x) + (rho/2)|x|^2,
//! ```
//!
//! which leave `phi = g - h` unchanged while making both parts strongly
//! convex. Intrinsic moduli `sigma_g`, `sigma_h` of `f1` and `f2` may be
//! declared so that problems which are already strongly convex (such as the
//! quartic `x^4/4 - x^2/2`) can run with `rho = 0`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{ConfigError, EvalError};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// How many derivatives an evaluation must produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Order {
    Value,
    Gradient,
    Hessian,
}

/// Value of a scalar function with the derivatives requested by an [`Order`].
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub value: f64,
    pub gradient: Option<Vector>,
    pub hessian: Option<Matrix>,
}

impl Evaluation {
    pub fn value(value: f64) -> Self {
        Self {
            value,
            gradient: None,
            hessian: None,
        }
    }

    /// Gradient of an evaluation made with at least [`Order::Gradient`].
    pub fn grad(&self) -> &Vector {
        self.gradient
            .as_ref()
            .expect("evaluation was requested without a gradient")
    }

    /// Hessian of an evaluation made with [`Order::Hessian`].
    pub fn hess(&self) -> &Matrix {
        self.hessian
            .as_ref()
            .expect("evaluation was requested without a Hessian")
    }

    pub(crate) fn ensure_finite(self) -> Result<Self, EvalError> {
        if !self.value.is_finite() {
            return Err(EvalError::NonFinite { what: "value" });
        }
        if let Some(g) = &self.gradient {
            if g.iter().any(|v| !v.is_finite()) {
                return Err(EvalError::NonFinite { what: "gradient" });
            }
        }
        if let Some(h) = &self.hessian {
            if h.iter().any(|v| !v.is_finite()) {
                return Err(EvalError::NonFinite { what: "Hessian" });
            }
        }
        Ok(self)
    }
}

/// A smooth DC decomposition `phi = f1 - f2` with both parts convex.
///
/// Implementations must be safe to evaluate concurrently: the harness runs
/// independent solves against the same instance from several threads.
pub trait DcSplit: Send + Sync {
    fn dim(&self) -> usize;

    fn eval_f1(&self, x: &Vector, order: Order) -> Result<Evaluation, EvalError>;

    fn eval_f2(&self, x: &Vector, order: Order) -> Result<Evaluation, EvalError>;

    /// `phi(x) = f1(x) - f2(x)`. Override when a cancellation-free formula
    /// is available.
    fn phi(&self, x: &Vector) -> Result<f64, EvalError> {
        Ok(self.eval_f1(x, Order::Value)?.value - self.eval_f2(x, Order::Value)?.value)
    }

    fn grad_phi(&self, x: &Vector) -> Result<Vector, EvalError> {
        let a = self.eval_f1(x, Order::Gradient)?;
        let b = self.eval_f2(x, Order::Gradient)?;
        Ok(a.grad() - b.grad())
    }

    /// Intrinsic strong-convexity modulus of `f1`.
    fn sigma_f1(&self) -> f64 {
        0.0
    }

    /// Intrinsic strong-convexity modulus of `f2`.
    fn sigma_f2(&self) -> f64 {
        0.0
    }

    fn name(&self) -> &str {
        "custom"
    }
}

/// A DC program `minimize phi(x) = g(x) - h(x)` ready for the solvers.
#[derive(Clone)]
pub struct DcProblem {
    split: Arc<dyn DcSplit>,
    rho: f64,
    sigma_g: f64,
    sigma_h: f64,
}

impl fmt::Debug for DcProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DcProblem")
            .field("name", &self.split.name())
            .field("dim", &self.split.dim())
            .field("rho", &self.rho)
            .field("sigma_g", &self.sigma_g)
            .field("sigma_h", &self.sigma_h)
            .finish()
    }
}

impl DcProblem {
    /// Wraps a split with `rho = 0` and the split's declared moduli.
    pub fn new<S: DcSplit + 'static>(split: S) -> Self {
        Self::from_arc(Arc::new(split))
    }

    pub fn from_arc(split: Arc<dyn DcSplit>) -> Self {
        let sigma_g = split.sigma_f1();
        let sigma_h = split.sigma_f2();
        Self {
            split,
            rho: 0.0,
            sigma_g,
            sigma_h,
        }
    }

    pub fn with_rho(mut self, rho: f64) -> Result<Self, ConfigError> {
        if !(rho.is_finite() && rho >= 0.0) {
            return Err(ConfigError::new("rho", format!("must be finite and >= 0, got {rho}")));
        }
        self.rho = rho;
        Ok(self)
    }

    pub fn with_moduli(mut self, sigma_g: f64, sigma_h: f64) -> Result<Self, ConfigError> {
        if !(sigma_g.is_finite() && sigma_g >= 0.0) {
            return Err(ConfigError::new("sigma_g", format!("must be finite and >= 0, got {sigma_g}")));
        }
        if !(sigma_h.is_finite() && sigma_h >= 0.0) {
            return Err(ConfigError::new("sigma_h", format!("must be finite and >= 0, got {sigma_h}")));
        }
        self.sigma_g = sigma_g;
        self.sigma_h = sigma_h;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.split.dim()
    }

    pub fn name(&self) -> &str {
        self.split.name()
    }

    pub fn split(&self) -> &dyn DcSplit {
        self.split.as_ref()
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn sigma_g(&self) -> f64 {
        self.sigma_g
    }

    pub fn sigma_h(&self) -> f64 {
        self.sigma_h
    }

    /// Strong-convexity modulus of `g`.
    pub fn modulus_g(&self) -> f64 {
        self.sigma_g + self.rho
    }

    /// Strong-convexity modulus of `h`.
    pub fn modulus_h(&self) -> f64 {
        self.sigma_h + self.rho
    }

    /// Constant of the DCA decrease `phi(y) <= phi(x) - c |y - x|^2`.
    pub fn decrease_modulus(&self) -> f64 {
        0.5 * (self.sigma_g + self.sigma_h) + self.rho
    }

    fn check_dim(&self, x: &Vector) -> Result<(), EvalError> {
        if x.len() != self.dim() {
            return Err(EvalError::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    fn regularize(&self, x: &Vector, mut e: Evaluation) -> Evaluation {
        if self.rho != 0.0 {
            e.value += 0.5 * self.rho * x.norm_squared();
            if let Some(g) = e.gradient.as_mut() {
                g.axpy(self.rho, x, 1.0);
            }
            if let Some(h) = e.hessian.as_mut() {
                for i in 0..h.nrows() {
                    h[(i, i)] += self.rho;
                }
            }
        }
        e
    }

    pub fn eval_g(&self, x: &Vector, order: Order) -> Result<Evaluation, EvalError> {
        self.check_dim(x)?;
        let e = self.split.eval_f1(x, order)?;
        self.regularize(x, e).ensure_finite()
    }

    pub fn eval_h(&self, x: &Vector, order: Order) -> Result<Evaluation, EvalError> {
        self.check_dim(x)?;
        let e = self.split.eval_f2(x, order)?;
        self.regularize(x, e).ensure_finite()
    }

    pub fn phi(&self, x: &Vector) -> Result<f64, EvalError> {
        self.check_dim(x)?;
        let v = self.split.phi(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite { what: "phi" })
        }
    }

    pub fn grad_phi(&self, x: &Vector) -> Result<Vector, EvalError> {
        self.check_dim(x)?;
        let g = self.split.grad_phi(x)?;
        if g.iter().all(|v| v.is_finite()) {
            Ok(g)
        } else {
            Err(EvalError::NonFinite { what: "gradient of phi" })
        }
    }

    /// Compares analytic derivatives of `f1` and `f2` at `x` against central
    /// finite differences with step `1e-6 * (1 + |x|)`.
    pub fn derivative_report(&self, x: &Vector) -> Result<DerivativeReport, EvalError> {
        let split = self.split();
        let f1 = |y: &Vector, o| split.eval_f1(y, o);
        let f2 = |y: &Vector, o| split.eval_f2(y, o);
        let (grad_f1, hess_f1, asym_f1) = fd_compare(&f1, x)?;
        let (grad_f2, hess_f2, asym_f2) = fd_compare(&f2, x)?;
        Ok(DerivativeReport {
            grad_f1,
            grad_f2,
            hess_f1,
            hess_f2,
            hess_asymmetry: asym_f1.max(asym_f2),
        })
    }
}

/// Discrepancies between analytic and finite-difference derivatives.
///
/// Gradient and Hessian errors are `|analytic - fd| / max(|fd|, 1)`
/// (Euclidean and Frobenius norms). Asymmetry is `|H - H^T| / max(|H|, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeReport {
    pub grad_f1: f64,
    pub grad_f2: f64,
    pub hess_f1: f64,
    pub hess_f2: f64,
    pub hess_asymmetry: f64,
}

impl DerivativeReport {
    pub fn max_grad_error(&self) -> f64 {
        self.grad_f1.max(self.grad_f2)
    }

    pub fn max_hess_error(&self) -> f64 {
        self.hess_f1.max(self.hess_f2)
    }
}

fn fd_compare<F>(f: &F, x: &Vector) -> Result<(f64, f64, f64), EvalError>
where
    F: Fn(&Vector, Order) -> Result<Evaluation, EvalError>,
{
    let n = x.len();
    let step = 1e-6 * (1.0 + x.norm());
    let exact = f(x, Order::Hessian)?;
    let mut fd_grad = Vector::zeros(n);
    let mut fd_hess = Matrix::zeros(n, n);
    let mut probe = x.clone();
    for i in 0..n {
        probe[i] = x[i] + step;
        let plus = f(&probe, Order::Gradient)?;
        probe[i] = x[i] - step;
        let minus = f(&probe, Order::Gradient)?;
        probe[i] = x[i];
        fd_grad[i] = (plus.value - minus.value) / (2.0 * step);
        let col = (plus.grad() - minus.grad()) / (2.0 * step);
        fd_hess.set_column(i, &col);
    }
    let rel = |a: f64, b: f64| a / b.max(1.0);
    let grad_err = rel((exact.grad() - &fd_grad).norm(), fd_grad.norm());
    let hess_err = rel((exact.hess() - &fd_hess).norm(), fd_hess.norm());
    let h = exact.hess();
    let asym = rel((h - h.transpose()).norm(), h.norm());
    Ok((grad_err, hess_err, asym))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::quartic;

    #[test]
    fn regularization_cancels_in_phi() {
        let p = quartic().with_rho(3.5).unwrap();
        for &v in &[-1.7, 0.0, 0.3, 2.2] {
            let x = Vector::from_element(1, v);
            let g = p.eval_g(&x, Order::Value).unwrap().value;
            let h = p.eval_h(&x, Order::Value).unwrap().value;
            let phi = p.phi(&x).unwrap();
            assert!((g - h - phi).abs() <= 1e-12 * (1.0 + g.abs()));
        }
    }

    #[test]
    fn regularized_derivatives_shift_by_rho() {
        let p = quartic().with_rho(2.0).unwrap();
        let x = Vector::from_element(1, 0.5);
        let g = p.eval_g(&x, Order::Hessian).unwrap();
        assert!((g.grad()[0] - (0.125 + 1.0)).abs() < 1e-15);
        assert!((g.hess()[(0, 0)] - (0.75 + 2.0)).abs() < 1e-15);
    }

    #[test]
    fn moduli_bookkeeping() {
        let p = quartic().with_rho(0.5).unwrap();
        assert_eq!(p.modulus_g(), 0.5);
        assert_eq!(p.modulus_h(), 1.5);
        assert_eq!(p.decrease_modulus(), 1.0);
    }

    #[test]
    fn rejects_negative_rho_and_wrong_dimension() {
        assert!(quartic().with_rho(-1.0).is_err());
        assert!(quartic().with_rho(f64::NAN).is_err());
        let p = quartic();
        let err = p.phi(&Vector::zeros(2)).unwrap_err();
        assert_eq!(err, EvalError::Dimension { expected: 1, got: 2 });
    }
}

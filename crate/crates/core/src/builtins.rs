//! Builtin problems: the one-dimensional quartic and DC formulations of
//! systems of equations `p(x) = c(x)`.

use crate::error::EvalError;
use crate::problem::{DcProblem, DcSplit, Evaluation, Matrix, Order, Vector};

/// `phi(x) = x^4/4 - x^2/2` split as `f1 = x^4/4`, `f2 = x^2/2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Quartic;

impl DcSplit for Quartic {
    fn dim(&self) -> usize {
        1
    }

    fn eval_f1(&self, x: &Vector, order: Order) -> Result<Evaluation, EvalError> {
        let t = x[0];
        Ok(Evaluation {
            value: 0.25 * t.powi(4),
            gradient: (order >= Order::Gradient).then(|| Vector::from_element(1, t.powi(3))),
            hessian: (order >= Order::Hessian).then(|| Matrix::from_element(1, 1, 3.0 * t * t)),
        })
    }

    fn eval_f2(&self, x: &Vector, order: Order) -> Result<Evaluation, EvalError> {
        let t = x[0];
        Ok(Evaluation {
            value: 0.5 * t * t,
            gradient: (order >= Order::Gradient).then(|| Vector::from_element(1, t)),
            hessian: (order >= Order::Hessian).then(|| Matrix::from_element(1, 1, 1.0)),
        })
    }

    fn sigma_f2(&self) -> f64 {
        1.0
    }

    fn name(&self) -> &str {
        "quartic"
    }
}

/// The quartic with `rho = 0`; `h = x^2/2` carries modulus 1 on its own.
pub fn quartic() -> DcProblem {
    DcProblem::new(Quartic)
}

/// Values of a vector map together with the requested derivatives.
///
/// `jacobian` has one row per component. `hessians[i]` is the Hessian of
/// component `i`.
#[derive(Debug, Clone)]
pub struct ComponentEval {
    pub values: Vector,
    pub jacobian: Option<Matrix>,
    pub hessians: Option<Vec<Matrix>>,
}

/// A map `R^m -> R_+^m` whose components are convex and twice differentiable.
pub trait ComponentMap: Send + Sync {
    fn eval(&self, x: &Vector, order: Order) -> Result<ComponentEval, EvalError>;
}

impl<F> ComponentMap for F
where
    F: Fn(&Vector, Order) -> Result<ComponentEval, EvalError> + Send + Sync,
{
    fn eval(&self, x: &Vector, order: Order) -> Result<ComponentEval, EvalError> {
        self(x, order)
    }
}

/// `|p - c|^2` written as `2(|p|^2 + |c|^2) - |p + c|^2`.
pub struct SystemSplit {
    p: Box<dyn ComponentMap>,
    c: Box<dyn ComponentMap>,
    m: usize,
    name: String,
}

impl SystemSplit {
    pub fn new(p: impl ComponentMap + 'static, c: impl ComponentMap + 'static, m: usize) -> Self {
        Self {
            p: Box::new(p),
            c: Box::new(c),
            m,
            name: "system".to_string(),
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    fn both(&self, x: &Vector, order: Order) -> Result<(ComponentEval, ComponentEval), EvalError> {
        Ok((self.p.eval(x, order)?, self.c.eval(x, order)?))
    }
}

// sum_i w_i * H_i
fn weighted_hessians(weights: &Vector, hessians: &[Matrix], m: usize) -> Matrix {
    let mut out = Matrix::zeros(m, m);
    for (w, h) in weights.iter().zip(hessians) {
        out += h * *w;
    }
    out
}

fn jac(e: &ComponentEval) -> &Matrix {
    e.jacobian.as_ref().expect("component map returned no Jacobian")
}

fn hessians(e: &ComponentEval) -> &[Matrix] {
    e.hessians.as_deref().expect("component map returned no Hessians")
}

impl DcSplit for SystemSplit {
    fn dim(&self) -> usize {
        self.m
    }

    fn eval_f1(&self, x: &Vector, order: Order) -> Result<Evaluation, EvalError> {
        let (p, c) = self.both(x, order)?;
        let value = 2.0 * (p.values.norm_squared() + c.values.norm_squared());
        let gradient = (order >= Order::Gradient)
            .then(|| (jac(&p).tr_mul(&p.values) + jac(&c).tr_mul(&c.values)) * 4.0);
        let hessian = (order >= Order::Hessian).then(|| {
            let (jp, jc) = (jac(&p), jac(&c));
            let mut h = jp.tr_mul(jp) + jc.tr_mul(jc);
            h += weighted_hessians(&p.values, hessians(&p), self.m);
            h += weighted_hessians(&c.values, hessians(&c), self.m);
            h * 4.0
        });
        Ok(Evaluation {
            value,
            gradient,
            hessian,
        })
    }

    fn eval_f2(&self, x: &Vector, order: Order) -> Result<Evaluation, EvalError> {
        let (p, c) = self.both(x, order)?;
        let s = &p.values + &c.values;
        let value = s.norm_squared();
        let js = (order >= Order::Gradient).then(|| jac(&p) + jac(&c));
        let gradient = js.as_ref().map(|j| j.tr_mul(&s) * 2.0);
        let hessian = (order >= Order::Hessian).then(|| {
            let j = js.as_ref().unwrap();
            let mut h = j.tr_mul(j);
            h += weighted_hessians(&s, hessians(&p), self.m);
            h += weighted_hessians(&s, hessians(&c), self.m);
            h * 2.0
        });
        Ok(Evaluation {
            value,
            gradient,
            hessian,
        })
    }

    fn phi(&self, x: &Vector) -> Result<f64, EvalError> {
        let (p, c) = self.both(x, Order::Value)?;
        Ok((&p.values - &c.values).norm_squared())
    }

    fn grad_phi(&self, x: &Vector) -> Result<Vector, EvalError> {
        let (p, c) = self.both(x, Order::Gradient)?;
        let f = &p.values - &c.values;
        Ok((jac(&p) - jac(&c)).tr_mul(&f) * 2.0)
    }

    fn name(&self) -> &str {
        &self.name
    }
}

/// DC formulation of the system `p(x) = c(x)` with `phi = |p - c|^2`.
pub fn make_system_problem(
    p: impl ComponentMap + 'static,
    c: impl ComponentMap + 'static,
    m: usize,
) -> DcProblem {
    DcProblem::new(SystemSplit::new(p, c, m))
}

/// Default regularization for [`expsys`].
pub const EXPSYS_RHO: f64 = 1.0;

/// The one-dimensional system `e^x = 1`: `phi(x) = (e^x - 1)^2`, unique zero
/// at `x = 0`, where the Jacobian is nonsingular.
pub fn expsys() -> DcProblem {
    let p = |x: &Vector, order: Order| -> Result<ComponentEval, EvalError> {
        let e = x[0].exp();
        if !e.is_finite() {
            return Err(EvalError::NonFinite { what: "exp" });
        }
        Ok(ComponentEval {
            values: Vector::from_element(1, e),
            jacobian: (order >= Order::Gradient).then(|| Matrix::from_element(1, 1, e)),
            hessians: (order >= Order::Hessian).then(|| vec![Matrix::from_element(1, 1, e)]),
        })
    };
    let c = |_: &Vector, order: Order| -> Result<ComponentEval, EvalError> {
        Ok(ComponentEval {
            values: Vector::from_element(1, 1.0),
            jacobian: (order >= Order::Gradient).then(|| Matrix::zeros(1, 1)),
            hessians: (order >= Order::Hessian).then(|| vec![Matrix::zeros(1, 1)]),
        })
    };
    DcProblem::new(SystemSplit::new(p, c, 1).named("expsys"))
        .with_rho(EXPSYS_RHO)
        .expect("constant rho is valid")
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 2] = ["quartic", "expsys"];

/// Looks up a builtin problem by its stable name.
pub fn builtin(name: &str) -> Option<DcProblem> {
    match name {
        "quartic" => Some(quartic()),
        "expsys" => Some(expsys()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64) -> Vector {
        Vector::from_element(1, x)
    }

    #[test]
    fn quartic_values() {
        let p = quartic();
        assert_eq!(p.phi(&v(1.0)).unwrap(), -0.25);
        assert_eq!(p.phi(&v(0.0)).unwrap(), 0.0);
        let g = p.grad_phi(&v(0.6)).unwrap()[0];
        assert!((g - (-0.384)).abs() < 1e-15);
        assert_eq!(p.rho(), 0.0);
        assert_eq!(p.sigma_g(), 0.0);
        assert_eq!(p.sigma_h(), 1.0);
    }

    #[test]
    fn expsys_phi_is_closed_form() {
        let p = expsys();
        for &t in &[-1.5, -0.2, 0.0, 0.7, 1.3] {
            let want = (f64::exp(t) - 1.0).powi(2);
            let got = p.phi(&v(t)).unwrap();
            assert!((got - want).abs() <= 1e-14 * (1.0 + want));
            let f1 = p.split().eval_f1(&v(t), Order::Value).unwrap().value;
            let f2 = p.split().eval_f2(&v(t), Order::Value).unwrap().value;
            assert!((f1 - f2 - want).abs() <= 1e-12 * (1.0 + f1));
        }
        assert_eq!(p.phi(&v(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn identical_maps_give_zero_objective() {
        let map = |x: &Vector, order: Order| -> Result<ComponentEval, EvalError> {
            let vals = x.map(|t| t * t + 1.0);
            Ok(ComponentEval {
                values: vals,
                jacobian: (order >= Order::Gradient).then(|| Matrix::from_diagonal(&(x * 2.0))),
                hessians: (order >= Order::Hessian).then(|| {
                    (0..x.len())
                        .map(|i| {
                            let mut h = Matrix::zeros(x.len(), x.len());
                            h[(i, i)] = 2.0;
                            h
                        })
                        .collect()
                }),
            })
        };
        let p = make_system_problem(map, map, 3);
        let x = Vector::from_vec(vec![0.3, -1.0, 2.0]);
        assert_eq!(p.phi(&x).unwrap(), 0.0);
        assert_eq!(p.grad_phi(&x).unwrap().norm(), 0.0);
    }

    #[test]
    fn registry_names_are_stable() {
        for name in BUILTIN_NAMES {
            assert_eq!(builtin(name).unwrap().name(), name);
        }
        assert!(builtin("rosenbrock").is_none());
    }
}

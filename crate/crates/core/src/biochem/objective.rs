//! The steady-state objective of a mass-action network.
//!
//! With `M = [F, R]`, `N = [R, F]` and `B = M^T`, the reaction rates in
//! log-concentration space are `e = exp(w + B x)` and
//!
//! ```text
//! p(x) = M e    (production),    c(x) = N e    (consumption),
//! f(x) = p - c = (M - N) e,
//! f1 = 2(|p|^2 + |c|^2),    f2 = |p + c|^2,    f1 - f2 = |f|^2.
//! ```
//!
//! Jacobians are `J_p = M diag(e) M^T` and `J_c = N diag(e) M^T`, and
//!
//! ```text
//! grad f1 = 4 (J_p^T p + J_c^T c)
//! hess f1 = 4 (J_p^T J_p + J_c^T J_c + M diag(e o (M^T p + N^T c)) M^T)
//! grad f2 = 2 J_s^T s,   s = p + c,   J_s = J_p + J_c
//! hess f2 = 2 (J_s^T J_s + M diag(e o (M + N)^T s) M^T)
//! ```

use std::sync::Arc;

use crate::error::{ConfigError, EvalError};
use crate::problem::{DcProblem, DcSplit, Evaluation, Matrix, Order, Vector};

use super::network::ReactionNetwork;

/// Exponents above this are reported as overflow (`exp` overflows near 709.8).
pub const EXPONENT_GUARD: f64 = 700.0;

/// Rates at a point.
#[derive(Debug, Clone)]
pub struct Rates {
    /// `exp(w + B x)`, length `2n`.
    pub e: Vector,
    pub p: Vector,
    pub c: Vector,
    pub f: Vector,
}

/// Everything the DC split needs at one point.
#[derive(Debug, Clone)]
pub struct F1F2 {
    pub f1: Evaluation,
    pub f2: Evaluation,
}

type Column = Vec<(usize, f64)>;

/// The DC split of `|f(x)|^2` for a reaction network.
#[derive(Debug, Clone)]
pub struct NetworkObjective {
    network: Arc<ReactionNetwork>,
    // Column j of M = [F, R] (equivalently row j of B).
    m_cols: Vec<Column>,
    // Column j of N = [R, F].
    n_cols: Vec<Column>,
}

fn column(net: &ReactionNetwork, j: usize, forward_first: bool) -> Column {
    let n = net.n();
    let (first, second) = if forward_first {
        (net.forward(), net.reverse())
    } else {
        (net.reverse(), net.forward())
    };
    let (mat, col) = if j < n { (first, j) } else { (second, j - n) };
    mat.column(col).map(|(i, v)| (i, v as f64)).collect()
}

impl NetworkObjective {
    pub fn new(network: impl Into<Arc<ReactionNetwork>>) -> Self {
        let network = network.into();
        let cols = 2 * network.n();
        let m_cols = (0..cols).map(|j| column(&network, j, true)).collect();
        let n_cols = (0..cols).map(|j| column(&network, j, false)).collect();
        Self {
            network,
            m_cols,
            n_cols,
        }
    }

    pub fn network(&self) -> &ReactionNetwork {
        &self.network
    }

    /// The DC problem with `g = f1 + rho/2 |x|^2`, `h = f2 + rho/2 |x|^2`.
    pub fn into_problem(self, rho: f64) -> Result<DcProblem, ConfigError> {
        DcProblem::new(self).with_rho(rho)
    }

    fn check(&self, x: &Vector) -> Result<(), EvalError> {
        let m = self.network.m();
        if x.len() != m {
            return Err(EvalError::Dimension {
                expected: m,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `e = exp(w + B x)`, `p`, `c` and `f = p - c`.
    pub fn eval_rates(&self, x: &Vector) -> Result<Rates, EvalError> {
        self.check(x)?;
        let m = self.network.m();
        let w = self.network.w();
        let mut e = Vector::zeros(w.len());
        for (j, col) in self.m_cols.iter().enumerate() {
            let z = w[j] + col.iter().map(|&(i, v)| v * x[i]).sum::<f64>();
            if z > EXPONENT_GUARD || z.is_nan() {
                return Err(EvalError::Overflow {
                    index: j,
                    value: z,
                    limit: EXPONENT_GUARD,
                });
            }
            e[j] = z.exp();
        }
        let mut p = Vector::zeros(m);
        let mut c = Vector::zeros(m);
        for j in 0..e.len() {
            for &(i, v) in &self.m_cols[j] {
                p[i] += v * e[j];
            }
            for &(i, v) in &self.n_cols[j] {
                c[i] += v * e[j];
            }
        }
        let f = &p - &c;
        Ok(Rates { e, p, c, f })
    }

    /// `(J_p, J_c)`.
    fn jacobians(&self, e: &Vector) -> (Matrix, Matrix) {
        let m = self.network.m();
        let mut jp = Matrix::zeros(m, m);
        let mut jc = Matrix::zeros(m, m);
        for (j, mcol) in self.m_cols.iter().enumerate() {
            let ej = e[j];
            for &(k, bk) in mcol {
                for &(i, a) in mcol {
                    jp[(i, k)] += a * ej * bk;
                }
                for &(i, a) in &self.n_cols[j] {
                    jc[(i, k)] += a * ej * bk;
                }
            }
        }
        (jp, jc)
    }

    /// Jacobian of `f = p - c` (row `i` is the gradient of `f_i`).
    pub fn jacobian_f(&self, x: &Vector) -> Result<Matrix, EvalError> {
        let r = self.eval_rates(x)?;
        let (jp, jc) = self.jacobians(&r.e);
        Ok(jp - jc)
    }

    /// `sum_j coef_j e_j m_j m_j^T` with `m_j` column `j` of `M`.
    fn curvature(&self, e: &Vector, coef: &[f64]) -> Matrix {
        let m = self.network.m();
        let mut out = Matrix::zeros(m, m);
        for (j, col) in self.m_cols.iter().enumerate() {
            let s = coef[j] * e[j];
            for &(k, bk) in col {
                for &(i, bi) in col {
                    out[(i, k)] += s * bi * bk;
                }
            }
        }
        out
    }

    // M^T v and N^T v
    fn m_tr(&self, v: &Vector) -> Vec<f64> {
        self.m_cols.iter().map(|col| col.iter().map(|&(i, a)| a * v[i]).sum()).collect()
    }

    fn n_tr(&self, v: &Vector) -> Vec<f64> {
        self.n_cols.iter().map(|col| col.iter().map(|&(i, a)| a * v[i]).sum()).collect()
    }

    fn f1_from(&self, r: &Rates, jac: Option<&(Matrix, Matrix)>, order: Order) -> Evaluation {
        let value = 2.0 * (r.p.norm_squared() + r.c.norm_squared());
        let gradient = jac.map(|(jp, jc)| (jp.tr_mul(&r.p) + jc.tr_mul(&r.c)) * 4.0);
        let hessian = (order >= Order::Hessian).then(|| {
            let (jp, jc) = jac.unwrap();
            let coef: Vec<f64> = self.m_tr(&r.p).iter().zip(self.n_tr(&r.c)).map(|(a, b)| a + b).collect();
            (jp.transpose() * jp + jc.transpose() * jc + self.curvature(&r.e, &coef)) * 4.0
        });
        Evaluation {
            value,
            gradient,
            hessian,
        }
    }

    fn f2_from(&self, r: &Rates, jac: Option<&(Matrix, Matrix)>, order: Order) -> Evaluation {
        let s = &r.p + &r.c;
        let value = s.norm_squared();
        let js = jac.map(|(jp, jc)| jp + jc);
        let gradient = js.as_ref().map(|j| j.tr_mul(&s) * 2.0);
        let hessian = (order >= Order::Hessian).then(|| {
            let j = js.as_ref().unwrap();
            let coef: Vec<f64> = self.m_tr(&s).iter().zip(self.n_tr(&s)).map(|(a, b)| a + b).collect();
            (j.transpose() * j + self.curvature(&r.e, &coef)) * 2.0
        });
        Evaluation {
            value,
            gradient,
            hessian,
        }
    }

    /// Both parts of the split, sharing one rate evaluation.
    pub fn eval_f1_f2(&self, x: &Vector, order: Order) -> Result<F1F2, EvalError> {
        let r = self.eval_rates(x)?;
        let jac = (order >= Order::Gradient).then(|| self.jacobians(&r.e));
        Ok(F1F2 {
            f1: self.f1_from(&r, jac.as_ref(), order).ensure_finite()?,
            f2: self.f2_from(&r, jac.as_ref(), order).ensure_finite()?,
        })
    }
}

impl DcSplit for NetworkObjective {
    fn dim(&self) -> usize {
        self.network.m()
    }

    fn eval_f1(&self, x: &Vector, order: Order) -> Result<Evaluation, EvalError> {
        let r = self.eval_rates(x)?;
        let jac = (order >= Order::Gradient).then(|| self.jacobians(&r.e));
        self.f1_from(&r, jac.as_ref(), order).ensure_finite()
    }

    fn eval_f2(&self, x: &Vector, order: Order) -> Result<Evaluation, EvalError> {
        let r = self.eval_rates(x)?;
        let jac = (order >= Order::Gradient).then(|| self.jacobians(&r.e));
        self.f2_from(&r, jac.as_ref(), order).ensure_finite()
    }

    fn phi(&self, x: &Vector) -> Result<f64, EvalError> {
        Ok(self.eval_rates(x)?.f.norm_squared())
    }

    fn grad_phi(&self, x: &Vector) -> Result<Vector, EvalError> {
        let r = self.eval_rates(x)?;
        let (jp, jc) = self.jacobians(&r.e);
        Ok((jp - jc).tr_mul(&r.f) * 2.0)
    }

    fn name(&self) -> &str {
        &self.network.name
    }
}

#![allow(dead_code)]

use boosted_dc::biochem::ReactionNetwork;
use boosted_dc::{Matrix, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, m: usize, lo: f64, hi: f64) -> Vector {
    Vector::from_iterator(m, (0..m).map(|_| rng.gen_range(lo..hi)))
}

pub fn fd_step(x: &Vector) -> f64 {
    1e-6 * (1.0 + x.norm())
}

/// Central differences of a scalar function.
pub fn fd_gradient(f: impl Fn(&Vector) -> f64, x: &Vector) -> Vector {
    let h = fd_step(x);
    let mut out = Vector::zeros(x.len());
    let mut p = x.clone();
    for i in 0..x.len() {
        p[i] = x[i] + h;
        let a = f(&p);
        p[i] = x[i] - h;
        let b = f(&p);
        p[i] = x[i];
        out[i] = (a - b) / (2.0 * h);
    }
    out
}

/// Central differences of a vector function; column `i` is `d g / d x_i`.
pub fn fd_jacobian(g: impl Fn(&Vector) -> Vector, x: &Vector) -> Matrix {
    let h = fd_step(x);
    let n = x.len();
    let mut out = Matrix::zeros(g(x).len(), n);
    let mut p = x.clone();
    for i in 0..n {
        p[i] = x[i] + h;
        let a = g(&p);
        p[i] = x[i] - h;
        let b = g(&p);
        p[i] = x[i];
        out.set_column(i, &((a - b) / (2.0 * h)));
    }
    out
}

pub fn rel_err_vec(a: &Vector, reference: &Vector) -> f64 {
    (a - reference).norm() / reference.norm().max(1.0)
}

pub fn rel_err_mat(a: &Matrix, reference: &Matrix) -> f64 {
    (a - reference).norm() / reference.norm().max(1.0)
}

/// Dense `(M, N)` with `M = [F, R]`, `N = [R, F]`, built entry by entry.
pub fn dense_mn(net: &ReactionNetwork) -> (Matrix, Matrix) {
    let (m, n) = (net.m(), net.n());
    let mut mm = Matrix::zeros(m, 2 * n);
    let mut nn = Matrix::zeros(m, 2 * n);
    for i in 0..m {
        for j in 0..n {
            let f = net.forward().get(i, j) as f64;
            let r = net.reverse().get(i, j) as f64;
            mm[(i, j)] = f;
            mm[(i, n + j)] = r;
            nn[(i, j)] = r;
            nn[(i, n + j)] = f;
        }
    }
    (mm, nn)
}

/// `(p, c)` computed with dense matrices.
pub fn dense_rates(net: &ReactionNetwork, x: &Vector) -> (Vector, Vector) {
    let (mm, nn) = dense_mn(net);
    let w = Vector::from_column_slice(net.w());
    let e = (w + mm.transpose() * x).map(f64::exp);
    (&mm * &e, &nn * &e)
}

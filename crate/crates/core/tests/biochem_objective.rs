mod common;

use boosted_dc::biochem::{generate_network, GeneratorConfig, NetworkObjective, ReactionNetwork};
use boosted_dc::{DcSplit, Order, Vector};
use common::*;
use proptest::prelude::*;

fn network(m: usize, n: usize, seed: u64) -> ReactionNetwork {
    generate_network(m, n, seed, &GeneratorConfig::default()).unwrap()
}

#[test]
fn rates_match_dense_products() {
    let mut r = rng(11);
    for seed in 0..5 {
        let net = network(8 + seed as usize, 12, seed);
        let obj = NetworkObjective::new(net.clone());
        for _ in 0..4 {
            let x = uniform(&mut r, net.m(), -2.0, 2.0);
            let got = obj.eval_rates(&x).unwrap();
            let (p, c) = dense_rates(&net, &x);
            assert!(rel_err_vec(&got.p, &p) < 1e-13);
            assert!(rel_err_vec(&got.c, &c) < 1e-13);
            assert!(got.p.iter().chain(got.c.iter()).all(|&v| v > 0.0));

            let both = obj.eval_f1_f2(&x, Order::Value).unwrap();
            let f1 = 2.0 * (p.norm_squared() + c.norm_squared());
            let f2 = (&p + &c).norm_squared();
            assert!((both.f1.value - f1).abs() <= 1e-12 * f1);
            assert!((both.f2.value - f2).abs() <= 1e-12 * f2);
        }
    }
}

#[test]
fn gradients_and_hessians_match_finite_differences() {
    let mut r = rng(12);
    for seed in 0..4 {
        let obj = NetworkObjective::new(network(6, 9, 40 + seed));
        for _ in 0..5 {
            let x = uniform(&mut r, 6, -1.0, 1.0);
            for part in 0..2 {
                let eval = |y: &Vector, o: Order| if part == 0 { obj.eval_f1(y, o) } else { obj.eval_f2(y, o) };
                let exact = eval(&x, Order::Hessian).unwrap();
                let fd_g = fd_gradient(|y| eval(y, Order::Value).unwrap().value, &x);
                assert!(rel_err_vec(exact.grad(), &fd_g) <= 1e-5);
                let fd_h = fd_jacobian(|y| eval(y, Order::Gradient).unwrap().gradient.unwrap(), &x);
                let h = exact.hess();
                assert!(rel_err_mat(h, &fd_h) <= 1e-4);
                assert!((h - h.transpose()).norm() <= 1e-10 * h.norm().max(1.0));
            }
        }
    }
}

#[test]
fn jacobian_of_f_matches_dense_finite_differences() {
    let net = network(10, 15, 3);
    let obj = NetworkObjective::new(net.clone());
    let x = uniform(&mut rng(13), 10, -1.0, 1.0);
    let fd = fd_jacobian(
        |y| {
            let (p, c) = dense_rates(&net, y);
            p - c
        },
        &x,
    );
    assert!(rel_err_mat(&obj.jacobian_f(&x).unwrap(), &fd) <= 1e-6);
}

#[test]
fn grad_phi_is_difference_of_gradients() {
    let obj = NetworkObjective::new(network(12, 18, 5));
    let x = uniform(&mut rng(14), 12, -1.0, 1.0);
    let g1 = obj.eval_f1(&x, Order::Gradient).unwrap();
    let g2 = obj.eval_f2(&x, Order::Gradient).unwrap();
    let diff = g1.grad() - g2.grad();
    let direct = obj.grad_phi(&x).unwrap();
    assert!((direct - &diff).norm() <= 1e-9 * g1.grad().norm().max(1.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dc_identity_and_convexity(seed in 0u64..1000, scale in 0.1f64..2.0) {
        let net = network(7, 10, seed);
        let obj = NetworkObjective::new(net);
        let x = uniform(&mut rng(seed ^ 0x5eed), 7, -scale, scale);
        let both = obj.eval_f1_f2(&x, Order::Hessian).unwrap();
        let rates = obj.eval_rates(&x).unwrap();
        let phi = rates.f.norm_squared();
        prop_assert!((both.f1.value - both.f2.value - phi).abs() <= 1e-10 * both.f1.value.max(1.0));
        for e in [&both.f1, &both.f2] {
            let h = e.hess();
            let min_eig = h.clone().symmetric_eigenvalues().min();
            prop_assert!(min_eig >= -1e-8 * h.norm());
        }
    }

    #[test]
    fn conservation_kernel(seed in 0u64..1000) {
        let net = network(9, 14, seed);
        prop_assert_eq!(net.check_mass_conservation(None).unwrap().0, 0.0);
        let obj = NetworkObjective::new(net);
        let x = uniform(&mut rng(seed + 7), 9, -2.0, 2.0);
        let jf = obj.jacobian_f(&x).unwrap();
        let ones = Vector::from_element(9, 1.0);
        prop_assert!((jf.transpose() * ones).norm() <= 1e-8 * jf.norm());
    }

    #[test]
    fn scaling_w_scales_rates(seed in 0u64..200, delta in -1.0f64..1.0) {
        let net = network(5, 8, seed);
        let shifted: Vec<f64> = net.w().iter().map(|v| v + delta).collect();
        let base = NetworkObjective::new(net.clone()).eval_rates(&Vector::zeros(5)).unwrap();
        let moved = NetworkObjective::new(net.with_w(shifted).unwrap()).eval_rates(&Vector::zeros(5)).unwrap();
        let s = delta.exp();
        prop_assert!((moved.p - base.p * s).norm() <= 1e-12 * moved.c.norm());
        prop_assert!((moved.f - base.f * s).norm() <= 1e-12 * moved.c.norm());
    }
}

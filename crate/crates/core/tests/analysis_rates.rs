use boosted_dc::analysis::{classify_rate, verify_rate_inequality, RateConfig, Regime};
use boosted_dc::builtins::{expsys, quartic};
use boosted_dc::{solve, SolverConfig, Variant, Vector};
use proptest::prelude::*;

fn errors_to(trace_x: &[f64], limit: f64) -> Vec<f64> {
    trace_x.iter().map(|x| (x - limit).abs()).collect()
}

/// Iterates of a 1-D solve, rebuilt from the trace by replaying steps.
fn iterates(problem: &boosted_dc::DcProblem, x0: f64, variant: Variant) -> Vec<f64> {
    let mut xs = vec![x0];
    let cfg = SolverConfig::default().with_variant(variant);
    let mut x = x0;
    loop {
        let one = SolverConfig {
            max_outer_iters: 1,
            ..cfg.clone()
        };
        let r = solve(problem, &Vector::from_element(1, x), &one).unwrap();
        if r.iterations == 0 || xs.len() > 500 {
            break;
        }
        x = r.x_final[0];
        xs.push(x);
    }
    xs
}

#[test]
fn quartic_dca_errors_contract_by_a_third() {
    let xs = iterates(&quartic(), 27.0 / 125.0, Variant::Dca);
    let rep = classify_rate(&errors_to(&xs, 1.0), &RateConfig::default());
    assert_eq!(rep.regime, Regime::Linear, "{rep:?}");
    let rate = rep.rate.unwrap();
    assert!((0.28..=0.38).contains(&rate), "{rate}");
}

#[test]
fn expsys_boosted_errors_converge_linearly() {
    let xs = iterates(&expsys(), -1.5, Variant::BdcaB);
    assert!(xs.last().unwrap().abs() <= 1e-6);
    let rep = classify_rate(&errors_to(&xs, 0.0), &RateConfig::default());
    assert_eq!(rep.regime, Regime::Linear, "{rep:?}");
}

proptest! {
    #[test]
    fn inequality_is_monotone_in_beta(
        r in 0.05f64..0.95,
        alpha in 0.0f64..2.0,
        beta in 0.01f64..10.0,
        bump in 0.0f64..10.0,
        len in 2usize..60,
    ) {
        let s: Vec<f64> = (0..len).map(|k| r.powi(k as i32)).collect();
        if verify_rate_inequality(&s, alpha, beta, 0) {
            prop_assert!(verify_rate_inequality(&s, alpha, beta + bump, 0));
        }
    }

    #[test]
    fn geometric_sequences_satisfy_the_linear_case(r in 0.05f64..0.95, len in 2usize..80) {
        // s_k = r^k: s_k <= beta (s_k - s_{k+1}) exactly when beta >= 1 / (1 - r).
        let s: Vec<f64> = (0..len).map(|k| r.powi(k as i32)).collect();
        let beta = 1.0 / (1.0 - r);
        prop_assert!(verify_rate_inequality(&s, 1.0, beta * (1.0 + 1e-9), 0));
        prop_assert!(!verify_rate_inequality(&s, 1.0, beta * 0.99, 0));
    }

    #[test]
    fn classification_is_scale_invariant(r in 0.2f64..0.95, c in 1e-6f64..1e6, len in 30usize..200) {
        let s: Vec<f64> = (0..len).map(|k| r.powi(k as i32)).collect();
        let scaled: Vec<f64> = s.iter().map(|v| v * c).collect();
        let a = classify_rate(&s, &RateConfig::default());
        let b = classify_rate(&scaled, &RateConfig::default());
        prop_assert_eq!(a.regime, b.regime);
        prop_assert_eq!(a.regime, Regime::Linear);
        prop_assert!((a.rate.unwrap() - b.rate.unwrap()).abs() <= 1e-9);
        prop_assert!((a.rate.unwrap() - r).abs() <= 1e-6);
    }

    #[test]
    fn power_laws_are_sublinear(p in 0.5f64..3.0, len in 60usize..400) {
        let s: Vec<f64> = (1..=len).map(|k| (k as f64).powf(-p)).collect();
        let rep = classify_rate(&s, &RateConfig::default());
        prop_assert_eq!(rep.regime, Regime::Sublinear);
        prop_assert!((rep.exponent.unwrap() - p).abs() <= 1e-6);
    }
}

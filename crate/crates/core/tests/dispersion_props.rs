//! Boundary-condition mode solver, nonlinear spectrum and commensurability.

use std::f64::consts::PI;

use hotline::dispersion::{nonlinear_spectrum, solve_modes, BoundarySpec};
use hotline::dynamics::{commensurability_time, FrequencyRatio};
use proptest::prelude::*;

fn spec(a1: f64, a2: f64) -> BoundarySpec {
    BoundarySpec { a1, a2, length_l: 1.0, epsilon_nl: 0.0 }
}

#[test]
fn low_frequency_asymptote() {
    let s = spec(0.05, 0.0);
    // valid while k a₁ ≪ 1
    let low: Vec<_> = solve_modes(&s, 10).unwrap().into_iter().filter(|r| r.k * s.a1 < 0.5).collect();
    assert!(low.len() >= 2);
    for r in low {
        let approx = PI * r.n as f64 / (1.0 - 2.0 * s.a1);
        assert!((r.k / approx - 1.0).abs() < 0.01, "n = {}: {} vs {}", r.n, r.k, approx);
    }
}

#[test]
fn high_frequency_asymptote() {
    let s = spec(0.05, 0.0);
    let roots = solve_modes(&s, 400).unwrap();
    for r in &roots[199..] {
        let approx = (r.n as f64 + 1.0) * PI;
        assert!((r.k / approx - 1.0).abs() < 0.01, "n = {}", r.n);
    }
    // and the approach is monotone in n
    let dev: Vec<f64> = roots.iter().map(|r| ((r.n as f64 + 1.0) * PI - r.k).abs()).collect();
    assert!(dev[399] < dev[99] && dev[99] < dev[19]);
}

#[test]
fn nonlinear_spectrum_examples() {
    let w = nonlinear_spectrum(PI, 0.0, 8).unwrap();
    for (i, v) in w.iter().enumerate() {
        assert_eq!(*v, PI * (i + 1) as f64);
    }
    for eps in [1e-4, 1e-2, 0.05] {
        let w = nonlinear_spectrum(PI, eps, 4).unwrap();
        assert_eq!(w[0], PI);
        assert!((w[1] - (2.0 * PI - eps * PI)).abs() < 1e-14);
    }
    assert!(nonlinear_spectrum(1.0, 0.3, 10).is_err());
}

#[test]
fn commensurability_examples() {
    let tau = 2.0;
    let r = |num, den| FrequencyRatio::Rational { num, den };
    assert_eq!(commensurability_time(PI, &[r(1, 1), r(2, 1), r(3, 1)]).unwrap(), Some((1, 1, tau)));
    let (num, den, t) = commensurability_time(PI, &[r(1, 1), r(3, 2)]).unwrap().unwrap();
    assert_eq!((num, den), (2, 1));
    assert!((t - 2.0 * tau).abs() < 1e-15);
    // 3/2 and 5/2 alone share the half period
    assert_eq!(commensurability_time(PI, &[r(3, 2), r(5, 2)]).unwrap().unwrap().0, 2);
    assert_eq!(commensurability_time(PI, &[r(2, 1), r(4, 1)]).unwrap().unwrap().1, 2);
    assert_eq!(commensurability_time(PI, &[r(1, 1), FrequencyRatio::Irrational]).unwrap(), None);
    assert!(commensurability_time(PI, &[]).is_err());
}

proptest! {
    #[test]
    fn roots_satisfy_both_equations_and_are_ordered(a1 in 0.0f64..0.3, a2 in 0.0f64..0.3, l in 0.5f64..3.0) {
        let s = BoundarySpec { a1: a1 * l, a2: a2 * l, length_l: l, epsilon_nl: 0.0 };
        let roots = solve_modes(&s, 60).unwrap();
        for r in &roots {
            let (r1, r2) = r.residuals(&s);
            prop_assert!(r1.abs() < 1e-12 * r.k.max(1.0), "n = {} r1 = {r1:e}", r.n);
            prop_assert!(r2.abs() < 1e-12 * r.k);
            prop_assert!(r.theta >= 0.0 && r.theta < PI / 2.0);
        }
        for w in roots.windows(2) {
            prop_assert!(w[1].k > w[0].k);
        }
    }

    #[test]
    fn roots_vary_continuously_with_a1(a2 in 0.0f64..0.2, start in 0.0f64..0.2) {
        let h = 1e-4;
        let mut prev = solve_modes(&spec(start, a2), 30).unwrap();
        for step in 1..=50 {
            let cur = solve_modes(&spec(start + step as f64 * h, a2), 30).unwrap();
            for (a, b) in prev.iter().zip(&cur) {
                // |dk/da₁| ≤ 2|dθ/da₁|/L stays far below a branch jump of π/L per step
                prop_assert!(((b.k - a.k) / h).abs() < 2.0 * b.k * b.k + 10.0);
                prop_assert!((b.k - a.k).abs() < 0.05 * PI);
            }
            prev = cur;
        }
    }

    #[test]
    fn ideal_line_is_exact(a2 in 0.0f64..1.0, l in 0.1f64..10.0) {
        let s = BoundarySpec { a1: 0.0, a2, length_l: l, epsilon_nl: 0.0 };
        for r in solve_modes(&s, 20).unwrap() {
            prop_assert_eq!(r.k, r.n as f64 * PI / l);
        }
    }
}

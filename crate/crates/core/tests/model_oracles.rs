//! Couplings and Ising matrices against direct quadrature of their defining
//! integrals, and the geometric invariants of the closed form.

use std::f64::consts::PI;

use hotline::model::{
    build_mode_set, coupling_matrix_closed_form, coupling_matrix_modesum, default_mode_count, modulated_frame, DriveFrame,
    NetworkSpec, QubitSpec,
};
use hotline::Error;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of f over [a, b].
fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Unit-normalized box profile of width a starting at x0.
fn box_profile(x: f64, x0: f64, a: f64) -> f64 {
    if x >= x0 && x <= x0 + a {
        1.0 / a
    } else {
        0.0
    }
}

fn fig2_spec() -> NetworkSpec {
    let g = PI / 8f64.sqrt();
    NetworkSpec::new(1.0, 1.0, 0.03, 0.0, vec![QubitSpec::new(0.0, 0.0, g), QubitSpec::new(0.97, 0.0, g)]).unwrap()
}

#[test]
fn fig2_couplings_match_quadrature_of_the_overlap_integral() {
    let spec = fig2_spec();
    let modes = build_mode_set(&spec, 30).unwrap();
    for (i, q) in spec.qubits.iter().enumerate() {
        for n in 1..=30 {
            let k = n as f64 * PI / spec.length_l;
            // integrate over the support only, where the integrand is smooth
            let f = |x: f64| (k * x).cos() * box_profile(x, q.position_x, spec.cutoff_a);
            let ovl = integrate(&f, q.position_x, q.position_x + spec.cutoff_a, 1e-14);
            let expect = q.base_coupling_g * (n as f64).sqrt() * ovl;
            let got = modes.couplings[(i, n - 1)];
            assert!((got - expect).abs() < 1e-11 * q.base_coupling_g, "qubit {i} mode {n}: {got} vs {expect}");
        }
    }
}

#[test]
fn full_overlap_closed_form_matches_quadrature() {
    let (l, a, g) = (1.0, 0.1, 0.4);
    let spec = NetworkSpec::new(l, 1.0, a, 0.0, vec![QubitSpec::new(0.3, 0.0, g), QubitSpec::new(0.3, 0.0, g)]).unwrap();
    let w1 = spec.omega1();
    let ovl = integrate(&|x| box_profile(x, 0.3, a).powi(2), 0.3, 0.3 + a, 1e-14);
    let expect = g * g / w1 * (1.0 - l * ovl);
    let j = coupling_matrix_closed_form(&spec).get(0, 1);
    assert!((j - expect).abs() < 1e-12);
    assert!((j - g * g / w1 * (1.0 - l / a)).abs() < 1e-12);
}

#[test]
fn fig2_closed_form_is_one_eighth_and_mode_sum_converges() {
    let spec = fig2_spec();
    let w1 = spec.omega1();
    let closed = coupling_matrix_closed_form(&spec).get(0, 1);
    assert!((closed - w1 / 8.0).abs() < 1e-14);
    let n = default_mode_count(&spec);
    let sum = coupling_matrix_modesum(&build_mode_set(&spec, n).unwrap()).get(0, 1);
    assert!(((sum - closed) / closed).abs() < 0.01);
    // tail-averaged convergence: windowed mean error shrinks with the window
    let errs: Vec<f64> = (1..=400)
        .map(|m| (coupling_matrix_modesum(&build_mode_set(&spec, m).unwrap()).get(0, 1) - closed).abs())
        .collect();
    let mean = |r: std::ops::Range<usize>| errs[r.clone()].iter().sum::<f64>() / r.len() as f64;
    assert!(mean(100..200) < mean(0..100));
    assert!(mean(300..400) < mean(100..200));
}

#[test]
fn point_like_mode_sum_does_not_converge() {
    let g = 0.3;
    let spec = NetworkSpec::new(1.0, 1.0, 1e-9, 0.0, vec![QubitSpec::new(0.0, 0.0, g), QubitSpec::new(0.3, 0.0, g)]).unwrap();
    let modes = build_mode_set(&spec, 2000).unwrap();
    let w1 = spec.omega1();
    let mut partial = 0.0;
    let mut seen = Vec::new();
    for m in 0..2000 {
        partial += -2.0 * modes.couplings[(0, m)] * modes.couplings[(1, m)] / modes.omega[m];
        if m >= 1000 {
            seen.push(partial);
        }
    }
    // terms stay O(g²/ω₁): the tail keeps swinging by the size of the answer itself
    let spread = seen.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - seen.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread > g * g / w1);
}

#[test]
fn single_qubit_has_no_pairs() {
    let spec = NetworkSpec::new(1.0, 1.0, 0.1, 0.0, vec![QubitSpec::new(0.2, 0.0, 1.0)]).unwrap();
    let j = coupling_matrix_modesum(&build_mode_set(&spec, 10).unwrap());
    assert_eq!(j.n(), 1);
    assert_eq!(j.get(0, 0), 0.0);
}

#[test]
fn modulated_frame_examples() {
    let spec = NetworkSpec::new(1.0, 1.0, 0.1, 0.5, vec![QubitSpec::new(0.0, 0.0, 0.0), QubitSpec::new(0.5, 0.0, 0.0), QubitSpec::new(0.8, 0.0, 0.0)]).unwrap();
    let zero = DriveFrame::new(vec![10.0, 20.0], DMatrix::zeros(3, 2), vec![1.0, 2.0]);
    let m = modulated_frame(&spec, &zero).unwrap();
    assert_eq!(m.n_modes(), 0);
    assert!(coupling_matrix_modesum(&m).j.iter().all(|&v| v == 0.0));

    let amps = DMatrix::from_row_slice(3, 2, &[0.4, 0.0, -0.2, 0.0, 0.3, 0.0]);
    let mono = DriveFrame::new(vec![10.0, 20.0], amps.clone(), vec![-0.5, 0.0]);
    let m = modulated_frame(&spec, &mono).unwrap();
    assert_eq!(m.n_modes(), 1);
    let j = coupling_matrix_modesum(&m);
    for a in 0..3 {
        for b in 0..3 {
            if a != b {
                let expect = -amps[(a, 0)] * amps[(b, 0)] / (2.0 * -0.5);
                assert!((j.get(a, b) - expect).abs() < 1e-15);
            }
        }
    }
    let mut flipped = amps.clone();
    flipped.row_mut(1).neg_mut();
    let jf = coupling_matrix_modesum(&modulated_frame(&spec, &DriveFrame::new(vec![10.0, 20.0], flipped, vec![-0.5, 0.0])).unwrap());
    for a in 0..3 {
        for b in 0..3 {
            let s = if (a == 1) != (b == 1) { -1.0 } else { 1.0 };
            assert_eq!(jf.get(a, b), s * j.get(a, b));
        }
    }
    let singular = DriveFrame::new(vec![10.0, 20.0], amps, vec![0.0, 1.0]);
    assert!(matches!(modulated_frame(&spec, &singular), Err(Error::SingularFrame { mode: 0 })));
}

proptest! {
    #[test]
    fn coupling_matrices_are_symmetric_with_zero_diagonal(
        xs in prop::collection::vec(0.0f64..0.85, 4),
        gs in prop::collection::vec(-2.0f64..2.0, 4),
        n_modes in 1usize..60,
    ) {
        let qubits = (0..4).map(|i| QubitSpec::new(xs[i], 0.0, gs[i])).collect();
        let spec = NetworkSpec::new(1.0, 1.0, 0.15, 0.0, qubits).unwrap();
        for j in [coupling_matrix_modesum(&build_mode_set(&spec, n_modes).unwrap()), coupling_matrix_closed_form(&spec)] {
            prop_assert_eq!(&j.j, &j.j.transpose());
            for i in 0..4 {
                prop_assert_eq!(j.get(i, i), 0.0);
            }
        }
    }

    #[test]
    fn closed_form_ignores_cutoff_and_positions_without_overlap(
        a1 in 0.01f64..0.2, a2 in 0.01f64..0.2,
        x1 in 0.0f64..0.3, x2 in 0.5f64..0.75,
        g1 in -1.0f64..1.0, g2 in -1.0f64..1.0,
    ) {
        let mk = |a: f64, y1: f64, y2: f64| {
            let spec = NetworkSpec::new(1.0, 1.0, a, 0.0, vec![QubitSpec::new(y1, 0.0, g1), QubitSpec::new(y2, 0.0, g2)]).unwrap();
            coupling_matrix_closed_form(&spec).get(0, 1)
        };
        let base = mk(a1, x1, x2);
        prop_assert_eq!(base, mk(a2, x1 + 0.01, x2 + 0.02));
        prop_assert_eq!(base, g1 * g2 / PI);
    }

    #[test]
    fn partial_overlap_matches_quadrature(dx in 0.0f64..0.15, g in 0.1f64..1.0) {
        let a = 0.1;
        let spec = NetworkSpec::new(1.0, 1.0, a, 0.0, vec![QubitSpec::new(0.2, 0.0, g), QubitSpec::new(0.2 + dx, 0.0, g)]).unwrap();
        let ovl = if dx < a { integrate(&|x| box_profile(x, 0.2, a) * box_profile(x, 0.2 + dx, a), 0.2 + dx, 0.2 + a, 1e-14) } else { 0.0 };
        let expect = g * g / PI * (1.0 - ovl);
        prop_assert!((coupling_matrix_closed_form(&spec).get(0, 1) - expect).abs() < 1e-10);
    }

    #[test]
    fn closed_form_scales_inversely_with_length(l in 0.5f64..5.0, gl in 0.1f64..2.0) {
        let mk = |l: f64| {
            let g = gl / l;
            let spec = NetworkSpec::new(l, 1.0, 0.05 * l, 0.0, vec![QubitSpec::new(0.0, 0.0, g), QubitSpec::new(0.5 * l, 0.0, g)]).unwrap();
            coupling_matrix_closed_form(&spec).get(0, 1)
        };
        let (j1, j2) = (mk(l), mk(2.0 * l));
        prop_assert!((j1 / j2 - 2.0).abs() < 1e-12);
    }
}

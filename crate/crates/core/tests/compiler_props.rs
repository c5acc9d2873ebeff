//! Spin-model compiler: round trips, shift neutrality, constraint compliance,
//! run-time accounting and the generator conventions.

use std::f64::consts::PI;

use hotline::compiler::{
    compile, convergence_curve, dregular, frobenius_error, generate_target, nn2d, powerlaw1d, reconstruct, spinglass,
    spectral_norm, CompileLimits, GeneratorSpec, Strategy, TargetKind, TargetModel,
};
use hotline::io::{schedule_from_json, schedule_to_json, target_from_csv, target_to_csv};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

fn limits() -> CompileLimits {
    CompileLimits { omega1: PI, j_max: 0.05, g_max: 0.7 }
}

fn symmetric(n: usize, vals: &[f64]) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            w[(i, j)] = vals[k];
            w[(j, i)] = vals[k];
            k += 1;
        }
    }
    w
}

fn rel_error(t: &TargetModel, eta: usize) -> f64 {
    let s = compile(t, limits(), Strategy::Signed).unwrap();
    frobenius_error(&reconstruct(&s.truncated(eta)), t) / t.w.norm()
}

#[test]
fn figure_targets_reconstruct_exactly() {
    let targets = [powerlaw1d(25, 1.0, false).unwrap(), nn2d(5, 5).unwrap(), spinglass(25, 7, 0.5).unwrap()];
    for t in &targets {
        assert!(rel_error(t, t.n()) <= 1e-10, "{:?}", t.provenance);
        let eps = convergence_curve(t, limits(), Strategy::Signed).unwrap();
        assert!(eps[t.n() - 1] <= 1e-10 * t.w.norm());
        for w in eps.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }
}

#[test]
fn spin_glass_tail_stays_large_until_full_rank() {
    // ε(η) = |w_{η+1}|: for random couplings the spectrum is semicircle-like, so the
    // half-rank error stays a sizeable fraction of ε(1), unlike the power law
    let ratio = |t: &TargetModel| {
        let e = convergence_curve(t, limits(), Strategy::Signed).unwrap();
        e[12] / e[0]
    };
    for seed in 0..40 {
        assert!(ratio(&spinglass(25, seed, 0.5).unwrap()) > 0.3, "seed {seed}");
    }
    assert!(ratio(&powerlaw1d(25, 1.0, false).unwrap()) < 0.35);
}

#[test]
fn powerlaw_half_rank_regression() {
    let t = powerlaw1d(25, 1.0, false).unwrap();
    let got = rel_error(&t, 13);
    // oracle: best rank-13 truncation leaves the eigenvalue tail
    let mut ev: Vec<f64> = SymmetricEigen::new(t.w.clone()).eigenvalues.iter().map(|v| v.abs()).collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let tail = ev[13..].iter().map(|v| v * v).sum::<f64>().sqrt() / t.w.norm();
    assert!((got - tail).abs() < 1e-12);
    assert!((got - 0.2714503639009316).abs() < 1e-12);
}

#[test]
fn truncation_error_is_spectral_tail() {
    let t = spinglass(12, 3, 0.5).unwrap();
    let eps = convergence_curve(&t, limits(), Strategy::Signed).unwrap();
    let mut ev: Vec<f64> = SymmetricEigen::new(t.w.clone()).eigenvalues.iter().map(|v| v.abs()).collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    for eta in 1..12 {
        assert!((eps[eta - 1] - ev[eta]).abs() < 1e-12);
    }
    assert!(spectral_norm(&t.w) == ev[0]);
}

#[test]
fn generator_conventions() {
    let p = powerlaw1d(25, 1.0, false).unwrap();
    assert_eq!((p.w[(0, 1)], p.w[(0, 2)]), (1.0, 0.5));
    let ring = powerlaw1d(10, 2.0, true).unwrap();
    assert_eq!(ring.w[(0, 9)], 1.0);
    assert_eq!(ring.w[(0, 7)], 1.0 / 9.0);

    let g = nn2d(5, 5).unwrap();
    for i in 0..25 {
        for j in 0..25 {
            let (dx, dy) = ((i % 5) as i32 - (j % 5) as i32, (i / 5) as i32 - (j / 5) as i32);
            let adjacent = dx.abs() + dy.abs() == 1;
            assert_eq!(g.w[(i, j)] != 0.0, adjacent, "({i}, {j})");
        }
    }
    assert_eq!(g.degrees().iter().sum::<usize>(), 2 * 40);

    let s = spinglass(25, 11, 0.5).unwrap();
    assert!(s.w.iter().all(|v| v.abs() <= 0.5));
    assert_eq!(s.w, s.w.transpose());
    assert_eq!(s, spinglass(25, 11, 0.5).unwrap());
    assert_ne!(s.w, spinglass(25, 12, 0.5).unwrap().w);

    for seed in 0..20 {
        let d = dregular(6, 4, seed).unwrap();
        assert!(d.degrees().iter().all(|&k| k == 4));
        assert!((0..6).all(|i| d.w[(i, i)] == 4.0));
        assert_eq!(d.diagonal_shift_wd, 4.0);
        assert_eq!(d.provenance, TargetKind::DRegular { n: 6, d: 4, seed });
    }
    assert!(generate_target(&GeneratorSpec::DRegular { n: 7, d: 3, seed: 0 }).is_err());
    assert_eq!(generate_target(&GeneratorSpec::Nn2d { rows: 5, cols: 5 }).unwrap(), g);
}

#[test]
fn uniform_spectrum_runtime_is_linear_in_n() {
    let mut per_cycle = None;
    for n in 2..=10 {
        // Householder reflection: every |w_q| = 1, one negative
        let v = DMatrix::from_fn(n, 1, |i, _| 1.0 + i as f64);
        let w = DMatrix::identity(n, n) - &v * v.transpose() * (2.0 / v.norm_squared());
        let t = TargetModel::new(w, TargetKind::Custom).unwrap();
        let s = compile(&t, limits(), Strategy::Signed).unwrap();
        assert_eq!(s.eta(), n);
        let tp = s.cycles[0].duration;
        assert!(s.cycles.iter().all(|c| c.duration == tp));
        assert!((s.total_duration() - n as f64 * tp).abs() < 1e-9 * tp);
        assert_eq!(s.cycles.iter().filter(|c| c.sign < 0).count(), 1);
        if let Some(prev) = per_cycle {
            assert_eq!(tp, prev);
        }
        per_cycle = Some(tp);
    }
}

#[test]
fn csv_and_json_round_trip_bit_exactly() {
    let t = spinglass(9, 5, 0.5).unwrap();
    let back = target_from_csv(&target_to_csv(&t)).unwrap();
    assert_eq!(back.w, t.w);
    let s = compile(&t, limits(), Strategy::Signed).unwrap();
    assert_eq!(schedule_from_json(&schedule_to_json(&s).unwrap()).unwrap(), s);
}

proptest! {
    #[test]
    fn signed_round_trip(n in 1usize..=12, vals in prop::collection::vec(-1.0f64..1.0, 78)) {
        let t = TargetModel::new(symmetric(n, &vals), TargetKind::Custom).unwrap();
        let s = compile(&t, limits(), Strategy::Signed).unwrap();
        prop_assert!(frobenius_error(&reconstruct(&s), &t) <= 1e-10 * t.w.norm().max(1e-300));
    }

    #[test]
    fn shift_neutrality(n in 2usize..=10, vals in prop::collection::vec(-1.0f64..1.0, 55), c in -3.0f64..3.0) {
        let w = symmetric(n, &vals);
        let shifted = &w + DMatrix::identity(n, n) * c;
        let a = reconstruct(&compile(&TargetModel::new(w, TargetKind::Custom).unwrap(), limits(), Strategy::DiagonalShift).unwrap());
        let b = reconstruct(&compile(&TargetModel::new(shifted, TargetKind::Custom).unwrap(), limits(), Strategy::DiagonalShift).unwrap());
        let scale = a.w.norm().max(1.0);
        prop_assert!((a.offdiagonal() - b.offdiagonal()).amax() <= 1e-10 * scale);
    }

    #[test]
    fn constraint_compliance(
        n in 1usize..=10,
        vals in prop::collection::vec(-2.0f64..2.0, 55),
        j_max in 0.01f64..2.0,
        g_max in 0.05f64..3.0,
        omega1 in 0.5f64..10.0,
        signed in any::<bool>(),
    ) {
        let t = TargetModel::new(symmetric(n, &vals), TargetKind::Custom).unwrap();
        let lim = CompileLimits { omega1, j_max, g_max };
        let strategy = if signed { Strategy::Signed } else { Strategy::DiagonalShift };
        let s = compile(&t, lim, strategy).unwrap();
        let tau = 2.0 * PI / omega1;
        let mut tmax = 0.0f64;
        for c in &s.cycles {
            prop_assert!(c.p >= 1);
            prop_assert!((c.duration - c.p as f64 * tau).abs() <= 1e-12 * c.duration);
            prop_assert!(c.amplitudes.iter().all(|a| a.abs() <= g_max * (1.0 + 1e-12)));
            let wq: f64 = c.amplitudes.iter().map(|a| a * a).sum::<f64>() * c.duration / omega1;
            prop_assert!(c.duration >= wq / j_max * (1.0 - 1e-12));
            // smallest stroboscopic multiple: one period less would violate a bound
            if c.p > 1 {
                let shorter = c.duration - tau;
                let amax2 = c.amplitudes.iter().fold(0.0f64, |m, a| m.max(a * a)) * c.duration / shorter;
                prop_assert!(shorter < wq / j_max * (1.0 - 1e-12) || amax2 > g_max * g_max * (1.0 + 1e-12));
            }
            tmax = tmax.max(c.duration);
        }
        prop_assert!(s.total_duration() <= s.eta() as f64 * tmax * (1.0 + 1e-12));
        prop_assert!(s.eta() <= n);
        if !signed {
            prop_assert!(s.cycles.iter().all(|c| c.sign == 1));
        }
    }

    #[test]
    fn single_cycle_reconstructs_rank_one(vals in prop::collection::vec(-1.0f64..1.0, 6)) {
        let w = DMatrix::from_fn(6, 6, |i, j| vals[i] * vals[j]);
        let t = TargetModel::new(w, TargetKind::Custom).unwrap();
        let s = compile(&t, limits(), Strategy::Signed).unwrap();
        let r = reconstruct(&s.truncated(1)).w;
        let ev = SymmetricEigen::new(r).eigenvalues;
        let mut big = ev.iter().filter(|v| v.abs() > 1e-10 * t.w.norm()).count();
        if t.w.norm() == 0.0 { big = 1; }
        prop_assert_eq!(big, 1);
    }
}

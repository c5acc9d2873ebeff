//! QAOA: ideal circuit against an independent dense construction, sampling,
//! symmetry, and the noisy engine's trace, positivity and dephasing slope.

use std::f64::consts::PI;

use hotline::budget::dephasing_error;
use hotline::compiler::{dregular, TargetKind, TargetModel};
use hotline::qaoa::{
    optimize_angles, optimize_nested, prepare_state_ideal, prepare_state_noisy, prepare_vector, sample_strings, CostHamiltonian,
    Evaluator, NoiseModel, NoisyOptions, OptimizerParams, QaoaConfig,
};
use hotline::state::{basis_state, minus_state, plus_state, SpinRegisterState};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn edge() -> TargetModel {
    TargetModel::new(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]), TargetKind::Graph).unwrap()
}

fn config(graph: TargetModel, gammas: Vec<f64>, betas: Vec<f64>) -> QaoaConfig {
    QaoaConfig { gammas, betas, graph, j_max: 1.0, detuning: -12.5, omega0: 1.0 }
}

/// Dense e^{−iβΣσˣ} e^{−iγH_C} layers on |−…−⟩, built from Kronecker products.
fn dense_qaoa(w: &DMatrix<f64>, gammas: &[f64], betas: &[f64]) -> DVector<C> {
    let n = w.nrows();
    let dim = 1 << n;
    let s = |z: usize, i: usize| if (z >> i) & 1 == 0 { 1.0 } else { -1.0 };
    let h: Vec<f64> = (0..dim)
        .map(|z| {
            let mut e = 0.5 * (0..n).map(|i| w[(i, i)]).sum::<f64>();
            for i in 0..n {
                for j in (i + 1)..n {
                    e += w[(i, j)] * s(z, i) * s(z, j);
                }
            }
            e
        })
        .collect();
    let mut psi = DVector::from_element(dim, C::new(1.0, 0.0));
    for z in 0..dim {
        psi[z] *= (0..n).map(|i| s(z, i)).product::<f64>() / (dim as f64).sqrt();
    }
    for (&g, &b) in gammas.iter().zip(betas) {
        for z in 0..dim {
            psi[z] *= C::from_polar(1.0, -g * h[z]);
        }
        let u1 = DMatrix::from_row_slice(2, 2, &[C::new(b.cos(), 0.0), C::new(0.0, -b.sin()), C::new(0.0, -b.sin()), C::new(b.cos(), 0.0)]);
        let mut u = DMatrix::from_element(1, 1, C::new(1.0, 0.0));
        for _ in 0..n {
            u = u1.kronecker(&u);
        }
        psi = u * psi;
    }
    psi
}

fn min_eigenvalue(s: &SpinRegisterState) -> f64 {
    s.rho.clone().symmetric_eigenvalues().min()
}

#[test]
fn single_edge_grid_and_optimizer() {
    let g = edge();
    let cost = CostHamiltonian::new(&g).unwrap();
    assert_eq!(cost.min_energy().unwrap(), -1.0);
    let mut best = f64::INFINITY;
    for a in 0..=100 {
        for b in 0..=100 {
            let (ga, be) = (PI * a as f64 / 100.0, PI * b as f64 / 100.0);
            let dense = dense_qaoa(&g.w, &[ga], &[be]);
            let e: f64 = dense.iter().zip(&cost.values).map(|(x, e)| x.norm_sqr() * e).sum();
            best = best.min(e);
        }
    }
    assert!(best < -0.99);
    let r = optimize_angles(&config(g, vec![0.3], vec![0.2]), &Evaluator::Ideal, &OptimizerParams::default()).unwrap();
    assert!(r.energy <= best + 1e-9);
    assert!(r.energy >= -1.0 - 1e-12);
    assert!(cost.cut_value(r.best_index) == 1.0);
}

#[test]
fn nested_depths_never_get_worse() {
    let g = dregular(4, 3, 2).unwrap();
    let params = OptimizerParams { restarts: 2, max_evals: 4000, ..Default::default() };
    let rs = optimize_nested(&config(g, vec![], vec![]), &Evaluator::Ideal, &params, 3).unwrap();
    for w in rs.windows(2) {
        assert!(w[1].energy <= w[0].energy + 1e-12);
    }
}

#[test]
fn sampling_statistics() {
    let z = SpinRegisterState::from_pure(&basis_state(3, 5)).unwrap();
    let h = sample_strings(&z, 500, 9).unwrap();
    assert_eq!(h.counts.len(), 1);
    assert_eq!(h.counts[&5], 500);

    let shots = 16_000;
    let u = SpinRegisterState::from_pure(&plus_state(3)).unwrap();
    let h = sample_strings(&u, shots, 4).unwrap();
    let (mean, sd) = (shots as f64 / 8.0, (shots as f64 * (1.0 / 8.0) * (7.0 / 8.0)).sqrt());
    for k in 0..8 {
        let c = *h.counts.get(&k).unwrap_or(&0) as f64;
        assert!((c - mean).abs() < 5.0 * sd, "string {k}: {c}");
    }
    assert!((h.total_frequency() - 1.0).abs() < 1e-15);
    assert_eq!(h, sample_strings(&u, shots, 4).unwrap());
    assert_ne!(h, sample_strings(&u, shots, 5).unwrap());
}

#[test]
fn noiseless_engine_reproduces_ideal_circuit() {
    let g = dregular(4, 3, 1).unwrap();
    let cfg = config(g, vec![0.4, 0.9], vec![0.7, 0.2]);
    let ideal = prepare_state_ideal(&cfg).unwrap();
    // the residual is Fock truncation and follows the leakage tolerance down
    for (tol, bound) in [(1e-6, 1e-6), (1e-12, 1e-10)] {
        let opts = NoisyOptions { leakage_tol: tol, ..Default::default() };
        let run = prepare_state_noisy(&cfg, &NoiseModel::noiseless(), &opts).unwrap();
        let d = run.state.trace_distance(&ideal);
        assert!(d < bound, "tol {tol:e}: {d:e}");
    }
}

#[test]
fn dephasing_slope_matches_budget_formula() {
    // a cost layer commutes with σᶻ dephasing, so at M = 1 the first-order
    // prediction with the pre-layer state is the exact linear response
    let triangle = TargetModel::new(DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 1.0, 2.0]), TargetKind::Graph).unwrap();
    for graph in [edge(), triangle] {
        let n = graph.n();
        let cfg = config(graph, vec![0.6], vec![0.3]);
        let ideal = prepare_vector(&CostHamiltonian::new(&cfg.graph).unwrap(), &cfg.gammas, &cfg.betas);
        let start = SpinRegisterState::from_pure(&minus_state(n)).unwrap();
        let rates = [1e-4, 2e-4, 4e-4];
        let mut slopes = Vec::new();
        for &gp in &rates {
            let run = prepare_state_noisy(&cfg, &NoiseModel::dephasing(gp), &NoisyOptions::default()).unwrap();
            let err = 1.0 - run.state.fidelity_pure(&ideal);
            let predicted = dephasing_error(n, gp, run.t_run, Some(&start)).value;
            slopes.push(err / predicted);
        }
        for s in &slopes {
            assert!((s - 1.0).abs() < 0.1, "N = {n}: {slopes:?}");
        }
    }
}

#[test]
fn error_grows_with_noise_rate() {
    let g = dregular(4, 3, 1).unwrap();
    let cfg = config(g, vec![0.4], vec![0.7]);
    let ideal = prepare_state_ideal(&cfg).unwrap();
    let mut prev = 0.0;
    for k in [0.0, 0.01, 0.03, 0.1] {
        let run = prepare_state_noisy(&cfg, &NoiseModel::loss(k, 0.5), &NoisyOptions::default()).unwrap();
        let d = run.state.trace_distance(&ideal);
        assert!(d >= prev - 1e-12);
        prev = d;
    }
    assert!(prev > 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ideal_matches_dense_construction(
        vals in prop::collection::vec(-1.0f64..1.0, 6),
        gammas in prop::collection::vec(0.0f64..PI, 3),
        betas in prop::collection::vec(0.0f64..PI, 3),
    ) {
        let w = DMatrix::from_row_slice(3, 3, &[vals[0], vals[1], vals[2], vals[1], vals[3], vals[4], vals[2], vals[4], vals[5]]);
        let g = TargetModel::new(w.clone(), TargetKind::Custom).unwrap();
        let cost = CostHamiltonian::new(&g).unwrap();
        let a = prepare_vector(&cost, &gammas, &betas);
        let b = dense_qaoa(&w, &gammas, &betas);
        prop_assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn global_flip_symmetry(seed in 0u64..50, gammas in prop::collection::vec(0.0f64..PI, 2), betas in prop::collection::vec(0.0f64..PI, 2)) {
        let g = dregular(6, 3, seed).unwrap();
        let cost = CostHamiltonian::new(&g).unwrap();
        let psi = prepare_vector(&cost, &gammas, &betas);
        let all = (1 << 6) - 1;
        for z in 0..64 {
            prop_assert!((psi[z].norm_sqr() - psi[z ^ all].norm_sqr()).abs() < 1e-14);
            prop_assert_eq!(cost.energy(z), cost.energy(z ^ all));
        }
    }

    #[test]
    fn noisy_states_stay_physical(
        gamma_phi in 0.0f64..0.05,
        kappa in 0.0f64..0.05,
        nbar in 0.0f64..1.0,
        gamma in 0.1f64..1.5,
        beta in 0.0f64..PI,
    ) {
        let g = dregular(4, 3, 0).unwrap();
        let cfg = config(g, vec![gamma], vec![beta]);
        let noise = NoiseModel { gamma_phi, kappa, nbar_th: nbar, fock_cutoff: None };
        let run = prepare_state_noisy(&cfg, &noise, &NoisyOptions::default()).unwrap();
        prop_assert!((run.state.rho.trace().re - 1.0).abs() < 1e-9);
        prop_assert!(run.state.rho.trace().im.abs() < 1e-12);
        prop_assert!((&run.state.rho - run.state.rho.adjoint()).camax() < 1e-12);
        prop_assert!(min_eigenvalue(&run.state) > -1e-10);
        prop_assert!(run.state.purity() <= 1.0 + 1e-10);
    }
}

//! The block-splitting master-equation engine against a plain dense Lindblad
//! integrator on the joint spin ⊗ truncated-Fock space.

use hotline::compiler::{TargetKind, TargetModel};
use hotline::qaoa::{prepare_state_noisy, prepare_state_ideal, realize_layers, NoiseModel, NoisyOptions, QaoaConfig};
use hotline::state::SpinRegisterState;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;

type M = DMatrix<C>;

fn spin_of(z: usize, i: usize) -> f64 {
    if (z >> i) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

struct Dense {
    n: usize,
    b: usize,
    delta: f64,
    noise: NoiseModel,
}

impl Dense {
    fn dim(&self) -> usize {
        (1 << self.n) * self.b
    }

    fn annihilation(&self) -> M {
        let dim = self.dim();
        let mut a = M::zeros(dim, dim);
        for z in 0..1 << self.n {
            for m in 1..self.b {
                a[(z * self.b + m - 1, z * self.b + m)] = C::new((m as f64).sqrt(), 0.0);
            }
        }
        a
    }

    fn hamiltonian(&self, g: &[f64]) -> M {
        let dim = self.dim();
        let a = self.annihilation();
        let x = &a + a.adjoint();
        let mut h = M::zeros(dim, dim);
        for z in 0..1 << self.n {
            let lam: f64 = g.iter().enumerate().map(|(i, gi)| gi * spin_of(z, i)).sum();
            for m in 0..self.b {
                let r = z * self.b + m;
                h[(r, r)] = C::new(self.delta * m as f64, 0.0);
                for c in 0..dim {
                    if c / self.b == z {
                        h[(r, c)] += x[(r, c)] * lam;
                    }
                }
            }
        }
        h
    }

    fn rhs(&self, h_eff: &M, jumps: &[M], zdiag: &[DVector<f64>], rho: &M) -> M {
        let i = C::new(0.0, 1.0);
        let mut out = (h_eff * rho - rho * h_eff.adjoint()) * (-i);
        for l in jumps {
            out += l * rho * l.adjoint();
        }
        // (γ/2)·σᶻρσᶻ terms, elementwise
        for d in zdiag {
            let g = 0.5 * self.noise.gamma_phi;
            for r in 0..rho.nrows() {
                for c in 0..rho.ncols() {
                    out[(r, c)] += rho[(r, c)] * (g * d[r] * d[c]);
                }
            }
        }
        out
    }

    fn evolve(&self, rho: &mut M, g: &[f64], t: f64, steps: usize) {
        let a = self.annihilation();
        let nb = self.noise.nbar_th;
        let k = self.noise.kappa;
        let jumps = vec![&a * C::new((k * (nb + 1.0)).sqrt(), 0.0), a.adjoint() * C::new((k * nb).sqrt(), 0.0)];
        let zdiag: Vec<DVector<f64>> = (0..self.n)
            .map(|q| DVector::from_fn(self.dim(), |r, _| spin_of(r / self.b, q)))
            .collect();
        let mut h_eff = self.hamiltonian(g);
        let half = C::new(0.0, -0.5);
        for l in &jumps {
            h_eff += l.adjoint() * l * half;
        }
        // σᶻσᶻ = 1, so the dephasing anticommutator is −(γ/2)·N·ρ
        for r in 0..self.dim() {
            h_eff[(r, r)] += half * (0.5 * self.noise.gamma_phi * self.n as f64);
        }
        let dt = t / steps as f64;
        let hdt = C::new(dt, 0.0);
        for _ in 0..steps {
            let k1 = self.rhs(&h_eff, &jumps, &zdiag, rho);
            let k2 = self.rhs(&h_eff, &jumps, &zdiag, &(&*rho + &k1 * (hdt * 0.5)));
            let k3 = self.rhs(&h_eff, &jumps, &zdiag, &(&*rho + &k2 * (hdt * 0.5)));
            let k4 = self.rhs(&h_eff, &jumps, &zdiag, &(&*rho + &k3 * hdt));
            *rho += (k1 + k2 * C::new(2.0, 0.0) + k3 * C::new(2.0, 0.0) + k4) * (hdt / 6.0);
        }
    }

    fn mixer(&self, rho: &mut M, beta: f64) {
        let (c, s) = (beta.cos(), beta.sin());
        let mut u1 = M::zeros(2, 2);
        u1[(0, 0)] = C::new(c, 0.0);
        u1[(1, 1)] = C::new(c, 0.0);
        u1[(0, 1)] = C::new(0.0, -s);
        u1[(1, 0)] = C::new(0.0, -s);
        let mut u = M::identity(1, 1);
        for _ in 0..self.n {
            u = u1.kronecker(&u);
        }
        let full = u.kronecker(&M::identity(self.b, self.b));
        *rho = &full * &*rho * full.adjoint();
    }

    fn reduced(&self, rho: &M) -> M {
        let d = 1 << self.n;
        M::from_fn(d, d, |z, zp| (0..self.b).map(|m| rho[(z * self.b + m, zp * self.b + m)]).sum())
    }

    fn run(&self, cfg: &QaoaConfig, steps_per_period: usize) -> SpinRegisterState {
        let d = 1usize << self.n;
        let x = if self.noise.nbar_th > 0.0 { self.noise.nbar_th / (1.0 + self.noise.nbar_th) } else { 0.0 };
        let th: Vec<f64> = (0..self.b).map(|m| x.powi(m as i32)).collect();
        let zth: f64 = th.iter().sum();
        let amp = C::new(1.0 / (d as f64).sqrt(), 0.0);
        let mut rho = M::zeros(self.dim(), self.dim());
        for z in 0..d {
            for zp in 0..d {
                // |−⟩ = (|0⟩ − |1⟩)/√2 per qubit
                let sz = if (z.count_ones() % 2) == 0 { 1.0 } else { -1.0 };
                let szp = if (zp.count_ones() % 2) == 0 { 1.0 } else { -1.0 };
                for m in 0..self.b {
                    rho[(z * self.b + m, zp * self.b + m)] = amp * amp * (sz * szp * th[m] / zth);
                }
            }
        }
        for (layer, sched) in realize_layers(cfg).unwrap().iter().enumerate() {
            for cyc in &sched.cycles {
                self.evolve(&mut rho, &cyc.amplitudes, cyc.duration, steps_per_period * cyc.p as usize);
            }
            self.mixer(&mut rho, cfg.betas[layer]);
        }
        SpinRegisterState::from_matrix(self.reduced(&rho)).unwrap()
    }
}

fn weighted_triangle() -> TargetModel {
    let w = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.5, 1.0, 0.0, 0.8, 0.5, 0.8, 0.0]);
    TargetModel::new(w, TargetKind::Custom).unwrap()
}

fn edge() -> TargetModel {
    TargetModel::new(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]), TargetKind::Custom).unwrap()
}

#[test]
fn lossy_two_qubit_run_matches_dense_lindblad() {
    let cfg = QaoaConfig { gammas: vec![0.4, 0.7], betas: vec![0.3, 1.1], graph: edge(), j_max: 1.0, detuning: -8.0, omega0: 1.0 };
    let noise = NoiseModel { gamma_phi: 0.05, kappa: 0.3, nbar_th: 0.3, fock_cutoff: Some(6) };
    let engine = prepare_state_noisy(&cfg, &noise, &NoisyOptions::default()).unwrap();
    let dense = Dense { n: 2, b: 7, delta: cfg.detuning, noise: noise.clone() }.run(&cfg, 1500);
    let td = engine.state.trace_distance(&dense);
    assert!(td < 1e-6, "trace distance {td:e}");
    // the noise is strong enough to matter
    let ideal = prepare_state_ideal(&cfg).unwrap();
    assert!(engine.state.trace_distance(&ideal) > 1e-2);
}

#[test]
fn symmetry_reduction_is_exact() {
    let cfg = QaoaConfig { gammas: vec![0.5], betas: vec![0.4], graph: weighted_triangle(), j_max: 1.0, detuning: 10.0, omega0: 1.0 };
    let noise = NoiseModel { gamma_phi: 0.02, kappa: 0.2, nbar_th: 0.5, fock_cutoff: Some(7) };
    let a = prepare_state_noisy(&cfg, &noise, &NoisyOptions::default()).unwrap();
    let b = prepare_state_noisy(&cfg, &noise, &NoisyOptions { use_symmetry: false, ..Default::default() }).unwrap();
    assert!(a.state.trace_distance(&b.state) < 1e-12);
}

#[test]
fn lossy_three_qubit_run_matches_dense_lindblad() {
    let cfg = QaoaConfig { gammas: vec![0.5], betas: vec![0.4], graph: weighted_triangle(), j_max: 1.0, detuning: 10.0, omega0: 1.0 };
    let noise = NoiseModel { gamma_phi: 0.02, kappa: 0.2, nbar_th: 0.5, fock_cutoff: Some(5) };
    let engine = prepare_state_noisy(&cfg, &noise, &NoisyOptions::default()).unwrap();
    let dense = Dense { n: 3, b: 6, delta: cfg.detuning, noise: noise.clone() }.run(&cfg, 1200);
    let td = engine.state.trace_distance(&dense);
    assert!(td < 1e-6, "trace distance {td:e}");
}

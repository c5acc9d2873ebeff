use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::compiler::TargetModel;
use crate::error::{config, Result};
use crate::qaoa::cost::CostHamiltonian;
use crate::state::{minus_state, CVector, SpinRegisterState};

/// QAOA circuit on the single-mode line: angles, problem graph and the
/// hardware scales used when the cost layers are realized physically.
#[derive(Clone, Debug)]
pub struct QaoaConfig {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    pub graph: TargetModel,
    pub j_max: f64,
    /// Mode detuning Δ in the drive frame.
    pub detuning: f64,
    pub omega0: f64,
}

impl QaoaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gammas.len() != self.betas.len() {
            return config("γ and β must have the same length");
        }
        if !(self.j_max > 0.0) {
            return config("J_max must be positive");
        }
        if self.detuning == 0.0 || !self.detuning.is_finite() {
            return config("detuning must be nonzero");
        }
        if self.gammas.iter().chain(&self.betas).any(|v| !v.is_finite()) {
            return config("non-finite angle");
        }
        self.graph.validate()
    }

    pub fn depth(&self) -> usize {
        self.gammas.len()
    }

    /// γ̄ = (1/M) Σ γ_m
    pub fn gammabar(&self) -> f64 {
        if self.gammas.is_empty() {
            0.0
        } else {
            self.gammas.iter().sum::<f64>() / self.gammas.len() as f64
        }
    }

    pub fn with_angles(&self, gammas: Vec<f64>, betas: Vec<f64>) -> Self {
        Self { gammas, betas, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Angles {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

/// e^{−iβ Σσˣ} applied qubit by qubit.
pub fn apply_mixer(psi: &mut CVector, n: usize, beta: f64) {
    let (c, s) = (beta.cos(), beta.sin());
    let ms = Complex64::new(0.0, -s);
    for i in 0..n {
        let bit = 1usize << i;
        for z in 0..psi.len() {
            if z & bit == 0 {
                let (a, b) = (psi[z], psi[z | bit]);
                psi[z] = c * a + ms * b;
                psi[z | bit] = ms * a + c * b;
            }
        }
    }
}

pub fn apply_cost_phase(psi: &mut CVector, cost: &CostHamiltonian, gamma: f64) {
    for z in 0..psi.len() {
        psi[z] *= Complex64::from_polar(1.0, -gamma * cost.values[z]);
    }
}

/// |γ,β⟩ = Π_m U_x(β_m) U_zz(γ_m) |−…−⟩
pub fn prepare_vector(cost: &CostHamiltonian, gammas: &[f64], betas: &[f64]) -> CVector {
    let n = cost.n_qubits;
    let mut psi = minus_state(n);
    for (&g, &b) in gammas.iter().zip(betas) {
        apply_cost_phase(&mut psi, cost, g);
        apply_mixer(&mut psi, n, b);
    }
    psi
}

pub fn energy_of(cost: &CostHamiltonian, psi: &CVector) -> f64 {
    psi.iter().zip(&cost.values).map(|(a, e)| a.norm_sqr() * e).sum()
}

pub fn prepare_state_ideal(config: &QaoaConfig) -> Result<SpinRegisterState> {
    config.validate()?;
    let cost = CostHamiltonian::new(&config.graph)?;
    SpinRegisterState::from_pure(&prepare_vector(&cost, &config.gammas, &config.betas))
}

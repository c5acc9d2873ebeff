//! Closed-form error budget: dephasing, rethermalization, timing, and the
//! cooperativity trade-off that sets the optimal line frequency.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::state::SpinRegisterState;

/// Numerical prefactor of the two-qubit rethermalization error, ξ_κ = α_κ(κ/ω₁)n̄.
/// Quoted from a numerical fit, not derived here.
pub const ALPHA_KAPPA: f64 = 3.0;

/// α_γ = Nπ/8 for an N-qubit register.
pub fn alpha_gamma(n_qubits: usize) -> f64 {
    n_qubits as f64 * PI / 8.0
}

/// Boltzmann constant over Planck constant in GHz per kelvin (exact SI values).
pub const KB_OVER_H_GHZ_PER_K: f64 = 20.836_619_123_327_57;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// Whether the inputs sit inside the formula's small-parameter regime.
    pub valid: bool,
}

/// ξ_φ = (γ_φ t/2) Σ_i (1 − ⟨σᶻ_i⟩²); with no target, the worst case Nγ_φt/2.
pub fn dephasing_error(n_qubits: usize, gamma_phi: f64, t: f64, target: Option<&SpinRegisterState>) -> Estimate {
    let rate_t = gamma_phi * t;
    let weight = match target {
        Some(s) => (0..s.n_qubits).map(|i| 1.0 - s.expect_sz(i).powi(2)).sum(),
        None => n_qubits as f64,
    };
    Estimate { value: 0.5 * rate_t * weight, valid: rate_t <= 0.1 }
}

/// ξ_κ = (κ(1 + 2n̄)/|Δ|)·γ̄MNd
pub fn rethermalization_error(kappa: f64, nbar: f64, delta: f64, gammabar: f64, m: usize, n: usize, d: usize) -> Result<f64> {
    if delta == 0.0 {
        return config("rethermalization error needs a nonzero detuning");
    }
    Ok(kappa * (1.0 + 2.0 * nbar) / delta.abs() * gammabar * (m * n * d) as f64)
}

/// Two-qubit gate special case α_κ(κ/ω₁)n̄.
pub fn rethermalization_error_two_qubit(kappa: f64, omega1: f64, nbar: f64) -> f64 {
    ALPHA_KAPPA * kappa / omega1 * nbar
}

/// (ω₁dt)²{(2n̄+1)(g/ω₁)²(ΔS₁)² + (g/ω₁)⁴(ΔS₁²)²}; valid while ω₁|dt|·max(n̄,1) ≤ 0.1.
pub fn timing_error_formula(omega1: f64, dt: f64, g: f64, nbar: f64, var_s1: f64, var_s1sq: f64) -> Estimate {
    let x = omega1 * dt;
    let r = g / omega1;
    let value = x * x * ((2.0 * nbar + 1.0) * r * r * var_s1 + r.powi(4) * var_s1sq);
    Estimate { value, valid: x.abs() * nbar.max(1.0) <= 0.1 }
}

/// Thermal loss rate κn̄(ω), in the high-temperature form k_BT/Q only when
/// k_BT/ω > 2.
pub fn thermal_loss_rate(kappa: f64, omega: f64, kbt: f64) -> f64 {
    if kbt <= 0.0 {
        0.0
    } else if kbt / omega > 2.0 {
        kappa * kbt / omega
    } else {
        kappa * crate::model::thermal_occupation(omega, kbt)
    }
}

/// C = g²/(γ_φ κ(2n̄+1))
pub fn cooperativity_from_rates(g: f64, gamma_phi: f64, kappa: f64, nbar: f64) -> Result<f64> {
    if !(gamma_phi > 0.0 && kappa > 0.0 && nbar >= 0.0) {
        return config("cooperativity needs positive rates");
    }
    Ok(g * g / (gamma_phi * kappa * (2.0 * nbar + 1.0)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CooperativityOptimum {
    pub cooperativity: f64,
    pub omega1_star: f64,
    pub xi_opt: f64,
    pub alpha_gamma: f64,
    pub alpha_kappa: f64,
}

/// High-temperature optimum: C = g²Q/(γ_φk_BT),
/// ω₁* = √((α_κ/α_γ)·k_BT g²/(Qγ_φ)), ξ_opt = 2√(α_κα_γ)/√C.
/// All inputs share one angular-frequency unit.
pub fn cooperativity_optimum(g: f64, gamma_phi: f64, kbt: f64, quality_q: f64, alpha_gamma: f64) -> Result<CooperativityOptimum> {
    if !(g != 0.0 && gamma_phi > 0.0 && kbt > 0.0 && quality_q > 0.0 && alpha_gamma > 0.0) {
        return config("cooperativity optimum needs positive inputs");
    }
    let c = g * g * quality_q / (gamma_phi * kbt);
    let w_star = (ALPHA_KAPPA / alpha_gamma * kbt * g * g / (quality_q * gamma_phi)).sqrt();
    Ok(CooperativityOptimum {
        cooperativity: c,
        omega1_star: w_star,
        xi_opt: 2.0 * (ALPHA_KAPPA * alpha_gamma).sqrt() / c.sqrt(),
        alpha_gamma,
        alpha_kappa: ALPHA_KAPPA,
    })
}

/// Two-qubit gate error at line frequency ω₁: α_γγ_φ ω₁/g² + α_κ k_BT/(Qω₁),
/// whose minimum over ω₁ is `cooperativity_optimum`.
pub fn two_qubit_error_at(omega1: f64, g: f64, gamma_phi: f64, kbt: f64, quality_q: f64, alpha_gamma: f64) -> f64 {
    alpha_gamma * gamma_phi * omega1 / (g * g) + ALPHA_KAPPA * kbt / (quality_q * omega1)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    /// ξ ≈ γ̄dMN^{3/2}/√C
    pub xi_total: f64,
    /// γ̄MNd/J_max when J_max is given.
    pub t_run: Option<f64>,
}

pub fn qaoa_feasibility(gammabar: f64, d: usize, m: usize, n: usize, c: f64, j_max: Option<f64>) -> Result<Feasibility> {
    if !(c > 0.0) {
        return config("cooperativity must be positive");
    }
    let xi = gammabar * (d * m) as f64 * (n as f64).powf(1.5) / c.sqrt();
    Ok(Feasibility { xi_total: xi, t_run: j_max.map(|j| gammabar * (m * n * d) as f64 / j) })
}

/// Largest N with γ̄dMN^{3/2}/√C ≤ budget.
pub fn max_qubits(budget: f64, gammabar: f64, d: usize, m: usize, c: f64) -> usize {
    let x = budget * c.sqrt() / (gammabar * (d * m) as f64);
    x.powf(2.0 / 3.0).floor() as usize
}

/// Largest M with γ̄dMN^{3/2}/√C ≤ budget.
pub fn max_depth(budget: f64, gammabar: f64, d: usize, n: usize, c: f64) -> usize {
    (budget * c.sqrt() / (gammabar * d as f64 * (n as f64).powf(1.5))).floor() as usize
}

/// ξ_φ + ξ_κ of a QAOA run on a single mode detuned by Δ with coupling g, where
/// J_max = 2g²/|Δ| and the run lasts γ̄MNd/J_max.
pub fn qaoa_error_at_detuning(gammabar: f64, m: usize, n: usize, d: usize, g: f64, gamma_phi: f64, kappa_eff: f64, delta: f64) -> f64 {
    let j_max = 2.0 * g * g / delta.abs();
    let t_run = gammabar * (m * n * d) as f64 / j_max;
    0.5 * n as f64 * gamma_phi * t_run + kappa_eff / delta.abs() * gammabar * (m * n * d) as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetInputs {
    pub n_qubits: usize,
    pub depth_m: usize,
    pub degree_d: usize,
    pub gammabar: f64,
    pub g: f64,
    pub gamma_phi: f64,
    pub kappa: f64,
    pub nbar: f64,
    pub detuning: f64,
    /// Readout offset from the stroboscopic time, for the timing term.
    pub timing_dt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub xi_phi: f64,
    pub xi_kappa: f64,
    pub xi_timing: f64,
    pub xi_total: f64,
    pub cooperativity_c: f64,
    /// Detuning minimizing ξ_φ + ξ_κ at fixed g.
    pub omega1_star: f64,
    pub t_run: f64,
    pub alpha_gamma: f64,
    pub alpha_kappa: f64,
    /// (ΔS₁)² and (ΔS₁²)² of the equatorial product state.
    pub variances: (f64, f64),
}

pub fn assemble_budget(b: &BudgetInputs) -> Result<ErrorBudget> {
    if b.detuning == 0.0 || b.g == 0.0 {
        return config("budget needs nonzero detuning and coupling");
    }
    let n = b.n_qubits as f64;
    let work = b.gammabar * (b.depth_m * b.n_qubits * b.degree_d) as f64;
    let j_max = 2.0 * b.g * b.g / b.detuning.abs();
    let t_run = work / j_max;
    let xi_phi = dephasing_error(b.n_qubits, b.gamma_phi, t_run, None).value;
    let xi_kappa = rethermalization_error(b.kappa, b.nbar, b.detuning, b.gammabar, b.depth_m, b.n_qubits, b.degree_d)?;
    let variances = (n, 2.0 * n * (n - 1.0));
    let xi_timing = timing_error_formula(b.detuning.abs(), b.timing_dt, b.g, b.nbar, variances.0, variances.1).value;
    let kappa_eff = b.kappa * (2.0 * b.nbar + 1.0);
    let (c, w_star) = if b.gamma_phi > 0.0 && b.kappa > 0.0 {
        (
            b.g * b.g / (b.gamma_phi * kappa_eff),
            (4.0 * b.g * b.g * kappa_eff / (b.gamma_phi * n)).sqrt(),
        )
    } else {
        (f64::INFINITY, f64::NAN)
    };
    Ok(ErrorBudget {
        xi_phi,
        xi_kappa,
        xi_timing,
        xi_total: xi_phi + xi_kappa + xi_timing,
        cooperativity_c: c,
        omega1_star: w_star,
        t_run,
        alpha_gamma: alpha_gamma(b.n_qubits),
        alpha_kappa: ALPHA_KAPPA,
        variances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{basis_state, plus_state};

    #[test]
    fn dephasing_special_cases() {
        let z = SpinRegisterState::from_pure(&basis_state(2, 1)).unwrap();
        assert_eq!(dephasing_error(2, 0.01, 1.0, Some(&z)).value, 0.0);
        let p = SpinRegisterState::from_pure(&plus_state(2)).unwrap();
        assert!((dephasing_error(2, 0.01, 1.0, Some(&p)).value - 0.01).abs() < 1e-15);
        assert!((dephasing_error(2, 0.01, 1.0, None).value - 0.01).abs() < 1e-15);
    }

    #[test]
    fn zero_loss() {
        assert_eq!(rethermalization_error(0.0, 2.0, 1.0, 0.3, 3, 4, 3).unwrap(), 0.0);
        assert!(rethermalization_error(1.0, 2.0, 0.0, 0.3, 3, 4, 3).is_err());
        assert_eq!(qaoa_feasibility(0.4, 3, 0, 5, 1e4, None).unwrap().xi_total, 0.0);
        assert_eq!(timing_error_formula(1.0, 0.0, 0.3, 1.0, 2.0, 4.0).value, 0.0);
    }
}

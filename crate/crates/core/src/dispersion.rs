//! Mode structure of a line terminated by an inductive (a₁) and capacitive (a₂)
//! boundary, and the phenomenological nonlinear spectrum.
//!
//! The boundary phase θ_n solves k a₁ = (1 + a₁a₂k²) tan θ together with
//! k = (nπ + 2θ)/L. Substituting the second relation gives a single equation in
//! θ on the branch (−π/2, π/2) between two tangent poles.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub a1: f64,
    pub a2: f64,
    pub length_l: f64,
    pub epsilon_nl: f64,
}

impl BoundarySpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.a1 >= 0.0 && self.a2 >= 0.0 && self.length_l > 0.0) || !self.epsilon_nl.is_finite() {
            return config("boundary lengths must be nonnegative and L positive");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeRoot {
    pub n: usize,
    pub k: f64,
    pub theta: f64,
}

impl ModeRoot {
    /// Residuals of (k a₁ − (1 + a₁a₂k²) tan θ, k − (nπ + 2θ)/L).
    pub fn residuals(&self, spec: &BoundarySpec) -> (f64, f64) {
        let (k, th) = (self.k, self.theta);
        let r1 = k * spec.a1 - (1.0 + spec.a1 * spec.a2 * k * k) * th.tan();
        let r2 = k - (self.n as f64 * PI + 2.0 * th) / spec.length_l;
        (r1, r2)
    }
}

const POLE_GAP: f64 = 1e-9;

pub fn solve_modes(spec: &BoundarySpec, n_modes: usize) -> Result<Vec<ModeRoot>> {
    spec.validate()?;
    if n_modes == 0 {
        return config("need at least one mode");
    }
    (1..=n_modes).map(|n| solve_one(spec, n)).collect()
}

fn solve_one(spec: &BoundarySpec, n: usize) -> Result<ModeRoot> {
    let l = spec.length_l;
    let k_of = |th: f64| (n as f64 * PI + 2.0 * th) / l;
    if spec.a1 == 0.0 {
        return Ok(ModeRoot { n, k: k_of(0.0), theta: 0.0 });
    }
    // F(θ) = k a₁ cos θ − (1 + a₁a₂k²) sin θ: tan written without its poles
    let f = |th: f64| {
        let k = k_of(th);
        k * spec.a1 * th.cos() - (1.0 + spec.a1 * spec.a2 * k * k) * th.sin()
    };
    // F(0) = k a₁ > 0 and F(π/2⁻) < 0: the root lies in (0, π/2)
    let (mut lo, mut hi) = (0.0, FRAC_PI_2 - POLE_GAP);
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo > 0.0 && fhi < 0.0) {
        return Err(Error::Solver(format!(
            "mode {n}: root not bracketed on (0, π/2): F(0) = {flo:.3e}, F(π/2) = {fhi:.3e}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = if f(lo).abs() < f(hi).abs() { lo } else { hi };
    let root = ModeRoot { n, k: k_of(theta), theta };
    let (r1, _) = root.residuals(spec);
    let scale = (root.k * spec.a1).max(1.0);
    if !(r1.abs() < 1e-12 * scale) {
        return Err(Error::Solver(format!("mode {n}: residual {r1:.3e} above tolerance")));
    }
    Ok(root)
}

/// ω_n = ω₁n − εω₁(n−1)², n = 1..n_modes.
pub fn nonlinear_spectrum(omega1: f64, epsilon: f64, n_modes: usize) -> Result<Vec<f64>> {
    let w: Vec<f64> = (1..=n_modes)
        .map(|n| {
            let n = n as f64;
            omega1 * n - epsilon * omega1 * (n - 1.0).powi(2)
        })
        .collect();
    if let Some(i) = w.iter().position(|&x| !(x > 0.0)) {
        return config(format!("nonlinear spectrum: mode {} has frequency {:.3e} ≤ 0", i + 1, w[i]));
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_line() {
        let s = BoundarySpec { a1: 0.0, a2: 0.3, length_l: 2.0, epsilon_nl: 0.0 };
        for r in solve_modes(&s, 10).unwrap() {
            assert_eq!(r.theta, 0.0);
            assert_eq!(r.k, r.n as f64 * PI / 2.0);
        }
    }

    #[test]
    fn nonlinear_spectrum_values() {
        let w = nonlinear_spectrum(2.0, 0.01, 5).unwrap();
        assert_eq!(w[0], 2.0);
        assert!((w[1] - (4.0 - 0.02)).abs() < 1e-15);
        assert!(nonlinear_spectrum(1.0, 0.5, 5).is_err());
    }
}

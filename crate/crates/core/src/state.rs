//! Qubit-register density matrices and the entanglement measures used by the
//! gate reports.
//!
//! Basis convention: bit i of a basis index z is qubit i; bit 0 is the σᶻ = +1
//! state |0⟩, bit 1 is σᶻ = −1.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// σᶻ eigenvalue s_i(z) ∈ {+1, −1}.
#[inline]
pub fn spin(z: usize, i: usize) -> f64 {
    if (z >> i) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn spins(z: usize, n: usize) -> Vec<f64> {
    (0..n).map(|i| spin(z, i)).collect()
}

/// Product state ⊗_i (c0_i|0⟩ + c1_i|1⟩).
pub fn product_state(factors: &[(Complex64, Complex64)]) -> CVector {
    let n = factors.len();
    DVector::from_fn(1 << n, |z, _| {
        factors
            .iter()
            .enumerate()
            .fold(ONE, |acc, (i, &(c0, c1))| acc * if (z >> i) & 1 == 0 { c0 } else { c1 })
    })
}

/// |+⟩^{⊗N}
pub fn plus_state(n: usize) -> CVector {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    product_state(&vec![(h, h); n])
}

/// |−⟩^{⊗N}
pub fn minus_state(n: usize) -> CVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    product_state(&vec![(Complex64::new(h, 0.0), Complex64::new(-h, 0.0)); n])
}

pub fn basis_state(n: usize, z: usize) -> CVector {
    let mut v = DVector::from_element(1 << n, ZERO);
    v[z] = ONE;
    v
}

pub fn check_normalized(psi: &CVector) -> Result<()> {
    let norm = psi.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Validation(format!("state norm {norm} is not 1")));
    }
    if !psi.len().is_power_of_two() {
        return Err(Error::Validation(format!("state length {} is not a power of two", psi.len())));
    }
    Ok(())
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinRegisterState {
    pub n_qubits: usize,
    pub rho: CMatrix,
}

impl SpinRegisterState {
    pub fn from_pure(psi: &CVector) -> Result<Self> {
        check_normalized(psi)?;
        let n_qubits = psi.len().trailing_zeros() as usize;
        Ok(Self { n_qubits, rho: psi * psi.adjoint() })
    }

    pub fn from_matrix(rho: CMatrix) -> Result<Self> {
        if rho.nrows() != rho.ncols() || !rho.nrows().is_power_of_two() {
            return Err(Error::Validation("density matrix must be square of size 2^N".into()));
        }
        let n_qubits = rho.nrows().trailing_zeros() as usize;
        Ok(Self { n_qubits, rho })
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    /// Hermiticity and unit trace to 1e−12, eigenvalues ≥ −1e−10.
    pub fn validate(&self) -> Result<()> {
        let herm = (&self.rho - self.rho.adjoint()).camax();
        if herm > 1e-12 {
            return Err(Error::Validation(format!("density matrix not Hermitian (deviation {herm:.2e})")));
        }
        let tr = self.rho.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::Validation(format!("trace {tr} differs from 1")));
        }
        let lo = hermitian_eigenvalues(&self.rho)[0];
        if lo < -1e-10 {
            return Err(Error::Validation(format!("negative eigenvalue {lo:.3e}")));
        }
        Ok(())
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|z| self.rho[(z, z)].re).collect()
    }

    /// ⟨ψ|ρ|ψ⟩
    pub fn fidelity_pure(&self, psi: &CVector) -> f64 {
        (psi.adjoint() * &self.rho * psi)[(0, 0)].re
    }

    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ |ρ_ij|² for Hermitian ρ
        self.rho.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Von Neumann entropy in nats, eigenvalues below 1e−12 clamped to zero.
    pub fn entropy(&self) -> f64 {
        hermitian_eigenvalues(&self.rho)
            .into_iter()
            .filter(|&p| p > 1e-12)
            .map(|p| -p * p.ln())
            .sum::<f64>()
            .max(0.0)
    }

    pub fn expect_sz(&self, i: usize) -> f64 {
        (0..self.dim()).map(|z| spin(z, i) * self.rho[(z, z)].re).sum()
    }

    pub fn trace_distance(&self, other: &Self) -> f64 {
        let d = &self.rho - &other.rho;
        0.5 * hermitian_eigenvalues(&d).iter().map(|v| v.abs()).sum::<f64>()
    }

    /// Wootters concurrence; two qubits only.
    pub fn concurrence(&self) -> Result<f64> {
        if self.n_qubits != 2 {
            return Err(Error::Unsupported(format!("concurrence for N = {} qubits", self.n_qubits)));
        }
        let eig = SymmetricEigen::new(self.rho.clone());
        let vals: Vec<f64> = eig.eigenvalues.iter().map(|&p| if p > 1e-12 { p } else { 0.0 }).collect();
        let rank = vals.iter().filter(|&&p| p > 0.0).count();
        let yy = spin_flip_matrix();
        if rank == 1 {
            // pure state: C = |⟨ψ|σʸσʸ|ψ*⟩|, avoiding square roots of round-off
            let k = vals.iter().position(|&p| p > 0.0).unwrap();
            let psi = eig.eigenvectors.column(k).into_owned();
            let c = (psi.transpose() * &yy * &psi)[(0, 0)].norm();
            return Ok(c.min(1.0));
        }
        let sqrt_rho = {
            let v = &eig.eigenvectors;
            let d = CMatrix::from_diagonal(&DVector::from_iterator(4, vals.iter().map(|&p| Complex64::new(p.sqrt(), 0.0))));
            v * d * v.adjoint()
        };
        let tilde = &yy * self.rho.conjugate() * &yy;
        let r = &sqrt_rho * tilde * &sqrt_rho;
        let r = (&r + r.adjoint()) * Complex64::new(0.5, 0.0);
        let mut lam: Vec<f64> = hermitian_eigenvalues(&r).into_iter().map(|m| m.max(0.0).sqrt()).collect();
        lam.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok((lam[0] - lam[1] - lam[2] - lam[3]).clamp(0.0, 1.0))
    }
}

/// σʸ ⊗ σʸ in the computational basis.
fn spin_flip_matrix() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    // σʸσʸ|00⟩ = −|11⟩, |01⟩ → |10⟩, |10⟩ → |01⟩, |11⟩ → −|00⟩
    m[(3, 0)] = -ONE;
    m[(2, 1)] = ONE;
    m[(1, 2)] = ONE;
    m[(0, 3)] = -ONE;
    m
}

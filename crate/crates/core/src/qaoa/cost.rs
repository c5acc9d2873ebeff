use crate::compiler::TargetModel;
use crate::error::{Error, Result};
use crate::state::spin;

/// Largest register for which the exact optimum is found by enumeration.
pub const ENUMERATION_LIMIT: usize = 20;

/// Diagonal Max-Cut cost H_C(z) = Σ_{i<j} w_ij s_i s_j + ½Σ_i w_ii over all
/// bit strings z.
#[derive(Clone, Debug)]
pub struct CostHamiltonian {
    pub n_qubits: usize,
    pub values: Vec<f64>,
    pub constant: f64,
    edges: Vec<(usize, usize, f64)>,
}

impl CostHamiltonian {
    pub fn new(graph: &TargetModel) -> Result<Self> {
        graph.validate()?;
        let n = graph.n();
        if n > 26 {
            return Err(Error::EnumerationLimit { n, limit: 26 });
        }
        let edges = graph.edges();
        let constant = 0.5 * (0..n).map(|i| graph.w[(i, i)]).sum::<f64>();
        let values = (0..1usize << n)
            .map(|z| constant + edges.iter().map(|&(i, j, w)| w * spin(z, i) * spin(z, j)).sum::<f64>())
            .collect();
        Ok(Self { n_qubits: n, values, constant, edges })
    }

    pub fn energy(&self, z: usize) -> f64 {
        self.values[z]
    }

    /// Total weight of edges crossing the cut defined by z.
    pub fn cut_value(&self, z: usize) -> f64 {
        self.edges.iter().filter(|&&(i, j, _)| spin(z, i) != spin(z, j)).map(|e| e.2).sum()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    fn check_limit(&self) -> Result<()> {
        if self.n_qubits > ENUMERATION_LIMIT {
            return Err(Error::EnumerationLimit { n: self.n_qubits, limit: ENUMERATION_LIMIT });
        }
        Ok(())
    }

    /// Exact minimum by exhaustive enumeration.
    pub fn min_energy(&self) -> Result<f64> {
        self.check_limit()?;
        Ok(self.values.iter().copied().fold(f64::INFINITY, f64::min))
    }

    pub fn max_energy(&self) -> Result<f64> {
        self.check_limit()?;
        Ok(self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }

    /// All strings attaining the minimum (to 1e−9).
    pub fn optimal_strings(&self) -> Result<Vec<usize>> {
        let m = self.min_energy()?;
        Ok((0..self.values.len()).filter(|&z| self.values[z] <= m + 1e-9).collect())
    }

    pub fn expectation(&self, probabilities: &[f64]) -> f64 {
        probabilities.iter().zip(&self.values).map(|(p, e)| p * e).sum()
    }
}

/// Bit string of z, qubit 0 first.
pub fn bits(z: usize, n: usize) -> Vec<u8> {
    (0..n).map(|i| ((z >> i) & 1) as u8).collect()
}

pub fn bits_to_string(z: usize, n: usize) -> String {
    bits(z, n).iter().map(|b| if *b == 1 { '1' } else { '0' }).collect()
}

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::SpinRegisterState;

/// Measured bit strings (index z, qubit i = bit i) and their counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub n_qubits: usize,
    pub shots: usize,
    pub counts: BTreeMap<usize, usize>,
}

impl Histogram {
    pub fn frequency(&self, z: usize) -> f64 {
        if self.shots == 0 {
            return 0.0;
        }
        *self.counts.get(&z).unwrap_or(&0) as f64 / self.shots as f64
    }

    /// Most frequent string; ties go to the smaller index.
    pub fn modal(&self) -> Option<usize> {
        self.counts.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(z, _)| *z)
    }

    pub fn total_frequency(&self) -> f64 {
        self.counts.keys().map(|&z| self.frequency(z)).sum()
    }
}

/// Computational-basis shots drawn from diag(ρ); deterministic for a fixed seed.
pub fn sample_strings(state: &SpinRegisterState, shots: usize, seed: u64) -> Result<Histogram> {
    let weights: Vec<f64> = state.populations().into_iter().map(|p| p.max(0.0)).collect();
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::Validation(format!("populations: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        *counts.entry(dist.sample(&mut rng)).or_insert(0) += 1;
    }
    Ok(Histogram { n_qubits: state.n_qubits, shots, counts })
}

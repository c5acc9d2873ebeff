//! Brute-force reference: the full Hamiltonian in a truncated multimode Fock
//! space, one dense block per spin configuration (σᶻ is conserved), exact
//! matrix exponentials via eigendecomposition, then the partial trace.
//!
//! Deliberately shares nothing with the closed form beyond the mode data.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::dynamics::exact::spin_energy;
use crate::error::{config, Error, Result};
use crate::model::{ModeSet, NetworkSpec};
use crate::state::{check_normalized, spin, CMatrix, CVector, SpinRegisterState, ZERO};

#[derive(Clone, Debug)]
pub struct OracleOptions {
    pub fock_cutoff: usize,
    /// Limit on 2^N·(cutoff+1)^modes.
    pub dim_limit: usize,
    /// Largest discarded Boltzmann weight accepted.
    pub max_discarded_weight: f64,
    /// Cutoff of the comparison run behind `truncation_bound`; `None` doubles
    /// `fock_cutoff` (capped by `dim_limit`), `Some(c)` with c ≤ `fock_cutoff`
    /// skips the comparison.
    pub reference_cutoff: Option<usize>,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { fock_cutoff: 12, dim_limit: 200_000, max_discarded_weight: 1e-2, reference_cutoff: None }
    }
}

#[derive(Clone, Debug)]
pub struct OracleRun {
    pub states: Vec<SpinRegisterState>,
    /// Boltzmann weight of the initial thermal state outside the truncated space.
    pub discarded_weight: f64,
    /// Truncation error estimate: the discarded weight plus the largest trace
    /// distance to a run at the reference cutoff. The displaced thermal state
    /// leaks well beyond the initial Boltzmann tail, so the weight alone
    /// underestimates the error by orders of magnitude once k_BT ~ ω.
    pub truncation_bound: f64,
    pub reference_cutoff: Option<usize>,
}

struct Block {
    energies: Vec<f64>,
    vectors: DMatrix<f64>,
}

pub fn evolve_oracle(
    spec: &NetworkSpec,
    modes: &ModeSet,
    psi0: &CVector,
    times: &[f64],
    opts: &OracleOptions,
) -> Result<OracleRun> {
    let (states, discarded) = run_at(spec, modes, psi0, times, opts, opts.fock_cutoff)?;
    let fits = |c: usize| {
        (c + 1)
            .checked_pow(modes.n_modes() as u32)
            .and_then(|f| f.checked_mul(1 << spec.n_qubits()))
            .is_some_and(|d| d <= opts.dim_limit)
    };
    let reference = match opts.reference_cutoff {
        Some(c) if c > opts.fock_cutoff => Some(c),
        Some(_) => None,
        None => (opts.fock_cutoff + 1..=2 * opts.fock_cutoff).rev().find(|&c| fits(c)),
    };
    let mut bound = discarded;
    if let Some(c) = reference {
        let (ref_states, _) = run_at(spec, modes, psi0, times, opts, c)?;
        let diff = states.iter().zip(&ref_states).map(|(a, b)| a.trace_distance(b)).fold(0.0, f64::max);
        bound += diff;
    }
    Ok(OracleRun { states, discarded_weight: discarded, truncation_bound: bound, reference_cutoff: reference })
}

fn run_at(
    spec: &NetworkSpec,
    modes: &ModeSet,
    psi0: &CVector,
    times: &[f64],
    opts: &OracleOptions,
    cutoff: usize,
) -> Result<(Vec<SpinRegisterState>, f64)> {
    spec.validate()?;
    check_normalized(psi0)?;
    let nq = spec.n_qubits();
    if modes.n_qubits() != nq || psi0.len() != 1 << nq {
        return config("oracle inputs disagree on the qubit count");
    }
    let levels = cutoff + 1;
    let nm = modes.n_modes();
    let fock_dim = levels
        .checked_pow(nm as u32)
        .ok_or(Error::DimensionLimit { dim: usize::MAX, limit: opts.dim_limit })?;
    let total = fock_dim.saturating_mul(1 << nq);
    if total > opts.dim_limit {
        return Err(Error::DimensionLimit { dim: total, limit: opts.dim_limit });
    }

    // truncated Boltzmann state, product over modes
    let ratios: Vec<f64> = modes
        .thermal_occ
        .iter()
        .map(|&nb| if nb > 0.0 { nb / (nb + 1.0) } else { 0.0 })
        .collect();
    let kept: f64 = ratios.iter().map(|&x| 1.0 - x.powi(levels as i32)).product();
    let discarded = 1.0 - kept;
    if discarded > opts.max_discarded_weight {
        return Err(Error::Truncation { weight: discarded, tol: opts.max_discarded_weight });
    }
    let occupation = |idx: usize, mode: usize| (idx / levels.pow(mode as u32)) % levels;
    let boltzmann: Vec<f64> = (0..fock_dim)
        .map(|idx| {
            (0..nm)
                .map(|m| {
                    let x = ratios[m];
                    let k = occupation(idx, m) as i32;
                    if x == 0.0 {
                        if k == 0 {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        (1.0 - x) * x.powi(k)
                    }
                })
                .product::<f64>()
                / kept
        })
        .collect();

    let configs = 1usize << nq;
    let blocks: Vec<Block> = (0..configs)
        .map(|z| {
            let mut h = DMatrix::<f64>::zeros(fock_dim, fock_dim);
            let e = spin_energy(spec, z);
            for idx in 0..fock_dim {
                let mut diag = e;
                for m in 0..nm {
                    let k = occupation(idx, m);
                    diag += modes.omega[m] * k as f64;
                    // λ (a + a†) connects k ↔ k+1 with amplitude √(k+1)
                    if k + 1 < levels {
                        let lam: f64 = (0..nq).map(|i| modes.couplings[(i, m)] * spin(z, i)).sum();
                        let j = idx + levels.pow(m as u32);
                        let v = lam * ((k + 1) as f64).sqrt();
                        h[(idx, j)] = v;
                        h[(j, idx)] = v;
                    }
                }
                h[(idx, idx)] = diag;
            }
            let eig = SymmetricEigen::new(h);
            Block { energies: eig.eigenvalues.iter().copied().collect(), vectors: eig.eigenvectors }
        })
        .collect();

    // Tr[U_s ρ_th U_{s'}†] = Σ_ab W_ab e^{−i(E_a − E'_b)t}, W_ab = (V_sᵀρV_{s'})_ab (V_{s'}ᵀV_s)_ba
    let rho_th = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(boltzmann));
    let mut weights: Vec<(usize, usize, DMatrix<f64>)> = Vec::new();
    for z in 0..configs {
        for zp in z..configs {
            if psi0[z] == ZERO || psi0[zp] == ZERO {
                continue;
            }
            let (bs, bp) = (&blocks[z], &blocks[zp]);
            let m1 = bs.vectors.transpose() * &rho_th * &bp.vectors;
            let m2 = bp.vectors.transpose() * &bs.vectors;
            let w = m1.component_mul(&m2.transpose());
            weights.push((z, zp, w));
        }
    }

    let mut states = Vec::with_capacity(times.len());
    for &t in times {
        let phases: Vec<Vec<Complex64>> = blocks
            .iter()
            .map(|b| b.energies.iter().map(|&e| Complex64::from_polar(1.0, -e * t)).collect())
            .collect();
        let mut rho = CMatrix::from_element(configs, configs, ZERO);
        for (z, zp, w) in &weights {
            let (pa, pb) = (&phases[*z], &phases[*zp]);
            let mut tr = ZERO;
            for b in 0..fock_dim {
                let mut col = ZERO;
                for a in 0..fock_dim {
                    col += pa[a] * w[(a, b)];
                }
                tr += col * pb[b].conj();
            }
            let v = psi0[*z] * psi0[*zp].conj() * tr;
            rho[(*z, *zp)] = v;
            rho[(*zp, *z)] = v.conj();
        }
        for z in 0..configs {
            rho[(z, z)] = Complex64::new(rho[(z, z)].re, 0.0);
        }
        states.push(SpinRegisterState::from_matrix(rho)?);
    }
    Ok((states, discarded))
}

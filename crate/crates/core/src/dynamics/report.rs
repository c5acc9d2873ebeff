//! Gate observables along a trajectory: fidelity to the ideal phase gate,
//! entanglement, and the photon content of the line in mode and real space.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dynamics::exact::{evolve_exact, DisplacementRecord};
use crate::error::{config, Result};
use crate::model::{CouplingMatrix, ModeSet, NetworkSpec};
use crate::state::{spin, CVector, SpinRegisterState};

/// Diagonal unitary exp[−i t (Σ_i ω_i σᶻ_i/2 + Σ_{i<j} J_ij σᶻ_iσᶻ_j)].
#[derive(Clone, Debug)]
pub struct DiagonalPhaseGate {
    pub omega: Vec<f64>,
    pub j: CouplingMatrix,
}

impl DiagonalPhaseGate {
    pub fn new(omega: Vec<f64>, j: CouplingMatrix) -> Result<Self> {
        if omega.len() != j.n() {
            return config("gate frequencies and couplings disagree on N");
        }
        Ok(Self { omega, j })
    }

    /// Gate realized by the line: qubit frequencies of `spec`, couplings `j`.
    pub fn from_spec(spec: &NetworkSpec, j: CouplingMatrix) -> Self {
        Self { omega: spec.qubits.iter().map(|q| q.frequency_omega).collect(), j }
    }

    pub fn n(&self) -> usize {
        self.omega.len()
    }

    pub fn phase(&self, z: usize, t: f64) -> f64 {
        let n = self.n();
        let mut e = 0.0;
        for i in 0..n {
            let si = spin(z, i);
            e += 0.5 * self.omega[i] * si;
            for k in (i + 1)..n {
                e += self.j.get(i, k) * si * spin(z, k);
            }
        }
        -e * t
    }

    pub fn apply(&self, psi: &CVector, t: f64) -> CVector {
        CVector::from_fn(psi.len(), |z, _| psi[z] * Complex64::from_polar(1.0, self.phase(z, t)))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum FidelityReference {
    /// Target evaluated at the sample time itself.
    #[default]
    Instantaneous,
    /// Target frozen at a given gate time.
    FixedTime(f64),
}

#[derive(Clone, Debug, Default)]
pub struct ReportOptions {
    pub concurrence: bool,
    /// Real-space sample count; defaults to the mode count.
    pub realspace_points: Option<usize>,
    pub reference: FidelityReference,
}

impl ReportOptions {
    pub fn two_qubit() -> Self {
        Self { concurrence: true, ..Self::default() }
    }
}

#[derive(Clone, Debug)]
pub struct GateReport {
    pub times: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub entropy: Vec<f64>,
    /// Empty unless requested.
    pub concurrence: Vec<f64>,
    /// rows: times, columns: modes
    pub mode_occ: DMatrix<f64>,
    pub realspace_x: Vec<f64>,
    /// rows: times, columns: `realspace_x`
    pub realspace_occ: DMatrix<f64>,
    pub total_photons: Vec<f64>,
    pub net_photons: Vec<f64>,
    pub states: Vec<SpinRegisterState>,
}

/// ⟨a†_n a_m⟩ at time t for the given configuration populations.
pub fn mode_coherence(rec: &DisplacementRecord, modes: &ModeSet, populations: &[f64], t: f64) -> DMatrix<Complex64> {
    let m = modes.n_modes();
    let mut c = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
    for n in 0..m {
        c[(n, n)] += modes.thermal_occ[n];
    }
    for (z, &p) in populations.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let alpha: Vec<Complex64> = (0..m).map(|n| rec.alpha(z, n, t)).collect();
        for n in 0..m {
            for k in 0..m {
                c[(n, k)] += p * alpha[n].conj() * alpha[k];
            }
        }
    }
    c
}

/// Uniform interior grid x_j = jL/(M+1), j = 1..M.
pub fn realspace_grid(length_l: f64, points: usize) -> Vec<f64> {
    (1..=points).map(|j| j as f64 * length_l / (points + 1) as f64).collect()
}

pub fn gate_report(
    spec: &NetworkSpec,
    modes: &ModeSet,
    psi0: &CVector,
    target: &DiagonalPhaseGate,
    times: &[f64],
    opts: &ReportOptions,
) -> Result<GateReport> {
    let n = spec.n_qubits();
    if opts.concurrence && n != 2 {
        return Err(crate::Error::Unsupported(format!("concurrence for N = {n} qubits")));
    }
    if target.n() != n {
        return config("target gate acts on a different qubit count");
    }
    let states = evolve_exact(spec, modes, psi0, times)?;
    let rec = DisplacementRecord::new(modes);
    let pops: Vec<f64> = psi0.iter().map(|c| c.norm_sqr()).collect();
    let m = modes.n_modes();
    let xs = realspace_grid(modes.length_l, opts.realspace_points.unwrap_or(m));
    let norm = 2.0 / modes.length_l;
    // sin(k_n x) table, rows x
    let sines = DMatrix::from_fn(xs.len(), m, |j, k| (modes.k[k] * xs[j]).sin());
    let thermal_rs: Vec<f64> = (0..xs.len())
        .map(|j| norm * (0..m).map(|k| sines[(j, k)].powi(2) * modes.thermal_occ[k]).sum::<f64>())
        .collect();
    let background: f64 = modes.thermal_occ.iter().sum();

    let mut fidelity = Vec::new();
    let mut entropy = Vec::new();
    let mut concurrence = Vec::new();
    let mut mode_occ = DMatrix::zeros(times.len(), m);
    let mut realspace_occ = DMatrix::zeros(times.len(), xs.len());
    let mut total = Vec::new();
    let mut net = Vec::new();
    for (ti, (&t, st)) in times.iter().zip(&states).enumerate() {
        let t_ref = match opts.reference {
            FidelityReference::Instantaneous => t,
            FidelityReference::FixedTime(tg) => tg,
        };
        let psi_t = target.apply(psi0, t_ref);
        fidelity.push(st.fidelity_pure(&psi_t).clamp(0.0, 1.0));
        entropy.push(st.entropy());
        if opts.concurrence {
            concurrence.push(st.concurrence()?);
        }
        let mut excess = 0.0;
        let mut rs = thermal_rs.clone();
        for (z, &p) in pops.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let alpha: Vec<Complex64> = (0..m).map(|k| rec.alpha(z, k, t)).collect();
            for k in 0..m {
                let a2 = p * alpha[k].norm_sqr();
                mode_occ[(ti, k)] += a2;
                excess += a2;
            }
            for (j, r) in rs.iter_mut().enumerate() {
                let amp: Complex64 = (0..m).map(|k| alpha[k] * sines[(j, k)]).sum();
                *r += norm * p * amp.norm_sqr();
            }
        }
        for k in 0..m {
            mode_occ[(ti, k)] += modes.thermal_occ[k];
        }
        for (j, r) in rs.into_iter().enumerate() {
            realspace_occ[(ti, j)] = r;
        }
        total.push(background + excess);
        net.push(excess);
    }
    Ok(GateReport {
        times: times.to_vec(),
        fidelity,
        entropy,
        concurrence,
        mode_occ,
        realspace_x: xs,
        realspace_occ,
        total_photons: total,
        net_photons: net,
        states,
    })
}

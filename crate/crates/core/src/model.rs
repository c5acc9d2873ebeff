//! Physical configuration of the line + qubit network, its discretized modes
//! and the photon-mediated Ising couplings.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitSpec {
    pub position_x: f64,
    /// Qubit splitting ω_i.
    pub frequency_omega: f64,
    /// Bare longitudinal coupling g_i (sign allowed).
    pub base_coupling_g: f64,
}

impl QubitSpec {
    pub fn new(position_x: f64, frequency_omega: f64, base_coupling_g: f64) -> Self {
        Self { position_x, frequency_omega, base_coupling_g }
    }
}

/// Transmission line of length L, propagation speed c, coupling-profile width a,
/// and temperature expressed as an energy k_B·T in units of angular frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub length_l: f64,
    pub speed_c: f64,
    pub cutoff_a: f64,
    pub temperature_t: f64,
    pub qubits: Vec<QubitSpec>,
}

impl NetworkSpec {
    pub fn new(length_l: f64, speed_c: f64, cutoff_a: f64, temperature_t: f64, qubits: Vec<QubitSpec>) -> Result<Self> {
        let s = Self { length_l, speed_c, cutoff_a, temperature_t, qubits };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.length_l, self.speed_c, self.cutoff_a, self.temperature_t];
        if finite.iter().any(|v| !v.is_finite()) {
            return config("non-finite line parameter");
        }
        if self.length_l <= 0.0 || self.speed_c <= 0.0 {
            return config("length and speed must be positive");
        }
        if !(self.cutoff_a > 0.0 && self.cutoff_a < self.length_l) {
            return config(format!("cutoff a = {} must lie in (0, L = {})", self.cutoff_a, self.length_l));
        }
        if self.temperature_t < 0.0 {
            return config("temperature must be nonnegative");
        }
        for (i, q) in self.qubits.iter().enumerate() {
            if !(q.position_x.is_finite() && q.frequency_omega.is_finite() && q.base_coupling_g.is_finite()) {
                return config(format!("qubit {i}: non-finite parameter"));
            }
            // small slack so that x = L - a survives round-off
            let slack = 1e-12 * self.length_l;
            if q.position_x < 0.0 || q.position_x + self.cutoff_a > self.length_l + slack {
                return config(format!(
                    "qubit {i}: profile [{}, {}] leaves the line [0, {}]",
                    q.position_x,
                    q.position_x + self.cutoff_a,
                    self.length_l
                ));
            }
            if q.frequency_omega < 0.0 {
                return config(format!("qubit {i}: negative frequency"));
            }
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.qubits.len()
    }

    /// Fundamental ω₁ = πc/L.
    pub fn omega1(&self) -> f64 {
        PI * self.speed_c / self.length_l
    }

    /// Round-trip time τ = 2L/c = 2π/ω₁.
    pub fn round_trip(&self) -> f64 {
        2.0 * self.length_l / self.speed_c
    }

    pub fn profile(&self) -> BoxProfile {
        BoxProfile { width: self.cutoff_a }
    }

    pub fn with_temperature(&self, t: f64) -> Self {
        Self { temperature_t: t, ..self.clone() }
    }

    /// Multiplies every bare coupling by `factor`.
    pub fn scaled_couplings(&self, factor: f64) -> Self {
        let mut s = self.clone();
        for q in &mut s.qubits {
            q.base_coupling_g *= factor;
        }
        s
    }
}

/// Spatial profile of a qubit's coupling to the line, normalized to unit area.
pub trait CouplingProfile: std::fmt::Debug + Send + Sync {
    /// ∫ cos(k x) f(x − x0) dx
    fn mode_overlap(&self, k: f64, x0: f64) -> f64;
    /// ∫ f(x − xi) f(x − xj) dx
    fn pair_overlap(&self, xi: f64, xj: f64) -> f64;
    fn width(&self) -> f64;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxProfile {
    pub width: f64,
}

impl CouplingProfile for BoxProfile {
    fn mode_overlap(&self, k: f64, x0: f64) -> f64 {
        let a = self.width;
        if k == 0.0 {
            return 1.0;
        }
        // (sin k(x0+a) − sin k x0)/(k a), written as a product to avoid cancellation
        let half = 0.5 * k * a;
        (k * x0 + half).cos() * sinc(half)
    }

    fn pair_overlap(&self, xi: f64, xj: f64) -> f64 {
        let a = self.width;
        let ovl = (a - (xi - xj).abs()).max(0.0);
        ovl / (a * a)
    }

    fn width(&self) -> f64 {
        self.width
    }
}

pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Bose–Einstein occupation; exactly zero at T = 0.
pub fn thermal_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (omega.abs() / temperature).exp_m1()
}

/// Smallest mode count with k_n a ≥ 4π, i.e. a few oscillations of the mode
/// functions across the coupling profile.
pub fn default_mode_count(spec: &NetworkSpec) -> usize {
    let n = (4.0 * spec.length_l / spec.cutoff_a - 1e-9).ceil();
    (n as usize).max(1)
}

/// Discretized modes: frequencies, wavevectors, qubit-mode couplings g_{i,n}
/// (rows = qubits) and thermal occupations.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeSet {
    pub omega: Vec<f64>,
    pub k: Vec<f64>,
    pub couplings: DMatrix<f64>,
    pub thermal_occ: Vec<f64>,
    /// Line length, needed for the real-space transform.
    pub length_l: f64,
}

impl ModeSet {
    pub fn from_parts(
        omega: Vec<f64>,
        k: Vec<f64>,
        couplings: DMatrix<f64>,
        thermal_occ: Vec<f64>,
        length_l: f64,
    ) -> Result<Self> {
        let m = omega.len();
        if k.len() != m || thermal_occ.len() != m || couplings.ncols() != m {
            return config("mode set dimensions disagree");
        }
        let finite = omega.iter().chain(&k).chain(&thermal_occ).all(|v| v.is_finite())
            && couplings.iter().all(|v| v.is_finite());
        if !finite {
            return config("non-finite mode data");
        }
        if omega.iter().any(|&w| w == 0.0) {
            return config("zero mode frequency");
        }
        if thermal_occ.iter().any(|&n| n < 0.0) {
            return config("negative thermal occupation");
        }
        Ok(Self { omega, k, couplings, thermal_occ, length_l })
    }

    pub fn n_modes(&self) -> usize {
        self.omega.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.couplings.nrows()
    }

    /// Keeps only the listed modes, in the given order.
    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        if idx.iter().any(|&i| i >= self.n_modes()) {
            return config("mode index out of range");
        }
        let couplings = DMatrix::from_fn(self.n_qubits(), idx.len(), |r, c| self.couplings[(r, idx[c])]);
        Ok(Self {
            omega: idx.iter().map(|&i| self.omega[i]).collect(),
            k: idx.iter().map(|&i| self.k[i]).collect(),
            couplings,
            thermal_occ: idx.iter().map(|&i| self.thermal_occ[i]).collect(),
            length_l: self.length_l,
        })
    }

    pub fn first(&self, n: usize) -> Result<Self> {
        let idx: Vec<usize> = (0..n.min(self.n_modes())).collect();
        self.subset(&idx)
    }

    /// Same couplings and wavevectors with a replaced spectrum; occupations follow
    /// the new frequencies.
    pub fn with_spectrum(&self, omega: Vec<f64>, temperature: f64) -> Result<Self> {
        if omega.len() != self.n_modes() {
            return config("spectrum length does not match mode count");
        }
        if let Some(n) = omega.iter().position(|&w| w <= 0.0) {
            return config(format!("mode {} has nonpositive frequency {}", n + 1, omega[n]));
        }
        let occ = omega.iter().map(|&w| thermal_occupation(w, temperature)).collect();
        Self::from_parts(omega, self.k.clone(), self.couplings.clone(), occ, self.length_l)
    }

    pub fn scaled_couplings(&self, factor: f64) -> Self {
        Self { couplings: &self.couplings * factor, ..self.clone() }
    }

    /// Rescales every coupling by a common factor so the truncated mode sum gives
    /// exactly `target` for the pair (i, j). A finite mode set misses the closed
    /// form by a fraction of a percent, which a maximally entangling gate cannot
    /// tolerate; this is the fine-tuning of g/ω₁ a real device would do.
    pub fn tuned_for_pair(&self, i: usize, j: usize, target: f64) -> Result<Self> {
        let n = self.n_qubits();
        if i >= n || j >= n || i == j {
            return config(format!("invalid qubit pair ({i}, {j})"));
        }
        let current = coupling_matrix_modesum(self).get(i, j);
        if current == 0.0 || current.signum() != target.signum() {
            return config(format!("cannot reach J = {target:e} from J = {current:e} by a common scale"));
        }
        Ok(self.scaled_couplings((target / current).sqrt()))
    }

    /// Human-readable diagnostics for ultra-strong coupling |g_{i,n}| ≥ |ω_n|.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for n in 0..self.n_modes() {
            let gmax = self.couplings.column(n).amax();
            if gmax >= self.omega[n].abs() {
                out.push(format!("ultra-strong coupling on mode {}: |g| = {gmax:.3e} ≥ ω = {:.3e}", n + 1, self.omega[n]));
            }
        }
        out
    }
}

/// Linear spectrum ω_n = nω₁, k_n = nπ/L with box-profile couplings.
pub fn build_mode_set(spec: &NetworkSpec, n_modes: usize) -> Result<ModeSet> {
    build_mode_set_with_profile(spec, n_modes, &spec.profile())
}

pub fn build_mode_set_with_profile(spec: &NetworkSpec, n_modes: usize, profile: &dyn CouplingProfile) -> Result<ModeSet> {
    spec.validate()?;
    if n_modes == 0 {
        return config("need at least one mode");
    }
    let w1 = spec.omega1();
    let omega: Vec<f64> = (1..=n_modes).map(|n| n as f64 * w1).collect();
    let k: Vec<f64> = (1..=n_modes).map(|n| n as f64 * PI / spec.length_l).collect();
    let couplings = DMatrix::from_fn(spec.n_qubits(), n_modes, |i, n| {
        let q = &spec.qubits[i];
        q.base_coupling_g * ((n + 1) as f64).sqrt() * profile.mode_overlap(k[n], q.position_x)
    });
    let occ = omega.iter().map(|&w| thermal_occupation(w, spec.temperature_t)).collect();
    ModeSet::from_parts(omega, k, couplings, occ, spec.length_l)
}

/// Symmetric Ising matrix with zero diagonal (angular frequency units).
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingMatrix {
    pub j: DMatrix<f64>,
}

impl CouplingMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { j: DMatrix::zeros(n, n) }
    }

    pub fn n(&self) -> usize {
        self.j.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.j[(i, j)]
    }
}

/// J_ij = −2 Σ_n g_{i,n} g_{j,n}/ω_n over the included modes, i ≠ j.
pub fn coupling_matrix_modesum(modes: &ModeSet) -> CouplingMatrix {
    let n = modes.n_qubits();
    let mut j = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in (a + 1)..n {
            let s: f64 = (0..modes.n_modes())
                .map(|m| modes.couplings[(a, m)] * modes.couplings[(b, m)] / modes.omega[m])
                .sum();
            j[(a, b)] = -2.0 * s;
            j[(b, a)] = -2.0 * s;
        }
    }
    CouplingMatrix { j }
}

/// Converged mode sum: J_ij = (g_i g_j/ω₁)(1 − L ∫ f_i f_j).
pub fn coupling_matrix_closed_form(spec: &NetworkSpec) -> CouplingMatrix {
    coupling_matrix_closed_form_with_profile(spec, &spec.profile())
}

pub fn coupling_matrix_closed_form_with_profile(spec: &NetworkSpec, profile: &dyn CouplingProfile) -> CouplingMatrix {
    let n = spec.n_qubits();
    let w1 = spec.omega1();
    let mut j = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in (a + 1)..n {
            let (qa, qb) = (&spec.qubits[a], &spec.qubits[b]);
            let ovl = profile.pair_overlap(qa.position_x, qb.position_x);
            let v = qa.base_coupling_g * qb.base_coupling_g / w1 * (1.0 - spec.length_l * ovl);
            j[(a, b)] = v;
            j[(b, a)] = v;
        }
    }
    CouplingMatrix { j }
}

/// Parametric drive of the couplings: g_{i,n}(t) = A_{i,n} cos(Ω_n t).
#[derive(Clone, Debug, PartialEq)]
pub struct DriveFrame {
    pub drive_freqs: Vec<f64>,
    pub amplitudes: DMatrix<f64>,
    pub detunings: Vec<f64>,
    /// |A|/Ω above which the rotating-wave reduction is flagged.
    pub warn_ratio: f64,
}

impl DriveFrame {
    pub fn new(drive_freqs: Vec<f64>, amplitudes: DMatrix<f64>, detunings: Vec<f64>) -> Self {
        Self { drive_freqs, amplitudes, detunings, warn_ratio: 0.1 }
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for n in 0..self.drive_freqs.len() {
            let amax = self.amplitudes.column(n).amax();
            if amax > self.warn_ratio * self.drive_freqs[n].abs() {
                out.push(format!(
                    "mode {}: drive amplitude {amax:.3e} not small against drive frequency {:.3e}",
                    n + 1,
                    self.drive_freqs[n]
                ));
            }
        }
        out
    }
}

/// Effective static model in the frame rotating with the drives: mode
/// frequencies Δ_n and couplings A_{i,n}/2. Undriven modes are dropped.
/// Thermal occupations are those of the physical modes ω_n = Ω_n + Δ_n.
pub fn modulated_frame(spec: &NetworkSpec, frame: &DriveFrame) -> Result<ModeSet> {
    spec.validate()?;
    let m = frame.drive_freqs.len();
    if frame.detunings.len() != m || frame.amplitudes.ncols() != m || frame.amplitudes.nrows() != spec.n_qubits() {
        return config("drive frame dimensions disagree with the network");
    }
    let mut keep = Vec::new();
    for n in 0..m {
        let driven = frame.amplitudes.column(n).iter().any(|&a| a != 0.0);
        if !driven {
            continue;
        }
        if frame.detunings[n] == 0.0 {
            return Err(Error::SingularFrame { mode: n });
        }
        keep.push(n);
    }
    let omega: Vec<f64> = keep.iter().map(|&n| frame.detunings[n]).collect();
    let k: Vec<f64> = keep.iter().map(|&n| (n + 1) as f64 * PI / spec.length_l).collect();
    let couplings = DMatrix::from_fn(spec.n_qubits(), keep.len(), |i, c| 0.5 * frame.amplitudes[(i, keep[c])]);
    let occ = keep
        .iter()
        .map(|&n| thermal_occupation(frame.drive_freqs[n] + frame.detunings[n], spec.temperature_t))
        .collect();
    ModeSet::from_parts(omega, k, couplings, occ, spec.length_l)
}

//! Ising interaction engineering: a target phase matrix w is diagonalized and
//! each eigenpair (w_q, u_q) becomes one stroboscopic cycle with amplitudes
//! g_i = √(|w_q|ω₁/t_p)·u_{i,q}, so that Σ_q ± g_ig_j t_p/ω₁ = w_ij.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TargetKind {
    PowerLaw1d { alpha: f64, periodic: bool },
    Nn2d { rows: usize, cols: usize },
    SpinGlass { seed: u64, range: f64 },
    DRegular { n: usize, d: usize, seed: u64 },
    Graph,
    Custom,
    Reconstructed { eta: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TargetModel {
    pub w: DMatrix<f64>,
    pub diagonal_shift_wd: f64,
    pub provenance: TargetKind,
}

impl TargetModel {
    pub fn new(w: DMatrix<f64>, provenance: TargetKind) -> Result<Self> {
        let t = Self { w, diagonal_shift_wd: 0.0, provenance };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let w = &self.w;
        if w.nrows() != w.ncols() {
            return config("target matrix must be square");
        }
        if w.iter().any(|v| !v.is_finite()) {
            return config("target matrix has non-finite entries");
        }
        let scale = w.amax().max(1.0);
        if (w - w.transpose()).amax() > 1e-12 * scale {
            return config("target matrix must be symmetric");
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    pub fn offdiagonal(&self) -> DMatrix<f64> {
        let mut m = self.w.clone();
        m.fill_diagonal(0.0);
        m
    }

    /// Edges (i < j, w_ij ≠ 0).
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n();
        let mut e = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if self.w[(i, j)] != 0.0 {
                    e.push((i, j, self.w[(i, j)]));
                }
            }
        }
        e
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n())
            .map(|i| (0..self.n()).filter(|&j| j != i && self.w[(i, j)] != 0.0).count())
            .collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { w: &self.w * factor, diagonal_shift_wd: self.diagonal_shift_wd * factor, provenance: self.provenance.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    /// Negative eigenvalues realized as sign-flipped cycles (modulated frame).
    Signed,
    /// w → w + w_D·I with w_D = |most negative eigenvalue|.
    DiagonalShift,
    /// Positive cycles only, no shift: negative eigenvalues are an error.
    PositiveOnly,
}

impl Strategy {
    pub fn default_for(modulated_frame: bool) -> Self {
        if modulated_frame {
            Self::Signed
        } else {
            Self::DiagonalShift
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    pub amplitudes: Vec<f64>,
    pub sign: i8,
    /// t_p = p·τ
    pub duration: f64,
    pub p: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleSchedule {
    pub n_qubits: usize,
    pub omega1: f64,
    /// Diagonal shift added before decomposition; removed again on reconstruction.
    pub diagonal_shift: f64,
    pub cycles: Vec<Cycle>,
}

impl CycleSchedule {
    pub fn eta(&self) -> usize {
        self.cycles.len()
    }

    pub fn round_trip(&self) -> f64 {
        2.0 * PI / self.omega1
    }

    pub fn total_duration(&self) -> f64 {
        self.cycles.iter().map(|c| c.duration).sum()
    }

    pub fn truncated(&self, eta: usize) -> Self {
        Self { cycles: self.cycles[..eta.min(self.cycles.len())].to_vec(), ..self.clone() }
    }
}

/// Per-cycle constraints.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompileLimits {
    pub omega1: f64,
    pub j_max: f64,
    pub g_max: f64,
}

/// Eigenpairs sorted by descending |w_q|, with numerically zero ones dropped.
fn sorted_eigenpairs(w: &DMatrix<f64>) -> Vec<(f64, Vec<f64>)> {
    let n = w.nrows();
    if n == 0 {
        return Vec::new();
    }
    let eig = SymmetricEigen::new(w.clone());
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|q| (eig.eigenvalues[q], eig.eigenvectors.column(q).iter().copied().collect()))
        .collect();
    pairs.sort_by(|a, b| b.0.abs().partial_cmp(&a.0.abs()).unwrap());
    let top = pairs[0].0.abs();
    pairs.retain(|(v, _)| v.abs() > 1e-14 * top && *v != 0.0);
    pairs
}

pub fn compile(target: &TargetModel, limits: CompileLimits, strategy: Strategy) -> Result<CycleSchedule> {
    target.validate()?;
    let CompileLimits { omega1, j_max, g_max } = limits;
    if !(omega1 > 0.0 && j_max > 0.0 && g_max > 0.0) {
        return config("ω₁, J_max and g_max must be positive");
    }
    let n = target.n();
    let mut w = target.w.clone();
    let mut shift = 0.0;
    if n > 0 && matches!(strategy, Strategy::DiagonalShift | Strategy::PositiveOnly) {
        let lo = w.clone().symmetric_eigenvalues().min();
        let tol = 1e-14 * w.amax();
        if lo < -tol {
            if strategy == Strategy::PositiveOnly {
                return Err(Error::Compile(format!("negative eigenvalue {lo:.3e} and diagonal shift disabled")));
            }
            shift = -lo;
            for i in 0..n {
                w[(i, i)] += shift;
            }
        }
    }
    let tau = 2.0 * PI / omega1;
    let mut cycles = Vec::new();
    for (wq, u) in sorted_eigenpairs(&w) {
        if strategy != Strategy::Signed && wq < 0.0 {
            // only round-off negatives remain after the shift
            continue;
        }
        let umax2 = u.iter().fold(0.0f64, |a, &b| a.max(b * b));
        let t_min = (wq.abs() / j_max).max(wq.abs() * omega1 * umax2 / (g_max * g_max));
        let p = ((t_min / tau) * (1.0 - 1e-12)).ceil().max(1.0) as u64;
        let t_p = p as f64 * tau;
        let amp = (wq.abs() * omega1 / t_p).sqrt();
        cycles.push(Cycle {
            amplitudes: u.iter().map(|&x| amp * x).collect(),
            sign: if wq < 0.0 { -1 } else { 1 },
            duration: t_p,
            p,
        });
    }
    Ok(CycleSchedule { n_qubits: n, omega1, diagonal_shift: shift, cycles })
}

/// w^(η)_ij = Σ_q sign_q g_i^(q) g_j^(q) t_p^(q)/ω₁ − w_D δ_ij. The full matrix is
/// returned; its off-diagonal part is the realized interaction (the diagonal only
/// contributes a global phase).
pub fn reconstruct(schedule: &CycleSchedule) -> TargetModel {
    let n = schedule.n_qubits;
    let mut w = DMatrix::zeros(n, n);
    for c in &schedule.cycles {
        let f = c.sign as f64 * c.duration / schedule.omega1;
        for i in 0..n {
            for j in 0..n {
                w[(i, j)] += f * c.amplitudes[i] * c.amplitudes[j];
            }
        }
    }
    for i in 0..n {
        w[(i, i)] -= schedule.diagonal_shift;
    }
    TargetModel { w, diagonal_shift_wd: 0.0, provenance: TargetKind::Reconstructed { eta: schedule.eta() } }
}

/// Largest |eigenvalue| of a symmetric matrix.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone().symmetric_eigenvalues().amax()
}

/// ε(η) = ‖w^(η) − w‖₂ for η = 1..N.
pub fn convergence_curve(target: &TargetModel, limits: CompileLimits, strategy: Strategy) -> Result<Vec<f64>> {
    let sched = compile(target, limits, strategy)?;
    Ok((1..=target.n())
        .map(|eta| spectral_norm(&(reconstruct(&sched.truncated(eta)).w - &target.w)))
        .collect())
}

pub fn frobenius_error(a: &TargetModel, b: &TargetModel) -> f64 {
    (&a.w - &b.w).norm()
}

/// w_ij = 1/dist(i,j)^α with dist = |i−j| or the ring distance.
pub fn powerlaw1d(n: usize, alpha: f64, periodic: bool) -> Result<TargetModel> {
    if n == 0 || !alpha.is_finite() {
        return config("power-law target needs N ≥ 1 and finite α");
    }
    let w = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            return 0.0;
        }
        let mut d = i.abs_diff(j);
        if periodic {
            d = d.min(n - d);
        }
        (d as f64).powf(-alpha)
    });
    TargetModel::new(w, TargetKind::PowerLaw1d { alpha, periodic })
}

/// Nearest-neighbour grid with site index i = i_x + rows·i_y.
pub fn nn2d(rows: usize, cols: usize) -> Result<TargetModel> {
    if rows == 0 || cols == 0 {
        return config("grid dimensions must be positive");
    }
    let n = rows * cols;
    let w = DMatrix::from_fn(n, n, |i, j| {
        let (xi, yi) = (i % rows, i / rows);
        let (xj, yj) = (j % rows, j / rows);
        if xi.abs_diff(xj) + yi.abs_diff(yj) == 1 {
            1.0
        } else {
            0.0
        }
    });
    TargetModel::new(w, TargetKind::Nn2d { rows, cols })
}

/// Symmetric couplings uniform in [−range, range], zero diagonal.
pub fn spinglass(n: usize, seed: u64, range: f64) -> Result<TargetModel> {
    if !(range >= 0.0) {
        return config("spin-glass range must be nonnegative");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.gen_range(-range..=range);
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    TargetModel::new(w, TargetKind::SpinGlass { seed, range })
}

/// Uniformly paired random d-regular simple graph, Max-Cut weights w = A + d·I.
pub fn dregular(n: usize, d: usize, seed: u64) -> Result<TargetModel> {
    if (n * d) % 2 == 1 {
        return Err(Error::Generation(format!("no {d}-regular graph on {n} vertices (N·d odd)")));
    }
    if d >= n && n > 0 {
        return Err(Error::Generation(format!("degree {d} needs more than {n} vertices")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
    for _ in 0..100_000 {
        stubs.shuffle(&mut rng);
        let mut a = DMatrix::<f64>::zeros(n, n);
        let ok = stubs.chunks(2).all(|e| {
            let (u, v) = (e[0], e[1]);
            if u == v || a[(u, v)] != 0.0 {
                return false;
            }
            a[(u, v)] = 1.0;
            a[(v, u)] = 1.0;
            true
        });
        if ok {
            for i in 0..n {
                a[(i, i)] = d as f64;
            }
            return Ok(TargetModel { w: a, diagonal_shift_wd: d as f64, provenance: TargetKind::DRegular { n, d, seed } });
        }
    }
    Err(Error::Generation(format!("no simple {d}-regular pairing on {n} vertices found")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GeneratorSpec {
    PowerLaw1d { n: usize, alpha: f64, periodic: bool },
    Nn2d { rows: usize, cols: usize },
    SpinGlass { n: usize, seed: u64, range: f64 },
    DRegular { n: usize, d: usize, seed: u64 },
}

pub fn generate_target(spec: &GeneratorSpec) -> Result<TargetModel> {
    match *spec {
        GeneratorSpec::PowerLaw1d { n, alpha, periodic } => powerlaw1d(n, alpha, periodic),
        GeneratorSpec::Nn2d { rows, cols } => nn2d(rows, cols),
        GeneratorSpec::SpinGlass { n, seed, range } => spinglass(n, seed, range),
        GeneratorSpec::DRegular { n, d, seed } => dregular(n, d, seed),
    }
}

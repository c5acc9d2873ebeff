//! Noisy-QAOA error against the predicted abscissa
//! x = (γ_φN/J_max)·γ̄MNd for dephasing and x = (κ(1+2n̄)/|Δ|)·γ̄MNd for
//! rethermalization, on random d-regular graphs with optimized ideal angles.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compiler::dregular;
use crate::error::{config, Result};
use crate::qaoa::cost::CostHamiltonian;
use crate::qaoa::ideal::{prepare_vector, QaoaConfig};
use crate::qaoa::noisy::{prepare_state_noisy, NoiseModel, NoisyOptions};
use crate::qaoa::optimize::{optimize_nested, Evaluator, OptimizerParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum NoiseKind {
    Dephasing,
    Rethermalization { nbar: f64 },
}

impl NoiseKind {
    pub fn label(&self) -> &'static str {
        match self {
            NoiseKind::Dephasing => "dephasing",
            NoiseKind::Rethermalization { .. } => "rethermalization",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScalingParams {
    /// Predicted abscissae to realize; each sets the noise rate of one point.
    pub x_targets: Vec<f64>,
    pub j_max: f64,
    pub graph_seed: u64,
    pub optimizer: OptimizerParams,
    pub noisy: NoisyOptions,
}

impl Default for ScalingParams {
    fn default() -> Self {
        Self {
            x_targets: vec![0.02, 0.05, 0.1, 0.2],
            j_max: 1.0,
            graph_seed: 7,
            optimizer: OptimizerParams { restarts: 4, max_evals: 6000, ..OptimizerParams::default() },
            noisy: NoisyOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub d: usize,
    pub m: usize,
    /// J_max/|Δ|
    pub ratio: f64,
    pub kind: NoiseKind,
    /// γ_φ or κ
    pub rate: f64,
    pub gammabar: f64,
    pub x: f64,
    /// 1 − ⟨ψ_ideal|ρ|ψ_ideal⟩
    pub measured: f64,
    /// 1 − √⟨ψ_ideal|ρ|ψ_ideal⟩, the root-fidelity convention, for comparison
    pub measured_root: f64,
    pub fock_cutoff: usize,
    pub leakage: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingResult {
    pub points: Vec<ScalingPoint>,
    /// Least-squares slope of measured vs x through the origin, over x ≤ 0.2.
    pub slope: f64,
}

/// Least-squares slope through the origin over points with x ≤ x_max.
pub fn slope_through_origin(points: &[ScalingPoint], x_max: f64) -> f64 {
    let (sxy, sxx) = points
        .iter()
        .filter(|p| p.x > 0.0 && p.x <= x_max)
        .fold((0.0, 0.0), |(a, b), p| (a + p.x * p.measured, b + p.x * p.x));
    if sxx > 0.0 {
        sxy / sxx
    } else {
        f64::NAN
    }
}

struct Job {
    n: usize,
    d: usize,
    m: usize,
    ratio: f64,
    x: f64,
    cfg: QaoaConfig,
    psi: crate::state::CVector,
}

pub fn error_scaling_experiment(
    graphs: &[(usize, usize)],
    m_list: &[usize],
    ratios: &[f64],
    kind: NoiseKind,
    params: &ScalingParams,
) -> Result<ScalingResult> {
    if m_list.iter().any(|&m| m == 0) || ratios.iter().any(|&r| !(r > 0.0)) {
        return config("depths must be ≥ 1 and ratios positive");
    }
    let m_max = m_list.iter().copied().max().unwrap_or(0);
    let mut jobs = Vec::new();
    for &(n, d) in graphs {
        let graph = dregular(n, d, params.graph_seed)?;
        let cost = CostHamiltonian::new(&graph)?;
        let template = QaoaConfig { gammas: vec![], betas: vec![], graph, j_max: params.j_max, detuning: -1.0, omega0: 1.0 };
        let optimized = optimize_nested(&template, &Evaluator::Ideal, &params.optimizer, m_max)?;
        for &m in m_list {
            let angles = &optimized[m - 1].angles;
            let psi = prepare_vector(&cost, &angles.gammas, &angles.betas);
            for &ratio in ratios {
                let cfg = QaoaConfig {
                    detuning: -params.j_max / ratio,
                    ..template.with_angles(angles.gammas.clone(), angles.betas.clone())
                };
                for &x in &params.x_targets {
                    jobs.push(Job { n, d, m, ratio, x, cfg: cfg.clone(), psi: psi.clone() });
                }
            }
        }
    }
    let points = jobs
        .par_iter()
        .map(|job| {
            let work = job.cfg.gammabar() * (job.m * job.n * job.d) as f64;
            let (noise, rate) = match kind {
                NoiseKind::Dephasing => {
                    let g = if work > 0.0 { job.x * params.j_max / (job.n as f64 * work) } else { 0.0 };
                    (NoiseModel::dephasing(g), g)
                }
                NoiseKind::Rethermalization { nbar } => {
                    let k = if work > 0.0 { job.x * job.cfg.detuning.abs() / ((1.0 + 2.0 * nbar) * work) } else { 0.0 };
                    (NoiseModel::loss(k, nbar), k)
                }
            };
            let run = prepare_state_noisy(&job.cfg, &noise, &params.noisy)?;
            let f = run.state.fidelity_pure(&job.psi);
            Ok(ScalingPoint {
                n: job.n,
                d: job.d,
                m: job.m,
                ratio: job.ratio,
                kind,
                rate,
                gammabar: job.cfg.gammabar(),
                x: if work > 0.0 { job.x } else { 0.0 },
                measured: 1.0 - f,
                measured_root: 1.0 - f.max(0.0).sqrt(),
                fock_cutoff: run.fock_cutoff,
                leakage: run.leakage,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let slope = slope_through_origin(&points, 0.2);
    Ok(ScalingResult { points, slope })
}

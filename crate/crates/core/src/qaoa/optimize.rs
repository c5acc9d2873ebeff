//! Derivative-free angle search: multi-start coordinate descent followed by a
//! Nelder–Mead polish, under a fixed evaluation budget.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::qaoa::cost::{bits, CostHamiltonian};
use crate::qaoa::ideal::{prepare_vector, energy_of, Angles, QaoaConfig};
use crate::qaoa::noisy::{prepare_state_noisy, NoiseModel, NoisyOptions};
use crate::qaoa::sampling::{sample_strings, Histogram};
use crate::state::SpinRegisterState;

#[derive(Clone, Debug)]
pub enum Evaluator {
    Ideal,
    Noisy(NoiseModel, NoisyOptions),
}

impl Evaluator {
    pub fn prepare(&self, cfg: &QaoaConfig, cost: &CostHamiltonian) -> Result<SpinRegisterState> {
        match self {
            Evaluator::Ideal => SpinRegisterState::from_pure(&prepare_vector(cost, &cfg.gammas, &cfg.betas)),
            Evaluator::Noisy(noise, opts) => Ok(prepare_state_noisy(cfg, noise, opts)?.state),
        }
    }

    fn energy(&self, cfg: &QaoaConfig, cost: &CostHamiltonian) -> Result<f64> {
        match self {
            Evaluator::Ideal => Ok(energy_of(cost, &prepare_vector(cost, &cfg.gammas, &cfg.betas))),
            _ => Ok(cost.expectation(&self.prepare(cfg, cost)?.populations())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerParams {
    /// Random starts in addition to the warm start.
    pub restarts: usize,
    /// Evaluation budget for one call.
    pub max_evals: usize,
    pub initial_step: f64,
    /// Local convergence: simplex spread / coordinate step below this.
    pub tol: f64,
    pub seed: u64,
    pub shots: usize,
}

impl Default for OptimizerParams {
    fn default() -> Self {
        Self { restarts: 8, max_evals: 20_000, initial_step: 0.2, tol: 1e-7, seed: 1, shots: 1000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub evaluation: usize,
    /// Best objective −⟨H_C⟩ found so far.
    pub best_objective: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QaoaResult {
    pub energy: f64,
    pub angles: Angles,
    pub best_string: Vec<u8>,
    pub best_index: usize,
    pub cut_value: f64,
    pub samples: Histogram,
    pub angle_trace: Vec<TracePoint>,
    pub evaluations: usize,
    /// Set when the budget ran out before the local search converged.
    pub budget_exhausted: bool,
}

/// Period of U_zz(γ) up to a global phase: 2π/q for the largest q ∈ {1, 2}
/// dividing every gap of the cost spectrum, none for non-integer gaps.
pub fn gamma_period(cost: &CostHamiltonian) -> Option<f64> {
    let e0 = cost.values[0];
    let divides = |q: f64| cost.values.iter().all(|e| {
        let r = (e - e0) / q;
        (r - r.round()).abs() < 1e-9
    });
    if divides(2.0) {
        Some(PI)
    } else if divides(1.0) {
        Some(2.0 * PI)
    } else {
        None
    }
}

/// Folds angles into γ ∈ [0, P), β ∈ [0, π). Complex conjugation of the state,
/// (γ, β) → (P − γ, π − β) on every layer, keeps all populations; it is used to
/// keep the mean γ below P/2, i.e. the shorter physical run.
pub fn wrap_angles(x: &mut [f64], m: usize, gamma_period: Option<f64>) {
    for (k, v) in x.iter_mut().enumerate() {
        if k >= m {
            *v = v.rem_euclid(PI);
        } else if let Some(p) = gamma_period {
            *v = v.rem_euclid(p);
        }
    }
    if let Some(p) = gamma_period {
        if x[..m].iter().sum::<f64>() > 0.5 * p * m as f64 {
            for (k, v) in x.iter_mut().enumerate() {
                let period = if k < m { p } else { PI };
                *v = (period - *v).rem_euclid(period);
            }
        }
    }
}

struct Search<'a> {
    cfg: &'a QaoaConfig,
    cost: &'a CostHamiltonian,
    eval: &'a Evaluator,
    m: usize,
    evals: usize,
    max_evals: usize,
    best: f64,
    best_x: Vec<f64>,
    trace: Vec<TracePoint>,
}

impl Search<'_> {
    fn exhausted(&self) -> bool {
        self.evals >= self.max_evals
    }

    fn f(&mut self, x: &[f64]) -> Result<f64> {
        let cfg = self.cfg.with_angles(x[..self.m].to_vec(), x[self.m..].to_vec());
        let e = self.eval.energy(&cfg, self.cost)?;
        self.evals += 1;
        if e < self.best {
            self.best = e;
            self.best_x = x.to_vec();
        }
        self.trace.push(TracePoint { evaluation: self.evals, best_objective: -self.best });
        Ok(e)
    }

    /// Pattern search along each angle with halving steps.
    fn coordinate_descent(&mut self, x: &mut Vec<f64>, mut fx: f64, step0: f64, tol: f64) -> Result<(f64, bool)> {
        let mut step = step0;
        while step > tol.max(1e-4) {
            let mut improved = false;
            for k in 0..x.len() {
                for dir in [1.0, -1.0] {
                    if self.exhausted() {
                        return Ok((fx, false));
                    }
                    let mut y = x.clone();
                    y[k] += dir * step;
                    let fy = self.f(&y)?;
                    if fy < fx {
                        *x = y;
                        fx = fy;
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        Ok((fx, true))
    }

    fn nelder_mead(&mut self, x0: &[f64], step: f64, tol: f64) -> Result<(Vec<f64>, f64, bool)> {
        let n = x0.len();
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((x0.to_vec(), self.f(x0)?));
        for k in 0..n {
            let mut y = x0.to_vec();
            y[k] += step;
            let fy = self.f(&y)?;
            simplex.push((y, fy));
        }
        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let spread = simplex[n].1 - simplex[0].1;
            let size = simplex[1..].iter().map(|(y, _)| y.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)).fold(0.0, f64::max);
            if spread.abs() < tol && size < tol.sqrt() {
                return Ok((simplex[0].0.clone(), simplex[0].1, true));
            }
            if self.exhausted() {
                return Ok((simplex[0].0.clone(), simplex[0].1, false));
            }
            let centroid: Vec<f64> = (0..n).map(|k| simplex[..n].iter().map(|(y, _)| y[k]).sum::<f64>() / n as f64).collect();
            let along = |t: f64, worst: &[f64]| -> Vec<f64> { centroid.iter().zip(worst).map(|(c, w)| c + t * (w - c)).collect() };
            let worst = simplex[n].0.clone();
            let xr = along(-1.0, &worst);
            let fr = self.f(&xr)?;
            if fr < simplex[0].1 {
                let xe = along(-2.0, &worst);
                let fe = self.f(&xe)?;
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr < simplex[n].1 {
                    let xc = along(-0.5, &worst);
                    let fc = self.f(&xc)?;
                    (xc, fc)
                } else {
                    let xc = along(0.5, &worst);
                    let fc = self.f(&xc)?;
                    (xc, fc)
                };
                if fc < simplex[n].1.min(fr) {
                    simplex[n] = (xc, fc);
                } else {
                    let best = simplex[0].0.clone();
                    for s in simplex.iter_mut().skip(1) {
                        let y: Vec<f64> = best.iter().zip(&s.0).map(|(b, v)| b + 0.5 * (v - b)).collect();
                        let fy = self.f(&y)?;
                        *s = (y, fy);
                    }
                }
            }
        }
    }
}

/// Minimizes ⟨H_C⟩ at the template's depth, seeded by the template's angles.
pub fn optimize_angles(template: &QaoaConfig, evaluator: &Evaluator, params: &OptimizerParams) -> Result<QaoaResult> {
    template.validate()?;
    let m = template.depth();
    if m == 0 {
        return config("angle optimization needs depth M ≥ 1");
    }
    let cost = CostHamiltonian::new(&template.graph)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut search = Search {
        cfg: template,
        cost: &cost,
        eval: evaluator,
        m,
        evals: 0,
        max_evals: params.max_evals.max(1),
        best: f64::INFINITY,
        best_x: Vec::new(),
        trace: Vec::new(),
    };
    let warm: Vec<f64> = template.gammas.iter().chain(&template.betas).copied().collect();
    let mut converged = true;
    for start in 0..=params.restarts {
        if search.exhausted() {
            converged = false;
            break;
        }
        let mut x = if start == 0 {
            warm.clone()
        } else {
            let gp = gamma_period(&cost).unwrap_or(2.0 * PI);
            let mut x: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..gp)).collect();
            x.extend((0..m).map(|_| rng.gen_range(0.0..PI)));
            x
        };
        let fx = search.f(&x)?;
        let (fx, ok_cd) = search.coordinate_descent(&mut x, fx, params.initial_step, params.tol.sqrt())?;
        let _ = fx;
        let (_, _, ok_nm) = if search.exhausted() { (x, 0.0, false) } else { search.nelder_mead(&x, 0.05, params.tol)? };
        if start == 0 {
            converged = ok_cd && ok_nm;
        }
    }
    let mut x = search.best_x.clone();
    wrap_angles(&mut x, m, gamma_period(&cost));
    let angles = Angles { gammas: x[..m].to_vec(), betas: x[m..].to_vec() };
    let cfg = template.with_angles(angles.gammas.clone(), angles.betas.clone());
    let state = evaluator.prepare(&cfg, &cost)?;
    let pops = state.populations();
    let energy = cost.expectation(&pops);
    let samples = sample_strings(&state, params.shots, params.seed)?;
    let best_index = samples.modal().unwrap_or(0);
    Ok(QaoaResult {
        energy,
        angles,
        best_string: bits(best_index, cost.n_qubits),
        best_index,
        cut_value: cost.cut_value(best_index),
        samples,
        angle_trace: search.trace,
        evaluations: search.evals,
        budget_exhausted: !converged,
    })
}

/// Optimizes depths 1..=m_max, each seeded with the previous optimum padded by
/// a zero layer, which leaves the state unchanged; the optimized objective
/// therefore cannot decrease with depth.
pub fn optimize_nested(template: &QaoaConfig, evaluator: &Evaluator, params: &OptimizerParams, m_max: usize) -> Result<Vec<QaoaResult>> {
    let mut out: Vec<QaoaResult> = Vec::with_capacity(m_max);
    let mut seed_angles = Angles { gammas: vec![], betas: vec![] };
    for m in 1..=m_max {
        let mut g = seed_angles.gammas.clone();
        let mut b = seed_angles.betas.clone();
        g.push(0.0);
        b.push(0.0);
        let cfg = template.with_angles(g, b);
        let p = OptimizerParams { seed: params.seed.wrapping_add(m as u64), ..params.clone() };
        let r = optimize_angles(&cfg, evaluator, &p)?;
        seed_angles = r.angles.clone();
        out.push(r);
    }
    Ok(out)
}

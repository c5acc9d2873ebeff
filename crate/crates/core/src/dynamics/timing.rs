//! Gate errors from imperfect stroboscopic timing: readout off the exact
//! round-trip multiple, nonlinear mode spectra, and incommensurate spectra.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::budget::timing_error_formula;
use crate::dynamics::exact::evolve_exact;
use crate::dynamics::report::DiagonalPhaseGate;
use crate::dispersion::nonlinear_spectrum;
use crate::error::{config, Result};
use crate::model::{coupling_matrix_modesum, ModeSet, NetworkSpec};
use crate::state::{spin, CVector};

/// 1 − F at each time, F against the line's own phase gate evaluated at that time.
pub fn infidelity_series(spec: &NetworkSpec, modes: &ModeSet, psi0: &CVector, times: &[f64]) -> Result<Vec<f64>> {
    let gate = DiagonalPhaseGate::from_spec(spec, coupling_matrix_modesum(modes));
    let states = evolve_exact(spec, modes, psi0, times)?;
    Ok(times
        .iter()
        .zip(&states)
        .map(|(&t, s)| (1.0 - s.fidelity_pure(&gate.apply(psi0, t))).max(0.0))
        .collect())
}

/// Least-squares coefficient c of y ≈ c·x² through the origin.
pub fn quadratic_coefficient(x: &[f64], y: &[f64]) -> f64 {
    let num: f64 = x.iter().zip(y).map(|(&a, &b)| a * a * b).sum();
    let den: f64 = x.iter().map(|&a| a.powi(4)).sum();
    num / den
}

/// Least-squares slope of ln y against ln x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Mean and variance of the collective operator G = Σ_i c_i σᶻ_i and of G².
pub fn collective_variances(psi: &CVector, coeff: &[f64]) -> (f64, f64) {
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    for z in 0..psi.len() {
        let p = psi[z].norm_sqr();
        let g: f64 = coeff.iter().enumerate().map(|(i, &c)| c * spin(z, i)).sum();
        m1 += p * g;
        m2 += p * g * g;
        m4 += p * g.powi(4);
    }
    (m2 - m1 * m1, m4 - m2 * m2)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TimingScan {
    pub p_list: Vec<u32>,
    pub dt_grid: Vec<f64>,
    /// rows follow `p_list`, columns `dt_grid`
    pub infidelity: Vec<Vec<f64>>,
    /// Fitted c in 1 − F ≈ c·Δt², per p.
    pub fitted_coefficient: Vec<f64>,
    /// 4(c/a)²·J₁₂/ω₁
    pub multimode_coefficient: f64,
    /// Single-mode estimate from the lowest mode at each Δt.
    pub single_mode_reference: Vec<f64>,
}

pub fn timing_error_scan(
    spec: &NetworkSpec,
    modes: &ModeSet,
    psi0: &CVector,
    p_list: &[u32],
    dt_grid: &[f64],
) -> Result<TimingScan> {
    if spec.n_qubits() < 2 {
        return config("timing scan needs at least two qubits");
    }
    let tau = spec.round_trip();
    let w1 = spec.omega1();
    let mut infidelity = Vec::new();
    let mut fitted = Vec::new();
    for &p in p_list {
        let times: Vec<f64> = dt_grid.iter().map(|&dt| p as f64 * tau + dt).collect();
        let row = infidelity_series(spec, modes, psi0, &times)?;
        fitted.push(quadratic_coefficient(dt_grid, &row));
        infidelity.push(row);
    }
    let j12 = coupling_matrix_modesum(modes).get(0, 1);
    let multimode = 4.0 * (spec.speed_c / spec.cutoff_a).powi(2) * j12 / w1;

    let g1: Vec<f64> = (0..modes.n_qubits()).map(|i| modes.couplings[(i, 0)]).collect();
    let g_ref = g1.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let single = if g_ref > 0.0 {
        let unit: Vec<f64> = g1.iter().map(|g| g / g_ref).collect();
        let (var_s, var_s2) = collective_variances(psi0, &unit);
        dt_grid
            .iter()
            .map(|&dt| timing_error_formula(modes.omega[0], dt, g_ref, modes.thermal_occ[0], var_s, var_s2).value)
            .collect()
    } else {
        vec![0.0; dt_grid.len()]
    };
    Ok(TimingScan {
        p_list: p_list.to_vec(),
        dt_grid: dt_grid.to_vec(),
        infidelity,
        fitted_coefficient: fitted,
        multimode_coefficient: multimode,
        single_mode_reference: single,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DispersionRegime {
    /// δω₂·t_p ≪ 1
    Perturbative,
    Crossover,
    /// δω₂·t_p ≫ 1
    Saturated,
}

impl DispersionRegime {
    pub fn classify(theta: f64) -> Self {
        if theta < 0.3 {
            Self::Perturbative
        } else if theta > 3.0 {
            Self::Saturated
        } else {
            Self::Crossover
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NonlinearPoint {
    pub epsilon: f64,
    pub p_star: u32,
    pub min_error: f64,
    pub best_time: f64,
    /// δω₂·t_{p*} = 2π ε p*
    pub theta: f64,
    pub regime: DispersionRegime,
}

#[derive(Clone, Debug)]
pub struct NonlinearOptions {
    /// Time samples across [t_{p*} − τ/2, t_{p*} + τ/2] before local refinement.
    pub grid: usize,
}

impl Default for NonlinearOptions {
    fn default() -> Self {
        Self { grid: 2001 }
    }
}

/// For each p*, the couplings are rescaled so the linear-spectrum line gives
/// J₁₂·t_{p*} = π/4 (maximally entangling at p*); then for each ε the spectrum
/// ω_n = ω₁n − εω₁(n−1)² replaces the linear one and 1 − F is minimized over t
/// within half a round trip of t_{p*}.
pub fn nonlinear_dispersion_scan(
    spec: &NetworkSpec,
    modes: &ModeSet,
    psi0: &CVector,
    epsilon_list: &[f64],
    p_star_list: &[u32],
    opts: &NonlinearOptions,
) -> Result<Vec<NonlinearPoint>> {
    let tau = spec.round_trip();
    let w1 = spec.omega1();
    let j0 = coupling_matrix_modesum(modes).get(0, 1);
    if j0 == 0.0 {
        return config("qubits 1 and 2 are not coupled");
    }
    let mut out = Vec::new();
    for &p in p_star_list {
        if p == 0 {
            return config("p* must be positive");
        }
        let t_p = p as f64 * tau;
        let scale = (PI / 4.0 / (j0 * t_p)).abs().sqrt();
        let base = modes.scaled_couplings(scale);
        for &eps in epsilon_list {
            let omega = nonlinear_spectrum(w1, eps, base.n_modes())?;
            let m = base.with_spectrum(omega, spec.temperature_t)?;
            let err = |t: f64| infidelity_series(spec, &m, psi0, &[t]).map(|v| v[0]);
            let n = opts.grid.max(3);
            let h = tau / (n - 1) as f64;
            let times: Vec<f64> = (0..n).map(|k| t_p - 0.5 * tau + k as f64 * h).collect();
            let errs = infidelity_series(spec, &m, psi0, &times)?;
            let (kbest, _) = errs
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (k, &e)| if e < acc.1 { (k, e) } else { acc });
            // golden-section refinement in the bracketing cell pair
            let (mut a, mut b) = (times[kbest] - h, times[kbest] + h);
            let g = 0.5 * (5f64.sqrt() - 1.0);
            let mut c = b - g * (b - a);
            let mut d = a + g * (b - a);
            let (mut fc, mut fd) = (err(c)?, err(d)?);
            for _ in 0..80 {
                if fc < fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - g * (b - a);
                    fc = err(c)?;
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + g * (b - a);
                    fd = err(d)?;
                }
            }
            let (tbest, ebest) = if fc < fd { (c, fc) } else { (d, fd) };
            let (tbest, ebest) = if errs[kbest] <= ebest { (times[kbest], errs[kbest]) } else { (tbest, ebest) };
            let theta = 2.0 * PI * eps * p as f64;
            out.push(NonlinearPoint {
                epsilon: eps,
                p_star: p,
                min_error: ebest,
                best_time: tbest,
                theta,
                regime: DispersionRegime::classify(theta),
            });
        }
    }
    Ok(out)
}

/// Saturated-regime summary for one p*: the error is periodic in εp* (all
/// modes resynchronize at integer εp*), so it is characterized over one
/// period εp* ∈ [k, k + 1) by its envelope (maximum) and its mean.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SaturatedWindow {
    pub p_star: u32,
    pub k: u32,
    pub points: Vec<NonlinearPoint>,
    pub envelope: f64,
    pub mean: f64,
}

pub fn saturated_window(
    spec: &NetworkSpec,
    modes: &ModeSet,
    psi0: &CVector,
    p_star: u32,
    k: u32,
    samples: usize,
    opts: &NonlinearOptions,
) -> Result<SaturatedWindow> {
    if samples == 0 || p_star == 0 {
        return config("window needs samples ≥ 1 and p* ≥ 1");
    }
    let eps: Vec<f64> = (0..samples)
        .map(|i| (k as f64 + (i as f64 + 0.5) / samples as f64) / p_star as f64)
        .collect();
    let points = nonlinear_dispersion_scan(spec, modes, psi0, &eps, &[p_star], opts)?;
    let envelope = points.iter().map(|p| p.min_error).fold(0.0, f64::max);
    let mean = points.iter().map(|p| p.min_error).sum::<f64>() / samples as f64;
    Ok(SaturatedWindow { p_star, k, points, envelope, mean })
}

/// Mode-frequency ratio ω_n/ω₁.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrequencyRatio {
    Rational { num: u64, den: u64 },
    Irrational,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Smallest t* > 0 with ω_n t* ∈ 2πℤ for all modes, as a multiple of τ₁ = 2π/ω₁
/// together with its value; `None` when any ratio is irrational.
pub fn commensurability_time(omega1: f64, ratios: &[FrequencyRatio]) -> Result<Option<(u64, u64, f64)>> {
    if ratios.is_empty() {
        return config("no frequency ratios given");
    }
    // ω_n t = 2πm ⇔ t ∈ (q_n/p_n)·τ₁·ℤ; the common period is lcm(q)/gcd(p)·τ₁
    let mut lcm_q: u64 = 1;
    let mut gcd_p: u64 = 0;
    for r in ratios {
        match *r {
            FrequencyRatio::Irrational => return Ok(None),
            FrequencyRatio::Rational { num, den } => {
                if num == 0 || den == 0 {
                    return config("frequency ratios must be positive");
                }
                let g = gcd(num, den);
                let (p, q) = (num / g, den / g);
                lcm_q = lcm_q / gcd(lcm_q, q) * q;
                gcd_p = gcd(gcd_p, p);
            }
        }
    }
    let g = gcd(lcm_q, gcd_p);
    let (num, den) = (lcm_q / g, gcd_p / g);
    Ok(Some((num, den, num as f64 / den as f64 * 2.0 * PI / omega1)))
}

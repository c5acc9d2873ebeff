//! Scenario files: TOML, one section per kind, unknown keys rejected.
//!
//! Units are carried in the key names. The line has L = c = 1, so ω₁ = π and
//! τ = 2:
//! - `_l`: lengths in units of L
//! - `_w1`: frequencies and temperatures k_B·T in units of ω₁
//! - `_tau`: times in units of τ
//! - `_jmax`: QAOA rates and frequencies in units of J_max
//! - `_hz`, `_per_s`, `_k`: SI frequencies (×2π internally), angular rates, kelvin

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Hotgate,
    Engineer,
    Qaoa,
    Budget,
    Modes,
}

impl Kind {
    pub fn label(self) -> &'static str {
        match self {
            Kind::Hotgate => "hotgate",
            Kind::Engineer => "engineer",
            Kind::Qaoa => "qaoa",
            Kind::Budget => "budget",
            Kind::Modes => "modes",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub kind: Kind,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub seed: u64,
    /// Documented desk-scale wall-clock budget, seconds.
    #[serde(default)]
    pub budget_s: Option<f64>,
    /// Default output directory, relative to the working directory.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub hotgate: Option<Hotgate>,
    #[serde(default)]
    pub engineer: Option<Engineer>,
    #[serde(default)]
    pub qaoa: Option<Qaoa>,
    #[serde(default)]
    pub budget: Option<Budget>,
    #[serde(default)]
    pub modes: Option<Modes>,
}

// ---------------------------------------------------------------- hotgate

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitIn {
    pub x_l: f64,
    #[serde(default)]
    pub omega_w1: f64,
    pub g_w1: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Initial {
    Plus,
    Minus,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_max_tau: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hotgate {
    pub cutoff_a_l: f64,
    pub kbt_w1: Vec<f64>,
    pub qubits: Vec<QubitIn>,
    /// Defaults to the mode count resolving the cutoff.
    #[serde(default)]
    pub n_modes: Option<usize>,
    /// Rescale all couplings so qubits 1 and 2 pick up this phase J₁₂τ.
    #[serde(default)]
    pub gate_phase_rad: Option<f64>,
    #[serde(default = "default_initial")]
    pub initial: Initial,
    pub times: TimeGrid,
    /// Compare against the target at this fixed time instead of at each sample.
    #[serde(default)]
    pub reference_tau: Option<f64>,
    #[serde(default)]
    pub realspace_points: Option<usize>,
    #[serde(default)]
    pub drive: Option<DriveIn>,
    #[serde(default)]
    pub oracle: Option<OracleIn>,
    #[serde(default)]
    pub timing: Option<TimingIn>,
    #[serde(default)]
    pub nonlinear: Option<NonlinearIn>,
    /// Mode-frequency ratios such as "3/2" or "irrational".
    #[serde(default)]
    pub commensurability: Option<Vec<String>>,
}

fn default_initial() -> Initial {
    Initial::Plus
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveIn {
    pub freqs_w1: Vec<f64>,
    /// One row per qubit, one column per driven mode.
    pub amplitudes_w1: Vec<Vec<f64>>,
    pub detunings_w1: Vec<f64>,
    #[serde(default)]
    pub warn_ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleIn {
    pub n_modes: usize,
    pub fock_cutoff: usize,
    pub kbt_w1: f64,
    pub samples: usize,
    #[serde(default)]
    pub reference_cutoff: Option<usize>,
    #[serde(default)]
    pub dim_limit: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingIn {
    #[serde(default)]
    pub kbt_w1: f64,
    pub p_list: Vec<u32>,
    pub dt_tau: Vec<f64>,
    /// Single-mode Fock-space comparison against the compact timing formula.
    #[serde(default)]
    pub single_mode: Option<SingleModeIn>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleModeIn {
    pub kbt_w1: f64,
    pub dt_tau: Vec<f64>,
    pub fock_cutoff: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearIn {
    #[serde(default)]
    pub kbt_w1: f64,
    pub epsilon: Vec<f64>,
    pub p_star: Vec<u32>,
    #[serde(default)]
    pub grid: Option<usize>,
    #[serde(default)]
    pub windows: Option<WindowsIn>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowsIn {
    pub p_star: Vec<u32>,
    pub k: Vec<u32>,
    pub samples: usize,
    #[serde(default)]
    pub grid: Option<usize>,
}

// ---------------------------------------------------------------- engineer

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "lowercase", deny_unknown_fields)]
pub enum TargetIn {
    Powerlaw1d {
        n: usize,
        alpha: f64,
        #[serde(default)]
        periodic: bool,
    },
    Nn2d {
        rows: usize,
        cols: usize,
    },
    Spinglass {
        n: usize,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default = "default_range")]
        range: f64,
    },
    Dregular {
        n: usize,
        d: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Dense matrix file in the `N,<n>` CSV format.
    Csv {
        path: PathBuf,
    },
    /// Edge list `i,j[,w]` per line.
    Edges {
        path: PathBuf,
        #[serde(default)]
        n: Option<usize>,
    },
}

fn default_range() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyIn {
    Signed,
    DiagonalShift,
    PositiveOnly,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Engineer {
    pub target: TargetIn,
    #[serde(default)]
    pub scale: Option<f64>,
    pub j_max_w1: f64,
    pub g_max_w1: f64,
    /// Defaults from `modulated_frame`: signed in the drive frame, diagonal
    /// shift otherwise.
    #[serde(default)]
    pub strategy: Option<StrategyIn>,
    #[serde(default)]
    pub modulated_frame: bool,
}

// ---------------------------------------------------------------- qaoa

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GraphIn {
    Dregular {
        n: usize,
        d: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
    Edges {
        n: usize,
        edges: Vec<(usize, usize)>,
    },
    File {
        path: PathBuf,
        #[serde(default)]
        n: Option<usize>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerIn {
    #[serde(default)]
    pub restarts: Option<usize>,
    #[serde(default)]
    pub max_evals: Option<usize>,
    #[serde(default)]
    pub initial_step: Option<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub shots: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnglesIn {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseIn {
    #[serde(default)]
    pub gamma_phi_jmax: f64,
    #[serde(default)]
    pub kappa_jmax: f64,
    #[serde(default)]
    pub nbar: f64,
    #[serde(default)]
    pub fock_cutoff: Option<usize>,
    #[serde(default)]
    pub engine: Option<EngineIn>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineIn {
    #[serde(default)]
    pub steps_per_period: Option<usize>,
    #[serde(default)]
    pub max_steps_per_period: Option<usize>,
    #[serde(default)]
    pub split_tol: Option<f64>,
    #[serde(default)]
    pub leakage_tol: Option<f64>,
    #[serde(default)]
    pub trace_tol: Option<f64>,
    #[serde(default)]
    pub use_symmetry: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKindIn {
    Dephasing,
    Rethermalization,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingIn {
    /// (N, d) pairs of random regular graphs.
    pub graphs: Vec<(usize, usize)>,
    pub depths: Vec<usize>,
    /// J_max/|Δ|
    pub ratios: Vec<f64>,
    pub x_targets: Vec<f64>,
    pub kinds: Vec<NoiseKindIn>,
    #[serde(default)]
    pub nbar: f64,
    #[serde(default)]
    pub graph_seed: Option<u64>,
    /// Accepted band of measured/x; reported as a check when given.
    #[serde(default)]
    pub band: Option<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaoaChecks {
    /// Largest accepted (⟨H_C⟩ − E_min)/|E_min| at the deepest level.
    #[serde(default)]
    pub rel_gap: Option<f64>,
    #[serde(default)]
    pub modal_optimal: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Qaoa {
    #[serde(default)]
    pub graph: Option<GraphIn>,
    #[serde(default)]
    pub depth: Option<usize>,
    #[serde(default = "default_detuning")]
    pub detuning_jmax: f64,
    #[serde(default = "one")]
    pub omega0_jmax: f64,
    /// Fixed angles; the optimizer is skipped.
    #[serde(default)]
    pub angles: Option<AnglesIn>,
    #[serde(default)]
    pub optimizer: Option<OptimizerIn>,
    #[serde(default)]
    pub noise: Option<NoiseIn>,
    /// Optimize against the noisy engine instead of the ideal circuit.
    #[serde(default)]
    pub optimize_noisy: bool,
    #[serde(default)]
    pub samples_seed: Option<u64>,
    #[serde(default)]
    pub scaling: Option<ScalingIn>,
    #[serde(default)]
    pub checks: Option<QaoaChecks>,
}

fn default_detuning() -> f64 {
    -50.0
}

fn one() -> f64 {
    1.0
}

// ---------------------------------------------------------------- budget

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimumIn {
    pub label: String,
    pub g_hz: f64,
    #[serde(default)]
    pub gamma_phi_hz: Option<f64>,
    #[serde(default)]
    pub gamma_phi_per_s: Option<f64>,
    #[serde(default)]
    pub kbt_hz: Option<f64>,
    #[serde(default)]
    pub temperature_k: Option<f64>,
    pub quality_q: f64,
    /// Sets α_γ = Nπ/8; an explicit `alpha_gamma` wins.
    #[serde(default = "two")]
    pub n_qubits: usize,
    #[serde(default)]
    pub alpha_gamma: Option<f64>,
    /// Points of the ξ(ω₁) curve written around the optimum.
    #[serde(default)]
    pub curve_points: Option<usize>,
}

fn two() -> usize {
    2
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesIn {
    pub label: String,
    pub g_hz: f64,
    #[serde(default)]
    pub gamma_phi_hz: Option<f64>,
    #[serde(default)]
    pub gamma_phi_per_s: Option<f64>,
    pub kappa_hz: f64,
    pub nbar: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeasibilityIn {
    pub gammabar: f64,
    pub d: usize,
    pub m: usize,
    pub n_list: Vec<usize>,
    /// Error budget for the largest N and M.
    pub budget: f64,
    #[serde(default)]
    pub j_max_hz: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssembleIn {
    pub n_qubits: usize,
    pub depth_m: usize,
    pub degree_d: usize,
    pub gammabar: f64,
    pub g_hz: f64,
    #[serde(default)]
    pub gamma_phi_hz: Option<f64>,
    #[serde(default)]
    pub gamma_phi_per_s: Option<f64>,
    pub kappa_hz: f64,
    pub nbar: f64,
    pub detuning_hz: f64,
    #[serde(default)]
    pub timing_dt_s: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetuningScanIn {
    pub gammabar: f64,
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub g_hz: f64,
    #[serde(default)]
    pub gamma_phi_hz: Option<f64>,
    #[serde(default)]
    pub gamma_phi_per_s: Option<f64>,
    pub kappa_hz: f64,
    pub nbar: f64,
    pub delta_min_hz: f64,
    pub delta_max_hz: f64,
    pub points: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossRateIn {
    pub kappa_hz: f64,
    pub omega_hz: Vec<f64>,
    pub temperature_k: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budget {
    #[serde(default)]
    pub optimum: Vec<OptimumIn>,
    #[serde(default)]
    pub rates: Vec<RatesIn>,
    /// Evaluated for every cooperativity produced above.
    #[serde(default)]
    pub feasibility: Option<FeasibilityIn>,
    #[serde(default)]
    pub assemble: Option<AssembleIn>,
    #[serde(default)]
    pub detuning_scan: Option<DetuningScanIn>,
    #[serde(default)]
    pub loss_rate: Option<LossRateIn>,
}

// ---------------------------------------------------------------- modes

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Modes {
    pub a1_l: f64,
    #[serde(default)]
    pub a2_l: f64,
    pub n_modes: usize,
    #[serde(default)]
    pub nonlinear: Option<NonlinearSpectrumIn>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearSpectrumIn {
    pub epsilon: Vec<f64>,
    pub n_modes: usize,
}

// ---------------------------------------------------------------- loading

/// Scenario plus the directory its relative paths resolve against.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub scenario: Scenario,
    pub base_dir: PathBuf,
}

impl Loaded {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

pub fn parse(text: &str) -> Result<Scenario, CliError> {
    let s: Scenario = toml::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
    s.validate()?;
    Ok(s)
}

fn schema<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Schema(msg.into()))
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        schema(format!("{name} must be positive and finite, got {v}"))
    }
}

fn finite(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        schema(format!("{name} must be finite"))
    }
}

fn nonempty<T>(name: &str, v: &[T]) -> Result<(), CliError> {
    if v.is_empty() {
        schema(format!("{name} must not be empty"))
    } else {
        Ok(())
    }
}

/// Exactly one of two alternative keys.
pub fn one_of(name: &str, a: Option<f64>, b: Option<f64>) -> Result<(), CliError> {
    match (a, b) {
        (Some(_), Some(_)) | (None, None) => schema(format!("give exactly one of {name}_hz and {name}_per_s")),
        _ => Ok(()),
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.name.trim().is_empty() {
            return schema("name must not be empty");
        }
        let present = [
            self.hotgate.is_some().then_some(Kind::Hotgate),
            self.engineer.is_some().then_some(Kind::Engineer),
            self.qaoa.is_some().then_some(Kind::Qaoa),
            self.budget.is_some().then_some(Kind::Budget),
            self.modes.is_some().then_some(Kind::Modes),
        ];
        let present: Vec<Kind> = present.into_iter().flatten().collect();
        if present != [self.kind] {
            let names: Vec<&str> = present.iter().map(|k| k.label()).collect();
            return schema(format!("kind = \"{}\" needs exactly the [{}] section, found {names:?}", self.kind.label(), self.kind.label()));
        }
        if let Some(b) = self.budget_s {
            positive("budget_s", b)?;
        }
        match self.kind {
            Kind::Hotgate => self.hotgate.as_ref().unwrap().validate(),
            Kind::Engineer => self.engineer.as_ref().unwrap().validate(),
            Kind::Qaoa => self.qaoa.as_ref().unwrap().validate(),
            Kind::Budget => self.budget.as_ref().unwrap().validate(),
            Kind::Modes => self.modes.as_ref().unwrap().validate(),
        }
    }
}

impl Hotgate {
    fn validate(&self) -> Result<(), CliError> {
        positive("cutoff_a_l", self.cutoff_a_l)?;
        nonempty("kbt_w1", &self.kbt_w1)?;
        if self.kbt_w1.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
            return schema("kbt_w1 entries must be nonnegative");
        }
        nonempty("qubits", &self.qubits)?;
        if self.qubits.len() > 10 {
            return schema("at most 10 qubits");
        }
        for q in &self.qubits {
            finite("x_l", q.x_l)?;
            finite("omega_w1", q.omega_w1)?;
            finite("g_w1", q.g_w1)?;
        }
        if self.n_modes == Some(0) {
            return schema("n_modes must be at least 1");
        }
        if let Some(p) = self.gate_phase_rad {
            finite("gate_phase_rad", p)?;
            if self.qubits.len() < 2 {
                return schema("gate_phase_rad needs at least two qubits");
            }
        }
        positive("times.t_max_tau", self.times.t_max_tau)?;
        if self.times.samples < 2 {
            return schema("times.samples must be at least 2");
        }
        if let Some(r) = self.reference_tau {
            finite("reference_tau", r)?;
        }
        if self.realspace_points == Some(0) {
            return schema("realspace_points must be at least 1");
        }
        if let Some(d) = &self.drive {
            let m = d.freqs_w1.len();
            nonempty("drive.freqs_w1", &d.freqs_w1)?;
            if d.detunings_w1.len() != m {
                return schema("drive.detunings_w1 must match drive.freqs_w1");
            }
            if d.amplitudes_w1.len() != self.qubits.len() || d.amplitudes_w1.iter().any(|r| r.len() != m) {
                return schema("drive.amplitudes_w1 needs one row per qubit and one column per drive");
            }
            if self.n_modes.is_some() {
                return schema("n_modes has no meaning with a drive frame");
            }
            if self.oracle.is_some() || self.timing.is_some() || self.nonlinear.is_some() {
                return schema("oracle, timing and nonlinear analyses use the static line, not a drive frame");
            }
        }
        if let Some(o) = &self.oracle {
            if o.n_modes == 0 || o.fock_cutoff == 0 || o.samples < 2 {
                return schema("oracle needs n_modes ≥ 1, fock_cutoff ≥ 1, samples ≥ 2");
            }
            if !(o.kbt_w1 >= 0.0) {
                return schema("oracle.kbt_w1 must be nonnegative");
            }
            if self.qubits.len() > 4 {
                return schema("oracle limited to 4 qubits");
            }
        }
        if let Some(t) = &self.timing {
            nonempty("timing.p_list", &t.p_list)?;
            if t.dt_tau.len() < 2 {
                return schema("timing.dt_tau needs at least two offsets");
            }
            if self.qubits.len() < 2 {
                return schema("timing scan needs at least two qubits");
            }
            if let Some(s) = &t.single_mode {
                nonempty("timing.single_mode.dt_tau", &s.dt_tau)?;
                if s.fock_cutoff == 0 {
                    return schema("timing.single_mode.fock_cutoff must be positive");
                }
            }
        }
        if let Some(n) = &self.nonlinear {
            nonempty("nonlinear.epsilon", &n.epsilon)?;
            nonempty("nonlinear.p_star", &n.p_star)?;
            if n.p_star.contains(&0) {
                return schema("nonlinear.p_star entries must be positive");
            }
            if let Some(w) = &n.windows {
                if w.samples == 0 || w.p_star.contains(&0) {
                    return schema("nonlinear.windows needs samples ≥ 1 and p_star ≥ 1");
                }
            }
        }
        if let Some(c) = &self.commensurability {
            nonempty("commensurability", c)?;
            for r in c {
                parse_ratio(r)?;
            }
        }
        Ok(())
    }
}

/// "p/q", "p" or "irrational".
pub fn parse_ratio(s: &str) -> Result<hotline::dynamics::FrequencyRatio, CliError> {
    use hotline::dynamics::FrequencyRatio;
    let t = s.trim();
    if t.eq_ignore_ascii_case("irrational") {
        return Ok(FrequencyRatio::Irrational);
    }
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.trim().parse::<u64>(), b.trim().parse::<u64>()),
        None => (t.parse::<u64>(), Ok(1)),
    };
    match (num, den) {
        (Ok(num), Ok(den)) if num > 0 && den > 0 => Ok(FrequencyRatio::Rational { num, den }),
        _ => schema(format!("bad frequency ratio {s:?}")),
    }
}

impl Engineer {
    fn validate(&self) -> Result<(), CliError> {
        positive("j_max_w1", self.j_max_w1)?;
        positive("g_max_w1", self.g_max_w1)?;
        if let Some(s) = self.scale {
            finite("scale", s)?;
        }
        match &self.target {
            TargetIn::Powerlaw1d { n, alpha, .. } => {
                finite("alpha", *alpha)?;
                if *n == 0 {
                    return schema("powerlaw1d needs n ≥ 1");
                }
            }
            TargetIn::Nn2d { rows, cols } if *rows == 0 || *cols == 0 => return schema("nn2d needs rows, cols ≥ 1"),
            TargetIn::Spinglass { n, range, .. } => {
                positive("range", *range)?;
                if *n == 0 {
                    return schema("spinglass needs n ≥ 1");
                }
            }
            _ => {}
        }
        Ok(())
    }
}

impl Qaoa {
    fn validate(&self) -> Result<(), CliError> {
        finite("detuning_jmax", self.detuning_jmax)?;
        if self.detuning_jmax == 0.0 {
            return schema("detuning_jmax must be nonzero");
        }
        positive("omega0_jmax", self.omega0_jmax)?;
        match (&self.graph, self.depth) {
            (Some(_), Some(m)) if m >= 1 => {}
            (None, None) if self.scaling.is_some() => {}
            _ => return schema("qaoa needs graph and depth ≥ 1 (or only a scaling section)"),
        }
        if let Some(a) = &self.angles {
            if a.gammas.len() != a.betas.len() || Some(a.gammas.len()) != self.depth {
                return schema("angles need depth entries in both gammas and betas");
            }
            if self.optimize_noisy {
                return schema("fixed angles and optimize_noisy exclude each other");
            }
        }
        if let Some(GraphIn::Edges { n, edges }) = &self.graph {
            if edges.iter().any(|&(i, j)| i >= *n || j >= *n || i == j) {
                return schema("edge endpoints must be distinct and below n");
            }
        }
        if let Some(n) = &self.noise {
            for (k, v) in [("gamma_phi_jmax", n.gamma_phi_jmax), ("kappa_jmax", n.kappa_jmax), ("nbar", n.nbar)] {
                if !(v >= 0.0 && v.is_finite()) {
                    return schema(format!("noise.{k} must be nonnegative"));
                }
            }
        }
        if self.optimize_noisy && self.noise.is_none() {
            return schema("optimize_noisy needs a noise section");
        }
        if let Some(s) = &self.scaling {
            nonempty("scaling.graphs", &s.graphs)?;
            nonempty("scaling.depths", &s.depths)?;
            nonempty("scaling.ratios", &s.ratios)?;
            nonempty("scaling.x_targets", &s.x_targets)?;
            nonempty("scaling.kinds", &s.kinds)?;
            if s.depths.contains(&0) {
                return schema("scaling.depths must be ≥ 1");
            }
            for &r in &s.ratios {
                positive("scaling.ratios", r)?;
            }
            for &x in &s.x_targets {
                positive("scaling.x_targets", x)?;
            }
            if !(s.nbar >= 0.0) {
                return schema("scaling.nbar must be nonnegative");
            }
            if let Some((lo, hi)) = s.band {
                if !(lo >= 0.0 && hi > lo) {
                    return schema("scaling.band must be an increasing pair");
                }
            }
        }
        if let Some(c) = &self.checks {
            if c.rel_gap.is_some_and(|g| !(g >= 0.0)) {
                return schema("checks.rel_gap must be nonnegative");
            }
            if self.graph.is_none() {
                return schema("checks need a graph");
            }
        }
        Ok(())
    }
}

impl Budget {
    fn validate(&self) -> Result<(), CliError> {
        if self.optimum.is_empty()
            && self.rates.is_empty()
            && self.assemble.is_none()
            && self.detuning_scan.is_none()
            && self.loss_rate.is_none()
        {
            return schema("budget section is empty");
        }
        for o in &self.optimum {
            positive("optimum.g_hz", o.g_hz)?;
            one_of("gamma_phi", o.gamma_phi_hz, o.gamma_phi_per_s)?;
            match (o.kbt_hz, o.temperature_k) {
                (Some(v), None) | (None, Some(v)) => positive("optimum temperature", v)?,
                _ => return schema("give exactly one of kbt_hz and temperature_k"),
            }
            positive("optimum.quality_q", o.quality_q)?;
            if o.n_qubits < 2 {
                return schema("optimum.n_qubits must be ≥ 2");
            }
        }
        for r in &self.rates {
            positive("rates.g_hz", r.g_hz)?;
            one_of("gamma_phi", r.gamma_phi_hz, r.gamma_phi_per_s)?;
            positive("rates.kappa_hz", r.kappa_hz)?;
        }
        if let Some(f) = &self.feasibility {
            positive("feasibility.gammabar", f.gammabar)?;
            positive("feasibility.budget", f.budget)?;
            nonempty("feasibility.n_list", &f.n_list)?;
            if self.optimum.is_empty() && self.rates.is_empty() {
                return schema("feasibility needs at least one optimum or rates entry");
            }
        }
        if let Some(a) = &self.assemble {
            one_of("gamma_phi", a.gamma_phi_hz, a.gamma_phi_per_s)?;
            positive("assemble.g_hz", a.g_hz)?;
            finite("assemble.detuning_hz", a.detuning_hz)?;
            if a.detuning_hz == 0.0 {
                return schema("assemble.detuning_hz must be nonzero");
            }
        }
        if let Some(d) = &self.detuning_scan {
            one_of("gamma_phi", d.gamma_phi_hz, d.gamma_phi_per_s)?;
            positive("detuning_scan.delta_min_hz", d.delta_min_hz)?;
            if !(d.delta_max_hz > d.delta_min_hz) || d.points < 2 {
                return schema("detuning_scan needs delta_max_hz > delta_min_hz and points ≥ 2");
            }
        }
        if let Some(l) = &self.loss_rate {
            nonempty("loss_rate.omega_hz", &l.omega_hz)?;
            for &w in &l.omega_hz {
                positive("loss_rate.omega_hz", w)?;
            }
        }
        Ok(())
    }
}

impl Modes {
    fn validate(&self) -> Result<(), CliError> {
        if !(self.a1_l >= 0.0 && self.a2_l >= 0.0) {
            return schema("a1_l and a2_l must be nonnegative");
        }
        if self.n_modes == 0 {
            return schema("n_modes must be at least 1");
        }
        if let Some(n) = &self.nonlinear {
            nonempty("nonlinear.epsilon", &n.epsilon)?;
            if n.n_modes == 0 {
                return schema("nonlinear.n_modes must be at least 1");
            }
        }
        Ok(())
    }
}

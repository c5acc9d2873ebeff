//! Scenario execution: builds library inputs from a validated scenario, runs
//! them and collects tables, derived numbers, checks and warnings.

use std::f64::consts::PI;
use std::fs;

use hotline::budget::{
    alpha_gamma, assemble_budget, cooperativity_from_rates, cooperativity_optimum, dephasing_error, max_depth, max_qubits,
    qaoa_error_at_detuning, qaoa_feasibility, rethermalization_error, thermal_loss_rate, two_qubit_error_at, BudgetInputs,
    KB_OVER_H_GHZ_PER_K,
};
use hotline::compiler::{
    compile, convergence_curve, frobenius_error, generate_target, reconstruct, spectral_norm, CompileLimits, GeneratorSpec,
    Strategy, TargetModel,
};
use hotline::dispersion::{nonlinear_spectrum, solve_modes, BoundarySpec};
use hotline::dynamics::timing::{collective_variances, loglog_slope};
use hotline::dynamics::{
    commensurability_time, evolve_exact, evolve_oracle, gate_report, nonlinear_dispersion_scan, saturated_window,
    timing_error_scan, DiagonalPhaseGate, DispersionRegime, FidelityReference, NonlinearOptions, OracleOptions, ReportOptions,
};
use hotline::io::{graph_from_edge_list, schedule_to_json, target_from_csv, target_to_csv};
use hotline::model::{
    build_mode_set, coupling_matrix_closed_form, coupling_matrix_modesum, default_mode_count, modulated_frame, DriveFrame, ModeSet,
    NetworkSpec, QubitSpec,
};
use hotline::qaoa::{
    bits_to_string, error_scaling_experiment, optimize_nested, prepare_state_noisy, prepare_vector, sample_strings, Angles,
    CostHamiltonian, Evaluator, Histogram, NoiseKind, NoiseModel, NoisyOptions, OptimizerParams, QaoaConfig, ScalingParams,
};
use hotline::state::{minus_state, plus_state, CVector, SpinRegisterState};
use log::info;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::output::{summary_json, write_atomically, Artifacts, Cell, Table, SUMMARY_FILE};
use crate::scenario::{
    self, Budget, Engineer, GraphIn, Hotgate, Initial, Kind, Loaded, Modes, NoiseKindIn, Qaoa, StrategyIn, TargetIn,
};
use crate::CliError;

/// ω₁ with L = c = 1.
pub const W1: f64 = PI;
/// Round trip 2L/c.
pub const TAU: f64 = 2.0;
const TWO_PI: f64 = 2.0 * PI;

type R<T> = Result<T, CliError>;

/// A finished run: the files to write, including the summary.
pub struct Outcome {
    pub artifacts: Artifacts,
    pub files: std::collections::BTreeMap<String, String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.artifacts.checks.iter().all(|c| c.passed)
    }

    pub fn write(&self, dir: &std::path::Path) -> R<()> {
        write_atomically(dir, &self.files)
    }
}

/// The effective seed: a command-line override wins over the scenario's.
pub fn effective_seed(loaded: &Loaded, seed: Option<u64>) -> u64 {
    seed.unwrap_or(loaded.scenario.seed)
}

/// Builds every library input without running anything expensive.
pub fn prepare(loaded: &Loaded, seed: Option<u64>) -> R<()> {
    let s = &loaded.scenario;
    let seed = effective_seed(loaded, seed);
    match s.kind {
        Kind::Hotgate => {
            let h = s.hotgate.as_ref().unwrap();
            for &t in &h.kbt_w1 {
                let spec = network(h, t)?;
                mode_set(h, &spec, &mut Artifacts::default())?;
            }
        }
        Kind::Engineer => {
            let e = s.engineer.as_ref().unwrap();
            load_target(loaded, &e.target, seed)?;
        }
        Kind::Qaoa => {
            let q = s.qaoa.as_ref().unwrap();
            if let Some(g) = &q.graph {
                let cfg = qaoa_template(q, load_graph(loaded, g, seed)?);
                cfg.validate()?;
                CostHamiltonian::new(&cfg.graph)?;
            }
        }
        Kind::Budget | Kind::Modes => {}
    }
    Ok(())
}

pub fn execute(loaded: &Loaded, seed: Option<u64>) -> R<Outcome> {
    prepare(loaded, seed)?;
    let s = &loaded.scenario;
    let seed = effective_seed(loaded, seed);
    let mut a = Artifacts::default();
    match s.kind {
        Kind::Hotgate => run_hotgate(s.hotgate.as_ref().unwrap(), &mut a)?,
        Kind::Engineer => run_engineer(loaded, s.engineer.as_ref().unwrap(), seed, &mut a)?,
        Kind::Qaoa => run_qaoa(loaded, s.qaoa.as_ref().unwrap(), seed, &mut a)?,
        Kind::Budget => run_budget(s.budget.as_ref().unwrap(), &mut a)?,
        Kind::Modes => run_modes(s.modes.as_ref().unwrap(), &mut a)?,
    }
    let mut inputs = serde_json::to_value(s).map_err(|e| CliError::Io(e.to_string()))?;
    inputs["seed"] = json!(seed);
    let summary = summary_json(&s.name, s.kind.label(), seed, &inputs, &a);
    let mut files = a.files.clone();
    files.insert(SUMMARY_FILE.to_string(), summary);
    Ok(Outcome { artifacts: a, files })
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect()
}

fn numeric_label(v: f64) -> String {
    format!("{v}").replace('-', "m")
}

// ---------------------------------------------------------------- hotgate

fn network(h: &Hotgate, kbt_w1: f64) -> R<NetworkSpec> {
    let qubits = h.qubits.iter().map(|q| QubitSpec::new(q.x_l, q.omega_w1 * W1, q.g_w1 * W1)).collect();
    Ok(NetworkSpec::new(1.0, 1.0, h.cutoff_a_l, kbt_w1 * W1, qubits)?)
}

fn mode_set(h: &Hotgate, spec: &NetworkSpec, a: &mut Artifacts) -> R<ModeSet> {
    let modes = match &h.drive {
        Some(d) => {
            let amps = DMatrix::from_fn(h.qubits.len(), d.freqs_w1.len(), |i, n| d.amplitudes_w1[i][n] * W1);
            let mut frame = DriveFrame::new(
                d.freqs_w1.iter().map(|f| f * W1).collect(),
                amps,
                d.detunings_w1.iter().map(|f| f * W1).collect(),
            );
            if let Some(r) = d.warn_ratio {
                frame.warn_ratio = r;
            }
            for w in frame.warnings() {
                a.warn(w);
            }
            modulated_frame(spec, &frame)?
        }
        None => build_mode_set(spec, h.n_modes.unwrap_or_else(|| default_mode_count(spec)))?,
    };
    let modes = match h.gate_phase_rad {
        Some(phi) => modes.tuned_for_pair(0, 1, phi / TAU)?,
        None => modes,
    };
    for w in modes.warnings() {
        a.warn(w);
    }
    Ok(modes)
}

fn initial_state(h: &Hotgate) -> CVector {
    match h.initial {
        Initial::Plus => plus_state(h.qubits.len()),
        Initial::Minus => minus_state(h.qubits.len()),
    }
}

struct TemperatureRun {
    label: String,
    files: Vec<(String, Table)>,
    derived: Value,
    checks: Vec<(String, f64, f64, bool)>,
    warnings: Vec<String>,
}

fn hotgate_temperature(h: &Hotgate, kbt: f64) -> R<TemperatureRun> {
    let mut scratch = Artifacts::default();
    let spec = network(h, kbt)?;
    let modes = mode_set(h, &spec, &mut scratch)?;
    let n = spec.n_qubits();
    let psi = initial_state(h);
    let j = coupling_matrix_modesum(&modes);
    let gate = DiagonalPhaseGate::from_spec(&spec, j.clone());
    let times: Vec<f64> = linspace(0.0, h.times.t_max_tau * TAU, h.times.samples);
    let opts = ReportOptions {
        concurrence: n == 2,
        realspace_points: h.realspace_points,
        reference: h.reference_tau.map(|r| FidelityReference::FixedTime(r * TAU)).unwrap_or_default(),
    };
    let r = gate_report(&spec, &modes, &psi, &gate, &times, &opts)?;
    let label = numeric_label(kbt);

    let mut head = vec!["t_tau", "fidelity", "entropy_nats"];
    if n == 2 {
        head.push("concurrence");
    }
    head.extend(["total_photons", "net_photons"]);
    let mut gate_t = Table::new(&head);
    for (k, &t) in times.iter().enumerate() {
        let mut row: Vec<Cell> = vec![(t / TAU).into(), r.fidelity[k].into(), r.entropy[k].into()];
        if n == 2 {
            row.push(r.concurrence[k].into());
        }
        row.extend([r.total_photons[k].into(), r.net_photons[k].into()]);
        gate_t.row(row);
    }
    let mut occ = Table::new(&["t_tau", "mode", "occupation", "excess"]);
    for (k, &t) in times.iter().enumerate() {
        for m in 0..modes.n_modes() {
            let o = r.mode_occ[(k, m)];
            occ.row(vec![(t / TAU).into(), (m + 1).into(), o.into(), (o - modes.thermal_occ[m]).into()]);
        }
    }
    let mut rs = Table::new(&["t_tau", "x_l", "occupation"]);
    for (k, &t) in times.iter().enumerate() {
        for (jx, &x) in r.realspace_x.iter().enumerate() {
            rs.row(vec![(t / TAU).into(), x.into(), r.realspace_occ[(k, jx)].into()]);
        }
    }
    let mut mt_head = vec!["mode".to_string(), "k_per_l".into(), "omega_w1".into(), "nbar".into()];
    mt_head.extend((0..n).map(|i| format!("g{}_w1", i + 1)));
    let mut mt = Table::new(&mt_head);
    for m in 0..modes.n_modes() {
        let mut row: Vec<Cell> =
            vec![(m + 1).into(), modes.k[m].into(), (modes.omega[m] / W1).into(), modes.thermal_occ[m].into()];
        row.extend((0..n).map(|i| Cell::F(modes.couplings[(i, m)] / W1)));
        mt.row(row);
    }

    // stroboscopic and mid-gate diagnostics
    let probe = gate_report(
        &spec,
        &modes,
        &psi,
        &gate,
        &[0.5 * TAU, TAU],
        &ReportOptions { concurrence: n == 2, realspace_points: Some(1), reference: FidelityReference::Instantaneous },
    )?;
    let photon_return: f64 = (0..modes.n_modes()).map(|m| probe.mode_occ[(1, m)] - modes.thermal_occ[m]).sum();
    let mut checks = Vec::new();
    let mut derived = json!({
        "kbt_w1": kbt,
        "n_modes": modes.n_modes(),
        "fidelity_at_tau": probe.fidelity[1],
        "entropy_at_tau_nats": probe.entropy[1],
        "photon_excess_at_tau": photon_return,
        "net_photons_mid_gate": probe.net_photons[0],
        "max_net_photons": r.net_photons.iter().cloned().fold(0.0, f64::max),
    });
    if h.drive.is_none() {
        // the line decouples exactly at every round trip
        checks.push((format!("fidelity_at_tau[kbt={label}]"), 1.0 - probe.fidelity[1], 1e-9, false));
        checks.push((format!("photon_return_at_tau[kbt={label}]"), photon_return.abs(), 1e-10, false));
        if n == 2 {
            let c = probe.concurrence[1];
            let expect = (2.0 * j.get(0, 1) * TAU).sin().abs();
            derived["concurrence_at_tau"] = json!(c);
            derived["concurrence_expected"] = json!(expect);
            checks.push((format!("concurrence_at_tau[kbt={label}]"), c, expect - 1e-6, true));
        }
    }
    Ok(TemperatureRun {
        label: label.clone(),
        files: vec![
            (format!("gate_kbt{label}.csv"), gate_t),
            (format!("mode_occupation_kbt{label}.csv"), occ),
            (format!("realspace_kbt{label}.csv"), rs),
            (format!("modes_kbt{label}.csv"), mt),
        ],
        derived,
        checks,
        warnings: scratch.warnings,
    })
}

fn run_hotgate(h: &Hotgate, a: &mut Artifacts) -> R<()> {
    info!("hotgate: {} temperature(s)", h.kbt_w1.len());
    let runs: Vec<TemperatureRun> = h.kbt_w1.par_iter().map(|&t| hotgate_temperature(h, t)).collect::<R<_>>()?;
    let mut per_t = serde_json::Map::new();
    for run in runs {
        for (name, t) in &run.files {
            a.table(name, t);
        }
        for (name, v, thr, lower_bound) in run.checks {
            if lower_bound {
                a.check_ge(&name, v, thr);
            } else {
                a.check_le(&name, v, thr);
            }
        }
        for w in run.warnings {
            if !a.warnings.contains(&w) {
                a.warn(w);
            }
        }
        per_t.insert(format!("kbt{}", run.label), run.derived);
    }
    a.derive("temperatures", per_t);

    // coupling matrices: finite mode sum and, on the static line, the closed form
    let spec = network(h, h.kbt_w1[0])?;
    let modes = mode_set(h, &spec, &mut Artifacts::default())?;
    let jm = coupling_matrix_modesum(&modes);
    let closed = h.drive.is_none().then(|| coupling_matrix_closed_form(&spec));
    let mut head = vec!["i", "j", "j_modesum_w1"];
    if closed.is_some() {
        head.push("j_closed_form_w1");
    }
    let mut ct = Table::new(&head);
    for i in 0..jm.n() {
        for k in (i + 1)..jm.n() {
            let mut row: Vec<Cell> = vec![(i + 1).into(), (k + 1).into(), (jm.get(i, k) / W1).into()];
            if let Some(c) = &closed {
                row.push((c.get(i, k) / W1).into());
            }
            ct.row(row);
        }
    }
    a.table("couplings.csv", &ct);

    if let Some(o) = &h.oracle {
        hotgate_oracle(h, o, a)?;
    }
    if let Some(t) = &h.timing {
        hotgate_timing(h, t, a)?;
    }
    if let Some(nl) = &h.nonlinear {
        hotgate_nonlinear(h, nl, a)?;
    }
    if let Some(c) = &h.commensurability {
        let ratios: Vec<_> = c.iter().map(|r| scenario::parse_ratio(r)).collect::<R<_>>()?;
        match commensurability_time(W1, &ratios)? {
            Some((num, den, t)) => a.derive("commensurability", json!({ "num": num, "den": den, "t_tau": t / TAU })),
            None => a.derive("commensurability", Value::Null),
        }
    }
    Ok(())
}

fn hotgate_oracle(h: &Hotgate, o: &scenario::OracleIn, a: &mut Artifacts) -> R<()> {
    info!("oracle cross-check: {} modes, cutoff {}", o.n_modes, o.fock_cutoff);
    let spec = network(h, o.kbt_w1)?;
    let modes = build_mode_set(&spec, o.n_modes)?;
    let psi = initial_state(h);
    let times = linspace(0.0, h.times.t_max_tau * TAU, o.samples);
    let exact = evolve_exact(&spec, &modes, &psi, &times)?;
    let mut opts = OracleOptions { fock_cutoff: o.fock_cutoff, reference_cutoff: o.reference_cutoff, ..Default::default() };
    if let Some(d) = o.dim_limit {
        opts.dim_limit = d;
    }
    let run = evolve_oracle(&spec, &modes, &psi, &times, &opts)?;
    let mut t = Table::new(&["t_tau", "trace_distance", "purity_exact", "purity_oracle"]);
    let mut worst: f64 = 0.0;
    for (k, (e, f)) in exact.iter().zip(&run.states).enumerate() {
        let d = e.trace_distance(f);
        worst = worst.max(d);
        t.row(vec![(times[k] / TAU).into(), d.into(), e.purity().into(), f.purity().into()]);
    }
    a.table("oracle.csv", &t);
    a.derive(
        "oracle",
        json!({
            "max_trace_distance": worst,
            "truncation_bound": run.truncation_bound,
            "discarded_weight": run.discarded_weight,
            "reference_cutoff": run.reference_cutoff,
        }),
    );
    a.check_le("oracle_trace_distance", worst, 1e-4 + run.truncation_bound);
    Ok(())
}

fn hotgate_timing(h: &Hotgate, tm: &scenario::TimingIn, a: &mut Artifacts) -> R<()> {
    info!("timing scan: p = {:?}", tm.p_list);
    let spec = network(h, tm.kbt_w1)?;
    let modes = mode_set(h, &spec, &mut Artifacts::default())?;
    let psi = initial_state(h);
    let dt: Vec<f64> = tm.dt_tau.iter().map(|d| d * TAU).collect();
    let scan = timing_error_scan(&spec, &modes, &psi, &tm.p_list, &dt)?;
    let mut t = Table::new(&["p", "dt_tau", "infidelity", "quadratic_fit"]);
    for (pi, &p) in scan.p_list.iter().enumerate() {
        for (k, &d) in scan.dt_grid.iter().enumerate() {
            t.row(vec![p.into(), (d / TAU).into(), scan.infidelity[pi][k].into(), (scan.fitted_coefficient[pi] * d * d).into()]);
        }
    }
    a.table("timing.csv", &t);
    // coefficients of (Δt/τ)²
    let fitted: Vec<f64> = scan.fitted_coefficient.iter().map(|c| c * TAU * TAU).collect();
    let multimode = scan.multimode_coefficient * TAU * TAU;
    a.derive("timing", json!({ "kbt_w1": tm.kbt_w1, "fitted_per_tau2": fitted, "multimode_per_tau2": multimode }));
    if tm.kbt_w1 == 0.0 {
        for (p, f) in scan.p_list.iter().zip(&fitted) {
            a.check_le(&format!("timing_fit_vs_multimode[p={p}]"), (f / multimode - 1.0).abs(), 0.25);
        }
    }

    if let Some(sm) = &tm.single_mode {
        let spec1 = network(h, sm.kbt_w1)?;
        let one = build_mode_set(&spec1, 1)?;
        let nbar = one.thermal_occ[0];
        let gate = DiagonalPhaseGate::from_spec(&spec1, coupling_matrix_modesum(&one));
        let n = spec1.n_qubits();
        let g: Vec<f64> = (0..n).map(|i| one.couplings[(i, 0)]).collect();
        let g_ref = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if g_ref == 0.0 {
            return Err(CliError::Schema("single-mode timing needs a coupled lowest mode".into()));
        }
        let unit: Vec<f64> = g.iter().map(|v| v / g_ref).collect();
        let (v1, v2) = collective_variances(&psi, &unit);
        let times: Vec<f64> = sm.dt_tau.iter().map(|d| TAU + d * TAU).collect();
        let run = evolve_oracle(&spec1, &one, &psi, &times, &OracleOptions { fock_cutoff: sm.fock_cutoff, ..Default::default() })?;
        let mut st = Table::new(&["dt_tau", "infidelity_numeric", "infidelity_formula", "formula_valid"]);
        let mut worst: f64 = 0.0;
        for ((&dtt, &t), s) in sm.dt_tau.iter().zip(&times).zip(&run.states) {
            let numeric = 1.0 - s.fidelity_pure(&gate.apply(&psi, t));
            let est = hotline::budget::timing_error_formula(W1, dtt * TAU, g_ref, nbar, v1, v2);
            if est.valid {
                worst = worst.max((numeric / est.value - 1.0).abs());
            } else {
                a.warn(format!("timing formula outside its regime at dt = {dtt} τ"));
            }
            st.row(vec![dtt.into(), numeric.into(), est.value.into(), (est.valid as usize).into()]);
        }
        a.table("timing_single_mode.csv", &st);
        a.check_le("timing_single_mode_vs_formula", worst, 0.10);
    }
    Ok(())
}

fn regime_label(r: DispersionRegime) -> &'static str {
    match r {
        DispersionRegime::Perturbative => "perturbative",
        DispersionRegime::Crossover => "crossover",
        DispersionRegime::Saturated => "saturated",
    }
}

fn hotgate_nonlinear(h: &Hotgate, nl: &scenario::NonlinearIn, a: &mut Artifacts) -> R<()> {
    info!("nonlinear dispersion: {} ε × {} p*", nl.epsilon.len(), nl.p_star.len());
    let spec = network(h, nl.kbt_w1)?;
    let modes = mode_set(h, &spec, &mut Artifacts::default())?;
    let psi = initial_state(h);
    let opts = nl.grid.map(|grid| NonlinearOptions { grid }).unwrap_or_default();
    let pts = nonlinear_dispersion_scan(&spec, &modes, &psi, &nl.epsilon, &nl.p_star, &opts)?;
    let mut t = Table::new(&["epsilon", "p_star", "theta_rad", "regime", "min_error", "best_time_tau"]);
    for p in &pts {
        t.row(vec![
            p.epsilon.into(),
            p.p_star.into(),
            p.theta.into(),
            regime_label(p.regime).into(),
            p.min_error.into(),
            (p.best_time / TAU).into(),
        ]);
    }
    a.table("nonlinear.csv", &t);
    let mut slopes = serde_json::Map::new();
    for &p in &nl.p_star {
        let pert: Vec<_> = pts.iter().filter(|q| q.p_star == p && q.regime == DispersionRegime::Perturbative).collect();
        if pert.len() >= 2 {
            let x: Vec<f64> = pert.iter().map(|q| q.epsilon).collect();
            let y: Vec<f64> = pert.iter().map(|q| q.min_error).collect();
            let s = loglog_slope(&x, &y);
            slopes.insert(format!("p{p}"), json!(s));
            if pert.len() >= 3 {
                a.check_in(&format!("perturbative_loglog_slope[p*={p}]"), s, 1.8, 2.2);
            }
        }
    }
    a.derive("perturbative_slopes", slopes);

    if let Some(w) = &nl.windows {
        let wopts = w.grid.map(|grid| NonlinearOptions { grid }).unwrap_or_default();
        let mut wt = Table::new(&["p_star", "k", "epsilon", "min_error"]);
        let mut st = Table::new(&["p_star", "k", "envelope", "mean", "envelope_times_p_star"]);
        for &p in &w.p_star {
            for &k in &w.k {
                let win = saturated_window(&spec, &modes, &psi, p, k, w.samples, &wopts)?;
                for q in &win.points {
                    wt.row(vec![p.into(), k.into(), q.epsilon.into(), q.min_error.into()]);
                }
                st.row(vec![p.into(), k.into(), win.envelope.into(), win.mean.into(), (win.envelope * p as f64).into()]);
            }
        }
        a.table("saturated_windows.csv", &wt);
        a.table("saturated_summary.csv", &st);
    }
    Ok(())
}

// ---------------------------------------------------------------- engineer

fn read_text(loaded: &Loaded, p: &std::path::Path) -> R<String> {
    let path = loaded.resolve(p);
    fs::read_to_string(&path).map_err(|e| CliError::Schema(format!("cannot read {}: {e}", path.display())))
}

fn load_target(loaded: &Loaded, t: &TargetIn, seed: u64) -> R<TargetModel> {
    let g = match *t {
        TargetIn::Powerlaw1d { n, alpha, periodic } => GeneratorSpec::PowerLaw1d { n, alpha, periodic },
        TargetIn::Nn2d { rows, cols } => GeneratorSpec::Nn2d { rows, cols },
        TargetIn::Spinglass { n, seed: s, range } => GeneratorSpec::SpinGlass { n, seed: s.unwrap_or(seed), range },
        TargetIn::Dregular { n, d, seed: s } => GeneratorSpec::DRegular { n, d, seed: s.unwrap_or(seed) },
        TargetIn::Csv { ref path } => return Ok(target_from_csv(&read_text(loaded, path)?)?),
        TargetIn::Edges { ref path, n } => return Ok(graph_from_edge_list(&read_text(loaded, path)?, n)?),
    };
    Ok(generate_target(&g)?)
}

fn run_engineer(loaded: &Loaded, e: &Engineer, seed: u64, a: &mut Artifacts) -> R<()> {
    let mut target = load_target(loaded, &e.target, seed)?;
    if let Some(s) = e.scale {
        target = target.scaled(s);
    }
    let n = target.n();
    info!("engineer: N = {n}");
    let limits = CompileLimits { omega1: W1, j_max: e.j_max_w1 * W1, g_max: e.g_max_w1 * W1 };
    let strategy = match e.strategy {
        Some(StrategyIn::Signed) => Strategy::Signed,
        Some(StrategyIn::DiagonalShift) => Strategy::DiagonalShift,
        Some(StrategyIn::PositiveOnly) => Strategy::PositiveOnly,
        None => Strategy::default_for(e.modulated_frame),
    };
    let sched = compile(&target, limits, strategy)?;
    let recon = reconstruct(&sched);
    let curve = convergence_curve(&target, limits, strategy)?;
    let norm2 = spectral_norm(&target.w);
    let norm_f = target.w.norm();

    a.file("target.csv", target_to_csv(&target));
    a.file("reconstructed.csv", target_to_csv(&recon));
    a.file("schedule.json", schedule_to_json(&sched)?);
    let mut ct = Table::new(&["eta", "epsilon", "epsilon_rel"]);
    for (k, &eps) in curve.iter().enumerate() {
        ct.row(vec![(k + 1).into(), eps.into(), (if norm2 > 0.0 { eps / norm2 } else { 0.0 }).into()]);
    }
    a.table("convergence.csv", &ct);
    let mut head = vec!["cycle".to_string(), "sign".into(), "p".into(), "duration_tau".into()];
    head.extend((0..n).map(|i| format!("amplitude{}_w1", i + 1)));
    let mut cy = Table::new(&head);
    for (k, c) in sched.cycles.iter().enumerate() {
        let mut row: Vec<Cell> = vec![(k + 1).into(), (c.sign as i64).to_string().into(), c.p.into(), (c.duration / TAU).into()];
        row.extend(c.amplitudes.iter().map(|&v| Cell::F(v / W1)));
        cy.row(row);
    }
    a.table("cycles.csv", &cy);

    let rel = if norm_f > 0.0 { frobenius_error(&recon, &target) / norm_f } else { frobenius_error(&recon, &target) };
    let rise = curve.windows(2).map(|w| w[1] - w[0]).fold(0.0f64, f64::max);
    let half = n.div_ceil(2);
    a.derive("n", n);
    a.derive("eta", sched.eta());
    a.derive("diagonal_shift", sched.diagonal_shift);
    a.derive("total_duration_tau", sched.total_duration() / TAU);
    a.derive("strategy", format!("{strategy:?}"));
    a.derive("reconstruction_error_rel", rel);
    if let (Some(&first), Some(&h)) = (curve.first(), curve.get(half.max(1) - 1)) {
        a.derive("half_rank_ratio", if first > 0.0 { h / first } else { 0.0 });
    }
    a.check_le("reconstruction_error_rel", rel, 1e-10);
    if let Some(&last) = curve.last() {
        a.check_le("epsilon_full_rank_rel", if norm2 > 0.0 { last / norm2 } else { last }, 1e-10);
    }
    a.check_le("epsilon_nonincreasing", rise.max(0.0), 1e-12 * norm2.max(1.0));
    Ok(())
}

// ---------------------------------------------------------------- qaoa

fn load_graph(loaded: &Loaded, g: &GraphIn, seed: u64) -> R<TargetModel> {
    match g {
        GraphIn::Dregular { n, d, seed: s } => Ok(hotline::compiler::dregular(*n, *d, s.unwrap_or(seed))?),
        GraphIn::Edges { n, edges } => {
            let text: String = edges.iter().map(|(i, j)| format!("{i},{j}\n")).collect();
            Ok(graph_from_edge_list(&text, Some(*n))?)
        }
        GraphIn::File { path, n } => Ok(graph_from_edge_list(&read_text(loaded, path)?, *n)?),
    }
}

fn qaoa_template(q: &Qaoa, graph: TargetModel) -> QaoaConfig {
    QaoaConfig { gammas: vec![], betas: vec![], graph, j_max: 1.0, detuning: q.detuning_jmax, omega0: q.omega0_jmax }
}

fn optimizer_params(q: &Qaoa, base: OptimizerParams, seed: u64) -> OptimizerParams {
    let mut p = OptimizerParams { seed, ..base };
    if let Some(o) = &q.optimizer {
        p.restarts = o.restarts.unwrap_or(p.restarts);
        p.max_evals = o.max_evals.unwrap_or(p.max_evals);
        p.initial_step = o.initial_step.unwrap_or(p.initial_step);
        p.tol = o.tol.unwrap_or(p.tol);
        p.shots = o.shots.unwrap_or(p.shots);
    }
    p
}

fn noise_parts(q: &Qaoa) -> Option<(NoiseModel, NoisyOptions)> {
    let n = q.noise.as_ref()?;
    let model = NoiseModel { gamma_phi: n.gamma_phi_jmax, kappa: n.kappa_jmax, nbar_th: n.nbar, fock_cutoff: n.fock_cutoff };
    Some((model, engine_options(n.engine.as_ref())))
}

fn engine_options(e: Option<&scenario::EngineIn>) -> NoisyOptions {
    let mut o = NoisyOptions::default();
    if let Some(e) = e {
        o.steps_per_period = e.steps_per_period.unwrap_or(o.steps_per_period);
        o.max_steps_per_period = e.max_steps_per_period.unwrap_or(o.max_steps_per_period);
        o.split_tol = e.split_tol.unwrap_or(o.split_tol);
        o.leakage_tol = e.leakage_tol.unwrap_or(o.leakage_tol);
        o.trace_tol = e.trace_tol.unwrap_or(o.trace_tol);
        o.use_symmetry = e.use_symmetry.unwrap_or(o.use_symmetry);
    }
    o
}

fn histogram_table(h: &Histogram, cost: &CostHamiltonian) -> Table {
    let mut t = Table::new(&["index", "bits", "cut_value", "count", "frequency"]);
    for (&z, &c) in &h.counts {
        t.row(vec![z.into(), bits_to_string(z, h.n_qubits).into(), cost.cut_value(z).into(), c.into(), h.frequency(z).into()]);
    }
    t
}

fn run_qaoa(loaded: &Loaded, q: &Qaoa, seed: u64, a: &mut Artifacts) -> R<()> {
    if let (Some(g), Some(depth)) = (&q.graph, q.depth) {
        qaoa_circuit(loaded, q, g, depth, seed, a)?;
    }
    if let Some(s) = &q.scaling {
        qaoa_scaling(q, s, seed, a)?;
    }
    Ok(())
}

fn qaoa_circuit(loaded: &Loaded, q: &Qaoa, g: &GraphIn, depth: usize, seed: u64, a: &mut Artifacts) -> R<()> {
    let graph = load_graph(loaded, g, seed)?;
    let template = qaoa_template(q, graph);
    let cost = CostHamiltonian::new(&template.graph)?;
    let n = template.graph.n();
    let e_min = cost.min_energy()?;
    let optimal = cost.optimal_strings()?;
    let params = optimizer_params(q, OptimizerParams::default(), seed);
    let shots_seed = q.samples_seed.unwrap_or(seed);
    info!("qaoa: N = {n}, M = {depth}");

    let mut dt = Table::new(&["m", "energy", "e_min", "approximation_ratio", "cut_value", "best_index", "evaluations", "budget_exhausted"]);
    let mut at = Table::new(&["m", "layer", "gamma", "beta"]);
    let final_angles: Angles;
    let final_energy: f64;
    let final_best: usize;
    match &q.angles {
        Some(fixed) => {
            let psi = prepare_vector(&cost, &fixed.gammas, &fixed.betas);
            let state = SpinRegisterState::from_pure(&psi)?;
            let hist = sample_strings(&state, params.shots, shots_seed)?;
            let e = cost.expectation(&state.populations());
            let best = hist.modal().unwrap_or(0);
            dt.row(vec![
                depth.into(),
                e.into(),
                e_min.into(),
                (e / e_min).into(),
                cost.cut_value(best).into(),
                best.into(),
                0usize.into(),
                0usize.into(),
            ]);
            for l in 0..depth {
                at.row(vec![depth.into(), (l + 1).into(), fixed.gammas[l].into(), fixed.betas[l].into()]);
            }
            a.table("samples.csv", &histogram_table(&hist, &cost));
            final_angles = Angles { gammas: fixed.gammas.clone(), betas: fixed.betas.clone() };
            final_energy = e;
            final_best = best;
        }
        None => {
            let evaluator = match (q.optimize_noisy, noise_parts(q)) {
                (true, Some((m, o))) => Evaluator::Noisy(m, o),
                _ => Evaluator::Ideal,
            };
            let results = optimize_nested(&template, &evaluator, &params, depth)?;
            for (k, r) in results.iter().enumerate() {
                let m = k + 1;
                dt.row(vec![
                    m.into(),
                    r.energy.into(),
                    e_min.into(),
                    (r.energy / e_min).into(),
                    r.cut_value.into(),
                    r.best_index.into(),
                    r.evaluations.into(),
                    (r.budget_exhausted as usize).into(),
                ]);
                for l in 0..m {
                    at.row(vec![m.into(), (l + 1).into(), r.angles.gammas[l].into(), r.angles.betas[l].into()]);
                }
                if r.budget_exhausted {
                    a.warn(format!("optimizer budget exhausted at depth {m}"));
                }
            }
            let last = results.last().expect("depth ≥ 1");
            let mut tt = Table::new(&["evaluation", "best_objective"]);
            for p in &last.angle_trace {
                tt.row(vec![p.evaluation.into(), p.best_objective.into()]);
            }
            a.table("trace.csv", &tt);
            a.table("samples.csv", &histogram_table(&last.samples, &cost));
            final_angles = last.angles.clone();
            final_energy = last.energy;
            final_best = last.best_index;
        }
    }
    a.table("depths.csv", &dt);
    a.table("angles.csv", &at);
    let rel_gap = (final_energy - e_min) / e_min.abs().max(f64::MIN_POSITIVE);
    a.derive("n", n);
    a.derive("edges", template.graph.edges().len());
    a.derive("e_min", e_min);
    a.derive("energy", final_energy);
    a.derive("rel_gap", rel_gap);
    a.derive("modal_index", final_best);
    a.derive("modal_bits", bits_to_string(final_best, n));
    a.derive("optimal_indices", &optimal);
    a.derive("angles", &final_angles);
    if let Some(c) = &q.checks {
        if let Some(g) = c.rel_gap {
            a.check_le("energy_rel_gap", rel_gap, g);
        }
        if c.modal_optimal {
            let ok = optimal.contains(&final_best);
            a.checks.push(crate::output::Check {
                name: "modal_string_optimal".into(),
                value: if ok { 1.0 } else { 0.0 },
                threshold: "= 1".into(),
                passed: ok,
            });
        }
    }

    if let Some((model, opts)) = noise_parts(q) {
        let cfg = template.with_angles(final_angles.gammas.clone(), final_angles.betas.clone());
        let run = prepare_state_noisy(&cfg, &model, &opts)?;
        let ideal = prepare_vector(&cost, &final_angles.gammas, &final_angles.betas);
        let fid = run.state.fidelity_pure(&ideal);
        let hist = sample_strings(&run.state, params.shots, shots_seed)?;
        a.table("noisy_samples.csv", &histogram_table(&hist, &cost));
        for w in run.warnings.iter().chain(&model.warnings(run.fock_cutoff)) {
            a.warn(w.clone());
        }
        let degree = template.graph.degrees().into_iter().max().unwrap_or(0);
        let ideal_state = SpinRegisterState::from_pure(&ideal)?;
        let xi_phi = dephasing_error(n, model.gamma_phi, run.t_run, Some(&ideal_state));
        let xi_kappa = rethermalization_error(model.kappa, model.nbar_th, cfg.detuning, cfg.gammabar(), depth, n, degree)?;
        a.derive(
            "noisy",
            json!({
                "infidelity": 1.0 - fid,
                "energy": cost.expectation(&run.state.populations()),
                "purity": run.state.purity(),
                "fock_cutoff": run.fock_cutoff,
                "leakage": run.leakage,
                "trace_drift": run.trace_drift,
                "steps_per_period": run.steps_per_period,
                "t_run_jmax": run.t_run,
                "predicted_dephasing": xi_phi.value,
                "predicted_rethermalization": xi_kappa,
            }),
        );
        a.check_le("noisy_trace_drift", run.trace_drift, opts.trace_tol);
    }
    Ok(())
}

fn qaoa_scaling(q: &Qaoa, s: &scenario::ScalingIn, seed: u64, a: &mut Artifacts) -> R<()> {
    let base = ScalingParams::default();
    let params = ScalingParams {
        x_targets: s.x_targets.clone(),
        j_max: 1.0,
        graph_seed: s.graph_seed.unwrap_or(seed),
        optimizer: optimizer_params(q, base.optimizer.clone(), seed),
        noisy: engine_options(q.noise.as_ref().and_then(|n| n.engine.as_ref())),
    };
    let mut t = Table::new(&[
        "kind",
        "n",
        "d",
        "m",
        "jmax_over_detuning",
        "rate_jmax",
        "gammabar",
        "x",
        "measured",
        "measured_root",
        "measured_over_x",
        "fock_cutoff",
        "leakage",
    ]);
    let mut slopes = serde_json::Map::new();
    for kind in &s.kinds {
        let k = match kind {
            NoiseKindIn::Dephasing => NoiseKind::Dephasing,
            NoiseKindIn::Rethermalization => NoiseKind::Rethermalization { nbar: s.nbar },
        };
        info!("scaling experiment: {}", k.label());
        let res = error_scaling_experiment(&s.graphs, &s.depths, &s.ratios, k, &params)?;
        for p in &res.points {
            let ratio = if p.x > 0.0 { p.measured / p.x } else { f64::NAN };
            t.row(vec![
                k.label().into(),
                p.n.into(),
                p.d.into(),
                p.m.into(),
                p.ratio.into(),
                p.rate.into(),
                p.gammabar.into(),
                p.x.into(),
                p.measured.into(),
                p.measured_root.into(),
                ratio.into(),
                p.fock_cutoff.into(),
                p.leakage.into(),
            ]);
        }
        slopes.insert(k.label().to_string(), json!(res.slope));
        if let Some((lo, hi)) = s.band {
            let pts: Vec<_> = res.points.iter().filter(|p| p.x > 0.0 && p.x <= 0.2).collect();
            let inside = pts.iter().filter(|p| (lo..=hi).contains(&(p.measured / p.x))).count();
            let frac = if pts.is_empty() { 0.0 } else { inside as f64 / pts.len() as f64 };
            a.check_ge(&format!("scaling_fraction_in_band[{}]", k.label()), frac, 1.0);
        }
    }
    a.table("scaling.csv", &t);
    a.derive("scaling_slopes", slopes);
    Ok(())
}

// ---------------------------------------------------------------- budget

fn gamma_phi(hz: Option<f64>, per_s: Option<f64>) -> f64 {
    hz.map(|v| v * TWO_PI).or(per_s).unwrap_or(0.0)
}

/// Golden-section minimum of a unimodal function on a logarithmic bracket.
fn minimize_log(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c.exp()), f(d.exp()));
    for _ in 0..200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d.exp());
        }
    }
    let x = (0.5 * (a + b)).exp();
    (x, f(x))
}

fn run_budget(b: &Budget, a: &mut Artifacts) -> R<()> {
    let mut coops: Vec<(String, f64)> = Vec::new();
    if !b.optimum.is_empty() {
        let mut t = Table::new(&["label", "cooperativity", "omega1_star_hz", "xi_opt", "xi_direct", "alpha_gamma", "alpha_kappa"]);
        let mut curves = Table::new(&["label", "omega1_hz", "xi_dephasing", "xi_loss", "xi_total"]);
        for o in &b.optimum {
            let g = o.g_hz * TWO_PI;
            let gp = gamma_phi(o.gamma_phi_hz, o.gamma_phi_per_s);
            let kbt = o.kbt_hz.map(|v| v * TWO_PI).unwrap_or_else(|| o.temperature_k.unwrap() * KB_OVER_H_GHZ_PER_K * 1e9 * TWO_PI);
            let ag = o.alpha_gamma.unwrap_or_else(|| alpha_gamma(o.n_qubits));
            let opt = cooperativity_optimum(g, gp, kbt, o.quality_q, ag)?;
            let err = |w: f64| two_qubit_error_at(w, g, gp, kbt, o.quality_q, ag);
            let (_, direct) = minimize_log(err, opt.omega1_star * 1e-3, opt.omega1_star * 1e3);
            t.row(vec![
                o.label.clone().into(),
                opt.cooperativity.into(),
                (opt.omega1_star / TWO_PI).into(),
                opt.xi_opt.into(),
                direct.into(),
                opt.alpha_gamma.into(),
                opt.alpha_kappa.into(),
            ]);
            a.check_le(&format!("compact_vs_direct_minimum[{}]", o.label), (opt.xi_opt / direct - 1.0).abs(), 0.05);
            if let Some(pts) = o.curve_points {
                for w in logspace(opt.omega1_star / 30.0, opt.omega1_star * 30.0, pts.max(2)) {
                    let xd = ag * gp * w / (g * g);
                    let xl = hotline::budget::ALPHA_KAPPA * kbt / (o.quality_q * w);
                    curves.row(vec![o.label.clone().into(), (w / TWO_PI).into(), xd.into(), xl.into(), err(w).into()]);
                }
            }
            coops.push((o.label.clone(), opt.cooperativity));
        }
        a.table("optimum.csv", &t);
        if b.optimum.iter().any(|o| o.curve_points.is_some()) {
            a.table("optimum_curves.csv", &curves);
        }
    }
    if !b.rates.is_empty() {
        let mut t = Table::new(&["label", "cooperativity"]);
        for r in &b.rates {
            let c = cooperativity_from_rates(r.g_hz * TWO_PI, gamma_phi(r.gamma_phi_hz, r.gamma_phi_per_s), r.kappa_hz * TWO_PI, r.nbar)?;
            t.row(vec![r.label.clone().into(), c.into()]);
            coops.push((r.label.clone(), c));
        }
        a.table("rates.csv", &t);
    }
    a.derive("cooperativities", coops.iter().cloned().collect::<std::collections::BTreeMap<_, _>>());
    if let Some(f) = &b.feasibility {
        let mut t = Table::new(&["label", "n", "m", "d", "xi_total", "t_run_s"]);
        let mut lim = Table::new(&["label", "budget", "max_qubits_at_m", "max_depth_at_largest_n"]);
        let n_big = *f.n_list.iter().max().unwrap();
        for (label, c) in &coops {
            for &n in &f.n_list {
                let fe = qaoa_feasibility(f.gammabar, f.d, f.m, n, *c, f.j_max_hz.map(|j| j * TWO_PI))?;
                t.row(vec![label.clone().into(), n.into(), f.m.into(), f.d.into(), fe.xi_total.into(), fe.t_run.unwrap_or(f64::NAN).into()]);
            }
            lim.row(vec![
                label.clone().into(),
                f.budget.into(),
                max_qubits(f.budget, f.gammabar, f.d, f.m, *c).into(),
                max_depth(f.budget, f.gammabar, f.d, n_big, *c).into(),
            ]);
        }
        a.table("feasibility.csv", &t);
        a.table("limits.csv", &lim);
    }
    if let Some(s) = &b.assemble {
        let inputs = BudgetInputs {
            n_qubits: s.n_qubits,
            depth_m: s.depth_m,
            degree_d: s.degree_d,
            gammabar: s.gammabar,
            g: s.g_hz * TWO_PI,
            gamma_phi: gamma_phi(s.gamma_phi_hz, s.gamma_phi_per_s),
            kappa: s.kappa_hz * TWO_PI,
            nbar: s.nbar,
            detuning: s.detuning_hz * TWO_PI,
            timing_dt: s.timing_dt_s,
        };
        let eb = assemble_budget(&inputs)?;
        let mut t = Table::new(&["xi_phi", "xi_kappa", "xi_timing", "xi_total", "cooperativity", "omega1_star_hz", "t_run_s"]);
        t.row(vec![
            eb.xi_phi.into(),
            eb.xi_kappa.into(),
            eb.xi_timing.into(),
            eb.xi_total.into(),
            eb.cooperativity_c.into(),
            (eb.omega1_star / TWO_PI).into(),
            eb.t_run.into(),
        ]);
        a.table("budget.csv", &t);
        a.derive("budget", &eb);
        if eb.xi_total > 0.1 {
            a.warn(format!("total error {:.3} outside the small-error regime", eb.xi_total));
        }
    }
    if let Some(d) = &b.detuning_scan {
        let gp = gamma_phi(d.gamma_phi_hz, d.gamma_phi_per_s);
        let kappa_eff = d.kappa_hz * TWO_PI * (2.0 * d.nbar + 1.0);
        let mut t = Table::new(&["detuning_hz", "xi_total"]);
        let mut best = (f64::NAN, f64::INFINITY);
        for delta_hz in logspace(d.delta_min_hz, d.delta_max_hz, d.points) {
            let xi = qaoa_error_at_detuning(d.gammabar, d.m, d.n, d.d, d.g_hz * TWO_PI, gp, kappa_eff, delta_hz * TWO_PI);
            if xi < best.1 {
                best = (delta_hz, xi);
            }
            t.row(vec![delta_hz.into(), xi.into()]);
        }
        a.table("detuning_scan.csv", &t);
        a.derive("detuning_scan_minimum", json!({ "detuning_hz": best.0, "xi_total": best.1 }));
    }
    if let Some(l) = &b.loss_rate {
        let kbt = l.temperature_k * KB_OVER_H_GHZ_PER_K * 1e9 * TWO_PI;
        let mut t = Table::new(&["omega_hz", "kbt_over_omega", "rate_per_s", "form"]);
        for &w in &l.omega_hz {
            let omega = w * TWO_PI;
            let rate = thermal_loss_rate(l.kappa_hz * TWO_PI, omega, kbt);
            let form = if kbt / omega > 2.0 { "high_temperature" } else { "bose" };
            t.row(vec![w.into(), (kbt / omega).into(), rate.into(), form.into()]);
        }
        a.table("loss_rate.csv", &t);
    }
    Ok(())
}

// ---------------------------------------------------------------- modes

fn run_modes(m: &Modes, a: &mut Artifacts) -> R<()> {
    let spec = BoundarySpec { a1: m.a1_l, a2: m.a2_l, length_l: 1.0, epsilon_nl: 0.0 };
    let roots = solve_modes(&spec, m.n_modes)?;
    let mut t = Table::new(&["n", "k_per_l", "theta_rad", "k_ideal_per_l", "k_low_per_l", "k_high_per_l", "residual_rel"]);
    let mut worst_res: f64 = 0.0;
    let (mut low, mut high): (Option<f64>, Option<f64>) = (None, None);
    for r in &roots {
        let (r1, r2) = r.residuals(&spec);
        let res = r1.abs().max(r2.abs()) / r.k;
        worst_res = worst_res.max(res);
        let n = r.n as f64;
        let k_low = PI * n / (1.0 - 2.0 * m.a1_l);
        let k_high = (n + 1.0) * PI;
        t.row(vec![r.n.into(), r.k.into(), r.theta.into(), (n * PI).into(), k_low.into(), k_high.into(), res.into()]);
        if m.a2_l == 0.0 && m.a1_l > 0.0 {
            if r.k * m.a1_l < 0.5 {
                low = Some(low.unwrap_or(0.0).max((r.k / k_low - 1.0).abs()));
            } else if r.k * m.a1_l >= 10.0 {
                high = Some(high.unwrap_or(0.0).max((r.k / k_high - 1.0).abs()));
            }
        }
    }
    a.table("modes.csv", &t);
    let increasing = roots.windows(2).all(|w| w[1].k > w[0].k);
    a.derive("max_residual_rel", worst_res);
    a.derive("strictly_increasing", increasing);
    a.check_le("max_residual_rel", worst_res, 1e-12);
    a.checks.push(crate::output::Check {
        name: "k_strictly_increasing".into(),
        value: if increasing { 1.0 } else { 0.0 },
        threshold: "= 1".into(),
        passed: increasing,
    });
    if let Some(v) = low {
        a.check_le("low_frequency_asymptote_rel", v, 0.01);
    }
    if let Some(v) = high {
        a.check_le("high_frequency_asymptote_rel", v, 0.01);
    }
    if let Some(nl) = &m.nonlinear {
        let mut st = Table::new(&["epsilon", "n", "omega_w1"]);
        for &eps in &nl.epsilon {
            let w = nonlinear_spectrum(W1, eps, nl.n_modes)?;
            for (k, &v) in w.iter().enumerate() {
                st.row(vec![eps.into(), (k + 1).into(), (v / W1).into()]);
            }
        }
        a.table("nonlinear_spectrum.csv", &st);
    }
    Ok(())
}

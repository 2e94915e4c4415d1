//! Subcommand implementations. Each writes its files through [`OutputDir`].

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use kerr_echo::analysis::{
    classical_carrier, default_theta_grid, detect_echoes, envelope, quadrature_envelope, sweep_cat_echo_amplitudes,
    EchoKind, PredictedFeature,
};
use kerr_echo::classical::{
    ensemble_mean_q, exact_gaussian_mean_q_free, first_echo_amplitude, sample_initial_ensemble, EnsembleOptions,
};
use kerr_echo::lindblad::{
    damped_mean_a_analytic, propagate_density, DampedInitial, DampedMode, DensityMatrix, LindbladResult,
};
use kerr_echo::model::{CatSpec, CoherentSpec, FockSpaceSpec, KickPulse, TimeGrid};
use kerr_echo::output::{
    write_classical_trace, write_histogram, write_json, write_quantum_trace, write_series, write_state,
    write_sweep_matrix, EchoReport, SweepMatrix,
};
use kerr_echo::quantum::{
    analytic_mean_a_cat, analytic_mean_a_coherent, build_operators, cat_state_vector, evolve_free,
    fractional_revival_decomposition, gauss_sum_closed_form, gauss_sum_direct, kicked_echo_prediction,
    selection_rule, KickMode, QuantumPropagator, QuantumTrace, StateVector,
};
use kerr_echo::scenario::{Scenario, StateKind};
use kerr_echo::series::TimeSeries;
use num_complex::Complex64;
use serde::Serialize;

use crate::cli::Command;
use crate::run::{Failure, OutputDir};

/// Largest Fock cutoff a master-equation run may use without `--long`.
pub const LINDBLAD_SHORT_CUTOFF: usize = 64;

pub fn run(command: Command, scenario: &Scenario, long: bool, out: &mut OutputDir) -> Result<(), Failure> {
    match command {
        Command::ClassicalEnsemble => classical_ensemble(scenario, out),
        Command::QuantumEvolve | Command::CatEvolve => closed_evolution(command, scenario, out),
        Command::EchoSweep => echo_sweep(scenario, out),
        Command::LindbladEvolve => lindblad_evolve(scenario, long, out),
        Command::RevivalDecompose => revival_decompose(scenario, out),
        Command::OracleCheck => oracle_check(scenario, out),
    }
}

fn require_pulse(scenario: &Scenario, command: Command) -> Result<KickPulse, Failure> {
    scenario
        .kick_pulse()
        .ok_or_else(|| Failure::Validation(format!("{} needs a [pulse] section", command.name())))
}

/// Keep the features whose detection window lies inside the grid.
fn within(grid: &TimeGrid, features: Vec<PredictedFeature>) -> Vec<PredictedFeature> {
    features
        .into_iter()
        .filter(|f| f.t - f.half_width >= grid.t_start && f.t + f.half_width <= grid.t_end)
        .collect()
}

fn tag(t: f64) -> String {
    format!("{t:.4}").replace('.', "p")
}

fn classical_ensemble(s: &Scenario, out: &mut OutputDir) -> Result<(), Failure> {
    let pulse = require_pulse(s, Command::ClassicalEnsemble)?;
    let chi = s.oscillator.chi;
    let grid = s.time_grid()?;
    let spec = CoherentSpec::new(s.alpha0())?;
    let ens_spec = s.ensemble_spec()?;
    let ensemble = out.timed("sample", || sample_initial_ensemble(&spec, &ens_spec));
    let hist = s.histogram_spec();
    let (_, w1) = pulse.window();
    let free_opts = EnsembleOptions {
        max_step: s.pulse_max_step(),
        snapshot_times: s.ensemble.snapshot_times.clone(),
        histogram: Some(hist),
    };
    let kicked_opts = EnsembleOptions {
        snapshot_times: s.ensemble.snapshot_times.iter().cloned().filter(|&t| t > w1).collect(),
        ..free_opts.clone()
    };
    let free = out.timed("free ensemble", || ensemble_mean_q(&ensemble, chi, None, &grid, &free_opts))?;
    let kicked = out.timed("kicked ensemble", || {
        ensemble_mean_q(&ensemble, chi, Some(&pulse), &grid, &kicked_opts)
    })?;

    out.panel("mean-q-free", "mean_q_free.csv", "ensemble mean position without kick", |mut w| {
        write_classical_trace(&mut w, &free.mean_q)
    })?;
    out.panel("mean-q-kicked", "mean_q_kicked.csv", "ensemble mean position with kick", |mut w| {
        write_classical_trace(&mut w, &kicked.mean_q)
    })?;
    for (label, res) in [("free", &free), ("kicked", &kicked)] {
        for h in &res.histograms {
            let name = format!("snapshot_{label}_t{}.csv", tag(h.time));
            let panel = format!("snapshot-{label}-t{}", tag(h.time));
            out.panel(&panel, &name, "phase-space histogram", |mut w| write_histogram(&mut w, h))?;
        }
    }

    let q0 = spec.phase_space_centre().0.hypot(spec.phase_space_centre().1);
    let env = envelope(&kicked.mean_q, classical_carrier(chi, q0))?;
    let tau = pulse.tau;
    let mut features = Vec::new();
    for n in 1.. {
        let f = PredictedFeature::new(EchoKind::ClassicalEcho, n, 2.0 * n as f64 * tau, tau);
        if f.t + f.half_width > grid.t_end {
            break;
        }
        features.push(if n == 1 {
            f.with_prediction(q0 * first_echo_amplitude(q0, chi, pulse.g0, tau))
        } else {
            f
        });
    }
    let events = detect_echoes(&env, &within(&grid, features), &s.detection)?;
    out.write("envelope_kicked.csv", |mut w| write_series(&mut w, &env, ("t", "envelope")))?;
    out.panel("echoes", "echoes.json", "detected classical echoes", |mut w| {
        write_json(&mut w, &EchoReport::new(events))
    })
}

/// Echo and revival features of a closed or damped quantum run.
fn quantum_features(s: &Scenario, pulse: Option<&KickPulse>, grid: &TimeGrid) -> Vec<PredictedFeature> {
    let chi = s.oscillator.chi;
    let cat = s.state.kind == StateKind::Cat;
    let half = PI / chi;
    let quarter = FRAC_PI_2 / chi;
    let a0 = s.alpha0().norm();
    let q0 = SQRT_2 * a0;
    let mut features = Vec::new();
    let revival_width = |tau: f64| tau.min(0.5) / 4.0;
    let w = pulse.map_or(0.5, |p| p.tau);
    if let Some(p) = pulse {
        let tau = p.tau;
        let nu = 2.0 * PI / (chi * tau);
        let admissible = (nu - nu.round()).abs() < 1e-9 && nu.round() as u32 % 4 == 3;
        let predict = |r: i64, t: f64| -> Option<f64> {
            if cat || !admissible || s.oscillator.gamma > 0.0 {
                return None;
            }
            kicked_echo_prediction(a0, chi, p.g0, nu.round() as u32, r, t).ok().map(|e| q0 * e.amplitude)
        };
        let mut classical = PredictedFeature::new(EchoKind::ClassicalEcho, 1, 2.0 * tau, tau);
        if let Some(v) = predict(1, 2.0 * tau) {
            classical = classical.with_prediction(v);
        }
        features.push(classical);
        let t_q = if cat { quarter - 2.0 * tau } else { half - 2.0 * tau };
        let mut quantum = PredictedFeature::new(EchoKind::QuantumEcho, 1, t_q, tau);
        if let Some(v) = predict(-1, t_q) {
            quantum = quantum.with_prediction(v);
        }
        features.push(quantum);
    }
    let revival = |kind, t: f64| {
        let f = PredictedFeature::new(kind, 1, t, w).with_half_width(revival_width(w));
        if pulse.is_some() || s.oscillator.gamma > 0.0 && s.oscillator.epsilon.is_some() {
            return f;
        }
        let a = if s.oscillator.gamma > 0.0 {
            damped_mean_a_analytic(&DampedInitial::Cat(s.cat_spec()), chi, s.oscillator.gamma, 0.0, t, DampedMode::Full)
                .ok()
        } else {
            Some(analytic_mean_a_cat(&s.cat_spec(), chi, t))
        };
        match a {
            Some(a) => f.with_prediction(SQRT_2 * a.norm()),
            None => f,
        }
    };
    if cat {
        features.push(revival(EchoKind::QuarterRevival, quarter));
    }
    features.push(revival(EchoKind::HalfRevival, half));
    within(grid, features)
}

fn initial_state(s: &Scenario, fock: &FockSpaceSpec) -> Result<StateVector, Failure> {
    Ok(cat_state_vector(&s.cat_spec(), fock)?)
}

fn closed_evolution(command: Command, s: &Scenario, out: &mut OutputDir) -> Result<(), Failure> {
    let pulse = require_pulse(s, command)?;
    if command == Command::CatEvolve && s.state.kind != StateKind::Cat {
        return Err(Failure::Validation("cat-evolve needs state.kind = \"cat\"".into()));
    }
    let grid = s.time_grid()?;
    let fock = s.fock_space()?;
    let ops = build_operators(s.oscillator.chi, &fock)?;
    let state = initial_state(s, &fock)?;
    let max_step = s.pulse_max_step();
    let free = out.timed("free evolution", || {
        QuantumPropagator::new(&ops, None, KickMode::Pulsed, max_step).run(&state, &grid)
    })?;
    let kicked = out.timed("kicked evolution", || {
        QuantumPropagator::new(&ops, Some(pulse), s.kick_mode(), max_step).run(&state, &grid)
    })?;
    for (label, trace, p) in [("free", &free, None), ("kicked", &kicked, Some(&pulse))] {
        write_quantum_outputs(out, s, label, &trace.times, &trace.mean_a, p, &grid)?;
    }
    let QuantumTrace { final_state, .. } = kicked;
    out.write("final_state.csv", |mut w| write_state(&mut w, &final_state))
}

fn write_quantum_outputs(
    out: &mut OutputDir,
    s: &Scenario,
    label: &str,
    times: &[f64],
    mean_a: &[Complex64],
    pulse: Option<&KickPulse>,
    grid: &TimeGrid,
) -> Result<(), Failure> {
    out.panel(
        &format!("mean-q-{label}"),
        &format!("trace_{label}.csv"),
        &format!("mean position, {label}"),
        |mut w| write_quantum_trace(&mut w, times, mean_a),
    )?;
    let env = quadrature_envelope(times, mean_a, SQRT_2)?;
    out.write(&format!("envelope_{label}.csv"), |mut w| write_series(&mut w, &env, ("t", "envelope")))?;
    let events = detect_echoes(&env, &quantum_features(s, pulse, grid), &s.detection)?;
    out.panel(
        &format!("events-{label}"),
        &format!("echoes_{label}.json"),
        &format!("detected echoes and revivals, {label}"),
        |mut w| write_json(&mut w, &EchoReport::new(events)),
    )
}

fn echo_sweep(s: &Scenario, out: &mut OutputDir) -> Result<(), Failure> {
    let sweep = s
        .sweep
        .clone()
        .ok_or_else(|| Failure::Validation("echo-sweep needs a [sweep] section".into()))?;
    let base = s
        .sweep_base()
        .ok_or_else(|| Failure::Validation("echo-sweep needs a [pulse] section".into()))?;
    let theta = default_theta_grid(sweep.theta_points);
    let n_plus: Vec<f64> = sweep.n_plus_sq.iter().map(|v| v.sqrt()).collect();
    let grid = out.timed("sweep", || sweep_cat_echo_amplitudes(&base, &theta, &n_plus, sweep.engine))?;
    if grid.is_empty() {
        return Ok(());
    }
    out.panel("sweep-classical", "sweep_classical.csv", "first classical echo amplitude", |mut w| {
        write_sweep_matrix(&mut w, &grid, SweepMatrix::Classical)
    })?;
    out.panel("sweep-quantum", "sweep_quantum.csv", "first quantum echo amplitude", |mut w| {
        write_sweep_matrix(&mut w, &grid, SweepMatrix::Quantum)
    })
}

#[derive(Serialize)]
struct LindbladSummary<'a> {
    label: &'a str,
    nbar: f64,
    max_trace_drift: f64,
    max_hermiticity_residual: f64,
    min_eigenvalue: f64,
    final_purity: f64,
    eigen_samples: &'a [kerr_echo::lindblad::EigenSample],
}

fn lindblad_evolve(s: &Scenario, long: bool, out: &mut OutputDir) -> Result<(), Failure> {
    let fock = s.fock_space()?;
    if fock.n_max > LINDBLAD_SHORT_CUTOFF && !long {
        return Err(Failure::Validation(format!(
            "master-equation run with fock.n_max = {} needs --long (limit without it: {LINDBLAD_SHORT_CUTOFF})",
            fock.n_max
        )));
    }
    let params = s.oscillator_params()?;
    let grid = s.time_grid()?;
    let ops = build_operators(params.chi, &fock)?;
    let rho = DensityMatrix::from_pure(&initial_state(s, &fock)?);
    let steps = s.lindblad_steps();
    let pulse = s.kick_pulse();
    let mut runs: Vec<(&str, Option<KickPulse>)> = vec![("free", None)];
    if let Some(p) = pulse {
        runs.push(("kicked", Some(p)));
    }
    for (label, p) in runs {
        let res: LindbladResult = out.timed(&format!("{label} master equation"), || {
            propagate_density(&rho, &ops, &params, p.as_ref(), s.kick_mode(), &grid, &steps)
        })?;
        write_quantum_outputs(out, s, label, &res.times, &res.mean_a, p.as_ref(), &grid)?;
        let d = &res.diagnostics;
        let summary = LindbladSummary {
            label,
            nbar: params.nbar(),
            max_trace_drift: d.max_trace_drift,
            max_hermiticity_residual: d.max_hermiticity_residual,
            min_eigenvalue: d.min_eigenvalue(),
            final_purity: res.final_rho.purity(),
            eigen_samples: &d.eigen_samples,
        };
        out.write(&format!("diagnostics_{label}.json"), |mut w| write_json(&mut w, &summary))?;
        let purity = TimeSeries::new(res.times.clone(), d.purity.clone())?;
        out.write(&format!("purity_{label}.csv"), |mut w| write_series(&mut w, &purity, ("t", "purity")))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct RevivalSummary {
    nu: u32,
    time: f64,
    infidelity: f64,
    max_gauss_closed_form_deviation: Option<f64>,
    selection_rule: Vec<SelectionEntry>,
}

#[derive(Serialize)]
struct SelectionEntry {
    r_star: i64,
    l: u32,
}

fn revival_decompose(s: &Scenario, out: &mut OutputDir) -> Result<(), Failure> {
    let chi = s.oscillator.chi;
    let nus = s.revival.clone().unwrap_or_default().nu;
    let fock = s.fock_space()?;
    let state = initial_state(s, &fock)?;
    if s.state.kind == StateKind::Cat {
        return Err(Failure::Validation("revival-decompose expects a coherent initial state".into()));
    }
    let mut summaries = Vec::new();
    for nu in nus {
        let dec = fractional_revival_decomposition(s.alpha0(), chi, nu)?;
        let t = 2.0 * PI / (chi * nu as f64);
        let mut rec = dec.reconstruct(&fock);
        rec.normalize();
        let infidelity = (1.0 - rec.fidelity(&evolve_free(&state, chi, t))).max(0.0);
        out.panel(
            &format!("decomposition-nu{nu}"),
            &format!("decomposition_nu{nu}.csv"),
            "coefficients and amplitudes of the fractional revival",
            |w| {
                writeln!(w, "k,re_c,im_c,abs_c,re_alpha,im_alpha")?;
                for (k, (c, a)) in dec.coefficients.iter().zip(&dec.amplitudes).enumerate() {
                    writeln!(w, "{k},{},{},{},{},{}", c.re, c.im, c.norm(), a.re, a.im)?;
                }
                Ok(())
            },
        )?;
        let gauss_dev = (nu % 2 == 1).then(|| {
            (0..nu as i64)
                .map(|k| gauss_sum_closed_form(nu, k).map_or(f64::NAN, |c| (c - gauss_sum_direct(nu, k)).norm()))
                .fold(0.0, f64::max)
        });
        let selection = (-3i64..=3)
            .filter(|&r| r != 0)
            .filter_map(|r| selection_rule(nu, r).ok().map(|l| SelectionEntry { r_star: r, l }))
            .collect();
        summaries.push(RevivalSummary {
            nu,
            time: t,
            infidelity,
            max_gauss_closed_form_deviation: gauss_dev,
            selection_rule: selection,
        });
    }
    out.panel("revival-summary", "revivals.json", "fidelities and selection-rule tables", |mut w| {
        write_json(&mut w, &summaries)
    })
}

#[derive(Serialize)]
struct OracleEntry {
    name: String,
    deviation: f64,
    tolerance: f64,
    pass: bool,
}

fn oracle(name: &str, deviation: f64, tolerance: f64) -> OracleEntry {
    OracleEntry {
        name: name.to_string(),
        deviation,
        tolerance,
        pass: deviation < tolerance,
    }
}

fn oracle_check(s: &Scenario, out: &mut OutputDir) -> Result<(), Failure> {
    let chi = s.oscillator.chi;
    if !(chi > 0.0) {
        return Err(Failure::Validation("oracle-check needs chi > 0".into()));
    }
    let alpha = s.alpha0();
    let mut entries = Vec::new();

    let fock = s.fock_space()?;
    let ops = build_operators(chi, &fock)?;
    let coherent = cat_state_vector(&CatSpec::new(alpha, 1.0, 0.0, 0.0)?, &fock)?;
    let grid = s.time_grid()?;
    let trace = out.timed("free coherent", || {
        QuantumPropagator::new(&ops, None, KickMode::Pulsed, 1e-5).run(&coherent, &grid)
    })?;
    let dev = trace
        .times
        .iter()
        .zip(&trace.mean_a)
        .map(|(&t, a)| SQRT_2 * (a - analytic_mean_a_coherent(alpha, chi, t)).re.abs())
        .fold(0.0, f64::max);
    entries.push(oracle("free coherent state: Fock vs closed form, max |d<q>|", dev, 1e-8));

    let cat = CatSpec::new(alpha, 0.8f64.sqrt(), 0.2f64.sqrt(), FRAC_PI_2)?;
    let cat_state = cat_state_vector(&cat, &fock)?;
    let dev = trace
        .times
        .iter()
        .step_by(50)
        .map(|&t| (kerr_echo::quantum::expectation_a(&evolve_free(&cat_state, chi, t)) - analytic_mean_a_cat(&cat, chi, t)).norm())
        .fold(0.0, f64::max);
    entries.push(oracle("cat state: Fock vs closed form, max |d<a>|", dev, 1e-8));

    let dev = (1..=23u32)
        .step_by(2)
        .flat_map(|nu| (0..nu as i64).map(move |k| (nu, k)))
        .map(|(nu, k)| gauss_sum_closed_form(nu, k).map_or(f64::INFINITY, |c| (c - gauss_sum_direct(nu, k)).norm()))
        .fold(0.0, f64::max);
    entries.push(oracle("Gauss sums: closed form vs direct, odd nu <= 23", dev, 1e-12));

    let mut worst = 0.0f64;
    for nu in [3u32, 5, 7] {
        let mut rec = fractional_revival_decomposition(alpha, chi, nu)?.reconstruct(&fock);
        rec.normalize();
        worst = worst.max(1.0 - rec.fidelity(&evolve_free(&coherent, chi, 2.0 * PI / (chi * nu as f64))));
    }
    entries.push(oracle("fractional revivals nu = 3, 5, 7: 1 - fidelity", worst, 1e-10));

    let spec = CoherentSpec::new(alpha)?;
    let (q0, p0) = spec.phase_space_centre();
    let ensemble = sample_initial_ensemble(&spec, &s.ensemble_spec()?);
    let short = TimeGrid::new(0.0, 0.5, 0.01)?;
    let mc = out.timed("ensemble", || ensemble_mean_q(&ensemble, chi, None, &short, &EnsembleOptions::new(1e-5)))?;
    let se = mc.mean_q.stderr.clone().unwrap_or_default();
    let z = mc
        .mean_q
        .times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let d = (mc.mean_q.values[k] - exact_gaussian_mean_q_free(t, q0, p0, chi, std::f64::consts::FRAC_1_SQRT_2)).abs();
            if se[k] > 0.0 { d / se[k] } else { d }
        })
        .fold(0.0, f64::max);
    entries.push(oracle("Monte Carlo vs exact Gaussian-ensemble mean, standard errors", z, 5.0));

    let small = FockSpaceSpec::new(32)?;
    let small_ops = build_operators(chi, &small)?;
    let rho = DensityMatrix::from_pure(&cat_state_vector(&CatSpec::new(Complex64::new(2.0, 0.0), 1.0, 0.0, 0.0)?, &small)?);
    let params = kerr_echo::model::OscillatorParams::new(chi, 0.03, None)?;
    let lgrid = TimeGrid::new(0.0, PI / chi, 0.01)?;
    let res = out.timed("master equation", || {
        propagate_density(&rho, &small_ops, &params, None, KickMode::Pulsed, &lgrid, &s.lindblad_steps())
    })?;
    let dev = res
        .times
        .iter()
        .zip(&res.mean_a)
        .map(|(&t, a)| {
            damped_mean_a_analytic(&DampedInitial::Coherent(Complex64::new(2.0, 0.0)), chi, 0.03, 0.0, t, DampedMode::Full)
                .map_or(f64::INFINITY, |b| SQRT_2 * (a - b).re.abs())
        })
        .fold(0.0, f64::max);
    entries.push(oracle("zero-temperature master equation vs closed form, max |d<q>|", dev, 1e-4));
    entries.push(oracle("master equation trace drift", res.diagnostics.max_trace_drift, 1e-8));

    let failed: Vec<&str> = entries.iter().filter(|e| !e.pass).map(|e| e.name.as_str()).collect();
    let failed_msg = failed.join("; ");
    out.panel("oracles", "oracle_report.json", "analytic versus numerical comparisons", |mut w| {
        write_json(&mut w, &entries)
    })?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Engine(format!("oracle checks failed: {failed_msg}")))
    }
}

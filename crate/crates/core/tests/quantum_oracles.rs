use std::f64::consts::{PI, SQRT_2};

use kerr_echo::model::{CatSpec, FockSpaceSpec, KickPulse, TimeGrid};
use kerr_echo::quantum::{
    analytic_mean_a_cat, build_operators, cat_state_vector, coherent_state_vector, evolve_free, expectation_a,
    expectation_q, gauss_sum_direct, kicked_echo_prediction, kicked_mean_a_superposition, selection_rule,
    KickMode, QuantumPropagator,
};
use num_complex::Complex64;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn free_coherent_mean_against_direct_fock_sum() {
    // DERIVED: direct sum over 200 Fock levels with the Kerr energies.
    let fock = FockSpaceSpec::new(128).unwrap();
    let s = coherent_state_vector(c(6.0), &fock).unwrap();
    let q = expectation_q(&evolve_free(&s, 1.0, 0.3));
    assert!((q - -0.003_237_880_102_533_324).abs() < 1e-12, "{q}");
}

#[test]
fn cat_closed_form_against_fock() {
    let fock = FockSpaceSpec::new(64).unwrap();
    for theta in [0.0, 0.7, PI / 2.0, 2.5] {
        let cat = CatSpec::new(c(3.0), 0.6, 0.8, theta).unwrap();
        let s = cat_state_vector(&cat, &fock).unwrap();
        for &t in &[0.0, 0.4, PI / 2.0, 2.0] {
            let fock_a = expectation_a(&evolve_free(&s, 1.0, t));
            assert!((fock_a - analytic_mean_a_cat(&cat, 1.0, t)).norm() < 1e-10, "theta = {theta}, t = {t}");
        }
    }
}

#[test]
fn first_quantum_echo_prediction() {
    // DERIVED: |J1(0.72 sin(4 pi / 23))| from scipy.
    let tau = 2.0 * PI / 23.0;
    let p = kicked_echo_prediction(6.0, 1.0, 0.01, 23, 1, 2.0 * tau).unwrap();
    assert!((p.amplitude - 0.183_797_011_332_438_6).abs() < 1e-12);
    assert_eq!(p.l, 2);
    assert!((p.t_center - 2.0 * tau).abs() < 1e-15);
    let back = kicked_echo_prediction(6.0, 1.0, 0.01, 23, -1, 1.0).unwrap();
    assert!((back.t_center - (PI - 2.0 * tau)).abs() < 1e-15);
}

#[test]
fn superposition_sum_tracks_impulsive_fock_propagation() {
    let fock = FockSpaceSpec::new(128).unwrap();
    let ops = build_operators(1.0, &fock).unwrap();
    let s = coherent_state_vector(c(6.0), &fock).unwrap();
    let tau = 2.0 * PI / 23.0;
    let pulse = KickPulse::gaussian(0.01, tau, 1e-3).unwrap();
    let grid = TimeGrid::new(0.0, PI, 0.01).unwrap();
    let trace = QuantumPropagator::new(&ops, Some(pulse), KickMode::Impulsive, 1e-5).run(&s, &grid).unwrap();
    let at = |t: f64| {
        let k = (t / 0.01).round() as usize;
        let sum = kicked_mean_a_superposition(c(6.0), 1.0, 0.01, 23, trace.times[k]).unwrap();
        (trace.mean_a[k] - sum).norm()
    };
    // The sum neglects the squeezing of each component, which matters most late in the evolution.
    assert!(at(2.0 * tau) < 1e-3);
    assert!(at(PI - 2.0 * tau) < 0.05);
}

#[test]
fn gauss_sum_table_for_nu_23() {
    // PAPER: (r, l) before the sign flip r* = -r.
    for (r, l) in [(-3, 10), (-2, 6), (-1, 2), (0, 21), (1, 17), (2, 13), (3, 9)] {
        assert_eq!(selection_rule(23, -r).unwrap(), l);
    }
    let mean: Complex64 = (0..23).map(|k| gauss_sum_direct(23, k)).sum();
    // Σ_k C_k = 1 because only l = 0 survives the sum over k.
    assert!((mean - c(1.0)).norm() < 1e-12);
}

#[test]
fn half_revival_of_a_coherent_state() {
    let fock = FockSpaceSpec::new(128).unwrap();
    let s = coherent_state_vector(c(6.0), &fock).unwrap();
    let q = expectation_q(&evolve_free(&s, 1.0, PI));
    assert!((q + 6.0 * SQRT_2).abs() < 1e-10);
}

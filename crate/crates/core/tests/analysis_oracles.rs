use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use kerr_echo::analysis::{
    classical_carrier, compare_to_prediction, detect_echoes, envelope, sweep_cat_echo_amplitudes,
    DetectionOptions, EchoEvent, EchoKind, PredictedFeature, SweepBase,
};
use kerr_echo::classical::{exact_gaussian_mean_q_free, exact_gaussian_mean_z_free};
use kerr_echo::output::{write_json, EchoReport};
use kerr_echo::quantum::KickMode;
use kerr_echo::series::TimeSeries;
use kerr_echo::Error;

const Q0: f64 = 6.0 * SQRT_2;

fn free_trace(t_end: f64, dt: f64) -> TimeSeries {
    let n = (t_end / dt).round() as usize;
    let times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    let values = times
        .iter()
        .map(|&t| exact_gaussian_mean_q_free(t, Q0, 0.0, 1.0, FRAC_1_SQRT_2))
        .collect();
    TimeSeries::new(times, values).unwrap()
}

#[test]
fn envelope_of_free_decay_follows_the_complex_mean() {
    let series = free_trace(0.4, 0.002);
    let env = envelope(&series, classical_carrier(1.0, Q0)).unwrap();
    for (k, &t) in env.times.iter().enumerate() {
        let want = exact_gaussian_mean_z_free(t, Q0, 0.0, 1.0, FRAC_1_SQRT_2).norm();
        if want > 0.05 * Q0 && t > 0.02 {
            assert!((env.values[k] / want - 1.0).abs() < 0.02, "t = {t}: {} vs {want}", env.values[k]);
        }
    }
}

#[test]
fn unkicked_trace_has_no_echoes() {
    let series = free_trace(3.5, 0.002);
    let env = envelope(&series, classical_carrier(1.0, Q0)).unwrap();
    let features: Vec<PredictedFeature> = (1..=3)
        .map(|n| PredictedFeature::new(EchoKind::ClassicalEcho, n, n as f64, 0.5))
        .collect();
    let events = detect_echoes(&env, &features, &DetectionOptions::default()).unwrap();
    assert!(events.is_empty(), "{events:?}");
}

#[test]
fn coarse_output_grid_is_rejected() {
    let series = free_trace(1.0, 0.05);
    match envelope(&series, classical_carrier(1.0, Q0)) {
        Err(Error::Undersampled { required, actual }) => {
            assert!((required - 2.0 * std::f64::consts::PI / (8.0 * 73.0)).abs() < 1e-12);
            assert_eq!(actual, 0.05);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn comparison_ratio_and_report_serialisation() {
    let event = EchoEvent {
        kind: EchoKind::ClassicalEcho,
        order: 1,
        t_predicted: 1.0,
        t_detected: 1.004,
        amplitude: 0.34,
        baseline: 0.0,
        prediction: Some(0.3371704779561629),
    };
    let report = compare_to_prediction(std::slice::from_ref(&event));
    let dev = report.entries[0].deviation.unwrap();
    assert!((dev - (0.34 / 0.3371704779561629 - 1.0)).abs() < 1e-15);

    let mut buf = Vec::new();
    write_json(&mut buf, &EchoReport::new(vec![event])).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.contains("\"kind\": \"classical-echo\""));
    let back: EchoReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back.events[0].t_detected, 1.004);
}

#[test]
fn empty_sweep_has_empty_matrices() {
    let grid = sweep_cat_echo_amplitudes(&SweepBase::default(), &[], &[], KickMode::Impulsive).unwrap();
    assert!(grid.is_empty());
    assert!(grid.classical.is_empty() && grid.quantum.is_empty());
}

#[test]
fn sweep_errors_name_the_cell() {
    let err = sweep_cat_echo_amplitudes(&SweepBase::default(), &[0.0], &[1.5], KickMode::Impulsive).unwrap_err();
    assert!(matches!(err, Error::SweepCell { n_plus, .. } if n_plus == 1.5), "{err}");
}

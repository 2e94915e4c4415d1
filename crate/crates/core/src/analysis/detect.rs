//! Windowed echo and revival detection on an envelope trace.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EchoKind {
    ClassicalEcho,
    QuantumEcho,
    HalfRevival,
    QuarterRevival,
}

impl EchoKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EchoKind::ClassicalEcho => "classical-echo",
            EchoKind::QuantumEcho => "quantum-echo",
            EchoKind::HalfRevival => "half-revival",
            EchoKind::QuarterRevival => "quarter-revival",
        }
    }

    /// Default window half-width: `τ/2` for echoes, `τ/4` for revivals.
    pub fn default_half_width(self, tau: f64) -> f64 {
        match self {
            EchoKind::ClassicalEcho | EchoKind::QuantumEcho => 0.5 * tau,
            EchoKind::HalfRevival | EchoKind::QuarterRevival => 0.25 * tau,
        }
    }
}

/// A feature expected at `t` and searched for in `[t - half_width, t + half_width]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedFeature {
    pub kind: EchoKind,
    pub order: i64,
    pub t: f64,
    pub half_width: f64,
    /// Model amplitude in the units of the envelope, if one exists.
    pub prediction: Option<f64>,
}

impl PredictedFeature {
    pub fn new(kind: EchoKind, order: i64, t: f64, tau: f64) -> Self {
        Self {
            kind,
            order,
            t,
            half_width: kind.default_half_width(tau),
            prediction: None,
        }
    }

    pub fn with_prediction(mut self, amplitude: f64) -> Self {
        self.prediction = Some(amplitude);
        self
    }

    pub fn with_half_width(mut self, half_width: f64) -> Self {
        self.half_width = half_width;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EchoEvent {
    pub kind: EchoKind,
    pub order: i64,
    pub t_predicted: f64,
    pub t_detected: f64,
    pub amplitude: f64,
    pub baseline: f64,
    pub prediction: Option<f64>,
}

/// Raw window statistics, without the detection threshold applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowMeasurement {
    pub t_detected: f64,
    pub peak: f64,
    /// Median envelope over the flanking buffers.
    pub baseline: f64,
    /// Median absolute deviation of the envelope over the buffers.
    pub mad: f64,
    /// `max(peak - baseline, 0)`.
    pub amplitude: f64,
}

/// Threshold settings. An event is emitted when its amplitude exceeds
/// `noise_multiplier * max(mad, floor_fraction * reference)`, where `reference`
/// is the largest envelope value of the series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionOptions {
    pub noise_multiplier: f64,
    pub floor_fraction: f64,
}

impl Default for DetectionOptions {
    fn default() -> Self {
        Self {
            noise_multiplier: 5.0,
            floor_fraction: 0.01,
        }
    }
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Measure the envelope in the window around `feature`. The buffers are
/// `[t - 2w, t - w)` and `(t + w, t + 2w]`, clipped to the series.
pub fn measure_window(env: &TimeSeries, feature: &PredictedFeature) -> Result<WindowMeasurement> {
    let (t, w) = (feature.t, feature.half_width);
    if !(w > 0.0) {
        return Err(Error::invalid("half_width", format!("must be positive, got {w}")));
    }
    let mut best: Option<(f64, f64)> = None;
    let mut buffer = Vec::new();
    for (&ti, &v) in env.times.iter().zip(&env.values) {
        let d = ti - t;
        if d.abs() <= w {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((ti, v));
            }
        } else if d.abs() <= 2.0 * w {
            buffer.push(v);
        }
    }
    let (t_detected, peak) = best.ok_or_else(|| {
        Error::Domain(format!(
            "{} window around t = {t} contains no samples",
            feature.kind.as_str()
        ))
    })?;
    if buffer.is_empty() {
        return Err(Error::Domain(format!(
            "{} window around t = {t} has no buffer samples",
            feature.kind.as_str()
        )));
    }
    let baseline = median(&mut buffer.clone());
    let mut dev: Vec<f64> = buffer.iter().map(|v| (v - baseline).abs()).collect();
    let mad = median(&mut dev);
    Ok(WindowMeasurement {
        t_detected,
        peak,
        baseline,
        mad,
        amplitude: (peak - baseline).max(0.0),
    })
}

fn check_disjoint(features: &[PredictedFeature]) -> Result<()> {
    let mut spans: Vec<(f64, f64, &PredictedFeature)> = features
        .iter()
        .map(|f| (f.t - f.half_width, f.t + f.half_width, f))
        .collect();
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    for pair in spans.windows(2) {
        if pair[1].0 < pair[0].1 {
            return Err(Error::OverlappingWindows(format!(
                "{} order {} at t = {} and {} order {} at t = {}",
                pair[0].2.kind.as_str(),
                pair[0].2.order,
                pair[0].2.t,
                pair[1].2.kind.as_str(),
                pair[1].2.order,
                pair[1].2.t
            )));
        }
    }
    Ok(())
}

/// Detect the predicted features in an envelope trace.
pub fn detect_echoes(
    env: &TimeSeries,
    features: &[PredictedFeature],
    opts: &DetectionOptions,
) -> Result<Vec<EchoEvent>> {
    check_disjoint(features)?;
    let reference = env.values.iter().cloned().fold(0.0, f64::max);
    let mut events = Vec::new();
    for f in features {
        let m = measure_window(env, f)?;
        let floor = m.mad.max(opts.floor_fraction * reference);
        if m.amplitude > opts.noise_multiplier * floor {
            events.push(EchoEvent {
                kind: f.kind,
                order: f.order,
                t_predicted: f.t,
                t_detected: m.t_detected,
                amplitude: m.amplitude,
                baseline: m.baseline,
                prediction: f.prediction,
            });
        }
    }
    Ok(events)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub kind: EchoKind,
    pub order: i64,
    pub measured: f64,
    pub predicted: f64,
    /// `|measured - predicted| / |predicted|`; `None` when only the prediction is zero.
    pub deviation: Option<f64>,
    /// Both values are exactly zero.
    pub exact_match: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub entries: Vec<Comparison>,
    pub max_deviation: f64,
    pub mean_deviation: f64,
}

/// Relative deviation of each event's amplitude from its model amplitude.
/// Events without a prediction are skipped.
pub fn compare_to_prediction(events: &[EchoEvent]) -> ComparisonReport {
    let entries: Vec<Comparison> = events
        .iter()
        .filter_map(|e| {
            let p = e.prediction?;
            let exact_match = p == 0.0 && e.amplitude == 0.0;
            let deviation = if exact_match {
                Some(0.0)
            } else if p == 0.0 {
                None
            } else {
                Some((e.amplitude - p).abs() / p.abs())
            };
            Some(Comparison {
                kind: e.kind,
                order: e.order,
                measured: e.amplitude,
                predicted: p,
                deviation,
                exact_match,
            })
        })
        .collect();
    let devs: Vec<f64> = entries.iter().filter_map(|c| c.deviation).collect();
    let max_deviation = devs.iter().cloned().fold(0.0, f64::max);
    let mean_deviation = if devs.is_empty() {
        0.0
    } else {
        devs.iter().sum::<f64>() / devs.len() as f64
    };
    ComparisonReport {
        entries,
        max_deviation,
        mean_deviation,
    }
}

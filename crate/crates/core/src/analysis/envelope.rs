//! Envelope extraction from an oscillating trace.
//!
//! The estimator locates the local maxima of `|x|`, refines each one with a
//! parabola through the neighbouring samples, and corrects the peak height for
//! the local decay or growth rate: for `x = E(t) cos(Ωt)` the maximum of `|x|`
//! sits where `tan(Ωt) = E'/(EΩ)`, which lowers it by `cos(atan(E'/(EΩ)))`.
//! Between the corrected peaks `ln E` is interpolated by blending the two
//! quadratics through the neighbouring peak triples, which is exact for
//! Gaussian envelopes.

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Minimum number of samples per carrier period.
pub const SAMPLES_PER_PERIOD: f64 = 8.0;

/// Largest admissible `dt_out` for a carrier of angular frequency `carrier`.
pub fn max_dt_for_carrier(carrier: f64) -> f64 {
    2.0 * std::f64::consts::PI / (carrier.abs() * SAMPLES_PER_PERIOD)
}

/// Carrier frequency `1 + χ q0²` of a trace centred at radius `q0`.
pub fn classical_carrier(chi: f64, q0: f64) -> f64 {
    1.0 + chi * q0 * q0
}

#[derive(Debug, Clone, Copy)]
struct Peak {
    t: f64,
    value: f64,
}

fn find_peaks(times: &[f64], x: &[f64]) -> Vec<Peak> {
    let n = x.len();
    let a: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        if !(a[i] > 0.0 && a[i] >= a[i - 1] && a[i] > a[i + 1]) {
            continue;
        }
        let (y0, y1, y2) = (x[i - 1], x[i], x[i + 1]);
        let den = y0 - 2.0 * y1 + y2;
        let (mut t, mut v) = (times[i], a[i]);
        if den != 0.0 {
            let d = (0.5 * (y0 - y2) / den).clamp(-0.5, 0.5);
            let h = if d >= 0.0 { times[i + 1] - times[i] } else { times[i] - times[i - 1] };
            t += d * h;
            v = (y1 - 0.25 * (y0 - y2) * d).abs().max(a[i]);
        }
        peaks.push(Peak { t, value: v });
    }
    peaks
}

fn correct_for_slope(peaks: &mut [Peak]) {
    let raw: Vec<Peak> = peaks.to_vec();
    let m = raw.len();
    if m < 2 {
        return;
    }
    for k in 0..m {
        let lo = k.saturating_sub(1);
        let hi = (k + 1).min(m - 1);
        let span = raw[hi].t - raw[lo].t;
        if !(span > 0.0) || raw[lo].value <= 0.0 || raw[hi].value <= 0.0 {
            continue;
        }
        let slope = (raw[hi].value.ln() - raw[lo].value.ln()) / span;
        let omega = std::f64::consts::PI * (hi - lo) as f64 / span;
        peaks[k].value = raw[k].value * (1.0 + (slope / omega).powi(2)).sqrt();
    }
}

/// Quadratic through three points `(t_i, y_i)`, evaluated at `t`.
fn lagrange3(t: f64, p: [(f64, f64); 3]) -> f64 {
    let [(t0, y0), (t1, y1), (t2, y2)] = p;
    y0 * (t - t1) * (t - t2) / ((t0 - t1) * (t0 - t2))
        + y1 * (t - t0) * (t - t2) / ((t1 - t0) * (t1 - t2))
        + y2 * (t - t0) * (t - t1) / ((t2 - t0) * (t2 - t1))
}

fn interpolate_peaks(peaks: &[Peak], t: f64) -> f64 {
    let m = peaks.len();
    // Beyond the outer peaks, extrapolate the outermost log-quadratic.
    if t <= peaks[0].t || t >= peaks[m - 1].t {
        let (edge, start) = if t <= peaks[0].t { (peaks[0], 0) } else { (peaks[m - 1], m.saturating_sub(3)) };
        if m < 3 || peaks[start..start + 3].iter().any(|p| p.value <= 0.0) {
            return edge.value;
        }
        let tri = &peaks[start..start + 3];
        let v = lagrange3(t, [
            (tri[0].t, tri[0].value.ln()),
            (tri[1].t, tri[1].value.ln()),
            (tri[2].t, tri[2].value.ln()),
        ])
        .exp();
        return if v.is_finite() && v <= 1.5 * edge.value { v } else { edge.value };
    }
    let k = peaks.partition_point(|p| p.t <= t) - 1;
    let (a, b) = (peaks[k], peaks[k + 1]);
    let w = (t - a.t) / (b.t - a.t);
    let linear = (1.0 - w) * a.value + w * b.value;
    let log_quad = |start: usize| -> Option<f64> {
        let tri = &peaks[start..start + 3];
        if tri.iter().any(|p| p.value <= 0.0) {
            return None;
        }
        let pts = [
            (tri[0].t, tri[0].value.ln()),
            (tri[1].t, tri[1].value.ln()),
            (tri[2].t, tri[2].value.ln()),
        ];
        Some(lagrange3(t, pts).exp())
    };
    let left = if k >= 1 { log_quad(k - 1) } else { None };
    let right = if k + 2 < m { log_quad(k) } else { None };
    let v = match (left, right) {
        (Some(l), Some(r)) => (1.0 - w) * l + w * r,
        (Some(l), None) => l,
        (None, Some(r)) => r,
        (None, None) => linear,
    };
    // Guard against overshoot where the envelope is far from log-quadratic.
    if v.is_finite() && v <= 1.5 * a.value.max(b.value) {
        v
    } else {
        linear
    }
}

/// Magnitude envelope of an oscillating trace whose carrier has angular
/// frequency `carrier`. Fails with [`Error::Undersampled`] when the series has
/// fewer than eight samples per carrier period.
pub fn envelope(series: &TimeSeries, carrier: f64) -> Result<TimeSeries> {
    if series.len() < 3 {
        return Err(Error::invalid("series", "envelope needs at least 3 samples"));
    }
    if !(carrier.is_finite() && carrier != 0.0) {
        return Err(Error::invalid("carrier", format!("must be finite and non-zero, got {carrier}")));
    }
    let required = max_dt_for_carrier(carrier);
    let actual = series.dt();
    if actual > required * (1.0 + 1e-9) {
        return Err(Error::Undersampled { required, actual });
    }
    let mut peaks = find_peaks(&series.times, &series.values);
    if peaks.is_empty() {
        return TimeSeries::new(series.times.clone(), vec![0.0; series.len()]);
    }
    correct_for_slope(&mut peaks);
    let values = series
        .times
        .iter()
        .zip(&series.values)
        .map(|(&t, &x)| interpolate_peaks(&peaks, t).max(x.abs()))
        .collect();
    TimeSeries::new(series.times.clone(), values)
}

/// Envelope `|z(t)|` of a complex trace such as `sqrt(2) ⟨a(t)⟩`.
pub fn quadrature_envelope(times: &[f64], z: &[num_complex::Complex64], scale: f64) -> Result<TimeSeries> {
    TimeSeries::new(times.to_vec(), z.iter().map(|v| scale * v.norm()).collect())
}

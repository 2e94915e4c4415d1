//! Plain-text output formats: CSV traces, phase-space histograms, sweep
//! matrices and JSON reports. Numbers are written with Rust's shortest
//! round-trip formatting, so output is locale independent and lossless.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::analysis::{ComparisonReport, EchoEvent, SweepGrid};
use crate::classical::PhaseSpaceHistogram;
use crate::error::Result;
use crate::quantum::StateVector;
use crate::series::TimeSeries;

/// `t,mean_q,stderr` (the last column is empty when no errors are attached).
pub fn write_classical_trace<W: Write>(w: &mut W, series: &TimeSeries) -> Result<()> {
    writeln!(w, "t,mean_q,stderr")?;
    for (k, (t, q)) in series.times.iter().zip(&series.values).enumerate() {
        match &series.stderr {
            Some(se) => writeln!(w, "{t},{q},{}", se[k])?,
            None => writeln!(w, "{t},{q},")?,
        }
    }
    Ok(())
}

/// `t,mean_q,re_a,im_a` with `mean_q = sqrt(2) Re⟨a⟩`.
pub fn write_quantum_trace<W: Write>(w: &mut W, times: &[f64], mean_a: &[Complex64]) -> Result<()> {
    writeln!(w, "t,mean_q,re_a,im_a")?;
    for (t, a) in times.iter().zip(mean_a) {
        writeln!(w, "{t},{},{},{}", std::f64::consts::SQRT_2 * a.re, a.re, a.im)?;
    }
    Ok(())
}

/// Two-column series with the given header names.
pub fn write_series<W: Write>(w: &mut W, series: &TimeSeries, names: (&str, &str)) -> Result<()> {
    writeln!(w, "{},{}", names.0, names.1)?;
    for (t, v) in series.times.iter().zip(&series.values) {
        writeln!(w, "{t},{v}")?;
    }
    Ok(())
}

/// Fock amplitudes as `n,re,im`.
pub fn write_state<W: Write>(w: &mut W, state: &StateVector) -> Result<()> {
    writeln!(w, "n,re,im")?;
    for (n, c) in state.amplitudes.iter().enumerate() {
        writeln!(w, "{n},{},{}", c.re, c.im)?;
    }
    Ok(())
}

/// A one-line `#` header with the binning, then `q,p,count,density` per cell
/// (cell centres, density per unit phase-space area).
pub fn write_histogram<W: Write>(w: &mut W, h: &PhaseSpaceHistogram) -> Result<()> {
    let s = &h.spec;
    writeln!(
        w,
        "# time={} q_min={} q_max={} q_bins={} p_min={} p_max={} p_bins={} outside={}",
        h.time, s.q_min, s.q_max, s.q_bins, s.p_min, s.p_max, s.p_bins, h.outside
    )?;
    writeln!(w, "q,p,count,density")?;
    for i in 0..s.q_bins {
        for j in 0..s.p_bins {
            let c = h.cell_centre(i, j);
            writeln!(w, "{},{},{},{}", c.q, c.p, h.count(i, j), h.density(i, j))?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMatrix {
    Classical,
    Quantum,
}

/// Matrix with a header row of `θ` values; each following row starts with `𝒩₊`.
pub fn write_sweep_matrix<W: Write>(w: &mut W, grid: &SweepGrid, which: SweepMatrix) -> Result<()> {
    let m = match which {
        SweepMatrix::Classical => &grid.classical,
        SweepMatrix::Quantum => &grid.quantum,
    };
    write!(w, "n_plus\\theta")?;
    for th in &grid.theta {
        write!(w, ",{th}")?;
    }
    writeln!(w)?;
    for (np, row) in grid.n_plus.iter().zip(m) {
        write!(w, "{np}")?;
        for v in row {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Detected events and their comparison with model amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EchoReport {
    pub events: Vec<EchoEvent>,
    pub comparison: ComparisonReport,
}

impl EchoReport {
    pub fn new(events: Vec<EchoEvent>) -> Self {
        let comparison = crate::analysis::compare_to_prediction(&events);
        Self { events, comparison }
    }
}

/// Pretty-printed JSON followed by a newline.
pub fn write_json<W: Write, T: Serialize + ?Sized>(w: &mut W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(std::io::Error::other)?;
    writeln!(w)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_formats() {
        let s = TimeSeries::with_stderr(vec![0.0, 0.5], vec![1.0, -0.25], Some(vec![0.1, 0.2])).unwrap();
        let mut out = Vec::new();
        write_classical_trace(&mut out, &s).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "t,mean_q,stderr\n0,1,0.1\n0.5,-0.25,0.2\n");
        let mut out = Vec::new();
        write_quantum_trace(&mut out, &[1.0], &[Complex64::new(2.0, -1.0)]).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("t,mean_q,re_a,im_a\n1,2.8284271247461903,2,-1\n"));
    }

    #[test]
    fn sweep_matrix_layout() {
        let g = SweepGrid {
            theta: vec![0.0, 1.5],
            n_plus: vec![0.5],
            classical: vec![vec![0.25, 0.75]],
            quantum: vec![vec![0.0, 1.0]],
        };
        let mut out = Vec::new();
        write_sweep_matrix(&mut out, &g, SweepMatrix::Classical).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "n_plus\\theta,0,1.5\n0.5,0.25,0.75\n");
    }

    #[test]
    fn report_round_trips() {
        let ev = EchoEvent {
            kind: crate::analysis::EchoKind::ClassicalEcho,
            order: 1,
            t_predicted: 1.0,
            t_detected: 1.002,
            amplitude: 2.9,
            baseline: 0.01,
            prediction: Some(2.86),
        };
        let r = EchoReport::new(vec![ev]);
        let mut out = Vec::new();
        write_json(&mut out, &r).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("\"kind\": \"classical-echo\""));
        let back: EchoReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}

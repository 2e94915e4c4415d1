use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

use super::dynamics::{ClassicalPropagator, PhaseSpacePoint};
use crate::error::{Error, Result};
use crate::model::{CoherentSpec, EnsembleSpec, KickPulse, TimeGrid};
use crate::series::{CompensatedSum, TimeSeries};

/// Standard deviation per axis of the Gaussian equivalent of a coherent state.
pub const COHERENT_SIGMA: f64 = FRAC_1_SQRT_2;

/// Trajectories per reduction block. Fixed so the summation order, and therefore
/// every bit of the result, is independent of the thread count.
pub const CHUNK: usize = 1024;

/// Random stream of trajectory `index`: ChaCha8 keyed by the master seed, one
/// stream per trajectory.
pub fn trajectory_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Initial condition of trajectory `index`.
pub fn sample_point(spec: &CoherentSpec, seed: u64, index: usize) -> PhaseSpacePoint {
    let (q0, p0) = spec.phase_space_centre();
    let mut rng = trajectory_rng(seed, index);
    let dq: f64 = StandardNormal.sample(&mut rng);
    let dp: f64 = StandardNormal.sample(&mut rng);
    PhaseSpacePoint::new(q0 + COHERENT_SIGMA * dq, p0 + COHERENT_SIGMA * dp)
}

/// I.i.d. Gaussian samples centred on the coherent-state phase-space point.
pub fn sample_initial_ensemble(spec: &CoherentSpec, ens: &EnsembleSpec) -> Vec<PhaseSpacePoint> {
    (0..ens.n_samples)
        .into_par_iter()
        .map(|i| sample_point(spec, ens.seed, i))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub q_min: f64,
    pub q_max: f64,
    pub q_bins: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub p_bins: usize,
}

impl HistogramSpec {
    /// Square window of half-width `half` around the origin.
    pub fn centred(half: f64, bins: usize) -> Self {
        Self {
            q_min: -half,
            q_max: half,
            q_bins: bins,
            p_min: -half,
            p_max: half,
            p_bins: bins,
        }
    }

    pub fn q_edges(&self) -> Vec<f64> {
        edges(self.q_min, self.q_max, self.q_bins)
    }

    pub fn p_edges(&self) -> Vec<f64> {
        edges(self.p_min, self.p_max, self.p_bins)
    }

    pub fn cell_area(&self) -> f64 {
        (self.q_max - self.q_min) / self.q_bins as f64 * (self.p_max - self.p_min) / self.p_bins as f64
    }

    fn cell(&self, pt: &PhaseSpacePoint) -> Option<usize> {
        let fq = (pt.q - self.q_min) / (self.q_max - self.q_min);
        let fp = (pt.p - self.p_min) / (self.p_max - self.p_min);
        if !(0.0..1.0).contains(&fq) || !(0.0..1.0).contains(&fp) {
            return None;
        }
        let i = ((fq * self.q_bins as f64) as usize).min(self.q_bins - 1);
        let j = ((fp * self.p_bins as f64) as usize).min(self.p_bins - 1);
        Some(i * self.p_bins + j)
    }

    fn check(&self) -> Result<()> {
        if !(self.q_max > self.q_min && self.p_max > self.p_min) || self.q_bins == 0 || self.p_bins == 0 {
            return Err(Error::invalid("histogram", "need non-empty ranges and at least one bin"));
        }
        Ok(())
    }
}

fn edges(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

/// Phase-space occupation counts at one time. `counts[i * p_bins + j]` is
/// the cell with `q` bin `i` and `p` bin `j`; samples outside the window are
/// counted in `outside`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceHistogram {
    pub time: f64,
    pub spec: HistogramSpec,
    pub counts: Vec<u64>,
    pub outside: u64,
}

impl PhaseSpaceHistogram {
    fn empty(time: f64, spec: HistogramSpec) -> Self {
        Self {
            time,
            spec,
            counts: vec![0; spec.q_bins * spec.p_bins],
            outside: 0,
        }
    }

    fn record(&mut self, pt: &PhaseSpacePoint) {
        match self.spec.cell(pt) {
            Some(c) => self.counts[c] += 1,
            None => self.outside += 1,
        }
    }

    fn merge(&mut self, other: &Self) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.outside += other.outside;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.outside
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.spec.p_bins + j]
    }

    /// Probability density per unit phase-space area in cell `(i, j)`.
    pub fn density(&self, i: usize, j: usize) -> f64 {
        self.count(i, j) as f64 / (self.total() as f64 * self.spec.cell_area())
    }

    pub fn cell_centre(&self, i: usize, j: usize) -> PhaseSpacePoint {
        let s = &self.spec;
        PhaseSpacePoint::new(
            s.q_min + (i as f64 + 0.5) * (s.q_max - s.q_min) / s.q_bins as f64,
            s.p_min + (j as f64 + 0.5) * (s.p_max - s.p_min) / s.p_bins as f64,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnsembleOptions {
    /// Largest integrator step inside the pulse window.
    pub max_step: f64,
    pub snapshot_times: Vec<f64>,
    pub histogram: Option<HistogramSpec>,
}

impl EnsembleOptions {
    pub fn new(max_step: f64) -> Self {
        Self {
            max_step,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    /// `⟨q(t)⟩` with the standard error of the mean in `stderr`.
    pub mean_q: TimeSeries,
    pub mean_p: Vec<f64>,
    pub histograms: Vec<PhaseSpaceHistogram>,
    pub n_samples: usize,
}

struct ChunkStats {
    sum_q: Vec<CompensatedSum>,
    sum_q2: Vec<CompensatedSum>,
    sum_p: Vec<CompensatedSum>,
    histograms: Vec<PhaseSpaceHistogram>,
}

/// Propagate every sample and reduce the mean and standard error of `q`
/// (and the mean of `p`) at each grid time.
pub fn ensemble_mean_q(
    ensemble: &[PhaseSpacePoint],
    chi: f64,
    pulse: Option<&KickPulse>,
    grid: &TimeGrid,
    opts: &EnsembleOptions,
) -> Result<EnsembleResult> {
    if ensemble.is_empty() {
        return Err(Error::invalid("n_samples", "ensemble is empty"));
    }
    let grid_times = grid.times();
    let n_out = grid_times.len();
    let hist_spec = match (&opts.histogram, opts.snapshot_times.is_empty()) {
        (Some(h), _) => {
            h.check()?;
            Some(*h)
        }
        (None, true) => None,
        (None, false) => return Err(Error::invalid("histogram", "snapshot times need a histogram spec")),
    };
    for &s in &opts.snapshot_times {
        if s < grid.t_start {
            return Err(Error::invalid("snapshot_times", format!("{s} precedes the grid start")));
        }
    }
    // Merge output and snapshot times; each entry remembers where to deposit.
    #[derive(Clone, Copy)]
    enum Slot {
        Mean(usize),
        Snapshot(usize),
    }
    let mut schedule: Vec<(f64, Slot)> = grid_times.iter().enumerate().map(|(i, &t)| (t, Slot::Mean(i))).collect();
    schedule.extend(opts.snapshot_times.iter().enumerate().map(|(i, &t)| (t, Slot::Snapshot(i))));
    schedule.sort_by(|a, b| a.0.total_cmp(&b.0));
    let times: Vec<f64> = schedule.iter().map(|s| s.0).collect();

    let prop = ClassicalPropagator::new(chi, pulse.copied(), opts.max_step);
    let chunk_results: Vec<Result<ChunkStats>> = ensemble
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let mut st = ChunkStats {
                sum_q: vec![CompensatedSum::default(); n_out],
                sum_q2: vec![CompensatedSum::default(); n_out],
                sum_p: vec![CompensatedSum::default(); n_out],
                histograms: opts
                    .snapshot_times
                    .iter()
                    .map(|&t| PhaseSpaceHistogram::empty(t, hist_spec.expect("spec checked")))
                    .collect(),
            };
            for (k, start) in chunk.iter().enumerate() {
                prop.sample(*start, grid.t_start, &times, |i, pt| match schedule[i].1 {
                    Slot::Mean(m) => {
                        st.sum_q[m].add(pt.q);
                        st.sum_q2[m].add(pt.q * pt.q);
                        st.sum_p[m].add(pt.p);
                    }
                    Slot::Snapshot(s) => st.histograms[s].record(&pt),
                })
                .map_err(|e| Error::Trajectory {
                    index: c * CHUNK + k,
                    source: Box::new(e),
                })?;
            }
            Ok(st)
        })
        .collect();

    let mut sum_q = vec![CompensatedSum::default(); n_out];
    let mut sum_q2 = vec![CompensatedSum::default(); n_out];
    let mut sum_p = vec![CompensatedSum::default(); n_out];
    let mut histograms: Vec<PhaseSpaceHistogram> = opts
        .snapshot_times
        .iter()
        .filter_map(|&t| hist_spec.map(|h| PhaseSpaceHistogram::empty(t, h)))
        .collect();
    for r in chunk_results {
        let st = r?;
        for i in 0..n_out {
            sum_q[i].add(st.sum_q[i].value());
            sum_q2[i].add(st.sum_q2[i].value());
            sum_p[i].add(st.sum_p[i].value());
        }
        for (h, part) in histograms.iter_mut().zip(&st.histograms) {
            h.merge(part);
        }
    }
    let n = ensemble.len() as f64;
    let mut mean = Vec::with_capacity(n_out);
    let mut se = Vec::with_capacity(n_out);
    for i in 0..n_out {
        let m = sum_q[i].value() / n;
        let var = if ensemble.len() > 1 {
            ((sum_q2[i].value() - n * m * m) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        mean.push(m);
        se.push((var / n).sqrt());
    }
    let mean_p = sum_p.iter().map(|s| s.value() / n).collect();
    Ok(EnsembleResult {
        mean_q: TimeSeries::with_stderr(grid_times, mean, Some(se))?,
        mean_p,
        histograms,
        n_samples: ensemble.len(),
    })
}

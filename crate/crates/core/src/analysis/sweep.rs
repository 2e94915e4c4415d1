//! First-echo amplitudes of kicked cat states over a `(θ, 𝒩₊)` grid.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use super::detect::{measure_window, EchoKind, PredictedFeature};
use super::envelope::quadrature_envelope;
use crate::error::{Error, Result};
use crate::model::{CatSpec, FockSpaceSpec, KickPulse, TimeGrid};
use crate::quantum::{build_operators, cat_state_vector, KickMode, QuantumPropagator};

/// Fixed parameters shared by every sweep cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepBase {
    pub alpha0: f64,
    pub chi: f64,
    pub g0: f64,
    pub tau: f64,
    pub sigma_g: f64,
    pub n_max: usize,
    pub dt_out: f64,
    pub max_step: f64,
}

impl Default for SweepBase {
    fn default() -> Self {
        Self {
            alpha0: 6.0,
            chi: 1.0,
            g0: 0.01,
            tau: 0.27,
            sigma_g: 1e-3,
            n_max: 128,
            dt_out: 0.002,
            max_step: 1e-5,
        }
    }
}

impl SweepBase {
    /// Centre of the first classical echo, `2τ`.
    pub fn classical_echo_time(&self) -> f64 {
        2.0 * self.tau
    }

    /// Centre of the first quantum echo, `π/(2χ) - 2τ`.
    pub fn quantum_echo_time(&self) -> f64 {
        FRAC_PI_2 / self.chi - 2.0 * self.tau
    }

    fn features(&self) -> [PredictedFeature; 2] {
        [
            PredictedFeature::new(EchoKind::ClassicalEcho, 1, self.classical_echo_time(), self.tau),
            PredictedFeature::new(EchoKind::QuantumEcho, 1, self.quantum_echo_time(), self.tau),
        ]
    }

    fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(0.0, FRAC_PI_2 / self.chi, self.dt_out)
    }
}

/// `N` evenly spaced angles covering `[0, 2π]`, end points included.
pub fn default_theta_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| 2.0 * PI * k as f64 / (n - 1) as f64).collect(),
    }
}

/// `𝒩₊` values with `𝒩₊² = 0.1, 0.2, …, 0.9`.
pub fn default_n_plus_grid() -> Vec<f64> {
    (1..=9).map(|k| (k as f64 / 10.0).sqrt()).collect()
}

/// First-echo amplitudes indexed as `[n_plus][theta]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub theta: Vec<f64>,
    pub n_plus: Vec<f64>,
    pub classical: Vec<Vec<f64>>,
    pub quantum: Vec<Vec<f64>>,
}

impl SweepGrid {
    pub fn is_empty(&self) -> bool {
        self.theta.is_empty() || self.n_plus.is_empty()
    }
}

/// Run the kicked evolution of `𝒩₊|α0⟩ + 𝒩₋ e^{iθ}|-α0⟩`, `𝒩₋ = sqrt(1 - 𝒩₊²)`,
/// for every grid point and measure the first classical echo (`2τ`) and the
/// first quantum echo (`π/2 - 2τ`) on the quadrature envelope `sqrt(2)|⟨a⟩|`.
pub fn sweep_cat_echo_amplitudes(
    base: &SweepBase,
    theta: &[f64],
    n_plus: &[f64],
    engine: KickMode,
) -> Result<SweepGrid> {
    let fock = FockSpaceSpec::new(base.n_max)?;
    let ops = build_operators(base.chi, &fock)?;
    let pulse = KickPulse::gaussian(base.g0, base.tau, base.sigma_g)?;
    let grid = base.grid()?;
    let features = base.features();
    let cells: Vec<(usize, usize)> = (0..n_plus.len())
        .flat_map(|i| (0..theta.len()).map(move |j| (i, j)))
        .collect();
    let results: Vec<((usize, usize), (f64, f64))> = cells
        .par_iter()
        .map(|&(i, j)| {
            let (np, th) = (n_plus[i], theta[j]);
            let cell = || -> Result<(f64, f64)> {
                if !(0.0..=1.0).contains(&np) {
                    return Err(Error::invalid("n_plus", format!("must lie in [0, 1], got {np}")));
                }
                let cat = CatSpec::new(Complex64::new(base.alpha0, 0.0), np, (1.0 - np * np).sqrt(), th)?;
                let state = cat_state_vector(&cat, &fock)?;
                let trace = QuantumPropagator::new(&ops, Some(pulse), engine, base.max_step).run(&state, &grid)?;
                let env = quadrature_envelope(&trace.times, &trace.mean_a, SQRT_2)?;
                let c = measure_window(&env, &features[0])?;
                let q = measure_window(&env, &features[1])?;
                Ok((c.amplitude, q.amplitude))
            };
            cell()
                .map(|v| ((i, j), v))
                .map_err(|e| Error::SweepCell {
                    theta: th,
                    n_plus: np,
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;
    let mut classical = vec![vec![0.0; theta.len()]; n_plus.len()];
    let mut quantum = classical.clone();
    for ((i, j), (c, q)) in results {
        classical[i][j] = c;
        quantum[i][j] = q;
    }
    Ok(SweepGrid {
        theta: theta.to_vec(),
        n_plus: n_plus.to_vec(),
        classical,
        quantum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_axes() {
        let th = default_theta_grid(9);
        assert_eq!(th.len(), 9);
        assert!((th[4] - PI).abs() < 1e-15 && (th[8] - 2.0 * PI).abs() < 1e-15);
        let np = default_n_plus_grid();
        assert!((np[4] * np[4] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_and_bad_cells() {
        let base = SweepBase {
            alpha0: 2.0,
            n_max: 40,
            ..SweepBase::default()
        };
        let g = sweep_cat_echo_amplitudes(&base, &[], &default_n_plus_grid(), KickMode::Impulsive).unwrap();
        assert!(g.is_empty() && g.classical.len() == 9 && g.classical[0].is_empty());
        match sweep_cat_echo_amplitudes(&base, &[0.5], &[1.5], KickMode::Impulsive) {
            Err(Error::SweepCell { theta, n_plus, .. }) => assert_eq!((theta, n_plus), (0.5, 1.5)),
            other => panic!("{other:?}"),
        }
    }
}

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fock::{kerr_energy, KerrOperatorSet, StateVector};
use super::kick::KickUnitary;
use crate::error::{Error, Result};
use crate::model::{KickPulse, TimeGrid};
use crate::ode::{step_count, LawsonRk4};
use crate::series::TimeSeries;

/// Largest tolerated norm change across one pulse window.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// How the kick enters the propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum KickMode {
    /// Integrate the full Hamiltonian through the finite-width pulse.
    #[default]
    Pulsed,
    /// Apply `exp(i g0 X²/2)` instantaneously at `tau`.
    Impulsive,
}

/// Exact free evolution: amplitude `n` acquires the phase `e^{-i E_n t}`.
pub fn evolve_free(state: &StateVector, chi: f64, t: f64) -> StateVector {
    StateVector::from_amplitudes(
        state
            .amplitudes
            .iter()
            .enumerate()
            .map(|(n, c)| c * Complex64::from_polar(1.0, -kerr_energy(n, chi) * t))
            .collect(),
    )
}

/// Integrate `i dψ/dt = H(t) ψ` with the kick term from `t0` to `t1` using
/// Lawson RK4 with steps of at most `max_step`.
pub fn evolve_pulse_window(
    state: &StateVector,
    ops: &KerrOperatorSet,
    pulse: &KickPulse,
    t0: f64,
    t1: f64,
    max_step: f64,
) -> Result<StateVector> {
    if t1 <= t0 {
        return Ok(state.clone());
    }
    let n = step_count(t1 - t0, max_step);
    let h = (t1 - t0) / n as f64;
    let lambda: Vec<Complex64> = ops.energies.iter().map(|e| Complex64::new(0.0, -e)).collect();
    let mut stepper = LawsonRk4::new(&lambda, h);
    let mut y = state.amplitudes.clone();
    let norm0 = state.norm_sq();
    for k in 0..n {
        let t = t0 + k as f64 * h;
        stepper.step(t, &mut y, |s, psi, out| {
            ops.apply_x2(psi, out);
            let f = Complex64::new(0.0, 0.5 * pulse.value(s));
            for o in out.iter_mut() {
                *o *= f;
            }
        });
    }
    let out = StateVector::from_amplitudes(y);
    let drift = (out.norm_sq() - norm0).abs();
    if drift > NORM_TOLERANCE {
        return Err(Error::NormDrift { t: t1, drift });
    }
    Ok(out)
}

/// `⟨a⟩` of a state after free evolution for `dt`, without forming the state.
pub fn free_mean_a(state: &StateVector, chi: f64, dt: f64) -> Complex64 {
    let c = &state.amplitudes;
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 1..c.len() {
        let w = (n as f64).sqrt() * c[n - 1].conj() * c[n];
        acc += w * Complex64::from_polar(1.0, -(1.0 + 2.0 * chi * (n as f64 - 1.0)) * dt);
    }
    acc
}

/// Sampled `⟨a(t)⟩` together with the state at the last sample.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumTrace {
    pub times: Vec<f64>,
    pub mean_a: Vec<Complex64>,
    pub final_state: StateVector,
}

impl QuantumTrace {
    /// `⟨q(t)⟩ = sqrt(2) Re⟨a(t)⟩`.
    pub fn mean_q(&self) -> TimeSeries {
        TimeSeries::new(
            self.times.clone(),
            self.mean_a.iter().map(|a| std::f64::consts::SQRT_2 * a.re).collect(),
        )
        .expect("grid times are increasing")
    }

    /// Quadrature envelope `sqrt(2) |⟨a(t)⟩|`.
    pub fn quadrature_envelope(&self) -> TimeSeries {
        TimeSeries::new(
            self.times.clone(),
            self.mean_a.iter().map(|a| std::f64::consts::SQRT_2 * a.norm()).collect(),
        )
        .expect("grid times are increasing")
    }
}

/// Closed-system propagation of a state on the Fock space.
#[derive(Debug, Clone)]
pub struct QuantumPropagator<'a> {
    pub ops: &'a KerrOperatorSet,
    pub pulse: Option<KickPulse>,
    pub mode: KickMode,
    pub max_step: f64,
}

impl<'a> QuantumPropagator<'a> {
    pub fn new(ops: &'a KerrOperatorSet, pulse: Option<KickPulse>, mode: KickMode, max_step: f64) -> Self {
        Self {
            ops,
            pulse,
            mode,
            max_step,
        }
    }

    /// Propagate `initial` (given at `grid.t_start`) and record `⟨a⟩` at every grid time.
    pub fn run(&self, initial: &StateVector, grid: &TimeGrid) -> Result<QuantumTrace> {
        let times = grid.times();
        let chi = self.ops.chi;
        let mut anchor = initial.clone();
        let mut t_anchor = grid.t_start;
        let mut mean_a = Vec::with_capacity(times.len());
        // (start, end) of the interval still to be crossed by the kick.
        let mut pending = self.pulse.filter(|p| p.g0 != 0.0).map(|p| match self.mode {
            KickMode::Pulsed => p.window(),
            KickMode::Impulsive => (p.tau, p.tau),
        });
        if let Some((w0, w1)) = pending {
            if grid.t_start > w1 || (grid.t_start == w1 && w1 > w0) {
                pending = None;
            } else if grid.t_start > w0 {
                return Err(Error::Unsupported(
                    "propagation must start before the pulse window".into(),
                ));
            }
        }
        let kick = match (self.mode, &self.pulse) {
            (KickMode::Impulsive, Some(p)) if pending.is_some() => Some(KickUnitary::new(self.ops, p.g0)),
            _ => None,
        };
        // Inside-window state and its time when a sample falls within the pulse.
        let mut inside: Option<(StateVector, f64)> = None;
        for &t in &times {
            if let Some((w0, w1)) = pending {
                let pulse = self.pulse.expect("pending kick has a pulse");
                match self.mode {
                    KickMode::Impulsive => {
                        if t > w0 {
                            let before = evolve_free(&anchor, chi, w0 - t_anchor);
                            anchor = kick.as_ref().expect("kick unitary").apply(&before);
                            t_anchor = w0;
                            pending = None;
                        }
                    }
                    KickMode::Pulsed => {
                        if t > w0 {
                            let (cur, tc) = inside
                                .take()
                                .unwrap_or_else(|| (evolve_free(&anchor, chi, w0 - t_anchor), w0));
                            let end = t.min(w1);
                            let next = evolve_pulse_window(&cur, self.ops, &pulse, tc, end, self.max_step)?;
                            if end >= w1 {
                                anchor = next;
                                t_anchor = w1;
                                pending = None;
                            } else {
                                mean_a.push(super::fock::expectation_a(&next));
                                inside = Some((next, end));
                                continue;
                            }
                        }
                    }
                }
            }
            mean_a.push(free_mean_a(&anchor, chi, t - t_anchor));
        }
        let t_last = *times.last().expect("non-empty grid");
        let final_state = match inside {
            Some((s, _)) => s,
            None => evolve_free(&anchor, chi, t_last - t_anchor),
        };
        Ok(QuantumTrace {
            times,
            mean_a,
            final_state,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FockSpaceSpec;
    use crate::quantum::fock::{build_operators, expectation_a};
    use crate::quantum::states::coherent_state_vector;
    use std::f64::consts::PI;

    #[test]
    fn free_evolution_identity_and_revival() {
        let fock = FockSpaceSpec::new(128).unwrap();
        let s = coherent_state_vector(Complex64::new(6.0, 0.0), &fock).unwrap();
        assert_eq!(evolve_free(&s, 1.0, 0.0), s);
        let r = evolve_free(&s, 1.0, 2.0 * PI);
        assert!((r.fidelity(&s) - 1.0).abs() < 1e-12);
        let h = evolve_free(&s, 1.0, PI);
        let q = std::f64::consts::SQRT_2 * expectation_a(&h).re;
        assert!((q + 2f64.sqrt() * 6.0).abs() < 1e-8);
    }

    #[test]
    fn fast_mean_matches_state_contraction() {
        let fock = FockSpaceSpec::new(64).unwrap();
        let s = coherent_state_vector(Complex64::new(2.0, 1.0), &fock).unwrap();
        for &t in &[0.1, 0.77, 3.0] {
            let direct = expectation_a(&evolve_free(&s, 0.7, t));
            assert!((free_mean_a(&s, 0.7, t) - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_kick_window_equals_free() {
        let fock = FockSpaceSpec::new(64).unwrap();
        let ops = build_operators(1.0, &fock).unwrap();
        let s = coherent_state_vector(Complex64::new(3.0, 0.0), &fock).unwrap();
        let pulse = KickPulse::gaussian(0.0, 0.5, 1e-3).unwrap();
        let (w0, w1) = pulse.window();
        let a = evolve_pulse_window(&s, &ops, &pulse, w0, w1, 1e-5).unwrap();
        let b = evolve_free(&s, 1.0, w1 - w0);
        assert!(1.0 - a.fidelity(&b) < 1e-10);
    }

    #[test]
    fn trace_samples_inside_window() {
        let fock = FockSpaceSpec::new(64).unwrap();
        let ops = build_operators(1.0, &fock).unwrap();
        let s = coherent_state_vector(Complex64::new(3.0, 0.0), &fock).unwrap();
        let pulse = KickPulse::gaussian(0.02, 0.5, 1e-3).unwrap();
        let fine = TimeGrid::new(0.0, 0.6, 0.002).unwrap();
        let coarse = TimeGrid::new(0.0, 0.6, 0.1).unwrap();
        let prop = QuantumPropagator::new(&ops, Some(pulse), KickMode::Pulsed, 1e-5);
        let a = prop.run(&s, &fine).unwrap();
        let b = prop.run(&s, &coarse).unwrap();
        assert!((a.mean_a.last().unwrap() - b.mean_a.last().unwrap()).norm() < 1e-9);
        assert!(1.0 - a.final_state.fidelity(&b.final_state) < 1e-12);
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{KickPulse, TimeGrid};
use crate::ode::{dopri5, Dopri5Options};

/// Dimensionless phase-space coordinates `(q, p) = (r cos φ, -r sin φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpacePoint {
    pub q: f64,
    pub p: f64,
}

impl PhaseSpacePoint {
    pub fn new(q: f64, p: f64) -> Self {
        Self { q, p }
    }

    pub fn r_sq(&self) -> f64 {
        self.q * self.q + self.p * self.p
    }

    pub fn r(&self) -> f64 {
        self.r_sq().sqrt()
    }

    /// Polar angle, increasing from the `+q` axis toward `-p`.
    pub fn phi(&self) -> f64 {
        (-self.p).atan2(self.q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<PhaseSpacePoint>,
}

/// Angular frequency `Ω = 1 + χ r²` of a free orbit.
pub fn orbit_frequency(point: &PhaseSpacePoint, chi: f64) -> f64 {
    1.0 + chi * point.r_sq()
}

/// Exact free flow: clockwise rotation by `Ω t`.
pub fn exact_free_trajectory(start: PhaseSpacePoint, chi: f64, t: f64) -> PhaseSpacePoint {
    let (s, c) = (orbit_frequency(&start, chi) * t).sin_cos();
    PhaseSpacePoint {
        q: start.q * c + start.p * s,
        p: start.p * c - start.q * s,
    }
}

/// Hamilton's equations of the kicked Kerr oscillator.
pub fn hamilton_rhs(
    point: &PhaseSpacePoint,
    t: f64,
    chi: f64,
    pulse: Option<&KickPulse>,
) -> (f64, f64) {
    let (q, p) = (point.q, point.p);
    let g = pulse.map_or(0.0, |k| k.value(t));
    let dq = chi * (q * q * p + p * p * p) + p;
    let dp = -chi * (q * q * q + q * p * p) - q + 2.0 * g * q;
    (dq, dp)
}

/// Impulsive kick `p -> p + 2 g0 q`.
pub fn apply_impulsive_kick_classical(point: PhaseSpacePoint, g0: f64) -> PhaseSpacePoint {
    PhaseSpacePoint {
        q: point.q,
        p: point.p + 2.0 * g0 * point.q,
    }
}

/// Propagator for one trajectory: exact rotation outside the pulse window and
/// adaptive integration of Hamilton's equations inside it.
#[derive(Debug, Clone, Copy)]
pub struct ClassicalPropagator {
    pub chi: f64,
    pub pulse: Option<KickPulse>,
    pub ode: Dopri5Options,
}

impl ClassicalPropagator {
    /// A pulse of zero area leaves the Hamiltonian free, so it is dropped and
    /// the exact flow used throughout.
    pub fn new(chi: f64, pulse: Option<KickPulse>, max_step: f64) -> Self {
        Self {
            chi,
            pulse: pulse.filter(|p| p.g0 != 0.0),
            ode: Dopri5Options {
                h_max: max_step,
                ..Dopri5Options::default()
            },
        }
    }

    /// Advance a point from `t0` to `t1 >= t0`.
    pub fn advance(&self, point: PhaseSpacePoint, t0: f64, t1: f64) -> Result<PhaseSpacePoint> {
        if t1 < t0 {
            return Err(Error::Domain(format!("cannot propagate backwards from {t0} to {t1}")));
        }
        let mut out = point;
        self.sample(point, t0, &[t1], |_, p| out = p)?;
        Ok(out)
    }

    /// Visit the trajectory through `start` (at `t_start`) at each of the
    /// non-decreasing `times`.
    ///
    /// Free segments are evaluated from the last anchor with the exact rotation,
    /// so no error accumulates between samples.
    pub fn sample<V>(&self, start: PhaseSpacePoint, t_start: f64, times: &[f64], mut visit: V) -> Result<()>
    where
        V: FnMut(usize, PhaseSpacePoint),
    {
        let chi = self.chi;
        let window = self.pulse.map(|p| p.window());
        let mut anchor = start;
        let mut t_anchor = t_start;
        // Inside the window: current state and its time.
        let mut inside: Option<(PhaseSpacePoint, f64)> = None;
        let mut done = match window {
            None => true,
            Some((_, w1)) => t_start >= w1,
        };
        if let Some((w0, _)) = window {
            if !done && t_start > w0 {
                inside = Some((start, t_start));
            }
        }
        for (i, &t) in times.iter().enumerate() {
            if t < t_start {
                return Err(Error::Domain(format!("sample time {t} precedes start {t_start}")));
            }
            if !done {
                let (w0, w1) = window.expect("pending window");
                if inside.is_none() && t > w0 {
                    inside = Some((exact_free_trajectory(anchor, chi, w0 - t_anchor), w0));
                }
                if let Some((cur, tc)) = inside {
                    let end = t.min(w1);
                    let next = self.integrate_window(cur, tc, end)?;
                    if end >= w1 {
                        anchor = next;
                        t_anchor = w1;
                        inside = None;
                        done = true;
                    } else {
                        inside = Some((next, end));
                        visit(i, next);
                        continue;
                    }
                }
            }
            visit(i, exact_free_trajectory(anchor, chi, t - t_anchor));
        }
        Ok(())
    }

    fn integrate_window(&self, pt: PhaseSpacePoint, t0: f64, t1: f64) -> Result<PhaseSpacePoint> {
        let pulse = self.pulse.expect("window integration needs a pulse");
        let chi = self.chi;
        let y = dopri5(
            |s, y: &[f64; 2]| {
                let (dq, dp) = hamilton_rhs(&PhaseSpacePoint::new(y[0], y[1]), s, chi, Some(&pulse));
                [dq, dp]
            },
            t0,
            [pt.q, pt.p],
            t1,
            &self.ode,
        )?;
        Ok(PhaseSpacePoint::new(y[0], y[1]))
    }

    /// Sample a trajectory at every grid time, starting from `start` at `grid.t_start`.
    pub fn trajectory(&self, start: PhaseSpacePoint, grid: &TimeGrid) -> Result<Trajectory> {
        let times = grid.times();
        let mut points = Vec::with_capacity(times.len());
        self.sample(start, grid.t_start, &times, |_, p| points.push(p))?;
        Ok(Trajectory { times, points })
    }
}

/// Sample `start` along `grid` with exact free flow and, when a pulse is given,
/// adaptive integration through the kick.
pub fn integrate_trajectory(
    start: PhaseSpacePoint,
    chi: f64,
    pulse: Option<&KickPulse>,
    grid: &TimeGrid,
    max_step: f64,
) -> Result<Trajectory> {
    ClassicalPropagator::new(chi, pulse.copied(), max_step).trajectory(start, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn free_flow_examples() {
        for &t in &[0.3, 1.0, 2.5] {
            let p = exact_free_trajectory(PhaseSpacePoint::new(1.0, 0.0), 0.0, t);
            assert!((p.q - t.cos()).abs() < 1e-15 && (p.p + t.sin()).abs() < 1e-15);
        }
        let p = exact_free_trajectory(PhaseSpacePoint::new(1.0, 0.0), 1.0, PI);
        assert!((p.q - 1.0).abs() < 1e-14 && p.p.abs() < 1e-14);
        let p = exact_free_trajectory(PhaseSpacePoint::new(3.0, 4.0), 0.1, 2.0);
        let (s, c) = 7f64.sin_cos();
        assert!((p.q - (3.0 * c + 4.0 * s)).abs() < 1e-14);
        assert!((p.p - (4.0 * c - 3.0 * s)).abs() < 1e-14);
    }

    #[test]
    fn rhs_examples() {
        let pulse = KickPulse::gaussian(0.01, 0.5, 1e-3).unwrap();
        let far = Some(&pulse);
        assert_eq!(hamilton_rhs(&PhaseSpacePoint::new(1.0, 0.0), 3.0, 1.0, far), (0.0, -2.0));
        assert_eq!(hamilton_rhs(&PhaseSpacePoint::new(0.0, 1.0), 0.5, 1.0, far), (2.0, 0.0));
        let (dq, dp) = hamilton_rhs(&PhaseSpacePoint::new(1.0, 1.0), 0.5, 1.0, far);
        assert_eq!(dq, 3.0);
        assert!((dp - (-3.0 + 2.0 * 3.989_422_804_014_327)).abs() < 1e-12);
    }

    #[test]
    fn kick_examples() {
        let k = apply_impulsive_kick_classical(PhaseSpacePoint::new(1.0, 0.0), 0.01);
        assert_eq!((k.q, k.p), (1.0, 0.02));
        let k = apply_impulsive_kick_classical(PhaseSpacePoint::new(0.0, 1.0), 0.3);
        assert_eq!((k.q, k.p), (0.0, 1.0));
        let k = apply_impulsive_kick_classical(PhaseSpacePoint::new(2.0, -1.0), 0.05);
        assert!((k.p + 0.8).abs() < 1e-15);
    }

    #[test]
    fn polar_angle_convention() {
        let p = PhaseSpacePoint::new(0.0, -1.0);
        assert!((p.phi() - PI / 2.0).abs() < 1e-15);
        // Free flow advances φ at rate Ω.
        let s = PhaseSpacePoint::new(1.0, 0.0);
        let e = exact_free_trajectory(s, 0.5, 0.2);
        assert!((e.phi() - 1.5 * 0.2).abs() < 1e-14);
    }

    #[test]
    fn integrator_reproduces_free_flow() {
        // Force numerical integration with a zero-area pulse.
        let prop = ClassicalPropagator {
            chi: 1.0,
            pulse: Some(KickPulse::gaussian(0.0, 0.5, 1e-3).unwrap()),
            ode: Dopri5Options {
                h_max: 1e-5,
                ..Dopri5Options::default()
            },
        };
        let start = PhaseSpacePoint::new(8.0, 1.0);
        let (w0, w1) = prop.pulse.unwrap().window();
        let a = exact_free_trajectory(start, 1.0, w0);
        let b = prop.integrate_window(a, w0, w1).unwrap();
        let e = exact_free_trajectory(start, 1.0, w1);
        assert!((b.q - e.q).abs() < 1e-10 && (b.p - e.p).abs() < 1e-10);
    }

    #[test]
    fn integrator_conserves_radius_over_long_horizon() {
        let start = PhaseSpacePoint::new(3.0, -1.0);
        let y = dopri5(
            |s, y: &[f64; 2]| {
                let (dq, dp) = hamilton_rhs(&PhaseSpacePoint::new(y[0], y[1]), s, 1.0, None);
                [dq, dp]
            },
            0.0,
            [start.q, start.p],
            10.0,
            &Dopri5Options {
                h_max: 1e-3,
                ..Dopri5Options::default()
            },
        )
        .unwrap();
        let r2 = y[0] * y[0] + y[1] * y[1];
        assert!((r2 / start.r_sq() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_kick_matches_free_flow() {
        let pulse = KickPulse::gaussian(0.0, 0.5, 1e-3).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 0.05).unwrap();
        let start = PhaseSpacePoint::new(8.0, 1.0);
        let tr = integrate_trajectory(start, 1.0, Some(&pulse), &grid, 1e-5).unwrap();
        for (t, p) in tr.times.iter().zip(&tr.points) {
            let e = exact_free_trajectory(start, 1.0, *t);
            assert!((p.q - e.q).abs() < 1e-12 && (p.p - e.p).abs() < 1e-12, "t={t} dq={} dp={}", p.q - e.q, p.p - e.p);
        }
    }
}

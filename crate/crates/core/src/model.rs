//! Physical parameters and pulse definitions shared by every engine.
//!
//! All quantities are dimensionless: times are measured in units of `1/ω`,
//! phase-space coordinates in units of `sqrt(ħ/mω)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Half-width of the integration window around the pulse centre, in units of `sigma_g`.
pub const PULSE_WINDOW_SIGMAS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    pub chi: f64,
    pub gamma: f64,
    /// Inverse bath temperature `ħω/k_B T`. `None` is zero temperature.
    pub epsilon: Option<f64>,
}

impl OscillatorParams {
    pub fn new(chi: f64, gamma: f64, epsilon: Option<f64>) -> Result<Self> {
        let p = Self {
            chi,
            gamma,
            epsilon,
        };
        p.check()?;
        Ok(p)
    }

    /// Closed Kerr oscillator with no bath.
    pub fn closed(chi: f64) -> Result<Self> {
        Self::new(chi, 0.0, None)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.chi.is_finite() && self.chi >= 0.0) {
            return Err(Error::invalid("chi", format!("must be finite and >= 0, got {}", self.chi)));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::invalid(
                "gamma",
                format!("must be finite and >= 0, got {}", self.gamma),
            ));
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0) {
                return Err(Error::invalid("epsilon", format!("must be > 0, got {eps}")));
            }
        }
        Ok(())
    }

    /// Thermal occupation of the bath (zero when no temperature is given).
    pub fn nbar(&self) -> f64 {
        match self.epsilon {
            Some(eps) => 1.0 / eps.exp_m1(),
            None => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PulseShape {
    #[default]
    Gaussian,
    /// Rectangular pulse of full width `sigma_g` centred on `tau`.
    Square,
}

/// Parametric kick `g(t)` of total area `g0` centred on `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickPulse {
    pub g0: f64,
    pub tau: f64,
    pub sigma_g: f64,
    #[serde(default)]
    pub shape: PulseShape,
}

impl KickPulse {
    pub fn gaussian(g0: f64, tau: f64, sigma_g: f64) -> Result<Self> {
        let p = Self {
            g0,
            tau,
            sigma_g,
            shape: PulseShape::Gaussian,
        };
        p.check()?;
        Ok(p)
    }

    pub fn square(g0: f64, tau: f64, width: f64) -> Result<Self> {
        let p = Self {
            g0,
            tau,
            sigma_g: width,
            shape: PulseShape::Square,
        };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        if !self.g0.is_finite() {
            return Err(Error::invalid("g0", "must be finite"));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::invalid("tau", format!("must be > 0, got {}", self.tau)));
        }
        if !(self.sigma_g.is_finite() && self.sigma_g > 0.0) {
            return Err(Error::invalid(
                "sigma_g",
                format!("must be > 0, got {}", self.sigma_g),
            ));
        }
        if self.sigma_g >= self.tau / 10.0 {
            return Err(Error::invalid(
                "sigma_g",
                format!(
                    "pulse not impulsive: sigma_g = {} must be < tau/10 = {}",
                    self.sigma_g,
                    self.tau / 10.0
                ),
            ));
        }
        Ok(())
    }

    pub fn peak(&self) -> f64 {
        match self.shape {
            PulseShape::Gaussian => self.g0 / ((2.0 * PI).sqrt() * self.sigma_g),
            PulseShape::Square => self.g0 / self.sigma_g,
        }
    }

    /// Pulse value `g(t)`.
    pub fn value(&self, t: f64) -> f64 {
        match self.shape {
            PulseShape::Gaussian => {
                let x = (t - self.tau) / self.sigma_g;
                self.peak() * (-0.5 * x * x).exp()
            }
            PulseShape::Square => {
                let (a, b) = self.window();
                if t >= a && t <= b {
                    self.peak()
                } else {
                    0.0
                }
            }
        }
    }

    /// Interval outside of which the pulse is treated as exactly zero.
    pub fn window(&self) -> (f64, f64) {
        let half = match self.shape {
            PulseShape::Gaussian => PULSE_WINDOW_SIGMAS * self.sigma_g,
            PulseShape::Square => 0.5 * self.sigma_g,
        };
        (self.tau - half, self.tau + half)
    }
}

/// Gaussian kick value; free-function form of [`KickPulse::value`].
pub fn pulse_value(pulse: &KickPulse, t: f64) -> f64 {
    pulse.value(t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentSpec {
    pub alpha0: Complex64,
}

impl CoherentSpec {
    pub fn new(alpha0: Complex64) -> Result<Self> {
        if !(alpha0.re.is_finite() && alpha0.im.is_finite()) {
            return Err(Error::invalid("alpha0", "must be finite"));
        }
        Ok(Self { alpha0 })
    }

    /// Classical phase-space centre `(q0, p0) = sqrt(2) (Re α, Im α)`.
    pub fn phase_space_centre(&self) -> (f64, f64) {
        let s = std::f64::consts::SQRT_2;
        (s * self.alpha0.re, s * self.alpha0.im)
    }
}

/// Two-component cat `N+|α0> + N- e^{iθ}|-α0>`, unnormalised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatSpec {
    pub alpha0: Complex64,
    pub n_plus: f64,
    pub n_minus: f64,
    pub theta: f64,
}

impl CatSpec {
    pub fn new(alpha0: Complex64, n_plus: f64, n_minus: f64, theta: f64) -> Result<Self> {
        let c = Self {
            alpha0,
            n_plus,
            n_minus,
            theta,
        };
        c.check()?;
        Ok(c)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.alpha0.re.is_finite() && self.alpha0.im.is_finite()) {
            return Err(Error::invalid("alpha0", "must be finite"));
        }
        if !(self.n_plus.is_finite() && self.n_plus >= 0.0) {
            return Err(Error::invalid("n_plus", format!("must be >= 0, got {}", self.n_plus)));
        }
        if !(self.n_minus.is_finite() && self.n_minus >= 0.0) {
            return Err(Error::invalid(
                "n_minus",
                format!("must be >= 0, got {}", self.n_minus),
            ));
        }
        if !self.theta.is_finite() {
            return Err(Error::invalid("theta", "must be finite"));
        }
        if !(self.norm_sq() > 0.0) {
            return Err(Error::invalid("n_plus", "cat state is not normalisable"));
        }
        Ok(())
    }

    /// `D² = N+² + N-² + 2 N+ N- e^{-2|α0|²} cos θ`.
    pub fn norm_sq(&self) -> f64 {
        self.n_plus * self.n_plus
            + self.n_minus * self.n_minus
            + 2.0 * self.n_plus * self.n_minus * (-2.0 * self.alpha0.norm_sqr()).exp() * self.theta.cos()
    }

    pub fn as_coherent(&self) -> Option<CoherentSpec> {
        (self.n_minus == 0.0).then_some(CoherentSpec {
            alpha0: self.alpha0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub dt_out: f64,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, dt_out: f64) -> Result<Self> {
        let g = Self {
            t_start,
            t_end,
            dt_out,
        };
        g.check()?;
        Ok(g)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_start < self.t_end) {
            return Err(Error::invalid(
                "t_end",
                format!("need t_start < t_end, got [{}, {}]", self.t_start, self.t_end),
            ));
        }
        if !(self.dt_out.is_finite() && self.dt_out > 0.0) {
            return Err(Error::invalid("dt_out", format!("must be > 0, got {}", self.dt_out)));
        }
        Ok(())
    }

    /// Output sample times. The last sample is the largest `t_start + k dt_out <= t_end`
    /// (with a small tolerance for rounding).
    pub fn times(&self) -> Vec<f64> {
        let n = ((self.t_end - self.t_start) / self.dt_out + 1e-9).floor() as usize;
        (0..=n).map(|k| self.t_start + k as f64 * self.dt_out).collect()
    }

    pub fn len(&self) -> usize {
        ((self.t_end - self.t_start) / self.dt_out + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n_samples: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub const DEFAULT_SAMPLES: usize = 200_000;

    pub fn new(n_samples: usize, seed: u64) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::invalid("n_samples", "must be >= 1"));
        }
        Ok(Self { n_samples, seed })
    }
}

/// Fock-space truncation: states `|0>..|n_max>` are retained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSpaceSpec {
    pub n_max: usize,
}

/// Largest truncated weight tolerated for an initial state.
pub const FOCK_TAIL_TOLERANCE: f64 = 1e-12;

impl FockSpaceSpec {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::invalid("n_max", format!("must be >= 2, got {n_max}")));
        }
        Ok(Self { n_max })
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    /// Default cutoff for a coherent amplitude of modulus `abs_alpha`:
    /// `ceil(|α|² + 8|α| + 10)` rounded up to a power of two, then grown until the
    /// Poisson tail beyond `n_max` is below [`FOCK_TAIL_TOLERANCE`].
    pub fn for_amplitude(abs_alpha: f64) -> Self {
        let base = (abs_alpha * abs_alpha + 8.0 * abs_alpha + 10.0).ceil() as usize;
        let mut n_max = base.next_power_of_two();
        while poisson_tail(abs_alpha * abs_alpha, n_max) >= FOCK_TAIL_TOLERANCE {
            n_max += 8;
        }
        Self { n_max }
    }
}

/// `P(N > n_max)` for a Poisson distribution with the given mean.
pub fn poisson_tail(mean: f64, n_max: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    // Sum the upper tail directly in log space; terms decay super-geometrically.
    let ln_mean = mean.ln();
    let mut tail = 0.0;
    let mut n = n_max + 1;
    loop {
        let ln_p = -mean + n as f64 * ln_mean - crate::special::ln_factorial(n);
        let p = ln_p.exp();
        tail += p;
        if (n as f64) > mean && (p == 0.0 || p < 1e-17 * tail) {
            break;
        }
        n += 1;
    }
    tail
}

/// Map the dimensionful Kerr constant and pulse area to `(chi, g0)`.
///
/// `chi = K/(ħω)` and `g0 = Γ_area/(ħω²)`.
pub fn nondimensionalize(k: f64, omega: f64, gamma_area: f64, hbar: f64) -> Result<(f64, f64)> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::invalid("omega", format!("must be > 0, got {omega}")));
    }
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::invalid("hbar", format!("must be > 0, got {hbar}")));
    }
    let e = hbar * omega;
    Ok((k / e, gamma_area / (e * omega)))
}

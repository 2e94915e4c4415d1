//! Time integrators: adaptive Dormand–Prince 5(4) for small real systems and a
//! fixed-step integrating-factor (Lawson) RK4 for large complex systems with a
//! diagonal stiff part.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-12,
            h_max: 1e-5,
            h_min: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Error coefficients: fifth-order minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

/// Integrate `y' = f(t, y)` from `t0` to `t1` with adaptive Dormand–Prince 5(4).
pub fn dopri5<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: &Dopri5Options,
) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut t = t0;
    let mut y = y0;
    if t1 <= t0 {
        return Ok(y);
    }
    let mut h = opts.h_max.min(t1 - t0);
    let mut k1 = f(t, &y);
    let mut steps = 0usize;
    while t < t1 {
        if steps >= opts.max_steps {
            return Err(Error::IntegrationFailure {
                t,
                reason: format!("step budget of {} exhausted", opts.max_steps),
            });
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = axpy(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(t + h, &y_new);
        let mut err = 0.0f64;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / scale).abs());
        }
        if !err.is_finite() {
            return Err(Error::IntegrationFailure {
                t,
                reason: "non-finite state".into(),
            });
        }
        steps += 1;
        if err <= 1.0 {
            t = if last { t1 } else { t + h };
            y = y_new;
            k1 = k7;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = (h * factor).min(opts.h_max);
        if t < t1 && h < opts.h_min {
            return Err(Error::IntegrationFailure {
                t,
                reason: format!("step size underflow (h = {h:e})"),
            });
        }
    }
    Ok(y)
}

/// Fixed-step Lawson RK4 for `y' = Λ y + N(t, y)` with diagonal `Λ`.
///
/// The diagonal part is integrated exactly through `exp(Λh)` factors.
pub struct LawsonRk4 {
    h: f64,
    e_half: Vec<Complex64>,
    e_full: Vec<Complex64>,
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    stage: Vec<Complex64>,
}

impl LawsonRk4 {
    pub fn new(lambda: &[Complex64], h: f64) -> Self {
        let n = lambda.len();
        let zero = Complex64::new(0.0, 0.0);
        Self {
            h,
            e_half: lambda.iter().map(|l| (l * (0.5 * h)).exp()).collect(),
            e_full: lambda.iter().map(|l| (l * h).exp()).collect(),
            k1: vec![zero; n],
            k2: vec![zero; n],
            k3: vec![zero; n],
            k4: vec![zero; n],
            stage: vec![zero; n],
        }
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    /// Advance `y` from `t` to `t + h`. `nonlinear(t, y, out)` must overwrite `out`.
    pub fn step<F>(&mut self, t: f64, y: &mut [Complex64], mut nonlinear: F)
    where
        F: FnMut(f64, &[Complex64], &mut [Complex64]),
    {
        let h = self.h;
        let hh = 0.5 * h;
        nonlinear(t, y, &mut self.k1);
        for i in 0..y.len() {
            self.stage[i] = self.e_half[i] * (y[i] + hh * self.k1[i]);
        }
        nonlinear(t + hh, &self.stage, &mut self.k2);
        for i in 0..y.len() {
            self.stage[i] = self.e_half[i] * y[i] + hh * self.k2[i];
        }
        nonlinear(t + hh, &self.stage, &mut self.k3);
        for i in 0..y.len() {
            self.stage[i] = self.e_full[i] * y[i] + h * self.e_half[i] * self.k3[i];
        }
        nonlinear(t + h, &self.stage, &mut self.k4);
        let h6 = h / 6.0;
        for i in 0..y.len() {
            y[i] = self.e_full[i] * y[i]
                + h6 * (self.e_full[i] * self.k1[i]
                    + 2.0 * self.e_half[i] * (self.k2[i] + self.k3[i])
                    + self.k4[i]);
        }
    }
}

/// Number of equal steps of at most `h_max` covering `span`.
pub fn step_count(span: f64, h_max: f64) -> usize {
    ((span / h_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

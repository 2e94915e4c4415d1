//! Open-system dynamics: Lindblad master equation with thermal damping, and the
//! zero-temperature closed forms.
//!
//! The generator is written as `-i[H, ρ] + γ(n̄+1) D[a]ρ + γ n̄ D[a†]ρ` with
//! `D[c]ρ = c ρ c† - {c†c, ρ}/2`. On the untruncated space this equals
//! `-i[H, ρ] + γ n̄ [[a, ρ], a†] + (γ/2)(2 a ρ a† - {a†a, ρ})`; with truncated
//! ladder operators the dissipator form keeps the trace exactly.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CatSpec, KickPulse, OscillatorParams, TimeGrid};
use crate::ode::{step_count, LawsonRk4};
use crate::quantum::{KerrOperatorSet, KickMode, KickUnitary, StateVector};

/// Trace drift beyond which propagation is aborted.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;

/// Bose–Einstein occupation `1/(e^ε - 1)`.
pub fn thermal_nbar(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("thermal occupation needs epsilon > 0, got {epsilon}")));
    }
    Ok(1.0 / epsilon.exp_m1())
}

/// Dense density matrix, row-major, kept exactly Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn from_pure(state: &StateVector) -> Self {
        let c = &state.amplitudes;
        let dim = c.len();
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for m in 0..dim {
            for n in 0..dim {
                data[m * dim + n] = c[m] * c[n].conj();
            }
        }
        Self { dim, data }
    }

    pub fn from_matrix(m: &DMatrix<Complex64>) -> Self {
        let dim = m.nrows();
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = m[(i, j)];
            }
        }
        Self { dim, data }
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.data[i * self.dim + j])
    }

    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.data[m * self.dim + n]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    pub fn purity(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest `|ρ_mn - conj(ρ_nm)|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for m in 0..self.dim {
            for n in m..self.dim {
                worst = worst.max((self.get(m, n) - self.get(n, m).conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let eig = nalgebra::SymmetricEigen::new(self.to_matrix());
        eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// `tr(a ρ) = Σ_{m≥1} sqrt(m) ρ_{m, m-1}`.
    pub fn expectation_a(&self) -> Complex64 {
        (1..self.dim)
            .map(|m| (m as f64).sqrt() * self.get(m, m - 1))
            .sum()
    }

    fn symmetrize(&mut self) {
        let d = self.dim;
        for m in 0..d {
            self.data[m * d + m].im = 0.0;
            for n in m + 1..d {
                self.data[n * d + m] = self.data[m * d + n].conj();
            }
        }
    }
}

/// Decay rates entering the dissipator.
#[derive(Debug, Clone, Copy)]
struct Rates {
    down: f64,
    up: f64,
}

impl Rates {
    fn new(params: &OscillatorParams) -> Self {
        let nbar = params.nbar();
        Self {
            down: params.gamma * (nbar + 1.0),
            up: params.gamma * nbar,
        }
    }
}

/// `⟨k|a a†|k⟩` on the truncated space.
fn aad(k: usize, dim: usize) -> f64 {
    if k + 1 < dim {
        (k + 1) as f64
    } else {
        0.0
    }
}

/// Diagonal part of the generator acting on `ρ_mn`.
fn diagonal_rate(ops: &KerrOperatorSet, rates: Rates, m: usize, n: usize) -> Complex64 {
    let d = ops.dim();
    Complex64::new(
        -0.5 * rates.down * (m + n) as f64 - 0.5 * rates.up * (aad(m, d) + aad(n, d)),
        -(ops.energies[m] - ops.energies[n]),
    )
}

/// Off-diagonal part: quantum jumps and the kick commutator `i g/2 [X², ρ]`.
/// Only the upper triangle is computed; the lower one is mirrored.
fn coupling_terms(ops: &KerrOperatorSet, rates: Rates, g: f64, rho: &[Complex64], out: &mut [Complex64]) {
    let d = ops.dim();
    let at = |m: usize, n: usize| rho[m * d + n];
    let kick = Complex64::new(0.0, 0.5 * g);
    for m in 0..d {
        for n in m..d {
            let mut acc = Complex64::new(0.0, 0.0);
            if m + 1 < d && n + 1 < d {
                acc += rates.down * (((m + 1) * (n + 1)) as f64).sqrt() * at(m + 1, n + 1);
            }
            if m >= 1 && n >= 1 && rates.up != 0.0 {
                acc += rates.up * ((m * n) as f64).sqrt() * at(m - 1, n - 1);
            }
            if g != 0.0 {
                let mut comm = at(m, n) * (ops.x2_diag[m] - ops.x2_diag[n]);
                if m >= 2 {
                    comm += ops.x2_off[m - 2] * at(m - 2, n);
                }
                if m + 2 < d {
                    comm += ops.x2_off[m] * at(m + 2, n);
                }
                if n >= 2 {
                    comm -= at(m, n - 2) * ops.x2_off[n - 2];
                }
                if n + 2 < d {
                    comm -= at(m, n + 2) * ops.x2_off[n];
                }
                acc += kick * comm;
            }
            out[m * d + n] = acc;
        }
    }
    for m in 0..d {
        for n in m + 1..d {
            out[n * d + m] = out[m * d + n].conj();
        }
    }
}

/// Full generator `dρ/dt` at time `t`.
pub fn lindblad_rhs(
    rho: &DensityMatrix,
    t: f64,
    ops: &KerrOperatorSet,
    params: &OscillatorParams,
    pulse: Option<&KickPulse>,
) -> DensityMatrix {
    let d = ops.dim();
    let rates = Rates::new(params);
    let g = pulse.map_or(0.0, |p| p.value(t));
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    coupling_terms(ops, rates, g, &rho.data, &mut out);
    for m in 0..d {
        for n in 0..d {
            out[m * d + n] += diagonal_rate(ops, rates, m, n) * rho.get(m, n);
        }
    }
    DensityMatrix { dim: d, data: out }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LindbladSteps {
    /// Largest step outside the pulse window.
    pub free_step: f64,
    /// Largest step inside the pulse window.
    pub pulse_step: f64,
}

impl Default for LindbladSteps {
    fn default() -> Self {
        Self {
            free_step: 1e-4,
            pulse_step: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSample {
    pub t: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LindbladDiagnostics {
    pub max_trace_drift: f64,
    pub max_hermiticity_residual: f64,
    pub eigen_samples: Vec<EigenSample>,
    pub purity: Vec<f64>,
}

impl LindbladDiagnostics {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen_samples
            .iter()
            .map(|s| s.min_eigenvalue)
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladResult {
    pub times: Vec<f64>,
    pub mean_a: Vec<Complex64>,
    pub diagnostics: LindbladDiagnostics,
    pub final_rho: DensityMatrix,
}

impl LindbladResult {
    pub fn mean_q(&self) -> crate::series::TimeSeries {
        crate::series::TimeSeries::new(
            self.times.clone(),
            self.mean_a.iter().map(|a| std::f64::consts::SQRT_2 * a.re).collect(),
        )
        .expect("grid times are increasing")
    }
}

struct Integrator<'a> {
    ops: &'a KerrOperatorSet,
    rates: Rates,
    lambda: Vec<Complex64>,
    cached: Option<LawsonRk4>,
}

impl<'a> Integrator<'a> {
    fn new(ops: &'a KerrOperatorSet, params: &OscillatorParams) -> Self {
        let d = ops.dim();
        let rates = Rates::new(params);
        let mut lambda = Vec::with_capacity(d * d);
        for m in 0..d {
            for n in 0..d {
                lambda.push(diagonal_rate(ops, rates, m, n));
            }
        }
        Self {
            ops,
            rates,
            lambda,
            cached: None,
        }
    }

    fn advance(&mut self, rho: &mut DensityMatrix, t0: f64, t1: f64, max_step: f64, pulse: Option<&KickPulse>) {
        if t1 <= t0 {
            return;
        }
        let n = step_count(t1 - t0, max_step);
        let h = (t1 - t0) / n as f64;
        let reuse = matches!(&self.cached, Some(s) if s.step_size() == h);
        if !reuse {
            self.cached = Some(LawsonRk4::new(&self.lambda, h));
        }
        let stepper = self.cached.as_mut().expect("stepper");
        let (ops, rates) = (self.ops, self.rates);
        for k in 0..n {
            let t = t0 + k as f64 * h;
            stepper.step(t, &mut rho.data, |s, y, out| {
                let g = pulse.map_or(0.0, |p| p.value(s));
                coupling_terms(ops, rates, g, y, out);
            });
            rho.symmetrize();
        }
    }
}

/// Propagate `rho0` (given at `grid.t_start`) and sample `⟨a⟩` and the diagnostics
/// at every grid time. The trace is never renormalised.
pub fn propagate_density(
    rho0: &DensityMatrix,
    ops: &KerrOperatorSet,
    params: &OscillatorParams,
    pulse: Option<&KickPulse>,
    mode: KickMode,
    grid: &TimeGrid,
    steps: &LindbladSteps,
) -> Result<LindbladResult> {
    params.check()?;
    if rho0.dim != ops.dim() {
        return Err(Error::invalid("rho0", "dimension differs from the operator set"));
    }
    let times = grid.times();
    let n_out = times.len();
    let eigen_at: Vec<usize> = (0..10)
        .map(|k| ((k as f64) * (n_out - 1) as f64 / 9.0).round() as usize)
        .collect();
    let pulse = pulse.filter(|p| p.g0 != 0.0);
    let (w0, w1) = match (pulse, mode) {
        (Some(p), KickMode::Pulsed) => p.window(),
        (Some(p), KickMode::Impulsive) => (p.tau, p.tau),
        (None, _) => (f64::INFINITY, f64::INFINITY),
    };
    if grid.t_start > w0 && grid.t_start < w1 {
        return Err(Error::Unsupported("propagation must start outside the pulse window".into()));
    }
    let mut kicked = grid.t_start > w1 || (grid.t_start == w1 && w1 > w0);
    let mut rho = rho0.clone();
    rho.symmetrize();
    let mut integ = Integrator::new(ops, params);
    let mut t = grid.t_start;
    let mut mean_a = Vec::with_capacity(n_out);
    let mut diag = LindbladDiagnostics {
        max_trace_drift: 0.0,
        max_hermiticity_residual: 0.0,
        eigen_samples: Vec::new(),
        purity: Vec::with_capacity(n_out),
    };
    let tr0 = rho.trace().re;
    for (i, &ti) in times.iter().enumerate() {
        if !kicked && ti > w0 {
            if t < w0 {
                integ.advance(&mut rho, t, w0, steps.free_step, None);
                t = w0;
            }
            match mode {
                KickMode::Impulsive => {
                    let u = KickUnitary::new(ops, pulse.expect("kick").g0);
                    rho = DensityMatrix::from_matrix(&u.conjugate(&rho.to_matrix()));
                    rho.symmetrize();
                    kicked = true;
                }
                KickMode::Pulsed => {
                    let end = ti.min(w1);
                    integ.advance(&mut rho, t, end, steps.pulse_step, pulse);
                    t = end;
                    kicked = end >= w1;
                }
            }
        }
        integ.advance(&mut rho, t, ti, steps.free_step, None);
        t = ti;
        let drift = (rho.trace().re - tr0).abs();
        diag.max_trace_drift = diag.max_trace_drift.max(drift);
        if drift > TRACE_DRIFT_LIMIT {
            return Err(Error::TraceDrift {
                t: ti,
                drift,
                limit: TRACE_DRIFT_LIMIT,
            });
        }
        diag.max_hermiticity_residual = diag.max_hermiticity_residual.max(rho.hermiticity_residual());
        diag.purity.push(rho.purity());
        if eigen_at.contains(&i) && diag.eigen_samples.last().map(|s| s.t) != Some(ti) {
            diag.eigen_samples.push(EigenSample {
                t: ti,
                min_eigenvalue: rho.min_eigenvalue(),
            });
        }
        mean_a.push(rho.expectation_a());
    }
    Ok(LindbladResult {
        times,
        mean_a,
        diagnostics: diag,
        final_rho: rho,
    })
}

/// Initial state for the zero-temperature closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DampedInitial {
    Coherent(Complex64),
    Cat(CatSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DampedMode {
    /// Exact solution of the zero-temperature adjoint equation.
    Full,
    /// Undamped closed forms with `2iχ` replaced by `2iχ + γ`.
    Simplified,
}

impl DampedInitial {
    /// Coherent components `(c_k, β_k)` and the squared norm of `Σ c_k |β_k⟩`.
    fn components(&self) -> (Vec<(Complex64, Complex64)>, f64) {
        match *self {
            DampedInitial::Coherent(a) => (vec![(Complex64::new(1.0, 0.0), a)], 1.0),
            DampedInitial::Cat(c) => (
                vec![
                    (Complex64::new(c.n_plus, 0.0), c.alpha0),
                    (c.n_minus * Complex64::from_polar(1.0, c.theta), -c.alpha0),
                ],
                c.norm_sq(),
            ),
        }
    }
}

/// Zero-temperature `⟨a(t)⟩` under Kerr evolution with amplitude damping.
///
/// In the full mode, `a(t) = e^{-(i+γ/2)t} f(n̂) a` acting on a superposition of
/// coherent states gives
/// `Σ_jk c_j* c_k β_k exp(-(|β_j|²+|β_k|²)/2 + β_j* β_k w)` with
/// `w = (γ + 2iχ e^{-κt})/κ`, `κ = 2iχ + γ`. The simplified mode uses
/// `w = e^{-κt}` and no `e^{-γt/2}` prefactor.
pub fn damped_mean_a_analytic(
    initial: &DampedInitial,
    chi: f64,
    gamma: f64,
    nbar: f64,
    t: f64,
    mode: DampedMode,
) -> Result<Complex64> {
    if nbar != 0.0 {
        return Err(Error::Unsupported("damped closed forms exist only at zero temperature".into()));
    }
    if let DampedInitial::Cat(c) = initial {
        c.check()?;
    }
    let i = Complex64::i();
    let kappa = Complex64::new(gamma, 2.0 * chi);
    let (w, pre) = match mode {
        DampedMode::Full => {
            let w = if kappa.norm() == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                (gamma + 2.0 * i * chi * (-kappa * t).exp()) / kappa
            };
            (w, (-(i + 0.5 * gamma) * t).exp())
        }
        DampedMode::Simplified => ((-kappa * t).exp(), (-i * t).exp()),
    };
    let (comps, norm_sq) = initial.components();
    let mut acc = Complex64::new(0.0, 0.0);
    for (cj, bj) in &comps {
        for (ck, bk) in &comps {
            let expo = -0.5 * (bj.norm_sqr() + bk.norm_sqr()) + bj.conj() * bk * w;
            acc += cj.conj() * ck * bk * expo.exp();
        }
    }
    Ok(pre * acc / norm_sq)
}

/// Revival suppression `exp(|α0|² (e^{-γt} - 1))` and its linearisation `exp(-|α0|² γ t)`.
pub fn revival_suppression_factor(alpha0: f64, gamma: f64, t: f64) -> (f64, f64) {
    let a2 = alpha0 * alpha0;
    ((a2 * (-gamma * t).exp_m1()).exp(), (-a2 * gamma * t).exp())
}

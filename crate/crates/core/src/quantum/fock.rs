use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::FockSpaceSpec;

/// Diagonal Kerr energies and the pentadiagonal quadrature-squared operator
/// `X² = (a† + a)²` on the truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct KerrOperatorSet {
    pub chi: f64,
    /// `E_n = n + 1/2 + χ n (n - 1)`.
    pub energies: Vec<f64>,
    /// `⟨n|X²|n⟩ = 2n + 1`.
    pub x2_diag: Vec<f64>,
    /// `⟨n+2|X²|n⟩ = sqrt((n+1)(n+2))`, for `n = 0..=n_max-2`.
    pub x2_off: Vec<f64>,
}

pub fn kerr_energy(n: usize, chi: f64) -> f64 {
    let n = n as f64;
    n + 0.5 + chi * n * (n - 1.0)
}

pub fn build_operators(chi: f64, fock: &FockSpaceSpec) -> Result<KerrOperatorSet> {
    if fock.n_max < 2 {
        return Err(Error::invalid("n_max", format!("must be >= 2, got {}", fock.n_max)));
    }
    let dim = fock.dim();
    Ok(KerrOperatorSet {
        chi,
        energies: (0..dim).map(|n| kerr_energy(n, chi)).collect(),
        x2_diag: (0..dim).map(|n| 2.0 * n as f64 + 1.0).collect(),
        x2_off: (0..dim - 2)
            .map(|n| (((n + 1) * (n + 2)) as f64).sqrt())
            .collect(),
    })
}

impl KerrOperatorSet {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn n_max(&self) -> usize {
        self.dim() - 1
    }

    /// `out = X² v`.
    pub fn apply_x2(&self, v: &[Complex64], out: &mut [Complex64]) {
        let d = self.dim();
        for n in 0..d {
            let mut acc = v[n] * self.x2_diag[n];
            if n >= 2 {
                acc += v[n - 2] * self.x2_off[n - 2];
            }
            if n + 2 < d {
                acc += v[n + 2] * self.x2_off[n];
            }
            out[n] = acc;
        }
    }

    /// Element `⟨m|X²|n⟩`.
    pub fn x2(&self, m: usize, n: usize) -> f64 {
        match m.abs_diff(n) {
            0 => self.x2_diag[n],
            2 => self.x2_off[m.min(n)],
            _ => 0.0,
        }
    }
}

/// Normalised Fock-basis state `Σ c_n |n⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sq().sqrt();
        for c in &mut self.amplitudes {
            *c /= n;
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|⟨self|other⟩|²` for normalised states.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn expectation_n(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(n, c)| n as f64 * c.norm_sqr())
            .sum()
    }
}

/// `⟨ψ|a|ψ⟩ = Σ_{n≥1} sqrt(n) c*_{n-1} c_n`.
pub fn expectation_a(state: &StateVector) -> Complex64 {
    let c = &state.amplitudes;
    (1..c.len())
        .map(|n| (n as f64).sqrt() * c[n - 1].conj() * c[n])
        .sum()
}

/// `⟨q⟩ = sqrt(2) Re⟨a⟩`.
pub fn expectation_q(state: &StateVector) -> f64 {
    std::f64::consts::SQRT_2 * expectation_a(state).re
}

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::fock::{KerrOperatorSet, StateVector};

/// Dense `exp(A)` by scaling and squaring of a truncated Taylor series.
pub fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut s = 0u32;
    while norm1 / 2f64.powi(s as i32) > 0.5 {
        s += 1;
    }
    let scaled = a / Complex64::new(2f64.powi(s as i32), 0.0);
    let mut result = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    for k in 1..=30 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        result += &term;
        let tn = term.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if tn < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

/// Impulsive kick `U = exp(i g0 X² / 2)` on the truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct KickUnitary {
    pub g0: f64,
    pub matrix: DMatrix<Complex64>,
}

impl KickUnitary {
    pub fn new(ops: &KerrOperatorSet, g0: f64) -> Self {
        let d = ops.dim();
        let gen = DMatrix::from_fn(d, d, |m, n| Complex64::new(0.0, 0.5 * g0 * ops.x2(m, n)));
        Self {
            g0,
            matrix: expm(&gen),
        }
    }

    pub fn apply(&self, state: &StateVector) -> StateVector {
        let v = nalgebra::DVector::from_column_slice(&state.amplitudes);
        StateVector::from_amplitudes((&self.matrix * v).as_slice().to_vec())
    }

    /// `U ρ U†` for a dense `ρ`.
    pub fn conjugate(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        &self.matrix * rho * self.matrix.adjoint()
    }
}

/// Apply `exp(i g0 X²/2)` to `state`.
pub fn impulsive_kick_unitary(state: &StateVector, ops: &KerrOperatorSet, g0: f64) -> StateVector {
    KickUnitary::new(ops, g0).apply(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FockSpaceSpec;
    use crate::quantum::fock::build_operators;

    #[test]
    fn expm_of_diagonal_and_rotation() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(0.0, 3.0),
            Complex64::new(-1.0, 0.0),
        ]));
        let e = expm(&a);
        assert!((e[(0, 0)] - Complex64::new(0.0, 3.0).exp()).norm() < 1e-14);
        assert!((e[(1, 1)] - (-1f64).exp()).norm() < 1e-14);
        // exp of [[0, -θ], [θ, 0]] is a rotation.
        let th = 2.7;
        let r = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(-th, 0.0),
                Complex64::new(th, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        let e = expm(&r);
        assert!((e[(0, 0)].re - th.cos()).abs() < 1e-14);
        assert!((e[(1, 0)].re - th.sin()).abs() < 1e-14);
    }

    #[test]
    fn kick_is_unitary_and_trivial_at_zero() {
        let ops = build_operators(1.0, &FockSpaceSpec::new(64).unwrap()).unwrap();
        let u = KickUnitary::new(&ops, 0.03);
        let id = &u.matrix * u.matrix.adjoint();
        for i in 0..ops.dim() {
            for j in 0..ops.dim() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - want).norm() < 1e-12);
            }
        }
        let z = KickUnitary::new(&ops, 0.0);
        assert_eq!(z.matrix, DMatrix::identity(ops.dim(), ops.dim()));
    }

    #[test]
    fn vacuum_occupation_after_kick() {
        let ops = build_operators(1.0, &FockSpaceSpec::new(32).unwrap()).unwrap();
        let mut amps = vec![Complex64::new(0.0, 0.0); ops.dim()];
        amps[0] = Complex64::new(1.0, 0.0);
        let out = impulsive_kick_unitary(&StateVector::from_amplitudes(amps), &ops, 0.01);
        assert!((out.expectation_n() - 1e-4).abs() < 0.05e-4);
        assert!((out.norm_sq() - 1.0).abs() < 1e-12);
    }
}

use num_complex::Complex64;

use super::fock::StateVector;
use crate::error::{Error, Result};
use crate::model::{poisson_tail, CatSpec, FockSpaceSpec, FOCK_TAIL_TOLERANCE};

/// Untruncated coherent-state amplitudes `e^{-|α|²/2} αⁿ/sqrt(n!)` for `n <= n_max`,
/// evaluated in log space so large `|α|` neither overflows nor underflows early.
pub fn coherent_amplitudes(alpha: Complex64, n_max: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n_max + 1];
    let r = alpha.norm();
    if r == 0.0 {
        out[0] = Complex64::new(1.0, 0.0);
        return out;
    }
    let ln_r = r.ln();
    let theta = alpha.arg();
    let mut ln_mag = -0.5 * r * r;
    for (n, c) in out.iter_mut().enumerate() {
        if n > 0 {
            ln_mag += ln_r - 0.5 * (n as f64).ln();
        }
        *c = Complex64::from_polar(ln_mag.exp(), n as f64 * theta);
    }
    out
}

fn check_tail(alpha: Complex64, fock: &FockSpaceSpec) -> Result<()> {
    let tail = poisson_tail(alpha.norm_sqr(), fock.n_max);
    if tail >= FOCK_TAIL_TOLERANCE {
        return Err(Error::CutoffTooSmall {
            n_max: fock.n_max,
            tail,
        });
    }
    Ok(())
}

/// Normalised truncated coherent state `|α0⟩`.
pub fn coherent_state_vector(alpha0: Complex64, fock: &FockSpaceSpec) -> Result<StateVector> {
    check_tail(alpha0, fock)?;
    let mut s = StateVector::from_amplitudes(coherent_amplitudes(alpha0, fock.n_max));
    s.normalize();
    Ok(s)
}

/// Normalised cat state `(N+|α0⟩ + N- e^{iθ}|-α0⟩)/D`.
pub fn cat_state_vector(cat: &CatSpec, fock: &FockSpaceSpec) -> Result<StateVector> {
    cat.check()?;
    check_tail(cat.alpha0, fock)?;
    let plus = coherent_amplitudes(cat.alpha0, fock.n_max);
    let minus = coherent_amplitudes(-cat.alpha0, fock.n_max);
    let w = cat.n_minus * Complex64::from_polar(1.0, cat.theta);
    let amps: Vec<Complex64> = plus
        .iter()
        .zip(&minus)
        .map(|(p, m)| cat.n_plus * p + w * m)
        .collect();
    let mut s = StateVector::from_amplitudes(amps);
    if !(s.norm_sq() > 1e-300) {
        return Err(Error::Domain("cat state has vanishing norm".into()));
    }
    s.normalize();
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::fock::{expectation_a, expectation_q};

    #[test]
    fn vacuum_and_coherent_moments() {
        let fock = FockSpaceSpec::new(128).unwrap();
        let v = coherent_state_vector(Complex64::new(0.0, 0.0), &fock).unwrap();
        assert_eq!(v.amplitudes[0], Complex64::new(1.0, 0.0));
        assert!(v.amplitudes[1..].iter().all(|c| c.norm() == 0.0));
        let a0 = Complex64::new(6.0, 0.0);
        let s = coherent_state_vector(a0, &fock).unwrap();
        assert!((s.norm_sq() - 1.0).abs() < 1e-14);
        assert!((s.expectation_n() - 36.0).abs() < 1e-8);
        assert!((expectation_a(&s) - a0).norm() < 1e-8);
        let a1 = Complex64::new(-2.0, 3.5);
        let s = coherent_state_vector(a1, &fock).unwrap();
        assert!((expectation_a(&s) - a1).norm() < 1e-8);
    }

    #[test]
    fn cutoff_too_small_is_reported() {
        let r = coherent_state_vector(Complex64::new(6.0, 0.0), &FockSpaceSpec::new(60).unwrap());
        assert!(matches!(r, Err(Error::CutoffTooSmall { n_max: 60, .. })));
    }

    #[test]
    fn cat_states() {
        let fock = FockSpaceSpec::new(128).unwrap();
        let a0 = Complex64::new(6.0, 0.0);
        let degenerate = cat_state_vector(&CatSpec::new(a0, 1.0, 0.0, 0.7).unwrap(), &fock).unwrap();
        let coh = coherent_state_vector(a0, &fock).unwrap();
        assert!((degenerate.fidelity(&coh) - 1.0).abs() < 1e-14);

        let even = cat_state_vector(&CatSpec::new(a0, 1.0, 1.0, 0.0).unwrap(), &fock).unwrap();
        for n in (1..=128).step_by(2) {
            assert!(even.amplitudes[n].norm() < 1e-10);
        }
        assert!(expectation_a(&even).norm() < 1e-10);

        let cat = CatSpec::new(a0, 0.8f64.sqrt(), 0.2f64.sqrt(), std::f64::consts::FRAC_PI_2).unwrap();
        let s = cat_state_vector(&cat, &fock).unwrap();
        assert!((s.norm_sq() - 1.0).abs() < 1e-14);
        let q = expectation_q(&s);
        assert!((q - 0.6 * 2f64.sqrt() * 6.0).abs() < 1e-8, "{q}");
    }
}

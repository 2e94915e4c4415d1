//! Fractional revivals, generalised Gauss sums and the kicked-echo closed forms.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::analytic::{analytic_mean_a_coherent, coherent_matrix_element, squeeze_kick_amplitude};
use super::fock::StateVector;
use super::states::coherent_amplitudes;
use crate::error::{Error, Result};
use crate::model::FockSpaceSpec;
use crate::special::bessel_j_complex;

/// Direct evaluation of `C_k = (1/ν) Σ_{l<ν} exp(-2πi (l² + l(k-1))/ν)`.
pub fn gauss_sum_direct(nu: u32, k: i64) -> Complex64 {
    let n = nu as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for l in 0..n {
        // Reduce the exponent modulo ν before forming the phase.
        let e = (l * l + l * (k - 1)).rem_euclid(n);
        acc += Complex64::from_polar(1.0, -2.0 * PI * e as f64 / nu as f64);
    }
    acc / nu as f64
}

/// Closed form of [`gauss_sum_direct`] for odd `ν`:
/// `ε_ν/sqrt(ν) · exp(2πi h² (k-1)²/ν)` with `h = (ν+1)/2` the inverse of 2 mod ν,
/// `ε_ν = 1` for `ν ≡ 1 (mod 4)` and `-i` for `ν ≡ 3 (mod 4)`.
pub fn gauss_sum_closed_form(nu: u32, k: i64) -> Result<Complex64> {
    if nu % 2 == 0 || nu == 0 {
        return Err(Error::Unsupported(format!("closed-form Gauss sum needs odd nu, got {nu}")));
    }
    let n = nu as i64;
    let h = (n + 1) / 2;
    let m = (k - 1).rem_euclid(n);
    let e = ((h * h).rem_euclid(n) * (m * m).rem_euclid(n)).rem_euclid(n);
    let eps = if nu % 4 == 1 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(0.0, -1.0)
    };
    Ok(eps / (nu as f64).sqrt() * Complex64::from_polar(1.0, 2.0 * PI * e as f64 / nu as f64))
}

/// State at `T_rev/ν` written as `Σ_k C_k |α_k⟩` with `α_k` evenly spaced on the
/// circle of radius `|α0|`.
#[derive(Debug, Clone, PartialEq)]
pub struct RevivalDecomposition {
    pub nu: u32,
    pub coefficients: Vec<Complex64>,
    pub amplitudes: Vec<Complex64>,
}

impl RevivalDecomposition {
    /// `Σ_k C_k |α_k⟩` on the truncated Fock space (not renormalised).
    pub fn reconstruct(&self, fock: &FockSpaceSpec) -> StateVector {
        let mut amps = vec![Complex64::new(0.0, 0.0); fock.dim()];
        for (c, a) in self.coefficients.iter().zip(&self.amplitudes) {
            for (out, v) in amps.iter_mut().zip(coherent_amplitudes(*a, fock.n_max)) {
                *out += c * v;
            }
        }
        StateVector::from_amplitudes(amps)
    }
}

/// Decompose the freely evolved coherent state at `2π/(χν)` into `ν` coherent states
/// `α_k = α0 e^{-2πi/(χν)} e^{2πik/ν}` with coefficients from the direct Gauss sum.
pub fn fractional_revival_decomposition(alpha0: Complex64, chi: f64, nu: u32) -> Result<RevivalDecomposition> {
    if nu < 2 {
        return Err(Error::invalid("nu", format!("must be >= 2, got {nu}")));
    }
    if !(chi > 0.0) {
        return Err(Error::Domain("fractional revivals need chi > 0".into()));
    }
    let base = alpha0 * Complex64::from_polar(1.0, -2.0 * PI / (chi * nu as f64));
    let coefficients = (0..nu as i64).map(|k| gauss_sum_direct(nu, k)).collect();
    let amplitudes = (0..nu)
        .map(|k| base * Complex64::from_polar(1.0, 2.0 * PI * k as f64 / nu as f64))
        .collect();
    Ok(RevivalDecomposition {
        nu,
        coefficients,
        amplitudes,
    })
}

fn require_echo_class(nu: u32) -> Result<()> {
    if nu % 2 == 1 && nu % 4 == 3 {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "echo closed forms hold only for nu = 3 (mod 4), got nu = {nu}"
        )))
    }
}

/// Gauss-sum index `l = (4 r* - 2) mod ν` selected by echo order `r*`.
pub fn selection_rule(nu: u32, r_star: i64) -> Result<u32> {
    require_echo_class(nu)?;
    Ok((4 * r_star - 2).rem_euclid(nu as i64) as u32)
}

/// Post-kick `⟨a(t)⟩` from the `ν`-component superposition at `τ = 2π/(χν)`:
/// each component is displaced to its squeeze-kicked amplitude and the double sum
/// `Σ C_k* C_k' ⟨ᾱ_k| a(t-τ) |ᾱ_k'⟩` is evaluated in closed form.
pub fn kicked_mean_a_superposition(alpha0: Complex64, chi: f64, g0: f64, nu: u32, t: f64) -> Result<Complex64> {
    if nu % 2 == 0 {
        return Err(Error::Unsupported(format!("superposition sum needs odd nu, got {nu}")));
    }
    let dec = fractional_revival_decomposition(alpha0, chi, nu)?;
    let tau = 2.0 * PI / (chi * nu as f64);
    if !(t > tau) {
        return Err(Error::Domain(format!("need t > tau = {tau}, got {t}")));
    }
    let kicked: Vec<Complex64> = dec
        .amplitudes
        .iter()
        .map(|a| squeeze_kick_amplitude(*a, g0, false))
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for (ck, bk) in dec.coefficients.iter().zip(&kicked) {
        for (cl, bl) in dec.coefficients.iter().zip(&kicked) {
            acc += ck.conj() * cl * coherent_matrix_element(*bk, *bl, chi, t - tau);
        }
    }
    Ok(acc)
}

/// Closed-form echo of order `r*` after a kick at `τ = 2π/(χν)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EchoPrediction {
    pub nu: u32,
    pub r_star: i64,
    pub l: u32,
    pub tau: f64,
    /// Echo centre: `2 r* τ` for `r* > 0`, `π/χ + 2 r* τ` for `r* < 0`.
    pub t_center: f64,
    /// `|J_{r*}(i z(t_center))|`, relative to the initial amplitude.
    pub amplitude: f64,
    /// Evaluation time and `z(t)` there.
    pub t: f64,
    pub z: Complex64,
    /// Predicted `⟨a(t)⟩ ≈ J_{r*}(i z(t)) ⟨a(t - 2 r* τ)⟩`.
    pub mean_a: Complex64,
}

/// `z(t) = 2 α0² g0 [e^{-2iχ(t-τ)} - cos(χ l τ)]`.
pub fn echo_argument(alpha0_sq: f64, chi: f64, g0: f64, tau: f64, l: u32, t: f64) -> Complex64 {
    let i = Complex64::i();
    2.0 * alpha0_sq * g0 * ((-2.0 * i * chi * (t - tau)).exp() - (chi * l as f64 * tau).cos())
}

/// Echo prediction for a real initial amplitude `alpha0`.
pub fn kicked_echo_prediction(alpha0: f64, chi: f64, g0: f64, nu: u32, r_star: i64, t: f64) -> Result<EchoPrediction> {
    require_echo_class(nu)?;
    if !(chi > 0.0) {
        return Err(Error::Domain("echo prediction needs chi > 0".into()));
    }
    if r_star == 0 {
        return Err(Error::invalid("r_star", "echo order must be non-zero"));
    }
    let l = selection_rule(nu, r_star)?;
    let tau = 2.0 * PI / (chi * nu as f64);
    let a2 = alpha0 * alpha0;
    let t_center = if r_star > 0 {
        2.0 * r_star as f64 * tau
    } else {
        PI / chi + 2.0 * r_star as f64 * tau
    };
    let i = Complex64::i();
    let zc = echo_argument(a2, chi, g0, tau, l, t_center);
    let amplitude = bessel_j_complex(r_star, i * zc).norm();
    let z = echo_argument(a2, chi, g0, tau, l, t);
    let replay = analytic_mean_a_coherent(Complex64::new(alpha0, 0.0), chi, t - 2.0 * r_star as f64 * tau);
    Ok(EchoPrediction {
        nu,
        r_star,
        l,
        tau,
        t_center,
        amplitude,
        t,
        z,
        mean_a: bessel_j_complex(r_star, i * z) * replay,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_term_gauss_sum() {
        let c1 = gauss_sum_direct(3, 1);
        assert!((c1 - Complex64::new(0.0, -1.0 / 3f64.sqrt())).norm() < 1e-15);
        assert!((gauss_sum_closed_form(3, 1).unwrap() - c1).norm() < 1e-15);
        assert!((gauss_sum_closed_form(5, 1).unwrap() - Complex64::new(1.0 / 5f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!(matches!(gauss_sum_closed_form(4, 1), Err(Error::Unsupported(_))));
    }

    #[test]
    fn table_of_selection_rule() {
        let want = [(3, 10), (2, 6), (1, 2), (-1, 17), (-2, 13), (-3, 9)];
        for (r, l) in want {
            assert_eq!(selection_rule(23, r).unwrap(), l, "r* = {r}");
        }
        assert!(selection_rule(21, 1).is_err());
        assert!(selection_rule(22, 1).is_err());
    }

    #[test]
    fn decomposition_points_lie_on_circle() {
        let d = fractional_revival_decomposition(Complex64::new(3.0, 0.0), 1.0, 7).unwrap();
        assert_eq!(d.coefficients.len(), 7);
        assert!(d.amplitudes.iter().all(|a| (a.norm() - 3.0).abs() < 1e-14));
    }

    #[test]
    fn echo_prediction_guards() {
        assert!(matches!(kicked_echo_prediction(6.0, 1.0, 0.01, 21, 1, 1.0), Err(Error::Unsupported(_))));
        let p = kicked_echo_prediction(6.0, 1.0, 0.0, 23, 1, 0.6).unwrap();
        assert_eq!(p.amplitude, 0.0);
        assert_eq!(p.mean_a, Complex64::new(0.0, 0.0));
    }
}

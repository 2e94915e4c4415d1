//! Closed-form expectation values for free coherent and cat states.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::CatSpec;

/// `⟨β| a(t) |α⟩` for the free Kerr oscillator (Heisenberg picture):
///
/// `α e^{-it} exp(-(|α|² + |β|²)/2 + β* α e^{-2iχt})`.
pub fn coherent_matrix_element(beta: Complex64, alpha: Complex64, chi: f64, t: f64) -> Complex64 {
    let i = Complex64::i();
    let expo = -0.5 * (alpha.norm_sqr() + beta.norm_sqr()) + beta.conj() * alpha * (-2.0 * i * chi * t).exp();
    alpha * (-i * t).exp() * expo.exp()
}

/// `⟨a(t)⟩ = α0 e^{-it} exp(|α0|² (e^{-2iχt} - 1))` for a free coherent state.
pub fn analytic_mean_a_coherent(alpha0: Complex64, chi: f64, t: f64) -> Complex64 {
    let i = Complex64::i();
    alpha0 * (-i * t).exp() * (alpha0.norm_sqr() * ((-2.0 * i * chi * t).exp() - 1.0)).exp()
}

/// `⟨a(t)⟩` of the freely evolving, normalised cat state.
///
/// The diagonal terms carry the half revivals; the cross terms between
/// `|α0⟩` and `|-α0⟩` carry the quarter revivals, whose sign follows `sin θ`.
pub fn analytic_mean_a_cat(cat: &CatSpec, chi: f64, t: f64) -> Complex64 {
    let a = cat.alpha0;
    let phase = Complex64::from_polar(1.0, cat.theta);
    let (np, nm) = (cat.n_plus, cat.n_minus);
    let direct = np * np * coherent_matrix_element(a, a, chi, t) + nm * nm * coherent_matrix_element(-a, -a, chi, t);
    let cross = np * nm * (phase * coherent_matrix_element(a, -a, chi, t) + phase.conj() * coherent_matrix_element(-a, a, chi, t));
    (direct + cross) / cat.norm_sq()
}

/// Revival time `2π/χ` and the requested fractional revival times `T_rev/ν`.
pub fn revival_times(chi: f64, fractions: &[u32]) -> Result<(f64, Vec<f64>)> {
    if !(chi > 0.0) || !chi.is_finite() {
        return Err(Error::Domain(format!("no revivals for chi = {chi}")));
    }
    let t_rev = 2.0 * PI / chi;
    let mut out = Vec::with_capacity(fractions.len());
    for &nu in fractions {
        if nu == 0 {
            return Err(Error::invalid("nu", "fractional revival order must be >= 1"));
        }
        out.push(t_rev / nu as f64);
    }
    Ok((t_rev, out))
}

/// Coherent amplitude after an impulsive kick, neglecting vacuum squeezing:
/// `cosh(g0) α + i sinh(g0) α*`, or `α + i g0 α*` when `linearized`.
pub fn squeeze_kick_amplitude(alpha: Complex64, g0: f64, linearized: bool) -> Complex64 {
    let i = Complex64::i();
    if linearized {
        alpha + i * g0 * alpha.conj()
    } else {
        g0.cosh() * alpha + i * g0.sinh() * alpha.conj()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn coherent_mean_examples() {
        let a0 = c(6.0, 0.0);
        assert_eq!(analytic_mean_a_coherent(a0, 1.0, 0.0), a0);
        assert!((analytic_mean_a_coherent(a0, 1.0, PI) + a0).norm() < 1e-12);
        let q = analytic_mean_a_coherent(a0, 1.0, FRAC_PI_2).norm();
        assert!((q / (6.0 * (-72f64).exp()) - 1.0).abs() < 1e-12);
        assert!((coherent_matrix_element(a0, a0, 1.0, 0.4) - analytic_mean_a_coherent(a0, 1.0, 0.4)).norm() < 1e-12);
        let b = c(1.0, -0.5);
        assert!((coherent_matrix_element(b, b, 0.3, 0.0) - b).norm() < 1e-15);
    }

    #[test]
    fn cat_mean_examples() {
        let a0 = c(6.0, 0.0);
        let sym = CatSpec::new(a0, 1.0, 1.0, 0.0).unwrap();
        for &t in &[0.0, 0.3, FRAC_PI_2, PI] {
            assert!(analytic_mean_a_cat(&sym, 1.0, t).norm() < 1e-12);
        }
        let fig = CatSpec::new(a0, 0.8f64.sqrt(), 0.2f64.sqrt(), FRAC_PI_2).unwrap();
        let q = 2f64.sqrt() * analytic_mean_a_cat(&fig, 1.0, FRAC_PI_2).re;
        let want = -2.0 * 2f64.sqrt() * 6.0 * 0.8f64.sqrt() * 0.2f64.sqrt();
        assert!((q - want).abs() < 1e-10, "{q} vs {want}");
        assert!((want + 6.788).abs() < 1e-3);
        let flipped = CatSpec { theta: -FRAC_PI_2, ..fig };
        let qf = 2f64.sqrt() * analytic_mean_a_cat(&flipped, 1.0, FRAC_PI_2).re;
        assert!((qf + q).abs() < 1e-10);
        let half = 2f64.sqrt() * analytic_mean_a_cat(&fig, 1.0, PI).re;
        let half_f = 2f64.sqrt() * analytic_mean_a_cat(&flipped, 1.0, PI).re;
        assert!((half - half_f).abs() < 1e-10);
    }

    #[test]
    fn revival_time_examples() {
        let (t, f) = revival_times(1.0, &[2, 4]).unwrap();
        assert!((t - 2.0 * PI).abs() < 1e-15);
        assert!((f[0] - PI).abs() < 1e-15 && (f[1] - FRAC_PI_2).abs() < 1e-15);
        assert!((revival_times(2.0, &[]).unwrap().0 - PI).abs() < 1e-15);
        assert!(matches!(revival_times(0.0, &[]), Err(Error::Domain(_))));
    }

    #[test]
    fn squeeze_examples() {
        let s = squeeze_kick_amplitude(c(6.0, 0.0), 0.01, false);
        assert!((s.re - 6.0 * 0.01f64.cosh()).abs() < 1e-14);
        assert!((s.im - 6.0 * 0.01f64.sinh()).abs() < 1e-14);
        assert!((s - c(6.0003, 0.0600)).norm() < 1e-4);
        assert_eq!(squeeze_kick_amplitude(c(1.0, 2.0), 0.0, false), c(1.0, 2.0));
        let s = squeeze_kick_amplitude(c(0.0, 6.0), 0.01, false);
        assert!((s - c(0.06, 6.0003)).norm() < 1e-4);
        assert_eq!(squeeze_kick_amplitude(c(6.0, 0.0), 0.01, true), c(6.0, 0.06));
    }
}

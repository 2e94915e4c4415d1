//! Closed-form and quadrature results for the classical ensemble.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::special::{bessel_i_scaled, bessel_j, bessel_j_seq};

/// Value with a flag marking evaluation outside the approximation's validity regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flagged {
    pub value: f64,
    pub extrapolated: bool,
}

/// Phase-space density at polar coordinates `(φ, r)` for an ensemble started as a
/// Gaussian of width `1/√2` centred on `(q0, 0)`, per unit phase-space area.
pub fn phase_space_density_analytic(phi: f64, r: f64, t: f64, q0: f64, chi: f64) -> f64 {
    let s2 = 0.5;
    let omega = 1.0 + chi * r * r;
    let arg = (q0 * q0 + r * r - 2.0 * q0 * r * (phi - omega * t).cos()) / (2.0 * s2);
    (-arg).exp() / (2.0 * PI * s2)
}

/// One revolution of the filament spiral: ring centre `r_k(φ)` and width `σ_k(φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilamentRing {
    pub k: i64,
    pub r_k: f64,
    pub sigma_k: f64,
}

/// Ring centre `r_k(φ)`, or `None` when `(2πk + φ)/t <= 1`.
pub fn filament_radius(k: i64, phi: f64, t: f64, chi: f64) -> Option<f64> {
    let x = (2.0 * PI * k as f64 + phi) / t - 1.0;
    (x > 0.0).then(|| (x / chi).sqrt())
}

/// Ring width `σ_k(φ)`.
pub fn filament_width(k: i64, phi: f64, t: f64, q0: f64, chi: f64, sigma: f64) -> Option<f64> {
    let x = 2.0 * PI * k as f64 + phi - t;
    (x > 0.0).then(|| sigma / (2.0 * q0.sqrt() * chi.powf(0.25) * t.powf(0.25) * x.powf(0.75)))
}

/// Rings whose centres fall inside `[r_lo, r_hi]`.
pub fn filament_rings(phi: f64, t: f64, q0: f64, chi: f64, r_lo: f64, r_hi: f64) -> Result<Vec<FilamentRing>> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("filament approximation needs t > 0, got {t}")));
    }
    if !(chi > 0.0) {
        return Err(Error::Domain("filament approximation needs chi > 0".into()));
    }
    let sigma = std::f64::consts::FRAC_1_SQRT_2;
    // r_k² = ((2πk + φ)/t - 1)/χ, so k ranges over a contiguous block.
    let k_of = |r: f64| ((chi * r * r + 1.0) * t - phi) / (2.0 * PI);
    let k_lo = k_of(r_lo.max(0.0)).floor() as i64;
    let k_hi = k_of(r_hi).ceil() as i64;
    let mut rings = Vec::new();
    for k in k_lo.max(0)..=k_hi {
        if let (Some(r_k), Some(sigma_k)) = (
            filament_radius(k, phi, t, chi),
            filament_width(k, phi, t, q0, chi, sigma),
        ) {
            if (r_lo..=r_hi).contains(&r_k) {
                rings.push(FilamentRing { k, r_k, sigma_k });
            }
        }
    }
    Ok(rings)
}

/// Ring-sum approximation of the filamented density, in the same
/// normalisation as [`phase_space_density_analytic`].
pub fn filament_approximation(phi: f64, r: f64, t: f64, q0: f64, chi: f64) -> Result<f64> {
    let sigma = std::f64::consts::FRAC_1_SQRT_2;
    let s2 = sigma * sigma;
    let rings = filament_rings(phi, t, q0, chi, 0.0, q0 + 12.0 * sigma)?;
    let sum: f64 = rings
        .iter()
        .map(|ring| {
            let d = (r - ring.r_k) / ring.sigma_k;
            (-0.5 * d * d).exp()
        })
        .sum();
    Ok((-(r - q0) * (r - q0) / (2.0 * s2)).exp() / (2.0 * PI * s2) * sum)
}

/// Short-time decay of the free ensemble mean,
/// `q0 exp(-2 q0² σ² χ² t²) cos((1 + χ q0²) t)`.
///
/// Flagged as extrapolated when `4 σ⁴ χ² t² > 0.1`.
pub fn analytic_mean_q_free(t: f64, q0: f64, chi: f64, sigma: f64) -> Flagged {
    let s2 = sigma * sigma;
    let value = q0 * (-2.0 * q0 * q0 * s2 * chi * chi * t * t).exp() * ((1.0 + chi * q0 * q0) * t).cos();
    Flagged {
        value,
        extrapolated: 4.0 * s2 * s2 * chi * chi * t * t > 0.1,
    }
}

/// Exact free ensemble mean `⟨q(t)⟩` for an isotropic Gaussian of width `sigma`
/// centred on `(q0, p0)`.
///
/// With `z = q - i p` each orbit contributes `Re[z e^{i(1 + χ|z|²)t}]`; the Gaussian
/// average of that expression is available in closed form.
pub fn exact_gaussian_mean_q_free(t: f64, q0: f64, p0: f64, chi: f64, sigma: f64) -> f64 {
    exact_gaussian_mean_z_free(t, q0, p0, chi, sigma).re
}

/// `⟨q(t)⟩ - i⟨p(t)⟩` of the freely evolving Gaussian ensemble.
pub fn exact_gaussian_mean_z_free(t: f64, q0: f64, p0: f64, chi: f64, sigma: f64) -> Complex64 {
    let z0 = Complex64::new(q0, -p0);
    let i = Complex64::i();
    let d = Complex64::new(1.0, -2.0 * chi * t * sigma * sigma);
    (i * t).exp() * z0 / (d * d) * (i * chi * t * z0.norm_sqr() / d).exp()
}

/// Relative first-echo amplitude `J₁(2 χ τ g0 q0²)` for a weak kick.
pub fn first_echo_amplitude(q0: f64, chi: f64, g0: f64, tau: f64) -> f64 {
    bessel_j(1, 2.0 * chi * tau * g0 * q0 * q0)
}

/// Integration range in `r` used by the radial integrals.
fn radial_range(q0: f64, sigma: f64) -> (f64, f64) {
    ((q0 - 8.0 * sigma).max(0.0), q0 + 8.0 * sigma)
}

/// Post-kick ensemble mean as the sum over echo orders `n = 1..=n_terms` of the
/// radial integrals
///
/// `(1/σ²) ∫ r² e^{-(r-q0)²/2σ²} Ĩ_{2n-1}(q0 r/σ²) J_n(2χ g0 r² (t-τ)) e^{iΩ(r)(t-2nτ)} dr`,
///
/// where `Ĩ_ν(x) = e^{-x} I_ν(x)`. Only the real part is returned.
#[allow(clippy::too_many_arguments)]
pub fn classical_echo_series(
    t: f64,
    q0: f64,
    chi: f64,
    g0: f64,
    tau: f64,
    sigma: f64,
    n_terms: usize,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if !(t > tau) {
        return Err(Error::Domain(format!("echo series needs t > tau, got t = {t}, tau = {tau}")));
    }
    if n_terms == 0 {
        return Err(Error::invalid("n_terms", "must be >= 1"));
    }
    let terms: Vec<i64> = (1..=n_terms as i64).collect();
    radial_series(t, q0, chi, g0, tau, sigma, &terms, quad).map(|z| z.re)
}

/// Single echo order `n` of [`classical_echo_series`] as a complex number.
/// `n = 0` with `g0 = 0` reproduces the free mean.
#[allow(clippy::too_many_arguments)]
pub fn classical_echo_term(
    n: i64,
    t: f64,
    q0: f64,
    chi: f64,
    g0: f64,
    tau: f64,
    sigma: f64,
    quad: &QuadratureSpec,
) -> Result<Complex64> {
    radial_series(t, q0, chi, g0, tau, sigma, &[n], quad)
}

#[allow(clippy::too_many_arguments)]
fn radial_series(
    t: f64,
    q0: f64,
    chi: f64,
    g0: f64,
    tau: f64,
    sigma: f64,
    orders: &[i64],
    quad: &QuadratureSpec,
) -> Result<Complex64> {
    let s2 = sigma * sigma;
    let (a, b) = radial_range(q0, sigma);
    let n_hi = orders.iter().map(|n| n.unsigned_abs() as usize).max().unwrap_or(0);
    let integrand = |r: f64| {
        let x = q0 * r / s2;
        let gauss = (-(r - q0) * (r - q0) / (2.0 * s2)).exp();
        let js = bessel_j_seq(n_hi, 2.0 * chi * g0 * r * r * (t - tau));
        let omega = 1.0 + chi * r * r;
        let mut acc = Complex64::new(0.0, 0.0);
        for &n in orders {
            let order = (2 * n - 1).unsigned_abs() as u32;
            let jn = {
                let v = js[n.unsigned_abs() as usize];
                if n < 0 && n % 2 != 0 {
                    -v
                } else {
                    v
                }
            };
            if jn == 0.0 {
                continue;
            }
            let phase = omega * (t - 2.0 * n as f64 * tau);
            acc += jn * bessel_i_scaled(order, x) * Complex64::from_polar(1.0, phase);
        }
        acc * (r * r * gauss / s2)
    };
    // Scale the absolute floor to the signal size so tiny echoes still converge.
    let spec = QuadratureSpec {
        abs_tol: quad.abs_tol.max(1e-12 * q0),
        ..*quad
    };
    integrate(integrand, a, b, &spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q0: f64 = 8.485_281_374_238_571;
    const SIGMA: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn free_decay_examples() {
        assert_eq!(analytic_mean_q_free(0.0, Q0, 1.0, SIGMA).value, Q0);
        // 1/e envelope time 1/(q0 χ).
        let t = 1.0 / Q0;
        let env = (-2.0 * Q0 * Q0 * 0.5 * t * t).exp();
        assert!((env - (-1f64).exp()).abs() < 1e-14);
        assert!((t - 0.117_85).abs() < 1e-5);
        let h = analytic_mean_q_free(2.3, 3.0, 0.0, SIGMA);
        assert!((h.value - 3.0 * 2.3f64.cos()).abs() < 1e-14);
        assert!(!analytic_mean_q_free(0.3, Q0, 1.0, SIGMA).extrapolated);
        assert!(analytic_mean_q_free(1.0, Q0, 1.0, SIGMA).extrapolated);
    }

    #[test]
    fn exact_mean_limits() {
        assert!((exact_gaussian_mean_q_free(0.0, Q0, 0.0, 1.0, SIGMA) - Q0).abs() < 1e-14);
        let v = exact_gaussian_mean_q_free(1.7, 2.0, 1.0, 0.0, SIGMA);
        assert!((v - (2.0 * 1.7f64.cos() + 1.0 * 1.7f64.sin())).abs() < 1e-14);
    }

    #[test]
    fn radial_integral_reproduces_exact_free_mean() {
        let quad = QuadratureSpec::default();
        for &t in &[0.02, 0.1, 0.35] {
            let z = classical_echo_term(0, t, Q0, 1.0, 0.0, 0.0, SIGMA, &quad).unwrap();
            let want = exact_gaussian_mean_q_free(t, Q0, 0.0, 1.0, SIGMA);
            assert!((z.re - want).abs() < 1e-7 * Q0, "t={t}: {} vs {want}", z.re);
        }
    }

    #[test]
    fn echo_series_vanishes_without_kick() {
        let v = classical_echo_series(1.0, Q0, 1.0, 0.0, 0.5, SIGMA, 8, &QuadratureSpec::default()).unwrap();
        assert_eq!(v, 0.0);
        assert!(classical_echo_series(0.4, Q0, 1.0, 0.01, 0.5, SIGMA, 8, &QuadratureSpec::default()).is_err());
    }

    #[test]
    fn first_echo_amplitude_examples() {
        assert!((first_echo_amplitude(Q0, 1.0, 0.01, 0.5) - 0.337_170_477_956_162_9).abs() < 1e-12);
        assert_eq!(first_echo_amplitude(Q0, 1.0, 0.0, 0.5), 0.0);
        let a = first_echo_amplitude(1.0, 1.0, 0.001, 0.5);
        let b = first_echo_amplitude(1.0, 1.0, 0.002, 0.5);
        assert!((b / a - 2.0).abs() < 0.03);
    }

    #[test]
    fn density_peak_and_corotation() {
        let peak = phase_space_density_analytic(0.0, Q0, 0.0, Q0, 1.0);
        for &(phi, r) in &[(0.1, Q0), (0.0, Q0 + 0.2), (-0.05, Q0 - 0.1)] {
            assert!(phase_space_density_analytic(phi, r, 0.0, Q0, 1.0) < peak);
        }
        let (phi, r, t, s) = (0.3, 8.0, 0.2, 0.07);
        let omega = 1.0 + r * r;
        let a = phase_space_density_analytic(phi, r, t, Q0, 1.0);
        let b = phase_space_density_analytic(phi + omega * s, r, t + s, Q0, 1.0);
        assert!((a - b).abs() < 1e-12 * a.max(1e-300));
    }

    #[test]
    fn filament_requires_positive_time() {
        assert!(matches!(filament_approximation(0.0, Q0, 0.0, Q0, 1.0), Err(Error::Domain(_))));
        assert_eq!(filament_radius(0, 0.5, 1.0, 1.0), None);
        assert!(filament_radius(1, 0.5, 1.0, 1.0).is_some());
    }
}

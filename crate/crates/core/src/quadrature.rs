//! Globally adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    /// Absolute error target below which the relative criterion is waived.
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-14,
            max_intervals: 2000,
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

fn kronrod<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    let value = k * h;
    let error = ((k - g) * h).norm();
    Segment { a, b, value, error }
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    // Start from a handful of panels so narrow oscillatory features are seen.
    let n0 = 8;
    let mut segs: Vec<Segment> = (0..n0)
        .map(|i| {
            let lo = a + (b - a) * i as f64 / n0 as f64;
            let hi = a + (b - a) * (i + 1) as f64 / n0 as f64;
            kronrod(&mut f, lo, hi)
        })
        .collect();
    loop {
        let total: Complex64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.error).sum();
        let target = (spec.rel_tol * total.norm()).max(spec.abs_tol);
        if err <= target {
            return Ok(total);
        }
        if segs.len() >= spec.max_intervals {
            return Err(Error::Quadrature {
                achieved: err,
                requested: target,
            });
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty");
        let s = segs.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            return Err(Error::Quadrature {
                achieved: err,
                requested: target,
            });
        }
        segs.push(kronrod(&mut f, s.a, mid));
        segs.push(kronrod(&mut f, mid, s.b));
    }
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    integrate(|x| Complex64::new(f(x), 0.0), a, b, spec).map(|c| c.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate_real(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, &QuadratureSpec::default()).unwrap();
        assert!((v - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_complex() {
        // ∫_0^10 e^{i 7 x} dx = (e^{70 i} - 1) / (7 i)
        let v = integrate(
            |x| Complex64::new(0.0, 7.0 * x).exp(),
            0.0,
            10.0,
            &QuadratureSpec::default(),
        )
        .unwrap();
        let want = (Complex64::new(0.0, 70.0).exp() - 1.0) / Complex64::new(0.0, 7.0);
        assert!((v - want).norm() < 1e-10);
    }

    #[test]
    fn reports_non_convergence() {
        let spec = QuadratureSpec {
            rel_tol: 1e-14,
            abs_tol: 0.0,
            max_intervals: 10,
        };
        let r = integrate_real(|x| (1.0 / x).sin(), 1e-6, 1.0, &spec);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}

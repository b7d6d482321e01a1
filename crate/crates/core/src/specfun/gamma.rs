//! Complex log-gamma, real log-gamma with sign, and Pochhammer symbols.
//!
//! The complex routine uses a Lanczos sum on `Re z >= 1/2` and the reflection
//! formula elsewhere. The reflection is written so that the result is the
//! analytic continuation of `ln Γ` from the positive axis (branch cut on the
//! negative real axis), not merely `ln(Γ(z))` up to a multiple of `2πi`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln(2π)/2
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Distance to a nonpositive integer below which the argument counts as a pole.
pub const POLE_TOLERANCE: f64 = 1e-12;

/// Returns the nonpositive integer `z` sits on, if any.
pub fn nonpositive_integer(z: Complex64) -> Option<i64> {
    if z.im.abs() > POLE_TOLERANCE || z.re > 0.5 {
        return None;
    }
    let k = z.re.round();
    if (z.re - k).abs() <= POLE_TOLERANCE {
        Some(k as i64)
    } else {
        None
    }
}

/// Principal-branch `ln Γ(z)`.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite argument {z}")));
    }
    if nonpositive_integer(z).is_some() {
        return Err(Error::Pole(format!("{z}")));
    }
    Ok(ln_gamma_unchecked(z))
}

/// `ln Γ(z)` without the pole check. At a pole the result is not finite.
pub fn ln_gamma_unchecked(z: Complex64) -> Complex64 {
    if z.re >= 0.5 {
        return lanczos(z);
    }
    if z.im < 0.0 {
        return ln_gamma_unchecked(z.conj()).conj();
    }
    // Im z >= 0, Re z < 1/2
    Complex64::new(PI.ln(), 0.0) - ln_sin_pi_upper(z) - lanczos(Complex64::new(1.0, 0.0) - z)
}

fn lanczos(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut acc = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (z + 0.5) * t.ln() - t + acc.ln() + HALF_LN_2PI
}

/// Branch of `ln sin(πz)` analytic in the closed upper half plane.
///
/// Uses `sin(πz) = (i/2) e^{-iπz} (1 - e^{2πiz})`; the integer part of `Re z`
/// is removed before exponentiating so that `1 - e^{2πiz}` keeps full
/// relative accuracy next to the zeros.
fn ln_sin_pi_upper(z: Complex64) -> Complex64 {
    let k = z.re.round();
    let f = Complex64::new(z.re - k, z.im);
    let u = Complex64::new(0.0, 2.0 * PI) * f;
    let one_minus = -expm1(u);
    Complex64::new(0.0, -PI) * z + one_minus.ln() + Complex64::new((0.5f64).ln(), PI / 2.0)
}

/// `e^u - 1` without cancellation for small `u`.
fn expm1(u: Complex64) -> Complex64 {
    let (s, c) = u.im.sin_cos();
    let half = (0.5 * u.im).sin();
    let em1 = u.re.exp_m1();
    Complex64::new(em1 * c - 2.0 * half * half, u.re.exp() * s)
}

/// `ln|Γ(x)|` and the sign of `Γ(x)` for real `x`.
pub fn ln_gamma_real(x: f64) -> Result<(f64, f64)> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("non-finite argument {x}")));
    }
    if x <= 0.0 && (x - x.round()).abs() <= POLE_TOLERANCE {
        return Err(Error::Pole(format!("{x}")));
    }
    Ok(ln_gamma_real_unchecked(x))
}

pub(crate) fn ln_gamma_real_unchecked(x: f64) -> (f64, f64) {
    if x >= 0.5 {
        return (lanczos(Complex64::new(x, 0.0)).re, 1.0);
    }
    // Γ(x)Γ(1-x) = π / sin(πx)
    let k = x.round();
    let f = x - k;
    let mut s = (PI * f).sin();
    if (k as i64) % 2 != 0 {
        s = -s;
    }
    let lg = lanczos(Complex64::new(1.0 - x, 0.0)).re;
    (PI.ln() - s.abs().ln() - lg, s.signum())
}

/// `1/Γ(x)` for real `x`, exactly zero at the poles.
pub fn recip_gamma_real(x: f64) -> f64 {
    if x <= 0.0 && (x - x.round()).abs() <= POLE_TOLERANCE {
        return 0.0;
    }
    let (lg, sign) = ln_gamma_real_unchecked(x);
    sign * (-lg).exp()
}

/// Rising factorial `a(a+1)...(a+k-1)` by direct product.
pub fn pochhammer(a: Complex64, k: usize) -> Complex64 {
    (0..k).fold(Complex64::new(1.0, 0.0), |acc, i| acc * (a + i as f64))
}

/// Real rising factorial.
pub fn pochhammer_real(a: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (a + i as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn known_values() {
        assert!(log_gamma(c(1.0, 0.0)).unwrap().norm() < 1e-15);
        assert!((log_gamma(c(5.0, 0.0)).unwrap().re - 24f64.ln()).abs() < 1e-14);
        assert!((log_gamma(c(0.5, 0.0)).unwrap().re - 0.572_364_942_924_700_1).abs() < 1e-14);
        let (l, s) = ln_gamma_real(-0.5).unwrap();
        // Γ(-1/2) = -2√π
        assert!((l - (2.0 * PI.sqrt()).ln()).abs() < 1e-14);
        assert_eq!(s, -1.0);
    }

    #[test]
    fn poles_are_rejected() {
        for k in 0..5 {
            assert!(matches!(log_gamma(c(-(k as f64), 0.0)), Err(Error::Pole(_))));
        }
        assert!(log_gamma(c(-2.0, 1e-6)).is_ok());
        assert_eq!(recip_gamma_real(-3.0), 0.0);
    }

    #[test]
    fn branch_is_continuous_across_reflection_seam() {
        for &y in &[1e-3, 0.7, 3.0, 40.0, 150.0] {
            let a = ln_gamma_unchecked(c(0.5 + 1e-9, y));
            let b = ln_gamma_unchecked(c(0.5 - 1e-9, y));
            assert!((a - b).norm() < 1e-7, "y={y}: {a} vs {b}");
        }
    }

    #[test]
    fn principal_branch_matches_log_sum() {
        // ln Γ(z) = ln Γ(z+N) - Σ ln(z+k) is the analytic continuation for Im z != 0.
        for &(x, y) in &[(-3.3, 0.2), (-10.7, 2.5), (-0.2, -0.4), (-25.5, 7.0)] {
            let z = c(x, y);
            let mut sum = ln_gamma_unchecked(z + 40.0);
            for k in 0..40 {
                sum -= (z + k as f64).ln();
            }
            let direct = ln_gamma_unchecked(z);
            assert!((direct - sum).norm() < 1e-10, "{z}: {direct} vs {sum}");
        }
    }

    #[test]
    fn large_imaginary_parts_stay_finite() {
        let v = log_gamma(c(-150.3, 200.0)).unwrap();
        assert!(v.re.is_finite() && v.im.is_finite());
        let v = log_gamma(c(0.2, -200.0)).unwrap();
        assert!(v.re.is_finite());
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(pochhammer(c(2.0, 0.0), 0), c(1.0, 0.0));
        assert_eq!(pochhammer(c(3.0, 0.0), 2), c(12.0, 0.0));
        assert_eq!(pochhammer(c(0.0, 0.0), 2), c(0.0, 0.0));
        assert_eq!(pochhammer_real(-2.0, 3), 0.0);
    }
}

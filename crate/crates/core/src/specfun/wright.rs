//! Wright's generalized Bessel function `J_{a,b}(x) = Σ (-x)^j / (j! Γ(a + j b))`.

use crate::error::{Error, Result};
use crate::specfun::gamma::ln_gamma_real_unchecked;

/// Parameters `(a, b)` of `J_{a,b}`; `b` must be positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrightParams {
    pub a: f64,
    pub b: f64,
}

impl WrightParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > 0.0) {
            return Err(Error::Domain(format!("Wright parameters need b > 0, got a={a}, b={b}")));
        }
        Ok(Self { a, b })
    }
}

pub const DEFAULT_X_MAX: f64 = 1e4;
const MAX_TERMS: usize = 10_000;
const REL_STOP: f64 = 1e-16;

/// Running sum with Neumaier compensation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Evaluates `J_{a,b}(x)` for `0 <= x <= DEFAULT_X_MAX`.
pub fn wright_bessel(p: WrightParams, x: f64) -> Result<f64> {
    wright_bessel_bounded(p, x, DEFAULT_X_MAX)
}

/// As [`wright_bessel`] with an explicit domain bound.
pub fn wright_bessel_bounded(p: WrightParams, x: f64, x_max: f64) -> Result<f64> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("Wright argument must be >= 0, got {x}")));
    }
    if x > x_max {
        return Err(Error::Domain(format!("Wright argument {x} exceeds X_max = {x_max}")));
    }
    let term = |j: usize| -> f64 {
        let arg = p.a + j as f64 * p.b;
        if arg <= 0.0 && (arg - arg.round()).abs() < 1e-14 {
            return 0.0;
        }
        let (lg, sign) = ln_gamma_real_unchecked(arg);
        let (lf, _) = ln_gamma_real_unchecked(j as f64 + 1.0);
        let lx = if j == 0 { 0.0 } else { j as f64 * x.ln() };
        let mag = (lx - lf - lg).exp();
        let parity = if j % 2 == 0 { 1.0 } else { -1.0 };
        parity * sign * mag
    };
    if x == 0.0 {
        return Ok(term(0));
    }
    let mut acc = CompensatedSum::default();
    let mut prev = f64::INFINITY;
    let mut small_run = 0;
    for j in 0..MAX_TERMS {
        let t = term(j);
        acc.add(t);
        let mag = t.abs();
        // past the peak the magnitudes decrease; zero terms from 1/Γ poles do not count
        let decreasing = mag <= prev || mag == 0.0;
        if mag != 0.0 {
            prev = mag;
        }
        let arg = p.a + j as f64 * p.b;
        if decreasing && arg > 1.0 && mag <= REL_STOP * acc.value().abs().max(f64::MIN_POSITIVE) {
            small_run += 1;
            if small_run >= 3 {
                return Ok(acc.value());
            }
        } else if decreasing && arg > 1.0 && mag == 0.0 {
            small_run += 1;
        } else {
            small_run = 0;
        }
    }
    Err(Error::Convergence(format!(
        "Wright series J_({},{}) at x={x} did not settle within {MAX_TERMS} terms",
        p.a, p.b
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// J_0 by its power series Σ (-1)^k (z/2)^{2k} / (k!)^2.
    fn bessel_j0(z: f64) -> f64 {
        let q = -(z * z) / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            term *= q / (k as f64 * k as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn trivial_values() {
        let w = |a, b, x| wright_bessel(WrightParams::new(a, b).unwrap(), x).unwrap();
        assert!((w(1.0, 1.0, 0.0) - 1.0).abs() < 1e-15);
        assert!((w(3.0, 1.0, 0.0) - 0.5).abs() < 1e-15);
        assert_eq!(w(0.0, 1.0, 0.0), 0.0);
    }

    #[test]
    fn reduces_to_classical_bessel() {
        let p = WrightParams::new(1.0, 1.0).unwrap();
        for &x in &[0.3, 1.0, 4.0, 12.0] {
            let v = wright_bessel(p, x).unwrap();
            assert!((v - bessel_j0(2.0 * x.sqrt())).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn domain_guard() {
        let p = WrightParams::new(1.0, 1.0).unwrap();
        assert!(matches!(wright_bessel(p, 2e4), Err(Error::Domain(_))));
        assert!(matches!(wright_bessel(p, -1.0), Err(Error::Domain(_))));
        assert!(WrightParams::new(1.0, 0.0).is_err());
    }

    #[test]
    fn nonpositive_integer_gamma_terms_vanish() {
        // a = -1, b = 1: terms j = 0, 1 have 1/Γ(-1) = 1/Γ(0) = 0, so J = Σ_{j>=2}
        let p = WrightParams::new(-1.0, 1.0).unwrap();
        let x: f64 = 0.7;
        let direct: f64 = (2..60)
            .map(|j| {
                let lf = ln_gamma_real_unchecked(j as f64 + 1.0).0;
                let lg = ln_gamma_real_unchecked(j as f64 - 1.0).0;
                (-x).powi(j) * (-lf - lg).exp()
            })
            .sum();
        assert!((wright_bessel(p, x).unwrap() - direct).abs() < 1e-15);
    }
}

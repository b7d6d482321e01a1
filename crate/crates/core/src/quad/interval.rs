use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use super::{settled, QuadratureResult};
use crate::error::{Error, Result};

const MIN_LEVEL: usize = 3;
const MAX_LEVEL: usize = 12;

/// `∫_0^1 f(u) du` for `f = u^{p0} (1-u)^{p1} · (smooth)`, by tanh-sinh.
///
/// The endpoint powers fix how close to 0 and 1 the nodes are taken: the
/// mass dropped near an endpoint with power `p` and cut `ε` is `ε^{p+1}/(p+1)`
/// times the size of the smooth factor there.
pub fn integrate_unit_interval<F>(integrand: F, endpoint_powers: (f64, f64), tolerance: f64) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    integrate_unit_interval_abs(integrand, endpoint_powers, tolerance, 0.0)
}

/// As [`integrate_unit_interval`], also accepting successive estimates that
/// differ by at most `absolute`, for integrals whose value may be 0.
pub fn integrate_unit_interval_abs<F>(
    integrand: F,
    endpoint_powers: (f64, f64),
    tolerance: f64,
    absolute: f64,
) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    unit_interval(integrand, endpoint_powers, tolerance, absolute, 0.0)
}

/// As [`integrate_unit_interval`] for an integrand whose values carry relative
/// errors up to `noise`: successive estimates within `noise·∫|f|` are accepted.
pub fn integrate_unit_interval_noisy<F>(
    integrand: F,
    endpoint_powers: (f64, f64),
    tolerance: f64,
    noise: f64,
) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    unit_interval(integrand, endpoint_powers, tolerance, 0.0, noise)
}

fn unit_interval<F>(integrand: F, endpoint_powers: (f64, f64), tolerance: f64, absolute: f64, noise: f64) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    let (p0, p1) = endpoint_powers;
    if !(p0 > -1.0 && p1 > -1.0) {
        return Err(Error::Domain(format!("endpoint powers must exceed -1, got ({p0}, {p1})")));
    }
    if !(tolerance > 0.0) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let cut = |p: f64| (1e-2 * tolerance).powf(1.0 / (p + 1.0)).max(1e-300);
    let (lo_cut, hi_cut) = (cut(p0), cut(p1));
    // node at t: v = (π/2) sinh t, u = 1/(1+e^{-2v}), 1-u = 1/(1+e^{2v})
    let node = |t: f64| -> Option<(f64, f64)> {
        let v = FRAC_PI_2 * t.sinh();
        let (u, cu) = if v >= 0.0 {
            let e = (-2.0 * v).exp();
            (1.0 / (1.0 + e), e / (1.0 + e))
        } else {
            let e = (2.0 * v).exp();
            (e / (1.0 + e), 1.0 / (1.0 + e))
        };
        if u < lo_cut || cu < hi_cut || u <= 0.0 || u >= 1.0 {
            return None;
        }
        let ch = v.cosh();
        let w = FRAC_PI_2 * t.cosh() / (2.0 * ch * ch);
        Some((u, w))
    };
    let t_max = 7.0;
    let mut nodes_used = 0;
    let mut eval = |t: f64, raw: &mut f64, l1: &mut f64| -> Result<()> {
        if let Some((u, w)) = node(t) {
            let v = integrand(u) * w;
            if !v.is_finite() {
                return Err(Error::Convergence(format!("integrand not finite at u = {u}")));
            }
            *raw += v;
            *l1 += v.abs();
            nodes_used += 1;
        }
        Ok(())
    };
    let mut raw = 0.0;
    let mut l1 = 0.0;
    let mut h = 1.0;
    let kmax = (t_max / h) as i64;
    for k in -kmax..=kmax {
        eval(k as f64 * h, &mut raw, &mut l1)?;
    }
    let mut prev = raw * h;
    let mut est = f64::INFINITY;
    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let kmax = (t_max / h) as i64;
        let mut k = 1;
        while k <= kmax {
            eval(k as f64 * h, &mut raw, &mut l1)?;
            eval(-(k as f64) * h, &mut raw, &mut l1)?;
            k += 2;
        }
        let cur = raw * h;
        est = (cur - prev).abs();
        prev = cur;
        if level >= MIN_LEVEL && (settled(est, cur.abs(), l1 * h, tolerance) || est <= absolute.max(noise * l1 * h)) {
            return Ok(QuadratureResult {
                value: Complex64::new(cur, 0.0),
                est_error: est,
                nodes_used,
                converged: true,
            });
        }
    }
    Err(Error::Convergence(format!("unit-interval quadrature: successive estimates differ by {est:.3e}")))
}

/// `∫_0^∞ f(x) dx` by exp-sinh, `x = exp((π/2) sinh t)`, with the range in `t`
/// grown until the integrand is negligible at both ends.
pub fn integrate_half_line<F>(integrand: F, tolerance: f64) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    integrate_half_line_abs(integrand, tolerance, 0.0)
}

/// As [`integrate_half_line`], also accepting successive estimates that
/// differ by at most `absolute`.
pub fn integrate_half_line_abs<F>(integrand: F, tolerance: f64, absolute: f64) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    if !(tolerance > 0.0) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let weighted = |t: f64| -> Option<f64> {
        let v = FRAC_PI_2 * t.sinh();
        if v.abs() > 575.0 {
            return None;
        }
        let x = v.exp();
        Some(integrand(x) * x * FRAC_PI_2 * t.cosh())
    };
    let mut nodes_used = 0;
    // level-0 sweep at h = 1/2, outward until four consecutive small values
    let mut h = 0.5;
    let mut raw = weighted(0.0).unwrap_or(0.0);
    let mut l1 = raw.abs();
    let mut k_hi = 0i64;
    let mut k_lo = 0i64;
    for dir in [1i64, -1] {
        let mut small = 0;
        let mut k = 0;
        loop {
            k += 1;
            let Some(v) = weighted((dir * k) as f64 * h) else { break };
            if !v.is_finite() {
                return Err(Error::Convergence("half-line integrand not finite".into()));
            }
            nodes_used += 1;
            raw += v;
            l1 += v.abs();
            if v.abs() <= 1e-3 * (tolerance * raw.abs()).max(absolute).max(f64::MIN_POSITIVE) {
                small += 1;
                if small >= 4 {
                    break;
                }
            } else {
                small = 0;
            }
        }
        if dir > 0 {
            k_hi = k;
        } else {
            k_lo = k;
        }
    }
    let (t_lo, t_hi) = (-(k_lo as f64) * h, k_hi as f64 * h);
    let mut prev = raw * h;
    let mut est = f64::INFINITY;
    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let mut t = t_lo + h;
        while t < t_hi {
            if let Some(v) = weighted(t) {
                if !v.is_finite() {
                    return Err(Error::Convergence("half-line integrand not finite".into()));
                }
                raw += v;
                l1 += v.abs();
                nodes_used += 1;
            }
            t += 2.0 * h;
        }
        let cur = raw * h;
        est = (cur - prev).abs();
        prev = cur;
        if level >= 2 && (settled(est, cur.abs(), l1 * h, tolerance) || est <= absolute) {
            return Ok(QuadratureResult { value: Complex64::new(cur, 0.0), est_error: est, nodes_used, converged: true });
        }
    }
    Err(Error::Convergence(format!("half-line quadrature: successive estimates differ by {est:.3e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_singular_examples() {
        let r = integrate_unit_interval(|u| u.powf(-0.5), (-0.5, 0.0), 1e-12).unwrap();
        assert!((r.value.re - 2.0).abs() < 1e-10, "{}", r.value.re);
        let r = integrate_unit_interval(|u| u.ln(), (-0.01, 0.0), 1e-12).unwrap();
        assert!((r.value.re + 1.0).abs() < 1e-11, "{}", r.value.re);
        let r = integrate_unit_interval(|_| 1.0, (0.0, 0.0), 1e-13).unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_nonintegrable_powers() {
        assert!(integrate_unit_interval(|u| 1.0 / u, (-1.0, 0.0), 1e-8).is_err());
    }

    #[test]
    fn half_line_gamma_integrals() {
        let r = integrate_half_line(|x| x.powf(2.5) * (-x).exp(), 1e-12).unwrap();
        // Γ(3.5) = 15√π/8
        let g = 15.0 * std::f64::consts::PI.sqrt() / 8.0;
        assert!((r.value.re - g).abs() < 1e-11 * g);
        let r = integrate_half_line(|x| (-x - 1.0 / x).exp() / x, 1e-12).unwrap();
        // 2 K_0(2)
        assert!((r.value.re - 2.0 * 0.113_893_872_749_533_4).abs() < 1e-12);
    }
}

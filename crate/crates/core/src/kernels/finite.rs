//! Biorthogonal system and correlation kernel of the truncated-unitary chain
//! at finite `n`.

use num_complex::Complex64;

use super::{integrate_unit_fallible, KernelRoute, KernelValue, ROUTE_AGREEMENT};
use crate::ensembles::TruncationModelParams;
use crate::error::{Error, Result};
use crate::quad::integrate_vertical_line;
use crate::specfun::gamma::ln_gamma_real_unchecked;
use crate::specfun::meijer::auto_contour;
use crate::specfun::wright::CompensatedSum;
use crate::specfun::{meijer_g_eval, MeijerGSpec};

fn lgamma(x: f64) -> f64 {
    ln_gamma_real_unchecked(x).0
}

fn ln_factorial(k: usize) -> f64 {
    lgamma(k as f64 + 1.0)
}

/// `ν_0 = 0, ν_1, …, ν_M` as reals.
fn nu_with_zero(params: &TruncationModelParams) -> Vec<f64> {
    std::iter::once(0.0).chain(params.nu.iter().map(|&v| v as f64)).collect()
}

/// `l - 2n`.
fn excess(params: &TruncationModelParams) -> f64 {
    params.l as f64 - 2.0 * params.n as f64
}

fn check_degree(params: &TruncationModelParams, k: usize, max: usize) -> Result<()> {
    params.validate()?;
    if k > max {
        return Err(Error::Domain(format!("index k = {k} exceeds {max}")));
    }
    Ok(())
}

/// Coefficients `[c_0, …, c_k]` of the monic polynomial `P_k(x) = Σ c_t x^t`:
///
/// `c_t = (−1)^{k−t}/(k−t)! · Γ(L+k+t+1)/Γ(L+2k+1) · Π_{j=0}^M Γ(k+1+ν_j)/Γ(t+1+ν_j)`
/// with `L = l − 2n`, built downward from `c_k = 1` through
/// `c_t = −Π_j (t+1+ν_j) / ((k−t)(L+k+t+1)) · c_{t+1}`.
pub fn pk_coefficients(params: &TruncationModelParams, k: usize) -> Result<Vec<f64>> {
    check_degree(params, k, params.n)?;
    let big_l = excess(params);
    let nu = nu_with_zero(params);
    let kf = k as f64;
    let mut coeffs = vec![1.0; k + 1];
    for t in (0..k).rev() {
        let tf = t as f64;
        let mut ratio = -1.0 / ((kf - tf) * (big_l + kf + tf + 1.0));
        for v in &nu {
            ratio *= tf + 1.0 + v;
        }
        coeffs[t] = ratio * coeffs[t + 1];
    }
    Ok(coeffs)
}

/// Monic biorthogonal polynomial `P_k(x)` from its residue sum.
pub fn pk(params: &TruncationModelParams, k: usize, x: f64) -> Result<f64> {
    let coeffs = pk_coefficients(params, k)?;
    let mut acc = CompensatedSum::default();
    let mut power = 1.0;
    for c in coeffs {
        acc.add(c * power);
        power *= x;
    }
    Ok(acc.value())
}

/// `P_k(x)` as the terminating hypergeometric series
/// `(−1)^k Π_{i≥1} Γ(k+1+ν_i)/Γ(1+ν_i) · Γ(L+k+1)/Γ(L+2k+1) · ₂F_M(−k, L+k+1; 1+ν_1, …, 1+ν_M; x)`.
pub fn pk_hypergeometric(params: &TruncationModelParams, k: usize, x: f64) -> Result<f64> {
    check_degree(params, k, params.n)?;
    let big_l = excess(params);
    let kf = k as f64;
    let nu: Vec<f64> = params.nu.iter().map(|&v| v as f64).collect();
    let mut l = lgamma(big_l + kf + 1.0) - lgamma(big_l + 2.0 * kf + 1.0);
    for v in &nu {
        l += lgamma(kf + 1.0 + v) - lgamma(1.0 + v);
    }
    let prefactor = if k % 2 == 0 { l.exp() } else { -l.exp() };
    let mut term = 1.0;
    let mut acc = CompensatedSum::default();
    acc.add(term);
    for j in 0..k {
        let jf = j as f64;
        let mut ratio = (jf - kf) * (big_l + kf + 1.0 + jf) / (jf + 1.0) * x;
        for v in &nu {
            ratio /= 1.0 + v + jf;
        }
        term *= ratio;
        acc.add(term);
    }
    Ok(prefactor * acc.value())
}

/// `ln C_k` with `C_k = Γ(L+2k+2)/Π_{i=0}^M Γ(k+1+ν_i)`.
fn ln_qk_prefactor(params: &TruncationModelParams, k: usize) -> f64 {
    let kf = k as f64;
    let mut l = lgamma(excess(params) + 2.0 * kf + 2.0);
    for v in nu_with_zero(params) {
        l -= lgamma(kf + 1.0 + v);
    }
    l
}

fn qk_spec(params: &TruncationModelParams, k: usize) -> MeijerGSpec {
    let kf = k as f64;
    let m = params.m();
    MeijerGSpec {
        m: m + 1,
        n: 0,
        a: vec![-kf, excess(params) + kf + 1.0],
        b: nu_with_zero(params),
    }
}

/// Dual function `Q_k(y) = C_k G^{M+1,0}_{2,M+1}(−k, L+k+1; ν_0, …, ν_M | y)`,
/// evaluated as its Mellin–Barnes line integral.
pub fn qk(params: &TruncationModelParams, k: usize, y: f64, tolerance: f64) -> Result<KernelValue> {
    check_degree(params, k, params.n - 1)?;
    if !(y > 0.0) {
        return Err(Error::Domain(format!("Q_k needs y > 0, got {y}")));
    }
    let v = meijer_g_eval(&qk_spec(params, k), y, None, tolerance)?;
    let c = ln_qk_prefactor(params, k).exp();
    Ok(KernelValue { value: c * v.value, abs_imag_residual: c * v.imag_residual, route: KernelRoute::Contour })
}

/// Residues `a_j`, `j < n`, of `Γ(t+1−n)Γ(t+l−n+1)/Π_i Γ(t+1+ν_i)` at `t = j`,
/// as `(ln|a_j|, sign)`.
fn residue_coefficients(params: &TruncationModelParams) -> Vec<(f64, f64)> {
    let n = params.n;
    let l = params.l as f64;
    let nu = nu_with_zero(params);
    (0..n)
        .map(|j| {
            let jf = j as f64;
            let mut la = -ln_factorial(n - 1 - j) + lgamma(jf + l - n as f64 + 1.0);
            for v in &nu {
                la -= lgamma(jf + 1.0 + v);
            }
            (la, if (n - 1 - j) % 2 == 0 { 1.0 } else { -1.0 })
        })
        .collect()
}

/// `T(z) = Σ_{j<n} a_j z^j`, the t-integral of the kernel closed on its residues.
fn residue_polynomial(coeffs: &[(f64, f64)], z: f64) -> f64 {
    if z == 0.0 {
        return coeffs[0].1 * coeffs[0].0.exp();
    }
    let lz = z.abs().ln();
    let zs = z.signum();
    let mut acc = CompensatedSum::default();
    for (j, &(la, s)) in coeffs.iter().enumerate() {
        let sign = if j % 2 == 1 { s * zs } else { s };
        acc.add(sign * (la + j as f64 * lz).exp());
    }
    acc.value()
}

fn check_point(x: f64, y: f64) -> Result<()> {
    if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
        return Err(Error::Domain(format!("kernel arguments must be positive, got ({x}, {y})")));
    }
    Ok(())
}

/// Finite-`n` correlation kernel `K_n(x, y)` along the requested route.
pub fn kernel_finite(params: &TruncationModelParams, x: f64, y: f64, route: KernelRoute, tolerance: f64) -> Result<KernelValue> {
    params.validate()?;
    check_point(x, y)?;
    match route {
        KernelRoute::Contour => contour_route(params, x, y, tolerance),
        KernelRoute::BiorthogonalSum => biorthogonal_route(params, x, y, tolerance),
        KernelRoute::MeijerProduct => meijer_product_route(params, x, y, tolerance),
        other => Err(Error::Domain(format!("route {} is not available for the finite kernel", other.as_str()))),
    }
}

/// Evaluates every route and fails with [`Error::RouteDisagreement`] when two
/// differ by more than [`ROUTE_AGREEMENT`]`·max(1, |K|)`; returns the contour value.
pub fn kernel_finite_cross_checked(params: &TruncationModelParams, x: f64, y: f64, tolerance: f64) -> Result<KernelValue> {
    let routes = [KernelRoute::Contour, KernelRoute::BiorthogonalSum, KernelRoute::MeijerProduct];
    let mut values = Vec::with_capacity(routes.len());
    for r in routes {
        match kernel_finite(params, x, y, r, tolerance) {
            Ok(v) => values.push(v),
            // the u-integral needs an integrable weight at u = 1
            Err(Error::Domain(_)) if r == KernelRoute::MeijerProduct => {}
            Err(e) => return Err(e),
        }
    }
    let reference = values[0];
    for v in &values[1..] {
        let scale = reference.value.abs().max(1.0);
        if (v.value - reference.value).abs() > ROUTE_AGREEMENT * scale {
            return Err(Error::RouteDisagreement(format!(
                "K_n({x}, {y}): {} gives {}, {} gives {}",
                reference.route.as_str(),
                reference.value,
                v.route.as_str(),
                v.value
            )));
        }
    }
    Ok(reference)
}

/// t-integral closed on its residues at `t = 0, …, n−1`; the s-integral runs on
/// `Re s = −1/2`.
fn contour_route(params: &TruncationModelParams, x: f64, y: f64, tolerance: f64) -> Result<KernelValue> {
    let zero = KernelValue { value: 0.0, abs_imag_residual: 0.0, route: KernelRoute::Contour };
    if params.m() == 1 && y >= 1.0 {
        // the weights of a single truncated unitary vanish beyond 1
        return Ok(zero);
    }
    let n = params.n as f64;
    let l = params.l as f64;
    let spec = MeijerGSpec {
        m: params.m() + 1,
        n: 0,
        a: vec![1.0 - n, l - n + 1.0],
        b: nu_with_zero(params).iter().map(|v| 1.0 + v).collect(),
    };
    let lx = x.ln();
    let scaled: Vec<(f64, f64)> =
        residue_coefficients(params).into_iter().enumerate().map(|(j, (la, s))| (la + j as f64 * lx, s)).collect();
    let cmax = scaled.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = scaled.iter().map(|&(la, s)| s * (la - cmax).exp()).collect();
    let contour = auto_contour(&spec, y, tolerance, Some(-0.5))?;
    let ly = y.ln();
    let scale = spec.log_envelope(-0.5, ly);
    let f = |s: Complex64| {
        let Some(ratio) = spec.log_gamma_ratio(s) else {
            return Complex64::new(0.0, 0.0);
        };
        let t_sum: Complex64 = weights.iter().enumerate().map(|(j, &a)| a / (s - j as f64)).sum();
        (ratio - s * ly - scale).exp() * t_sum
    };
    let r = integrate_vertical_line(f, &contour)?;
    let factor = (scale + cmax).exp() / y;
    let value = r.value.re * factor;
    if !value.is_finite() {
        return Err(Error::Numerical(format!("K_n({x}, {y}) overflows")));
    }
    Ok(KernelValue { value, abs_imag_residual: r.value.im.abs() * factor, route: KernelRoute::Contour })
}

fn biorthogonal_route(params: &TruncationModelParams, x: f64, y: f64, tolerance: f64) -> Result<KernelValue> {
    let mut acc = CompensatedSum::default();
    let mut imag = 0.0;
    for k in 0..params.n {
        let p = pk(params, k, x)?;
        let q = qk(params, k, y, tolerance)?;
        acc.add(p * q.value);
        imag += (p * q.abs_imag_residual).abs();
    }
    Ok(KernelValue { value: acc.value(), abs_imag_residual: imag, route: KernelRoute::BiorthogonalSum })
}

/// `K_n(x, y) = −∫_0^1 T(ux) G^{M+1,0}_{2,M+1}(−n, l−n; ν_0, …, ν_M | uy) du`.
fn meijer_product_route(params: &TruncationModelParams, x: f64, y: f64, tolerance: f64) -> Result<KernelValue> {
    let n = params.n as f64;
    let l = params.l as f64;
    let single = params.m() == 1;
    let big_l = excess(params);
    if single && big_l == params.nu[0] as f64 {
        return Err(Error::Domain(
            "the u-integral needs l > 2n + ν_1 for a single factor (the weight has an atom at u = 1)".into(),
        ));
    }
    let spec = MeijerGSpec { m: params.m() + 1, n: 0, a: vec![-n, l - n], b: nu_with_zero(params) };
    let coeffs = residue_coefficients(params);
    let u_max = if single && y > 1.0 { 1.0 / y } else { 1.0 };
    // G^{2,0}_{2,2} vanishes like (1 − z)^{L − ν_1 − 1} at z = 1
    let upper_power = if single && u_max * y >= 1.0 { big_l - params.nu[0] as f64 - 1.0 } else { 0.0 };
    let integrand = |v: f64| -> Result<f64> {
        let u = u_max * v;
        let z = u * y;
        if single && z >= 1.0 {
            return Ok(0.0);
        }
        let g = meijer_g_eval(&spec, z, None, 0.1 * tolerance)?;
        Ok(residue_polynomial(&coeffs, u * x) * g.value)
    };
    // T(ux) G(uy) cancels across u, so accuracy is relative to ∫|T G|
    let value = -u_max * integrate_unit_fallible(integrand, (0.0, upper_power), tolerance, tolerance)?;
    Ok(KernelValue { value, abs_imag_residual: 0.0, route: KernelRoute::MeijerProduct })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::KERNEL_TOLERANCE;

    fn params(n: usize, nu: &[usize], l: usize) -> TruncationModelParams {
        TruncationModelParams::new(n, nu.to_vec(), l).unwrap()
    }

    #[test]
    fn p0_is_one_and_p1_is_shifted_legendre() {
        let p = params(2, &[0], 4);
        assert_eq!(pk(&p, 0, 3.7).unwrap(), 1.0);
        let one = params(1, &[0], 2);
        assert!((pk(&one, 1, 1.0).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn hypergeometric_order_matches_residue_sum() {
        let p = params(5, &[1, 2], 13);
        for k in 0..=5 {
            for x in [0.1, 0.9, 3.0] {
                let a = pk(&p, k, x).unwrap();
                let b = pk_hypergeometric(&p, k, x).unwrap();
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "k={k} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn q0_is_indicator_for_uniform_weight() {
        let p = params(2, &[0], 4);
        assert!((qk(&p, 0, 0.5, KERNEL_TOLERANCE).unwrap().value - 1.0).abs() < 1e-9);
        assert_eq!(qk(&p, 0, 2.0, KERNEL_TOLERANCE).unwrap().value, 0.0);
    }

    #[test]
    fn single_point_kernel_is_indicator() {
        let p = params(1, &[0], 2);
        for route in [KernelRoute::Contour, KernelRoute::BiorthogonalSum] {
            let inside = kernel_finite(&p, 0.4, 0.3, route, KERNEL_TOLERANCE).unwrap().value;
            let outside = kernel_finite(&p, 0.4, 1.7, route, KERNEL_TOLERANCE).unwrap().value;
            assert!((inside - 1.0).abs() < 1e-8, "{route:?}: {inside}");
            assert!(outside.abs() < 1e-12);
        }
    }

    #[test]
    fn three_routes_agree() {
        for (p, x, y) in [(params(3, &[1], 8), 0.3, 0.7), (params(3, &[0, 1], 8), 0.4, 1.3), (params(2, &[1, 0], 6), 2.0, 0.2)]
        {
            let c = kernel_finite(&p, x, y, KernelRoute::Contour, KERNEL_TOLERANCE).unwrap();
            let b = kernel_finite(&p, x, y, KernelRoute::BiorthogonalSum, KERNEL_TOLERANCE).unwrap();
            let m = kernel_finite(&p, x, y, KernelRoute::MeijerProduct, KERNEL_TOLERANCE).unwrap();
            let scale = c.value.abs().max(1.0);
            assert!((c.value - b.value).abs() < 1e-7 * scale, "{} vs {}", c.value, b.value);
            assert!((c.value - m.value).abs() < 1e-7 * scale, "{} vs {}", c.value, m.value);
            assert!(c.abs_imag_residual <= 1e-8 * scale);
        }
    }

    #[test]
    fn atom_at_one_rejects_u_integral() {
        let p = params(1, &[0], 2);
        assert!(matches!(kernel_finite(&p, 0.4, 0.3, KernelRoute::MeijerProduct, 1e-9), Err(Error::Domain(_))));
        assert!(kernel_finite_cross_checked(&p, 0.4, 0.3, 1e-9).is_ok());
    }
}

//! Hard-edge limit kernel `K_{ν_1,…,ν_M}(x, y)` of products of random matrices.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{integrate_unit_fallible, KernelRoute, KernelValue};
use crate::error::{Error, Result};
use crate::quad::{adaptive_loop, integrate_vertical_line, ContourSpec, LOOP_HALF_HEIGHT};
use crate::specfun::gamma::{ln_gamma_real_unchecked, ln_gamma_unchecked};
use crate::specfun::meijer::auto_contour;
use crate::specfun::{meijer_g_eval, MeijerGSpec};

/// Parameters `ν_1, …, ν_M` (`ν_0 = 0` is implicit); each must exceed `−1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardEdgeParams {
    pub nu: Vec<f64>,
}

impl HardEdgeParams {
    pub fn new(nu: Vec<f64>) -> Result<Self> {
        let p = Self { nu };
        p.validate()?;
        Ok(p)
    }

    pub fn m(&self) -> usize {
        self.nu.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.nu.is_empty() {
            return Err(Error::Domain("need at least one ν".into()));
        }
        if let Some(v) = self.nu.iter().find(|v| !(v.is_finite() && **v > -1.0)) {
            return Err(Error::Domain(format!("every ν must exceed -1, got {v}")));
        }
        Ok(())
    }

    fn nu_min(&self) -> f64 {
        self.nu.iter().cloned().fold(0.0, f64::min)
    }
}

/// `K_{ν_1,…,ν_M}(x, y)` along the requested route. The `meijer_product`
/// route also accepts `x = 0`.
pub fn kernel_hard_edge(params: &HardEdgeParams, x: f64, y: f64, route: KernelRoute, tolerance: f64) -> Result<KernelValue> {
    params.validate()?;
    let x_ok = x > 0.0 || (x == 0.0 && route == KernelRoute::MeijerProduct);
    if !(x_ok && y > 0.0 && x.is_finite() && y.is_finite()) {
        return Err(Error::Domain(format!("kernel arguments must be positive, got ({x}, {y})")));
    }
    match route {
        KernelRoute::Contour => contour_route(params, x, y, tolerance),
        KernelRoute::MeijerProduct => meijer_product_route(params, x, y, tolerance),
        other => Err(Error::Domain(format!("route {} is not available for the hard-edge kernel", other.as_str()))),
    }
}

/// Line abscissa and loop half-height. The `s`-poles of `Γ(s+1+ν_i)` reach
/// `−1−ν_min`; the line passes right of them and the loop stays right of the line.
fn geometry(params: &HardEdgeParams) -> (f64, f64) {
    let edge = -1.0 - params.nu_min();
    let c = if edge <= -0.55 { -0.5 } else { 0.5 * edge };
    (c, LOOP_HALF_HEIGHT.min(0.6 * c.abs()))
}

/// Double integral over `Re s = c` and the loop around the positive axis. The
/// loop rule is fixed once from `g(t)/(c − t)` and reused for every `s` node.
fn contour_route(params: &HardEdgeParams, x: f64, y: f64, tolerance: f64) -> Result<KernelValue> {
    let (c, h) = geometry(params);
    let nu0: Vec<f64> = std::iter::once(0.0).chain(params.nu.iter().cloned()).collect();
    let lx = x.ln();
    // g(t) = x^t / (Π_i Γ(t+1+ν_i) sin πt)
    let g = |t: Complex64| {
        let mut l = t * lx;
        for v in &nu0 {
            l -= ln_gamma_unchecked(t + 1.0 + v);
        }
        l.exp() / (t * PI).sin()
    };
    let loop_spec = ContourSpec::positive_axis_loop(h).with_tolerance(0.1 * tolerance);
    let (_, rule) = adaptive_loop(|t| g(t) / (c - t), &loop_spec, false)?;
    let gw: Vec<(Complex64, Complex64)> = rule.nodes.iter().zip(&rule.weights).map(|(&t, &w)| (t, g(t) * w)).collect();
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);

    // Γ(s+1) sin πs = −π/Γ(−s): the s-factor is −π G^{M,0}_{0,M+1}(−; 1+ν_1, …, 1+ν_M, 1) integrand
    let mut b: Vec<f64> = params.nu.iter().map(|v| 1.0 + v).collect();
    b.push(1.0);
    let spec = MeijerGSpec { m: params.m(), n: 0, a: vec![], b };
    let contour = auto_contour(&spec, y, tolerance, Some(c))?;
    let ly = y.ln();
    let scale = spec.log_envelope(c, ly);
    let f = |s: Complex64| {
        let Some(ratio) = spec.log_gamma_ratio(s) else {
            return Complex64::new(0.0, 0.0);
        };
        let t_part: Complex64 = gw.iter().map(|&(t, w)| w / (s - t)).sum::<Complex64>() / two_pi_i;
        (ratio - s * ly - scale).exp() * t_part
    };
    let r = integrate_vertical_line(f, &contour)?;
    let factor = -PI * scale.exp() / y;
    let value = r.value.re * factor;
    if !value.is_finite() {
        return Err(Error::Numerical(format!("hard-edge kernel overflows at ({x}, {y})")));
    }
    Ok(KernelValue { value, abs_imag_residual: r.value.im.abs() * factor.abs(), route: KernelRoute::Contour })
}

/// `∫_0^1 G^{1,0}_{0,M+1}(−; 0, −ν_1, …, −ν_M | ux) G^{M,0}_{0,M+1}(−; ν_1, …, ν_M, 0 | uy) du`.
fn meijer_product_route(params: &HardEdgeParams, x: f64, y: f64, tolerance: f64) -> Result<KernelValue> {
    let left = MeijerGSpec {
        m: 1,
        n: 0,
        a: vec![],
        b: std::iter::once(0.0).chain(params.nu.iter().map(|v| -v)).collect(),
    };
    let mut b: Vec<f64> = params.nu.clone();
    b.push(0.0);
    let right = MeijerGSpec { m: params.m(), n: 0, a: vec![], b };
    let at_zero: f64 = params.nu.iter().map(|v| -ln_gamma_real_unchecked(1.0 + v).0).sum::<f64>().exp();
    let inner = 0.1 * tolerance;
    let integrand = |u: f64| -> Result<f64> {
        let ux = u * x;
        let a = if ux == 0.0 { at_zero } else { meijer_g_eval(&left, ux, None, inner)?.value };
        Ok(a * meijer_g_eval(&right, u * y, None, inner)?.value)
    };
    let value = integrate_unit_fallible(integrand, (params.nu_min(), 0.0), tolerance, 0.0)?;
    Ok(KernelValue { value, abs_imag_residual: 0.0, route: KernelRoute::MeijerProduct })
}

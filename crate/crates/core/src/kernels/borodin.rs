//! Borodin's hard-edge kernels `K^{(α,θ)}` and their relation to the
//! Meijer G-kernels when `θ` or `1/θ` is an integer.

use serde::{Deserialize, Serialize};

use super::{integrate_unit_fallible, HardEdgeParams};
use crate::error::{Error, Result};
use crate::specfun::{wright_bessel, WrightParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BorodinParams {
    pub alpha: f64,
    pub theta: f64,
}

impl BorodinParams {
    pub fn new(alpha: f64, theta: f64) -> Result<Self> {
        let p = Self { alpha, theta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > -1.0 && self.alpha.is_finite()) {
            return Err(Error::Domain(format!("alpha must exceed -1, got {}", self.alpha)));
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(Error::Domain(format!("theta must be positive, got {}", self.theta)));
        }
        Ok(())
    }
}

/// `K^{(α,θ)}(x, y) = θ x^α ∫_0^1 J_{(α+1)/θ, 1/θ}(xu) J_{α+1, θ}((yu)^θ) u^α du`.
pub fn kernel_borodin(params: &BorodinParams, x: f64, y: f64, tolerance: f64) -> Result<f64> {
    params.validate()?;
    if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
        return Err(Error::Domain(format!("kernel arguments must be positive, got ({x}, {y})")));
    }
    let BorodinParams { alpha, theta } = *params;
    let first = WrightParams::new((alpha + 1.0) / theta, 1.0 / theta)?;
    let second = WrightParams::new(alpha + 1.0, theta)?;
    let integrand = |u: f64| -> Result<f64> {
        if u == 0.0 {
            return Ok(0.0);
        }
        Ok(wright_bessel(first, x * u)? * wright_bessel(second, (y * u).powf(theta))? * u.powf(alpha))
    };
    Ok(theta * x.powf(alpha) * integrate_unit_fallible(integrand, (alpha, 0.0), tolerance, 0.0)?)
}

fn check_m(m: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("M must be a positive integer".into()));
    }
    Ok(m as f64)
}

/// `M^M K^{(α,1/M)}(M^M x, M^M y)`, which equals
/// `(x/y)^α K_{ν_1,…,ν_M}(x, y)` with `ν_j = α + (j−1)/M`.
pub fn scaled_borodin_theta_inverse_integer(m: u32, alpha: f64, x: f64, y: f64, tolerance: f64) -> Result<f64> {
    let mf = check_m(m)?;
    let s = mf.powf(mf);
    Ok(s * kernel_borodin(&BorodinParams::new(alpha, 1.0 / mf)?, s * x, s * y, tolerance)?)
}

/// `x^{1/M − 1} K^{(α,M)}(M x^{1/M}, M y^{1/M})`, which equals
/// `K_{ν̃_1,…,ν̃_M}(y, x)` with `ν̃_j = α/M − 1 + j/M`.
pub fn scaled_borodin_theta_integer(m: u32, alpha: f64, x: f64, y: f64, tolerance: f64) -> Result<f64> {
    let mf = check_m(m)?;
    let r = 1.0 / mf;
    Ok(x.powf(r - 1.0) * kernel_borodin(&BorodinParams::new(alpha, mf)?, mf * x.powf(r), mf * y.powf(r), tolerance)?)
}

/// `ν_j = α + (j−1)/M`, `j = 1, …, M`.
pub fn borodin_hard_edge_params_inverse_integer(m: u32, alpha: f64) -> Result<HardEdgeParams> {
    let mf = check_m(m)?;
    HardEdgeParams::new((1..=m).map(|j| alpha + (j as f64 - 1.0) / mf).collect())
}

/// `ν̃_j = α/M − 1 + j/M`, `j = 1, …, M`.
pub fn borodin_hard_edge_params_integer(m: u32, alpha: f64) -> Result<HardEdgeParams> {
    let mf = check_m(m)?;
    HardEdgeParams::new((1..=m).map(|j| alpha / mf - 1.0 + j as f64 / mf).collect())
}

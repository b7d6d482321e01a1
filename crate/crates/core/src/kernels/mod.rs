//! Correlation kernels: the finite-n kernel of the truncated-unitary chain,
//! the hard-edge limit kernels `K_{ν_1,…,ν_M}`, Borodin's kernels and the
//! generic moment-matrix kernel of any polynomial ensemble.

mod borodin;
mod finite;
mod generic;
mod hard_edge;

pub use borodin::{
    borodin_hard_edge_params_integer, borodin_hard_edge_params_inverse_integer, kernel_borodin,
    scaled_borodin_theta_integer, scaled_borodin_theta_inverse_integer, BorodinParams,
};
pub use finite::{kernel_finite, kernel_finite_cross_checked, pk, pk_coefficients, pk_hypergeometric, qk};
pub use generic::{kernel_generic, GenericKernel};
pub use hard_edge::{kernel_hard_edge, HardEdgeParams};

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::integrate_unit_interval_noisy;

/// Relative disagreement between routes that [`kernel_finite_cross_checked`] tolerates.
pub const ROUTE_AGREEMENT: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelRoute {
    Contour,
    BiorthogonalSum,
    MeijerProduct,
    MomentMatrix,
    WrightIntegral,
}

impl KernelRoute {
    pub fn as_str(&self) -> &'static str {
        match self {
            KernelRoute::Contour => "contour",
            KernelRoute::BiorthogonalSum => "biorthogonal_sum",
            KernelRoute::MeijerProduct => "meijer_product",
            KernelRoute::MomentMatrix => "moment_matrix",
            KernelRoute::WrightIntegral => "wright_integral",
        }
    }
}

impl std::str::FromStr for KernelRoute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "contour" => KernelRoute::Contour,
            "biorthogonal_sum" => KernelRoute::BiorthogonalSum,
            "meijer_product" => KernelRoute::MeijerProduct,
            "moment_matrix" => KernelRoute::MomentMatrix,
            "wright_integral" => KernelRoute::WrightIntegral,
            other => return Err(Error::Domain(format!("unknown kernel route `{other}`"))),
        })
    }
}

/// Kernel value with the size of the discarded imaginary part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: f64,
    pub abs_imag_residual: f64,
    pub route: KernelRoute,
}

/// `∫_0^1 f(u) du` for a fallible integrand whose values carry relative
/// errors up to `noise`; the first error wins.
pub(crate) fn integrate_unit_fallible<F>(f: F, endpoint_powers: (f64, f64), tolerance: f64, noise: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let r = integrate_unit_interval_noisy(
        |u| {
            if failure.borrow().is_some() {
                return 0.0;
            }
            match f(u) {
                Ok(v) => v,
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    0.0
                }
            }
        },
        endpoint_powers,
        tolerance,
        noise,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(r?.value.re)
}

//! Quadrature engines: Mellin–Barnes lines, loops around the positive real
//! axis, and endpoint-singular integrals on `(0, 1)` and `(0, ∞)`.

mod gauss;
mod interval;
mod line;
mod loop_contour;

pub use gauss::gauss_legendre;
pub use interval::{
    integrate_half_line, integrate_half_line_abs, integrate_unit_interval, integrate_unit_interval_abs,
    integrate_unit_interval_noisy,
};
pub use line::integrate_vertical_line;
pub use loop_contour::{integrate_closed_loop, integrate_loop, loop_rule, LoopRule};
pub(crate) use loop_contour::adaptive_loop;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourKind {
    VerticalLine,
    PositiveAxisLoop,
    UnitInterval,
}

/// Integration contour with its resolution controls.
///
/// * `VerticalLine`: `anchor` is the abscissa `c`; the path is
///   `s(τ) = c + iτ + bend·(√(w² + τ²) − w)` with `w = bend_width`, so
///   `bend < 0` curls both ends into the left half plane.
/// * `PositiveAxisLoop`: `anchor` is the half-height `h` of the two rays; the
///   left end is a semicircle of radius `h` around the origin.
/// * `UnitInterval`: only `tolerance` and `max_doublings` are used.
///
/// `truncation` is the initial half-length of the line (or ray length of the
/// loop); it grows while the integrand tail is not negligible.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ContourSpec {
    pub kind: ContourKind,
    pub anchor: f64,
    pub truncation: f64,
    pub initial_nodes: usize,
    pub tolerance: f64,
    pub bend: f64,
    pub bend_width: f64,
    pub max_doublings: usize,
}

/// Default relative tolerance for kernel evaluation.
pub const KERNEL_TOLERANCE: f64 = 1e-9;
/// Default relative tolerance for verification sweeps.
pub const SWEEP_TOLERANCE: f64 = 1e-7;
/// Default loop half-height.
pub const LOOP_HALF_HEIGHT: f64 = 0.3;

impl ContourSpec {
    pub fn vertical_line(anchor: f64) -> Self {
        Self {
            kind: ContourKind::VerticalLine,
            anchor,
            truncation: 8.0,
            initial_nodes: 32,
            tolerance: KERNEL_TOLERANCE,
            bend: 0.0,
            bend_width: 1.0,
            max_doublings: 12,
        }
    }

    pub fn positive_axis_loop(half_height: f64) -> Self {
        Self {
            kind: ContourKind::PositiveAxisLoop,
            anchor: half_height,
            truncation: 8.0,
            initial_nodes: 16,
            tolerance: KERNEL_TOLERANCE,
            bend: 0.0,
            bend_width: 1.0,
            max_doublings: 12,
        }
    }

    pub fn unit_interval(tolerance: f64) -> Self {
        Self {
            kind: ContourKind::UnitInterval,
            anchor: 0.0,
            truncation: 1.0,
            initial_nodes: 16,
            tolerance,
            bend: 0.0,
            bend_width: 1.0,
            max_doublings: 12,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_bend(mut self, bend: f64, width: f64) -> Self {
        self.bend = bend;
        self.bend_width = width;
        self
    }

    pub fn with_truncation(mut self, truncation: f64, initial_nodes: usize) -> Self {
        self.truncation = truncation;
        self.initial_nodes = initial_nodes;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.truncation > 0.0 && self.truncation.is_finite()) {
            return Err(Error::Geometry(format!("truncation must be > 0, got {}", self.truncation)));
        }
        if self.initial_nodes < 16 {
            return Err(Error::Geometry(format!(
                "initial_nodes must be >= 16, got {}",
                self.initial_nodes
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Geometry(format!("tolerance must be > 0, got {}", self.tolerance)));
        }
        if !(self.bend_width > 0.0) {
            return Err(Error::Geometry("bend width must be > 0".into()));
        }
        Ok(())
    }
}

/// Outcome of an adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub est_error: f64,
    pub nodes_used: usize,
    pub converged: bool,
}

/// A difference counts as settled when it is below `tol·|value|`, or below the
/// rounding floor of the summed terms when the value cancels to ~0.
pub(crate) fn settled(diff: f64, value: f64, l1: f64, tol: f64) -> bool {
    diff <= tol * value || diff <= 256.0 * f64::EPSILON * l1
}

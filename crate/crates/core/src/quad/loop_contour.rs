use std::f64::consts::PI;

use num_complex::Complex64;

use super::{settled, gauss_legendre, ContourKind, ContourSpec, QuadratureResult};
use crate::error::{Error, Result};

const GL_ORDER: usize = 16;
const TAIL_FACTOR: f64 = 1e-3;

/// Discretized loop: `∮ f(t) dt ≈ Σ weights[k]·f(nodes[k])` (no `1/2πi`).
#[derive(Debug, Clone, PartialEq)]
pub struct LoopRule {
    pub nodes: Vec<Complex64>,
    pub weights: Vec<Complex64>,
    /// Indices of ray nodes in the outer half of the rays.
    outer: Vec<usize>,
}

impl LoopRule {
    pub fn apply<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Complex64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| f(t) * w).sum()
    }

    fn edge_and_l1(&self, values: &[Complex64]) -> (f64, f64) {
        let edge = self.outer.iter().map(|&i| (values[i] * self.weights[i]).norm()).fold(0.0, f64::max);
        let l1 = values.iter().zip(&self.weights).map(|(v, w)| (v * w).norm()).sum();
        (edge, l1)
    }
}

fn check_geometry(h: f64) -> Result<()> {
    if !(h > 0.0 && h < 0.5) {
        return Err(Error::Geometry(format!(
            "loop half-height {h} must lie in (0, 1/2) so that Re t > -1/2 on the loop"
        )));
    }
    Ok(())
}

/// Gauss–Legendre rule on the loop: ray from `T + ih` to `ih`, left semicircle
/// of radius `h` around 0, ray from `-ih` to `T - ih`. With `closed`, the
/// segment from `T - ih` back to `T + ih` is added.
pub fn loop_rule(half_height: f64, ray_length: f64, ray_panels: usize, closed: bool) -> Result<LoopRule> {
    check_geometry(half_height)?;
    let h = half_height;
    let (gx, gw) = gauss_legendre(GL_ORDER);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut outer = Vec::new();
    let mut segment = |nodes: &mut Vec<Complex64>, weights: &mut Vec<Complex64>, a: Complex64, b: Complex64, panels: usize, mark_outer: bool| {
        let d = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + d * p as f64;
            for (x, w) in gx.iter().zip(&gw) {
                let t = lo + d * (0.5 * (x + 1.0));
                if mark_outer && (t.re > 0.5 * ray_length) {
                    outer.push(nodes.len());
                }
                nodes.push(t);
                weights.push(d * (0.5 * w));
            }
        }
    };
    let ih = Complex64::new(0.0, h);
    let far = Complex64::new(ray_length, 0.0);
    segment(&mut nodes, &mut weights, far + ih, ih, ray_panels, true);
    // semicircle t = h e^{iφ}, φ from π/2 to 3π/2
    let arc_panels = (ray_panels / 4).max(2);
    let dphi = PI / arc_panels as f64;
    for p in 0..arc_panels {
        let lo = PI / 2.0 + dphi * p as f64;
        for (x, w) in gx.iter().zip(&gw) {
            let phi = lo + dphi * 0.5 * (x + 1.0);
            let e = Complex64::from_polar(h, phi);
            nodes.push(e);
            weights.push(Complex64::new(0.0, 1.0) * e * (0.5 * w * dphi));
        }
    }
    segment(&mut nodes, &mut weights, -ih, far - ih, ray_panels, true);
    if closed {
        segment(&mut nodes, &mut weights, far - ih, far + ih, 1, false);
    }
    Ok(LoopRule { nodes, weights, outer })
}

/// `(1/2πi) ∮_Σ f(t) dt` over the loop around the positive real axis.
pub fn integrate_loop<F>(integrand: F, contour: &ContourSpec) -> Result<QuadratureResult>
where
    F: Fn(Complex64) -> Complex64,
{
    adaptive_loop(integrand, contour, false).map(|(r, _)| r)
}

/// As [`integrate_loop`] but with the rays cut at `truncation` and closed by a
/// vertical segment, so only the step is refined.
pub fn integrate_closed_loop<F>(integrand: F, contour: &ContourSpec) -> Result<QuadratureResult>
where
    F: Fn(Complex64) -> Complex64,
{
    adaptive_loop(integrand, contour, true).map(|(r, _)| r)
}

/// Adaptive loop quadrature, also returning the finest rule that was used.
pub(crate) fn adaptive_loop<F>(integrand: F, contour: &ContourSpec, closed: bool) -> Result<(QuadratureResult, LoopRule)>
where
    F: Fn(Complex64) -> Complex64,
{
    if contour.kind != ContourKind::PositiveAxisLoop {
        return Err(Error::Geometry("integrate_loop needs a positive_axis_loop contour".into()));
    }
    contour.validate()?;
    check_geometry(contour.anchor)?;
    let tol = contour.tolerance;
    let mut length = contour.truncation;
    let mut panels = (contour.initial_nodes / 4).max(4);
    let mut nodes_used = 0;
    let mut prev: Option<Complex64> = None;
    let mut est = f64::INFINITY;
    let mut steps = 0;
    while steps <= 3 * contour.max_doublings {
        steps += 1;
        let rule = loop_rule(contour.anchor, length, panels, closed)?;
        let values: Vec<Complex64> = rule.nodes.iter().map(|&t| integrand(t)).collect();
        nodes_used += values.len();
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Convergence("integrand is not finite on the loop".into()));
        }
        let sum: Complex64 = values.iter().zip(&rule.weights).map(|(v, w)| v * w).sum();
        let (edge, l1) = rule.edge_and_l1(&values);
        let tail = edge * GL_ORDER as f64;
        if !closed && !settled(tail, TAIL_FACTOR * sum.norm(), TAIL_FACTOR * l1, tol) {
            // tail not yet negligible: lengthen the rays, keeping the panel size
            length *= 2.0;
            panels *= 2;
            prev = None;
            continue;
        }
        if let Some(p) = prev {
            est = (sum - p).norm();
            if settled(est, sum.norm(), l1, tol) {
                let result = QuadratureResult {
                    value: sum / Complex64::new(0.0, 2.0 * PI),
                    est_error: est / (2.0 * PI),
                    nodes_used,
                    converged: true,
                };
                return Ok((result, rule));
            }
        }
        prev = Some(sum);
        panels *= 2;
    }
    Err(Error::Convergence(format!("loop quadrature: successive estimates differ by {est:.3e}")))
}

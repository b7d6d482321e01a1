use std::f64::consts::PI;

use num_complex::Complex64;

use super::{settled, ContourKind, ContourSpec, QuadratureResult};
use crate::error::{Error, Result};

/// Relative size below which the outermost nodes count as a negligible tail.
const TAIL_FACTOR: f64 = 1e-3;
const MAX_NODES: usize = 2_000_000;

struct LinePath {
    c: f64,
    bend: f64,
    width: f64,
}

impl LinePath {
    fn point(&self, tau: f64) -> (Complex64, Complex64) {
        let r = (self.width * self.width + tau * tau).sqrt();
        let s = Complex64::new(self.c + self.bend * (r - self.width), tau);
        let ds = Complex64::new(self.bend * tau / r, 1.0);
        (s, ds)
    }
}

/// Trapezoid sum `h Σ g(kh)` over `|kh| <= t`, refined in place.
struct Trapezoid<'a, F> {
    g: &'a F,
    h: f64,
    kmax: i64,
    raw: Complex64,
    l1: f64,
    nodes: usize,
    edge: f64,
}

impl<'a, F: Fn(f64) -> Complex64> Trapezoid<'a, F> {
    fn new(g: &'a F, h: f64, t: f64) -> Self {
        let kmax = (t / h).round().max(1.0) as i64;
        let mut tr = Trapezoid { g, h, kmax, raw: Complex64::new(0.0, 0.0), l1: 0.0, nodes: 0, edge: 0.0 };
        for k in -kmax..=kmax {
            let v = tr.eval(k);
            if 2 * k.abs() > kmax {
                tr.edge = tr.edge.max(v.norm());
            }
        }
        tr
    }

    fn eval(&mut self, k: i64) -> Complex64 {
        let v = (self.g)(k as f64 * self.h);
        if v.re.is_finite() && v.im.is_finite() {
            self.raw += v;
            self.l1 += v.norm();
        } else {
            self.l1 = f64::INFINITY;
        }
        self.nodes += 1;
        v
    }

    fn value(&self) -> Complex64 {
        self.raw * self.h
    }

    fn extend(&mut self) {
        let old = self.kmax;
        self.kmax *= 2;
        self.edge = 0.0;
        for k in (old + 1)..=self.kmax {
            let a = self.eval(k);
            let b = self.eval(-k);
            self.edge = self.edge.max(a.norm()).max(b.norm());
        }
    }

    fn refine(&mut self) {
        self.h *= 0.5;
        self.kmax *= 2;
        let kmax = self.kmax;
        let mut k = 1;
        while k <= kmax {
            let a = self.eval(k);
            let b = self.eval(-k);
            if 2 * k > kmax {
                self.edge = self.edge.max(a.norm()).max(b.norm());
            }
            k += 2;
        }
    }
}

/// `(1/2πi) ∫ f(s) ds` along the (optionally bent) vertical line of `contour`.
///
/// The path length grows while the outer half of the nodes still carries
/// weight; the step halves until two successive sums agree to the tolerance.
pub fn integrate_vertical_line<F>(integrand: F, contour: &ContourSpec) -> Result<QuadratureResult>
where
    F: Fn(Complex64) -> Complex64,
{
    if contour.kind != ContourKind::VerticalLine {
        return Err(Error::Geometry("integrate_vertical_line needs a vertical_line contour".into()));
    }
    contour.validate()?;
    let path = LinePath { c: contour.anchor, bend: contour.bend, width: contour.bend_width };
    let g = |tau: f64| {
        let (s, ds) = path.point(tau);
        integrand(s) * ds
    };
    let tol = contour.tolerance;
    let mut tr = Trapezoid::new(&g, contour.truncation / contour.initial_nodes as f64, contour.truncation);
    let mut extensions = 0;
    let mut grow_tail = |tr: &mut Trapezoid<'_, _>| -> Result<()> {
        loop {
            if !tr.l1.is_finite() {
                return Err(Error::Convergence("integrand is not finite on the line".into()));
            }
            let tail = tr.edge * tr.h * tr.kmax as f64;
            if settled(tail, TAIL_FACTOR * tr.value().norm(), TAIL_FACTOR * tr.l1 * tr.h, tol) || tr.edge == 0.0 {
                return Ok(());
            }
            if extensions >= contour.max_doublings || tr.nodes > MAX_NODES {
                return Err(Error::Convergence(format!(
                    "integrand tail still significant at |Im s| = {:.3e}",
                    tr.h * tr.kmax as f64
                )));
            }
            tr.extend();
            extensions += 1;
        }
    };
    grow_tail(&mut tr)?;
    let mut prev = tr.value();
    let mut est = f64::INFINITY;
    for _ in 0..contour.max_doublings {
        if tr.nodes > MAX_NODES {
            break;
        }
        tr.refine();
        grow_tail(&mut tr)?;
        let cur = tr.value();
        let diff = (cur - prev).norm();
        let finished = settled(diff, cur.norm(), tr.l1 * tr.h, tol);
        est = diff;
        prev = cur;
        if finished {
            return Ok(QuadratureResult {
                value: cur / Complex64::new(0.0, 2.0 * PI),
                est_error: est / (2.0 * PI),
                nodes_used: tr.nodes,
                converged: true,
            });
        }
    }
    Err(Error::Convergence(format!(
        "line quadrature: successive estimates still differ by {est:.3e} after {} refinements",
        contour.max_doublings
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma::ln_gamma_unchecked;

    #[test]
    fn inverse_mellin_of_gamma_is_exponential() {
        for &x in &[1.0f64, 2.0] {
            let r = integrate_vertical_line(
                |s| (ln_gamma_unchecked(s) - s * x.ln()).exp(),
                &ContourSpec::vertical_line(1.0),
            )
            .unwrap();
            assert!((r.value.re - (-x).exp()).abs() < 1e-12, "x={x}: {}", r.value);
            assert!(r.value.im.abs() < 1e-13);
            assert!(r.converged);
        }
    }

    #[test]
    fn bent_line_gives_same_answer() {
        let f = |s: Complex64| (ln_gamma_unchecked(s) * 2.0 - s * 0.3f64.ln()).exp();
        let straight = integrate_vertical_line(f, &ContourSpec::vertical_line(1.0)).unwrap();
        let bent = integrate_vertical_line(f, &ContourSpec::vertical_line(1.0).with_bend(-1.0, 1.0)).unwrap();
        assert!((straight.value - bent.value).norm() < 1e-11);
    }

    #[test]
    fn rejects_bad_geometry() {
        let mut c = ContourSpec::vertical_line(1.0);
        c.initial_nodes = 4;
        assert!(matches!(integrate_vertical_line(|_| Complex64::new(1.0, 0.0), &c), Err(Error::Geometry(_))));
    }

    #[test]
    fn slow_decay_reports_convergence_failure() {
        // 1/s is not absolutely integrable on a line
        let c = ContourSpec::vertical_line(1.0);
        let r = integrate_vertical_line(|s| 1.0 / s, &c);
        assert!(matches!(r, Err(Error::Convergence(_))));
    }
}

//! Meijer G-functions of a positive real argument, evaluated from their
//! Mellin–Barnes integral, and the parameter algebra that maps one G-function
//! to another.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_vertical_line, ContourKind, ContourSpec, KERNEL_TOLERANCE};
use crate::specfun::gamma::{ln_gamma_real_unchecked, ln_gamma_unchecked, nonpositive_integer};

const INTEGER_TOLERANCE: f64 = 1e-12;
/// Closest a contour may pass to a pole of a numerator gamma factor.
pub const POLE_CLEARANCE: f64 = 1e-8;
/// `ln` of the envelope below which the value is reported as 0.
const UNDERFLOW_LOG: f64 = -800.0;

/// `G^{m,n}_{p,q}(a_1..a_p; b_1..b_q | ·)` with `p = a.len()`, `q = b.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeijerGSpec {
    pub m: usize,
    pub n: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl MeijerGSpec {
    pub fn new(m: usize, n: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let spec = Self { m, n, a, b };
        spec.validate()?;
        Ok(spec)
    }

    pub fn p(&self) -> usize {
        self.a.len()
    }

    pub fn q(&self) -> usize {
        self.b.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n > self.p() || self.m > self.q() {
            return Err(Error::Spec(format!(
                "need n <= p and m <= q, got (m,n,p,q) = ({},{},{},{})",
                self.m,
                self.n,
                self.p(),
                self.q()
            )));
        }
        if self.a.iter().chain(&self.b).any(|v| !v.is_finite()) {
            return Err(Error::Spec("parameters must be finite".into()));
        }
        for ak in &self.a[..self.n] {
            for bj in &self.b[..self.m] {
                let d = ak - bj;
                if d > 0.5 && (d - d.round()).abs() < INTEGER_TOLERANCE {
                    return Err(Error::Spec(format!(
                        "a_k - b_j = {d} is a positive integer: poles of the two kinds collide"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `m + n - (p + q)/2`, the exponential order of the integrand's decay.
    pub fn delta(&self) -> f64 {
        (self.m + self.n) as f64 - 0.5 * (self.p() + self.q()) as f64
    }

    /// Rightmost pole of the `Γ(s + b_j)`, `j <= m` (`-∞` if `m = 0`).
    pub(crate) fn left_poles_edge(&self) -> f64 {
        self.b[..self.m].iter().map(|b| -b).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Leftmost pole of the `Γ(1 - a_j - s)`, `j <= n` (`+∞` if `n = 0`).
    fn right_poles_edge(&self) -> f64 {
        self.a[..self.n].iter().map(|a| 1.0 - a).fold(f64::INFINITY, f64::min)
    }

    /// `ln` of the Mellin–Barnes integrand without `z^{-s}`; `None` where a
    /// denominator gamma has a pole (the integrand vanishes there).
    pub(crate) fn log_gamma_ratio(&self, s: Complex64) -> Option<Complex64> {
        let (m, n) = (self.m, self.n);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &b) in self.b.iter().enumerate() {
            if j < m {
                acc += ln_gamma_unchecked(s + b);
            } else {
                let z = -s + (1.0 - b);
                nonpositive_integer(z).map_or(Some(()), |_| None)?;
                acc -= ln_gamma_unchecked(z);
            }
        }
        for (j, &a) in self.a.iter().enumerate() {
            if j < n {
                acc += ln_gamma_unchecked(-s + (1.0 - a));
            } else {
                let z = s + a;
                nonpositive_integer(z).map_or(Some(()), |_| None)?;
                acc -= ln_gamma_unchecked(z);
            }
        }
        Some(acc)
    }

    /// Smooth envelope of `ln|integrand|` on the real axis inside the strip:
    /// reciprocal gammas lose their `|sin|` factor so that their zeros do not
    /// trap the saddle search, and the numerator gammas keep their poles.
    pub(crate) fn log_envelope(&self, c: f64, ln_x: f64) -> f64 {
        let env = |z: f64| {
            if z >= 0.5 {
                ln_gamma_real_unchecked(z).0
            } else {
                PI.ln() - ln_gamma_real_unchecked(1.0 - z).0
            }
        };
        // numerator arguments are positive inside the strip
        let num = |z: f64| if z > 0.0 { ln_gamma_real_unchecked(z).0 } else { env(z) };
        let mut acc = -c * ln_x;
        for (j, &b) in self.b.iter().enumerate() {
            acc += if j < self.m { num(c + b) } else { -env(1.0 - b - c) };
        }
        for (j, &a) in self.a.iter().enumerate() {
            acc += if j < self.n { num(1.0 - a - c) } else { -env(c + a) };
        }
        acc
    }
}

/// Value of a Meijer G evaluation with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeijerValue {
    pub value: f64,
    /// `|Im|` of the contour integral, zero in exact arithmetic.
    pub imag_residual: f64,
    pub est_error: f64,
    pub nodes_used: usize,
    /// Whether the argument was inverted before integrating.
    pub inverted: bool,
}

/// `G(x)` with an automatically chosen contour at [`KERNEL_TOLERANCE`].
pub fn meijer_g(spec: &MeijerGSpec, x: f64) -> Result<f64> {
    meijer_g_eval(spec, x, None, KERNEL_TOLERANCE).map(|v| v.value)
}

/// `G(x)` with diagnostics. With `contour = None` the path is chosen from the
/// pole layout; a supplied vertical-line contour is used as is.
///
/// For `q < p`, and for `p = q` with `x > 1`, the integral is evaluated for the
/// inverted function at `1/x`, where the integrand decays to the left.
pub fn meijer_g_eval(spec: &MeijerGSpec, x: f64, contour: Option<&ContourSpec>, tolerance: f64) -> Result<MeijerValue> {
    spec.validate()?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("Meijer G argument must be positive, got {x}")));
    }
    if let Some(c) = contour {
        if c.kind != ContourKind::VerticalLine {
            return Err(Error::Geometry("Meijer G needs a vertical_line contour".into()));
        }
        return integrate_on(spec, x, c, false);
    }
    let invert = spec.q() < spec.p() || (spec.q() == spec.p() && x > 1.0);
    let (work, arg) = if invert { (invert_argument(spec), 1.0 / x) } else { (spec.clone(), x) };
    if work.m == 0 {
        // no poles to the left of the contour: the integral closes to zero
        return Ok(MeijerValue { value: 0.0, imag_residual: 0.0, est_error: 0.0, nodes_used: 0, inverted: invert });
    }
    if work.p() == 0 && work.q() == 1 {
        // G^{1,0}_{0,1}(−; b | x) = x^b e^{−x}
        let value = (work.b[0] * arg.ln() - arg).exp();
        return Ok(MeijerValue { value, imag_residual: 0.0, est_error: 0.0, nodes_used: 0, inverted: invert });
    }
    if let Some(value) = compact_support_closed_form(&work, arg) {
        return Ok(MeijerValue { value, imag_residual: 0.0, est_error: 0.0, nodes_used: 0, inverted: invert });
    }
    let contour = auto_contour(&work, arg, tolerance, None)?;
    integrate_on(&work, arg, &contour, invert)
}

/// `G^{1,0}_{1,1}` and, for `x >= 1/2` or a terminating series, `G^{2,0}_{2,2}` on `0 < x < 1`:
///
/// * `G^{1,0}_{1,1}(a; b | x) = x^b (1−x)^{a−b−1} / Γ(a−b)`
/// * `G^{2,0}_{2,2}(a_1, a_2; b_1, b_2 | x) = x^{b_2} (1−x)^{c−1} / Γ(c) ·
///   ₂F₁(a_1−b_1, a_2−b_1; c; 1−x)`, `c = a_1 + a_2 − b_1 − b_2`.
///
/// Near `x = 1` the Mellin–Barnes integrand of these decays only
/// algebraically, so the line integral is avoided there.
fn compact_support_closed_form(spec: &MeijerGSpec, x: f64) -> Option<f64> {
    if spec.n != 0 || spec.m != spec.q() || spec.p() != spec.q() || x >= 1.0 {
        return None;
    }
    let recip_gamma = crate::specfun::gamma::recip_gamma_real;
    match spec.q() {
        1 => {
            let c = spec.a[0] - spec.b[0];
            let g = recip_gamma(c);
            if g == 0.0 {
                return Some(0.0);
            }
            Some(g * x.powf(spec.b[0]) * (1.0 - x).powf(c - 1.0))
        }
        2 => {
            let (a1, a2) = (spec.a[0], spec.a[1]);
            let c = a1 + a2 - spec.b[0] - spec.b[1];
            if c <= 0.0 && (c - c.round()).abs() < INTEGER_TOLERANCE {
                return None;
            }
            // the function is symmetric in b_1, b_2; a terminating series is exact on (0, 1)
            let terminates = |b1: f64| [a1 - b1, a2 - b1].iter().any(|&v| v <= 0.0 && (v - v.round()).abs() < INTEGER_TOLERANCE);
            let (b1, b2) = if terminates(spec.b[0]) {
                (spec.b[0], spec.b[1])
            } else if terminates(spec.b[1]) {
                (spec.b[1], spec.b[0])
            } else if x >= 0.5 {
                (spec.b[0], spec.b[1])
            } else {
                return None;
            };
            let f = if terminates(b1) {
                terminating_hyp2f1(a1 - b1, a2 - b1, c, 1.0 - x)?
            } else {
                hyp2f1_series(a1 - b1, a2 - b1, c, 1.0 - x)?.0
            };
            Some(recip_gamma(c) * x.powf(b2) * (1.0 - x).powf(c - 1.0) * f)
        }
        _ => None,
    }
}

/// Terminating `₂F₁(a, b; c; z)`, `a = −k`, summed either in powers of `z` or
/// of `1 − z` through `(c−b)_k/(c)_k ₂F₁(−k, b; b−c−k+1; 1−z)`, whichever has
/// the smaller sum of absolute terms.
fn terminating_hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Option<f64> {
    let (a, b) = if a <= 0.0 && (a - a.round()).abs() < INTEGER_TOLERANCE { (a, b) } else { (b, a) };
    let k = (-a).round() as usize;
    let (direct, direct_mass) = hyp2f1_series(a, b, c, z)?;
    let c2 = b - c - k as f64 + 1.0;
    if (0..k).any(|j| (c2 + j as f64).abs() < INTEGER_TOLERANCE) {
        return Some(direct);
    }
    let ratio: f64 = (0..k).map(|j| (c - b + j as f64) / (c + j as f64)).product();
    let (reflected, reflected_mass) = hyp2f1_series(-(k as f64), b, c2, 1.0 - z)?;
    Some(if ratio.abs() * reflected_mass < direct_mass { ratio * reflected } else { direct })
}

/// Gauss series for `|z| <= 1/2` or a terminating series, with the sum of the
/// absolute values of its terms.
fn hyp2f1_series(a: f64, b: f64, c: f64, z: f64) -> Option<(f64, f64)> {
    let mut term = 1.0;
    let mut mass = 1.0;
    let mut acc = crate::specfun::wright::CompensatedSum::default();
    acc.add(1.0);
    for j in 0..4000 {
        let jf = j as f64;
        term *= (a + jf) * (b + jf) / ((c + jf) * (jf + 1.0)) * z;
        acc.add(term);
        mass += term.abs();
        if term == 0.0 || (term.abs() <= 1e-17 * acc.value().abs() && jf > (a.abs() + b.abs())) {
            return Some((acc.value(), mass));
        }
    }
    None
}

/// Bent line for the integrand of `spec` at argument `x`. The abscissa is the
/// saddle of the real-axis envelope unless `anchor` fixes it.
pub(crate) fn auto_contour(spec: &MeijerGSpec, x: f64, tolerance: f64, anchor: Option<f64>) -> Result<ContourSpec> {
    let lo = spec.left_poles_edge();
    let hi = spec.right_poles_edge();
    if hi - lo <= 2.0 * POLE_CLEARANCE {
        return Err(Error::Spec(format!("no room for a contour between poles at {lo} and {hi}")));
    }
    let ln_x = x.ln();
    let phi = |c: f64| spec.log_envelope(c, ln_x);
    if let Some(c) = anchor {
        return Ok(shape_contour(spec, &phi, c, ln_x, tolerance));
    }
    let margin = if hi.is_finite() { (0.01f64).min(0.25 * (hi - lo)) } else { 0.01 };
    let a = lo + margin;
    let mut b = if hi.is_finite() {
        hi - margin
    } else {
        let mut b = a + 1.0;
        let mut step = 1.0;
        for _ in 0..60 {
            if phi(b + step) > phi(b) {
                break;
            }
            b += step;
            step *= 2.0;
        }
        b + step
    };
    if b < a {
        b = a;
    }
    let c = golden_minimum(&phi, a, b);
    Ok(shape_contour(spec, &phi, c, ln_x, tolerance))
}

fn shape_contour<F: Fn(f64) -> f64>(spec: &MeijerGSpec, phi: &F, c: f64, ln_x: f64, tolerance: f64) -> ContourSpec {
    // curvature of the envelope sets the width of the integrand across the line
    let d = 1e-3 * (1.0 + c.abs());
    let curv = (phi(c + d) - 2.0 * phi(c) + phi(c - d)) / (d * d);
    let sigma = if curv > 0.0 { curv.sqrt().recip().clamp(0.05, 50.0) } else { 1.0 };
    let bend = if spec.p() == spec.q() && spec.delta() <= 0.0 {
        // only z^{-s} makes the integrand decay: steepen the bend near z = 1
        -(2.0 / (-ln_x).max(1e-12)).clamp(1.0, 40.0)
    } else if spec.n > 0 && ln_x > 0.0 {
        // bending left would multiply the integrand by z^{|Re s|}
        0.0
    } else {
        -1.0
    };
    ContourSpec::vertical_line(c).with_tolerance(tolerance).with_truncation(6.0 * sigma, 32).with_bend(bend, sigma)
}

fn golden_minimum<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if b - a < 1e-6 * (1.0 + a.abs()) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

fn integrate_on(spec: &MeijerGSpec, x: f64, contour: &ContourSpec, inverted: bool) -> Result<MeijerValue> {
    let lo = spec.left_poles_edge();
    let hi = spec.right_poles_edge();
    let mut c = contour.anchor;
    if !(c > lo && c < hi) {
        return Err(Error::Geometry(format!("abscissa {c} does not separate the poles at {lo} and {hi}")));
    }
    // the path meets the real axis only at c: keep c off the poles
    if c - lo < POLE_CLEARANCE || hi - c < POLE_CLEARANCE {
        let half_step = 0.5 * contour.truncation / contour.initial_nodes as f64;
        c = if c - lo < POLE_CLEARANCE { c + half_step.min(0.5 * (hi - lo)) } else { c - half_step.min(0.5 * (hi - lo)) };
    }
    let ln_x = x.ln();
    let scale = spec.log_envelope(c, ln_x);
    if scale < UNDERFLOW_LOG {
        // the envelope bounds |G| far below the smallest subnormal
        return Ok(MeijerValue { value: 0.0, imag_residual: 0.0, est_error: 0.0, nodes_used: 0, inverted });
    }
    let mut contour = *contour;
    contour.anchor = c;
    let f = |s: Complex64| match spec.log_gamma_ratio(s) {
        Some(l) => (l - s * ln_x - scale).exp(),
        None => Complex64::new(0.0, 0.0),
    };
    let r = integrate_vertical_line(f, &contour)?;
    let factor = scale.exp();
    let value = r.value.re * factor;
    if !value.is_finite() {
        return Err(Error::Numerical(format!("Meijer G value overflows at x = {x}")));
    }
    Ok(MeijerValue {
        value,
        imag_residual: r.value.im.abs() * factor,
        est_error: r.est_error * factor,
        nodes_used: r.nodes_used,
        inverted,
    })
}

/// `ln ∫_0^∞ x^{s-1} G(x) dx`, or `None` when the transform vanishes.
pub fn meijer_mellin_log_moment(spec: &MeijerGSpec, s: Complex64) -> Result<Option<Complex64>> {
    spec.validate()?;
    for &b in &spec.b[..spec.m] {
        if !((s + b).re > 0.0) {
            return Err(Error::Strip(format!("Re(s + b_j) = {} <= 0", (s + b).re)));
        }
    }
    for &a in &spec.a[..spec.n] {
        if !((1.0 - a - s).re > 0.0) {
            return Err(Error::Strip(format!("Re(1 - a_j - s) = {} <= 0", (1.0 - a - s).re)));
        }
    }
    Ok(spec.log_gamma_ratio(s))
}

/// `∫_0^∞ x^{s-1} G(x) dx` as a ratio of gamma functions.
pub fn meijer_mellin_moment(spec: &MeijerGSpec, s: Complex64) -> Result<Complex64> {
    Ok(meijer_mellin_log_moment(spec, s)?.map_or(Complex64::new(0.0, 0.0), |l| l.exp()))
}

/// Spec of `x^α G(x)`.
pub fn shift_parameters(spec: &MeijerGSpec, alpha: f64) -> Result<MeijerGSpec> {
    MeijerGSpec::new(
        spec.m,
        spec.n,
        spec.a.iter().map(|v| v + alpha).collect(),
        spec.b.iter().map(|v| v + alpha).collect(),
    )
}

/// Spec of `G(1/x)`.
pub fn invert_argument(spec: &MeijerGSpec) -> MeijerGSpec {
    MeijerGSpec {
        m: spec.n,
        n: spec.m,
        a: spec.b.iter().map(|v| 1.0 - v).collect(),
        b: spec.a.iter().map(|v| 1.0 - v).collect(),
    }
}

/// Spec of `y ↦ ∫_0^∞ x^{ν-1} e^{-x} G(y/x) dx`.
pub fn convolve_exp_power(spec: &MeijerGSpec, nu: f64) -> MeijerGSpec {
    let mut b = Vec::with_capacity(spec.q() + 1);
    b.push(nu);
    b.extend_from_slice(&spec.b);
    MeijerGSpec { m: spec.m + 1, n: spec.n, a: spec.a.clone(), b }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WrightMode {
    /// `J_{a,M}`
    BEqualsM,
    /// `J_{a,1/M}`
    BEqualsOneOverM,
}

/// `J_{a,b}(x) = prefactor · G(spec | argument_scale · x^argument_power)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WrightAsMeijer {
    pub prefactor: f64,
    pub spec: MeijerGSpec,
    pub argument_scale: f64,
    pub argument_power: u32,
}

impl WrightAsMeijer {
    pub fn eval(&self, x: f64) -> Result<f64> {
        let z = self.argument_scale * x.powi(self.argument_power as i32);
        Ok(self.prefactor * meijer_g(&self.spec, z)?)
    }
}

/// Meijer G form of Wright's function with `b = M` or `b = 1/M`.
pub fn wright_to_meijer(a: f64, big_m: u32, mode: WrightMode) -> Result<WrightAsMeijer> {
    if big_m == 0 {
        return Err(Error::Domain("M must be a positive integer".into()));
    }
    let mf = big_m as f64;
    let scale = mf.powf(-mf);
    let out = match mode {
        WrightMode::BEqualsM => {
            let mut b = vec![0.0];
            b.extend((1..=big_m).map(|j| (j as f64 - a) / mf));
            WrightAsMeijer {
                prefactor: (2.0 * PI).powf(0.5 * (mf - 1.0)) * mf.powf(0.5 - a),
                spec: MeijerGSpec::new(1, 0, vec![], b)?,
                argument_scale: scale,
                argument_power: 1,
            }
        }
        WrightMode::BEqualsOneOverM => {
            let mut b: Vec<f64> = (0..big_m).map(|k| k as f64 / mf).collect();
            b.push(1.0 - a);
            WrightAsMeijer {
                prefactor: (2.0 * PI).powf(-0.5 * (mf - 1.0)) * mf.sqrt(),
                spec: MeijerGSpec::new(big_m as usize, 0, vec![], b)?,
                argument_scale: scale,
                argument_power: big_m,
            }
        }
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_half_line;
    use crate::specfun::wright::{wright_bessel, WrightParams};

    fn spec(m: usize, n: usize, a: &[f64], b: &[f64]) -> MeijerGSpec {
        MeijerGSpec::new(m, n, a.to_vec(), b.to_vec()).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn exponential() {
        let s = spec(1, 0, &[], &[0.0]);
        for &x in &[1e-3, 0.3, 1.0, 5.0, 40.0] {
            let v = meijer_g(&s, x).unwrap();
            assert!(close(v, (-x).exp(), 1e-9), "x={x}: {v}");
        }
    }

    #[test]
    fn compact_support_weight() {
        let s = spec(1, 0, &[2.0], &[0.0]);
        assert!(close(meijer_g(&s, 0.25).unwrap(), 0.75, 1e-9));
        assert!(close(meijer_g(&s, 0.9).unwrap(), 0.1, 1e-8));
        assert_eq!(meijer_g(&s, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn product_of_two_exponentials() {
        // ∫ t^{-1} e^{-t} e^{-1/t} dt by direct quadrature
        let oracle = integrate_half_line(|t| (-t - 1.0 / t).exp() / t, 1e-13).unwrap().value.re;
        let v = meijer_g(&spec(2, 0, &[], &[0.0, 0.0]), 1.0).unwrap();
        assert!(close(v, oracle, 1e-9), "{v} vs {oracle}");
    }

    #[test]
    fn closed_form_agrees_with_line_integral() {
        let s = spec(2, 0, &[-2.0, 6.5], &[0.5, 1.0]);
        for &x in &[0.5, 0.6, 0.8] {
            let closed = compact_support_closed_form(&s, x).unwrap();
            let c = auto_contour(&s, x, 1e-11, None).unwrap();
            let line = integrate_on(&s, x, &c, false).unwrap().value;
            assert!(close(closed, line, 1e-9), "x={x}: {closed} vs {line}");
        }
        // terminating case: (1-x)^{c-1} times a polynomial in 1-x
        let s = spec(2, 0, &[-3.0, 4.0], &[0.0, 0.0]);
        for x in [0.999f64, 0.3, 1e-4] {
            let poly = -1.0 + 12.0 * x - 30.0 * x * x + 20.0 * x.powi(3);
            assert!(close(meijer_g(&s, x).unwrap(), poly, 1e-10), "x={x}");
        }
        let s = spec(2, 0, &[-2.0, 6.5], &[0.5, 0.0]);
        let x = 0.2;
        let c = auto_contour(&s, x, 1e-11, None).unwrap();
        let line = integrate_on(&s, x, &c, false).unwrap().value;
        assert!(close(compact_support_closed_form(&s, x).unwrap(), line, 1e-9));
    }

    #[test]
    fn terminating_series_near_zero_is_legendre() {
        // G^{2,0}_{2,2}(−k, k+1; 0, 0 | x) = P_k(2x − 1)
        let k = 12;
        let s = spec(2, 0, &[-(k as f64), k as f64 + 1.0], &[0.0, 0.0]);
        for (x, tol) in [(1e-3f64, 1e-13), (0.05, 1e-13), (0.3, 1e-10), (0.9, 1e-13)] {
            let t = 2.0 * x - 1.0;
            let (mut p0, mut p1) = (1.0, t);
            for j in 1..k {
                let jf = j as f64;
                (p0, p1) = (p1, ((2.0 * jf + 1.0) * t * p1 - jf * p0) / (jf + 1.0));
            }
            let g = meijer_g(&s, x).unwrap();
            assert!(close(g, p1, tol), "x={x}: {g} vs {p1}");
        }
    }

    #[test]
    fn both_sides_of_one_for_p_equal_q() {
        // G^{1,1}_{1,1}(0; 0 | x) = 1/(1 + x)
        let s = spec(1, 1, &[0.0], &[0.0]);
        for &x in &[0.1, 0.8, 1.0, 1.5, 20.0] {
            let v = meijer_g(&s, x).unwrap();
            assert!(close(v, 1.0 / (1.0 + x), 1e-9), "x={x}: {v}");
        }
    }

    #[test]
    fn more_a_than_b_goes_through_inversion() {
        // G^{0,1}_{1,0}(1; - | x) = e^{-1/x}
        let s = spec(0, 1, &[1.0], &[]);
        let r = meijer_g_eval(&s, 0.7, None, 1e-10).unwrap();
        assert!(r.inverted);
        assert!(close(r.value, (-1.0f64 / 0.7).exp(), 1e-9));
    }

    #[test]
    fn imaginary_residual_is_small() {
        let r = meijer_g_eval(&spec(3, 0, &[], &[0.0, 1.0, 2.5]), 2.0, None, 1e-10).unwrap();
        assert!(r.imag_residual <= 1e-8 * r.value.abs());
    }

    #[test]
    fn spec_validation() {
        assert!(matches!(MeijerGSpec::new(2, 0, vec![], vec![0.0]), Err(Error::Spec(_))));
        assert!(matches!(MeijerGSpec::new(1, 1, vec![2.0], vec![0.0]), Err(Error::Spec(_))));
        assert!(MeijerGSpec::new(1, 1, vec![0.5], vec![0.0]).is_ok());
        assert!(matches!(meijer_g(&spec(1, 0, &[], &[0.0]), -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn mellin_moments() {
        let e = spec(1, 0, &[], &[0.0]);
        let v = meijer_mellin_moment(&e, Complex64::new(3.0, 0.0)).unwrap();
        assert!((v.re - 2.0).abs() < 1e-13);
        let e2 = spec(1, 0, &[], &[2.0]);
        let v = meijer_mellin_moment(&e2, Complex64::new(1.0, 0.0)).unwrap();
        assert!((v.re - 2.0).abs() < 1e-13);
        assert!(matches!(meijer_mellin_moment(&e, Complex64::new(-0.5, 0.0)), Err(Error::Strip(_))));
        // (1 - x) on (0, 1): ∫ (1 - x) dx = 1/2
        let w = spec(1, 0, &[2.0], &[0.0]);
        let v = meijer_mellin_moment(&w, Complex64::new(1.0, 0.0)).unwrap();
        assert!((v.re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn shift_contract() {
        let base = spec(2, 0, &[], &[0.0, 0.0]);
        assert_eq!(shift_parameters(&base, 0.0).unwrap(), base);
        let shifted = shift_parameters(&base, 1.5).unwrap();
        let x: f64 = 0.7;
        let lhs = meijer_g(&shifted, x).unwrap();
        let rhs = x.powf(1.5) * meijer_g(&base, x).unwrap();
        assert!(close(lhs, rhs, 1e-8));
        assert_eq!(shift_parameters(&spec(1, 0, &[], &[0.0]), 2.0).unwrap(), spec(1, 0, &[], &[2.0]));
    }

    #[test]
    fn inversion_contract() {
        let e = spec(1, 0, &[], &[0.0]);
        assert_eq!(invert_argument(&invert_argument(&e)), e);
        let v = meijer_g(&invert_argument(&e), 2.0).unwrap();
        assert!(close(v, (-0.5f64).exp(), 1e-9));
        // inversion then x^{-n-1}: G^{m,n}_{p,q}(a; b) -> G^{n,m}_{q,p}(-b-n; -a-n)
        let phi = spec(2, 1, &[0.5, 3.0], &[0.0, 1.0, 2.0]);
        let n = 3.0;
        let psi = shift_parameters(&invert_argument(&phi), -n - 1.0).unwrap();
        assert_eq!((psi.m, psi.n), (1, 2));
        assert_eq!(psi.a, vec![-n, -1.0 - n, -2.0 - n]);
        assert_eq!(psi.b, vec![-0.5 - n, -3.0 - n]);
    }

    #[test]
    fn convolution_contract() {
        let c = convolve_exp_power(&spec(1, 0, &[], &[1.0]), 2.0);
        assert_eq!(c, spec(2, 0, &[], &[2.0, 1.0]));
        let c0 = convolve_exp_power(&spec(1, 0, &[], &[0.0]), 0.0);
        let oracle = integrate_half_line(|t| (-t - 1.0 / t).exp() / t, 1e-13).unwrap().value.re;
        assert!(close(meijer_g(&c0, 1.0).unwrap(), oracle, 1e-9));
    }

    #[test]
    fn wright_forms() {
        let series = |a: f64, b: f64, x: f64| wright_bessel(WrightParams::new(a, b).unwrap(), x).unwrap();
        let one = wright_to_meijer(1.0, 1, WrightMode::BEqualsOneOverM).unwrap();
        assert_eq!(one.spec, spec(1, 0, &[], &[0.0, 0.0]));
        assert!((one.eval(1.0).unwrap() - series(1.0, 1.0, 1.0)).abs() < 1e-10);
        let two = wright_to_meijer(1.0, 2, WrightMode::BEqualsM).unwrap();
        assert!((two.eval(0.5).unwrap() - series(1.0, 2.0, 0.5)).abs() < 1e-10);
        for &a in &[0.5, 1.0, 2.3] {
            let p = wright_to_meijer(a, 1, WrightMode::BEqualsM).unwrap();
            let q = wright_to_meijer(a, 1, WrightMode::BEqualsOneOverM).unwrap();
            for &x in &[0.2, 1.0, 3.0] {
                assert!((p.eval(x).unwrap() - q.eval(x).unwrap()).abs() < 1e-10);
            }
        }
        let third = wright_to_meijer(1.7, 3, WrightMode::BEqualsOneOverM).unwrap();
        for &x in &[0.4, 2.0] {
            assert!((third.eval(x).unwrap() - series(1.7, 1.0 / 3.0, x)).abs() < 1e-9, "x={x}");
        }
    }
}

//! Polynomial ensembles `Δ(y) det[w_{k-1}(y_j)] / Z_n` for squared singular
//! values of matrix products, with their exact normalization.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{log_det, log_vandermonde, signed_log_det};
use crate::specfun::gamma::ln_gamma_real_unchecked;
use crate::specfun::meijer::{convolve_exp_power, invert_argument, meijer_g, meijer_mellin_log_moment, shift_parameters};
use crate::specfun::MeijerGSpec;

/// Largest `n` for which the moment matrix is factored at construction.
pub const EAGER_NORMALIZATION_MAX_N: usize = 30;
/// Pivot spread of the scaled moment matrix above which it is reported as ill-conditioned.
pub const CONDITION_WARNING: f64 = 1e12;
const DISTINCT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    PositiveAxis,
    UnitInterval,
}

/// `w(x) = exp(log_prefactor) · G(spec | x)` on `support`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightFunction {
    pub log_prefactor: f64,
    pub spec: MeijerGSpec,
    pub support: Support,
}

impl WeightFunction {
    pub fn new(spec: MeijerGSpec, support: Support) -> Self {
        Self { log_prefactor: 0.0, spec, support }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("weight argument must be positive, got {x}")));
        }
        if self.support == Support::UnitInterval && x >= 1.0 {
            return Ok(0.0);
        }
        Ok(self.log_prefactor.exp() * meijer_g(&self.spec, x)?)
    }

    /// `ln ∫_0^∞ x^{s-1} w(x) dx`, `None` when the moment is zero.
    pub fn log_moment(&self, s: Complex64) -> Result<Option<Complex64>> {
        Ok(meijer_mellin_log_moment(&self.spec, s)?.map(|l| l + self.log_prefactor))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelTag {
    GinibreChain,
    InverseChain,
    TruncatedChain,
    Transformed,
}

/// Truncated-unitary chain: the `(n+ν₁)×n` corner of an `l×l` Haar unitary,
/// multiplied by `M-1` Ginibre matrices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationModelParams {
    pub n: usize,
    pub nu: Vec<usize>,
    pub l: usize,
}

impl TruncationModelParams {
    pub fn new(n: usize, nu: Vec<usize>, l: usize) -> Result<Self> {
        let p = Self { n, nu, l };
        p.validate()?;
        Ok(p)
    }

    /// Number of factors `M`.
    pub fn m(&self) -> usize {
        self.nu.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.nu.is_empty() {
            return Err(Error::Domain("need n >= 1 and at least one factor".into()));
        }
        if self.l < 2 * self.n + self.nu[0] {
            return Err(Error::Truncation(format!(
                "l = {} < 2n + nu_1 = {}",
                self.l,
                2 * self.n + self.nu[0]
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialEnsemble {
    pub n: usize,
    pub weights: Vec<WeightFunction>,
    pub model_tag: ModelTag,
    log_z: Option<(f64, f64)>,
}

impl PolynomialEnsemble {
    pub fn new(weights: Vec<WeightFunction>, model_tag: ModelTag) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::Domain("an ensemble needs at least one weight".into()));
        }
        if weights.iter().any(|w| w.support != weights[0].support) {
            return Err(Error::Domain("all weights must share one support".into()));
        }
        let mut ens = Self { n, weights, model_tag, log_z: None };
        if n <= EAGER_NORMALIZATION_MAX_N {
            let (lz, sign, _) = compute_log_z(&ens)?;
            ens.log_z = Some((lz, sign));
        }
        Ok(ens)
    }

    pub fn support(&self) -> Support {
        self.weights[0].support
    }
}

fn nonneg(nu: &[usize]) -> Vec<f64> {
    nu.iter().map(|&v| v as f64).collect()
}

/// Weights `G^{M,0}_{0,M}(−; ν_M, …, ν_2, ν_1 + k | y)`.
pub fn ginibre_chain_ensemble(n: usize, nu: &[usize]) -> Result<PolynomialEnsemble> {
    if n == 0 || nu.is_empty() {
        return Err(Error::Domain("need n >= 1 and at least one factor".into()));
    }
    let rev: Vec<f64> = nonneg(nu).into_iter().rev().collect();
    let weights = (0..n)
        .map(|k| {
            let mut b = rev.clone();
            *b.last_mut().unwrap() += k as f64;
            Ok(WeightFunction::new(MeijerGSpec::new(nu.len(), 0, vec![], b)?, Support::PositiveAxis))
        })
        .collect::<Result<Vec<_>>>()?;
    PolynomialEnsemble::new(weights, ModelTag::GinibreChain)
}

/// `G_M ⋯ G_1 (G̃_K ⋯ G̃_1)^{-1}`: weights
/// `G^{M,K}_{K,M}(−ν̃_K−n, …, −ν̃_2−n, −ν̃_1−n−k; ν_M, …, ν_1 | y)`.
///
/// `tilde_nu = (ν̃_1, …, ν̃_K)` with `ν̃_K = 0`, so that the inverted product is square.
pub fn inverse_chain_ensemble(n: usize, nu: &[usize], tilde_nu: &[usize]) -> Result<PolynomialEnsemble> {
    if n == 0 || nu.is_empty() || tilde_nu.is_empty() {
        return Err(Error::Domain("need n >= 1, M >= 1 and K >= 1".into()));
    }
    if *tilde_nu.last().unwrap() != 0 {
        return Err(Error::Domain("the last inverted factor must be square (tilde_nu_K = 0)".into()));
    }
    let nf = n as f64;
    let b: Vec<f64> = nonneg(nu).into_iter().rev().collect();
    let weights = (0..n)
        .map(|k| {
            let mut a: Vec<f64> = tilde_nu.iter().rev().map(|&t| -(t as f64) - nf).collect();
            *a.last_mut().unwrap() -= k as f64;
            let spec = MeijerGSpec::new(nu.len(), tilde_nu.len(), a, b.clone())?;
            Ok(WeightFunction::new(spec, Support::PositiveAxis))
        })
        .collect::<Result<Vec<_>>>()?;
    PolynomialEnsemble::new(weights, ModelTag::InverseChain)
}

/// Weights `Γ(l−2n−ν_1+1) · G^{M,0}_{1,M}(l−2n+1+k; ν_M, …, ν_2, ν_1+k | y)`.
///
/// The prefactor makes the `M = 1` weights equal to `x^{ν_1+k}(1−x)^{l−2n−ν_1}`.
pub fn truncated_unitary_chain_ensemble(params: &TruncationModelParams) -> Result<PolynomialEnsemble> {
    params.validate()?;
    let n = params.n;
    let shift = (params.l - 2 * n) as f64;
    let log_prefactor = ln_gamma_real_unchecked(shift - params.nu[0] as f64 + 1.0).0;
    let rev: Vec<f64> = nonneg(&params.nu).into_iter().rev().collect();
    let support = if params.m() == 1 { Support::UnitInterval } else { Support::PositiveAxis };
    let weights = (0..n)
        .map(|k| {
            let mut b = rev.clone();
            *b.last_mut().unwrap() += k as f64;
            let spec = MeijerGSpec::new(params.m(), 0, vec![shift + 1.0 + k as f64], b)?;
            Ok(WeightFunction { log_prefactor, spec, support })
        })
        .collect::<Result<Vec<_>>>()?;
    PolynomialEnsemble::new(weights, ModelTag::TruncatedChain)
}

/// Ensemble of `Y = G X` for a Ginibre `G` with `ν` extra rows:
/// `g_k(y) = ∫_0^∞ x^ν e^{−x} f_k(y/x) dx/x`.
pub fn apply_ginibre_transform(ens: &PolynomialEnsemble, nu: usize) -> Result<PolynomialEnsemble> {
    let weights = ens
        .weights
        .iter()
        .map(|w| WeightFunction {
            log_prefactor: w.log_prefactor,
            spec: convolve_exp_power(&w.spec, nu as f64),
            support: Support::PositiveAxis,
        })
        .collect();
    PolynomialEnsemble::new(weights, ModelTag::Transformed)
}

/// Ensemble of `Y = X^{-1}`: `ψ_k(y) = y^{−n−1} φ_k(1/y)`.
pub fn apply_inversion(ens: &PolynomialEnsemble) -> Result<PolynomialEnsemble> {
    if ens.support() != Support::PositiveAxis {
        return Err(Error::Domain("inversion needs weights on the positive axis".into()));
    }
    let shift = -(ens.n as f64) - 1.0;
    let weights = ens
        .weights
        .iter()
        .map(|w| {
            Ok(WeightFunction {
                log_prefactor: w.log_prefactor,
                spec: shift_parameters(&invert_argument(&w.spec), shift)?,
                support: Support::PositiveAxis,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    PolynomialEnsemble::new(weights, ModelTag::Transformed)
}

/// Entrywise `(ln|∫ x^j w_k|, sign)`.
pub(crate) fn log_moments(ens: &PolynomialEnsemble) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = ens.n;
    let mut la = DMatrix::from_element(n, n, f64::NEG_INFINITY);
    let mut sg = DMatrix::zeros(n, n);
    for (k, w) in ens.weights.iter().enumerate() {
        for j in 0..n {
            if let Some(l) = w.log_moment(Complex64::new(j as f64 + 1.0, 0.0))? {
                // real gamma ratio: the imaginary part of the log is 0 or π
                la[(j, k)] = l.re;
                sg[(j, k)] = if l.im.cos() < 0.0 { -1.0 } else { 1.0 };
            }
        }
    }
    Ok((la, sg))
}

/// `M_{jk} = ∫_0^∞ x^j w_k(x) dx`.
pub fn moment_matrix(ens: &PolynomialEnsemble) -> Result<DMatrix<f64>> {
    let (la, sg) = log_moments(ens)?;
    Ok(DMatrix::from_fn(ens.n, ens.n, |j, k| sg[(j, k)] * la[(j, k)].exp()))
}

/// `(ln|Z_n|, sign Z_n, pivot spread)` with `Z_n = n! det M`.
fn compute_log_z(ens: &PolynomialEnsemble) -> Result<(f64, f64, f64)> {
    let (la, sg) = log_moments(ens)?;
    let d = signed_log_det(&la, &sg);
    if d.sign == 0.0 || !d.log_abs.is_finite() {
        return Err(Error::Singularity(format!("moment matrix is numerically singular (ln|det| = {})", d.log_abs)));
    }
    Ok((ln_gamma_real_unchecked(ens.n as f64 + 1.0).0 + d.log_abs, d.sign, d.pivot_ratio))
}

fn log_z(ens: &PolynomialEnsemble) -> Result<(f64, f64)> {
    match ens.log_z {
        Some(z) => Ok(z),
        None => compute_log_z(ens).map(|r| (r.0, r.1)),
    }
}

/// `ln|Z_n|`, the normalization of `Δ(y) det[w_{k−1}(y_j)]`.
///
/// `Z_n` itself is negative when the weights come out of an argument
/// inversion with `n ≡ 1, 2 (mod 4)`: the change of variables flips the sign
/// of `Δ(y) det[w_{k−1}(y_j)]`, see [`normalization_sign`].
pub fn normalization_constant(ens: &PolynomialEnsemble) -> Result<f64> {
    log_z(ens).map(|z| z.0)
}

/// Sign of `Z_n`.
pub fn normalization_sign(ens: &PolynomialEnsemble) -> Result<f64> {
    log_z(ens).map(|z| z.1)
}

/// Pivot spread of the scaled moment matrix; above [`CONDITION_WARNING`] the
/// normalization and kernels built from it lose digits.
pub fn moment_conditioning(ens: &PolynomialEnsemble) -> Result<f64> {
    compute_log_z(ens).map(|r| r.2)
}

fn check_distinct(points: &[f64], what: &str) -> Result<()> {
    for j in 0..points.len() {
        for k in (j + 1)..points.len() {
            let scale = points[j].abs().max(points[k].abs()).max(1.0);
            if (points[j] - points[k]).abs() <= DISTINCT_TOLERANCE * scale {
                return Err(Error::DegenerateInput(format!("{what} entries {j} and {k} coincide")));
            }
        }
    }
    Ok(())
}

/// Joint density `Δ(y) det[w_{k−1}(y_j)] / Z_n`.
pub fn jpdf(ens: &PolynomialEnsemble, points: &[f64]) -> Result<f64> {
    if points.len() != ens.n {
        return Err(Error::Domain(format!("expected {} points, got {}", ens.n, points.len())));
    }
    if points.iter().any(|&y| !(y > 0.0 && y.is_finite())) {
        return Err(Error::Domain("points must be positive".into()));
    }
    check_distinct(points, "point")?;
    let n = ens.n;
    let mut w = DMatrix::zeros(n, n);
    for (j, &y) in points.iter().enumerate() {
        for (k, wk) in ens.weights.iter().enumerate() {
            w[(j, k)] = wk.eval(y)?;
        }
    }
    let d = log_det(&w);
    if d.sign == 0.0 {
        return Ok(0.0);
    }
    let (lv, sv) = log_vandermonde(points);
    let (lz, sz) = log_z(ens)?;
    Ok(d.sign * sv * sz * (d.log_abs + lv - lz).exp())
}

/// Density of the squared singular values `y` of `G X` for fixed `X` with
/// squared singular values `x` and a Ginibre `G` with `ν` extra rows:
///
/// `Δ(y) det[y_j^ν e^{−y_j/x_k} / x_k^{ν+1}] / (n! Π_{j<n} Γ(ν+j+1) Δ(x))`.
pub fn fixed_x_transition_density(x: &[f64], nu: usize, y: &[f64]) -> Result<f64> {
    let n = x.len();
    if n == 0 || y.len() != n {
        return Err(Error::Domain("x and y must have the same positive length".into()));
    }
    if x.iter().chain(y).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::Domain("all entries must be positive".into()));
    }
    check_distinct(x, "x")?;
    check_distinct(y, "y")?;
    let nuf = nu as f64;
    let la = DMatrix::from_fn(n, n, |j, k| nuf * y[j].ln() - y[j] / x[k] - (nuf + 1.0) * x[k].ln());
    let d = signed_log_det(&la, &DMatrix::from_element(n, n, 1.0));
    if d.sign == 0.0 {
        return Ok(0.0);
    }
    let (ly, sy) = log_vandermonde(y);
    let (lx, sx) = log_vandermonde(x);
    let log_norm = ln_gamma_real_unchecked(n as f64 + 1.0).0
        + (0..n).map(|j| ln_gamma_real_unchecked(nuf + j as f64 + 1.0).0).sum::<f64>();
    Ok(d.sign * sy * sx * (d.log_abs + ly - lx - log_norm).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_half_line, integrate_unit_interval};

    #[test]
    fn ginibre_weight_lists() {
        let e = ginibre_chain_ensemble(1, &[0]).unwrap();
        assert_eq!(e.weights[0].spec, MeijerGSpec::new(1, 0, vec![], vec![0.0]).unwrap());
        let e = ginibre_chain_ensemble(2, &[1, 3]).unwrap();
        assert_eq!(e.weights[1].spec.b, vec![3.0, 2.0]);
        let e = ginibre_chain_ensemble(1, &[0, 0]).unwrap();
        let oracle = integrate_half_line(|t| (-t - 1.0 / t).exp() / t, 1e-13).unwrap().value.re;
        assert!((e.weights[0].eval(1.0).unwrap() - oracle).abs() < 1e-9 * oracle);
    }

    #[test]
    fn inverse_chain_weight_lists() {
        let n = 3;
        let e = inverse_chain_ensemble(n, &[0], &[0]).unwrap();
        for (k, w) in e.weights.iter().enumerate() {
            assert_eq!((w.spec.m, w.spec.n), (1, 1));
            assert_eq!(w.spec.a, vec![-(n as f64) - k as f64]);
            assert_eq!(w.spec.b, vec![0.0]);
        }
        // same lists through inversion of the K-chain and Ginibre transforms
        let base = ginibre_chain_ensemble(n, &[2, 0]).unwrap();
        let built = apply_ginibre_transform(&apply_ginibre_transform(&apply_inversion(&base).unwrap(), 1).unwrap(), 4)
            .unwrap();
        let direct = inverse_chain_ensemble(n, &[1, 4], &[2, 0]).unwrap();
        for (w1, w2) in built.weights.iter().zip(&direct.weights) {
            assert_eq!(w1.spec, w2.spec);
        }
        assert!(inverse_chain_ensemble(n, &[0], &[1]).is_err());
    }

    #[test]
    fn truncation_weights() {
        assert!(matches!(TruncationModelParams::new(3, vec![1], 6), Err(Error::Truncation(_))));
        let p = TruncationModelParams::new(2, vec![0], 4).unwrap();
        let e = truncated_unitary_chain_ensemble(&p).unwrap();
        assert!((e.weights[0].eval(0.3).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(e.weights[0].eval(1.5).unwrap(), 0.0);
        let p = TruncationModelParams::new(3, vec![1], 9).unwrap();
        let e = truncated_unitary_chain_ensemble(&p).unwrap();
        let x: f64 = 0.35;
        for k in 0..3 {
            let expect = x.powi(1 + k as i32) * (1.0 - x).powi(2);
            assert!((e.weights[k].eval(x).unwrap() - expect).abs() < 1e-9 * expect);
        }
        let p = TruncationModelParams::new(2, vec![1, 2], 7).unwrap();
        let e = truncated_unitary_chain_ensemble(&p).unwrap();
        assert_eq!(e.weights[1].spec.a, vec![5.0]);
        assert_eq!(e.weights[1].spec.b, vec![2.0, 2.0]);
    }

    #[test]
    fn transform_matches_chain_and_quadrature() {
        let one = ginibre_chain_ensemble(2, &[1]).unwrap();
        let two = apply_ginibre_transform(&one, 2).unwrap();
        assert_eq!(two.weights, ginibre_chain_ensemble(2, &[1, 2]).unwrap().weights);
        // g_1(0.5) = ∫ x^{ν-1} e^{-x} f_1(0.5/x) dx
        let f1 = |t: f64| t.powi(2) * (-t).exp();
        let oracle = integrate_half_line(|x| x * (-x).exp() * f1(0.5 / x), 1e-12).unwrap().value.re;
        assert!((two.weights[1].eval(0.5).unwrap() - oracle).abs() < 1e-9 * oracle);
        // truncation: M-1 transforms of the Jacobi ensemble
        let p1 = TruncationModelParams::new(2, vec![1], 7).unwrap();
        let p3 = TruncationModelParams::new(2, vec![1, 2, 0], 7).unwrap();
        let built = apply_ginibre_transform(
            &apply_ginibre_transform(&truncated_unitary_chain_ensemble(&p1).unwrap(), 2).unwrap(),
            0,
        )
        .unwrap();
        let direct = truncated_unitary_chain_ensemble(&p3).unwrap();
        for (w1, w2) in built.weights.iter().zip(&direct.weights) {
            assert_eq!(w1.spec, w2.spec);
        }
    }

    #[test]
    fn inversion_of_exponential() {
        let e = ginibre_chain_ensemble(1, &[0]).unwrap();
        let inv = apply_inversion(&e).unwrap();
        let v = inv.weights[0].eval(2.0).unwrap();
        assert!((v - 0.25 * (-0.5f64).exp()).abs() < 1e-10);
        let back = apply_inversion(&inv).unwrap();
        for &y in &[0.3, 1.7] {
            assert!((back.weights[0].eval(y).unwrap() - e.weights[0].eval(y).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn moments_and_normalization() {
        let e = ginibre_chain_ensemble(1, &[0]).unwrap();
        assert!((moment_matrix(&e).unwrap()[(0, 0)] - 1.0).abs() < 1e-14);
        assert!(normalization_constant(&e).unwrap().abs() < 1e-14);
        let e = ginibre_chain_ensemble(2, &[0]).unwrap();
        let m = moment_matrix(&e).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 2.0]);
        assert!((m - expect).norm() < 1e-13);
        assert!((normalization_constant(&e).unwrap() - 2f64.ln()).abs() < 1e-13);
        let p = TruncationModelParams::new(1, vec![0], 3).unwrap();
        let t = truncated_unitary_chain_ensemble(&p).unwrap();
        let q = integrate_unit_interval(|x| t.weights[0].eval(x).unwrap(), (0.0, 0.0), 1e-12).unwrap().value.re;
        assert!((moment_matrix(&t).unwrap()[(0, 0)] - q).abs() < 1e-10);
    }

    #[test]
    fn density_examples() {
        let e = ginibre_chain_ensemble(1, &[0]).unwrap();
        assert!((jpdf(&e, &[1.0]).unwrap() - (-1.0f64).exp()).abs() < 1e-10);
        let e = ginibre_chain_ensemble(2, &[0]).unwrap();
        let expect = (-3.0f64).exp() / 2.0;
        assert!((jpdf(&e, &[1.0, 2.0]).unwrap() - expect).abs() < 1e-10);
        assert!((jpdf(&e, &[2.0, 1.0]).unwrap() - expect).abs() < 1e-10);
        assert!(matches!(jpdf(&e, &[1.0, 1.0]), Err(Error::DegenerateInput(_))));
        let p = TruncationModelParams::new(1, vec![0], 2).unwrap();
        let t = truncated_unitary_chain_ensemble(&p).unwrap();
        assert!((jpdf(&t, &[0.3]).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fixed_x_examples() {
        for &y in &[0.2, 1.0, 3.0] {
            let v = fixed_x_transition_density(&[1.0], 0, &[y]).unwrap();
            assert!((v - (-y).exp()).abs() < 1e-14);
            let c: f64 = 1.7;
            let v = fixed_x_transition_density(&[c], 2, &[y]).unwrap();
            assert!((v - y * y * (-y / c).exp() / (2.0 * c.powi(3))).abs() < 1e-14);
        }
        assert!(matches!(
            fixed_x_transition_density(&[1.0, 1.0], 0, &[0.5, 2.0]),
            Err(Error::DegenerateInput(_))
        ));
    }
}

//! Reproducing kernel of an arbitrary polynomial ensemble from its moment
//! matrix: `K_n(x, y) = Σ_{j,k} x^j [G^{-1}]_{kj} w_k(y)` with `G_{jk} = ∫ x^j w_k`.

use nalgebra::{DMatrix, DVector};

use crate::ensembles::{log_moments, PolynomialEnsemble, EAGER_NORMALIZATION_MAX_N};
use crate::error::{Error, Result};
use crate::linalg::signed_log_det;

/// Factorized moment matrix, reusable across kernel evaluations.
///
/// `G = D_r S D_c` with row and column scales `e^{r_j}`, `e^{c_k}`, so that
/// `K(x, y) = bᵀ S^{-1} a` with `a_j = x^j e^{−r_j}` and `b_k = w_k(y) e^{−c_k}`.
#[derive(Debug, Clone)]
pub struct GenericKernel {
    ens: PolynomialEnsemble,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
}

impl GenericKernel {
    pub fn new(ens: &PolynomialEnsemble) -> Result<Self> {
        let n = ens.n;
        if n > EAGER_NORMALIZATION_MAX_N {
            return Err(Error::Domain(format!("the moment-matrix kernel supports n <= {EAGER_NORMALIZATION_MAX_N}, got {n}")));
        }
        let (la, sg) = log_moments(ens)?;
        let det = signed_log_det(&la, &sg);
        if det.sign == 0.0 {
            return Err(Error::Singularity("moment matrix is numerically singular".into()));
        }
        let row_scale: Vec<f64> = (0..n).map(|j| (0..n).map(|k| la[(j, k)]).fold(f64::NEG_INFINITY, f64::max)).collect();
        let col_scale: Vec<f64> = (0..n)
            .map(|k| (0..n).map(|j| la[(j, k)] - row_scale[j]).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        let scaled = DMatrix::from_fn(n, n, |j, k| sg[(j, k)] * (la[(j, k)] - row_scale[j] - col_scale[k]).exp());
        Ok(Self { ens: ens.clone(), lu: scaled.lu(), row_scale, col_scale })
    }

    pub fn n(&self) -> usize {
        self.ens.n
    }

    /// `K_n(x, y)`; `x` may be any real, `y > 0`.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("kernel argument x must be finite, got {x}")));
        }
        let n = self.ens.n;
        let a = DVector::from_fn(n, |j, _| {
            let power = if j == 0 { 1.0 } else { x.powi(j as i32) };
            power * (-self.row_scale[j]).exp()
        });
        let z = self.lu.solve(&a).ok_or_else(|| Error::Singularity("moment matrix LU is singular".into()))?;
        let mut acc = 0.0;
        for (k, w) in self.ens.weights.iter().enumerate() {
            acc += w.eval(y)? * (-self.col_scale[k]).exp() * z[k];
        }
        Ok(acc)
    }

    /// One-point density `K_n(x, x)/n` of the pooled points.
    pub fn density(&self, x: f64) -> Result<f64> {
        Ok(self.eval(x, x)? / self.ens.n as f64)
    }
}

/// One-shot `K_n(x, y)` of `ens`; use [`GenericKernel`] for repeated evaluation.
pub fn kernel_generic(ens: &PolynomialEnsemble, x: f64, y: f64) -> Result<f64> {
    GenericKernel::new(ens)?.eval(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{ginibre_chain_ensemble, truncated_unitary_chain_ensemble, TruncationModelParams};
    use crate::kernels::{kernel_finite, KernelRoute};
    use crate::quad::{integrate_half_line, KERNEL_TOLERANCE};

    #[test]
    fn single_exponential_weight() {
        let ens = ginibre_chain_ensemble(1, &[0]).unwrap();
        for (x, y) in [(0.3, 0.5), (-1.0, 2.0)] {
            assert!((kernel_generic(&ens, x, y).unwrap() - (-y).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn reproducing_property() {
        let ens = ginibre_chain_ensemble(2, &[0]).unwrap();
        let k = GenericKernel::new(&ens).unwrap();
        let lhs = integrate_half_line(|t| k.eval(0.5, t).unwrap() * k.eval(t, 0.8).unwrap(), 1e-10).unwrap().value.re;
        let rhs = k.eval(0.5, 0.8).unwrap();
        assert!((lhs - rhs).abs() < 1e-8 * rhs.abs(), "{lhs} vs {rhs}");
    }

    #[test]
    fn matches_truncation_kernel() {
        let p = TruncationModelParams::new(3, vec![0, 1], 8).unwrap();
        let k = GenericKernel::new(&truncated_unitary_chain_ensemble(&p).unwrap()).unwrap();
        for (x, y) in [(0.2, 0.5), (1.0, 0.3)] {
            let a = k.eval(x, y).unwrap();
            let b = kernel_finite(&p, x, y, KernelRoute::Contour, KERNEL_TOLERANCE).unwrap().value;
            assert!((a - b).abs() < 1e-6 * b.abs().max(1.0), "{a} vs {b}");
        }
    }
}

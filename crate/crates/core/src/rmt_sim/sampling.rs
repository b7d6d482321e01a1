use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Condition number above which an inverted factor is rejected and redrawn.
pub const MAX_INVERSE_CONDITION: f64 = 1e14;
/// Redraws allowed for a single draw before giving up.
const MAX_REDRAWS: usize = 100;
const JACOBI_SWEEPS: usize = 60;

/// Random stream of draw `index` under `seed`. Streams of different draws are
/// independent, so batches do not depend on the worker count.
pub fn draw_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `rows × cols` complex Ginibre matrix with density `∝ e^{−Tr G*G}`: real and
/// imaginary parts are independent `N(0, 1/2)`.
pub fn sample_ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
    })
}

/// Haar-distributed `l × l` unitary: `Q` of a Ginibre QR with the phases of
/// `diag R` moved into `Q`.
pub fn sample_haar_unitary<R: Rng + ?Sized>(l: usize, rng: &mut R) -> CMatrix {
    let qr = sample_ginibre(l, l, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..l {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..l {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Upper-left `rows × cols` block of an `l × l` Haar unitary.
pub fn sample_haar_truncation<R: Rng + ?Sized>(l: usize, rows: usize, cols: usize, rng: &mut R) -> Result<CMatrix> {
    if rows > l || cols > l || rows == 0 || cols == 0 {
        return Err(Error::Domain(format!("block {rows}×{cols} does not fit in a {l}×{l} unitary")));
    }
    Ok(sample_haar_unitary(l, rng).view((0, 0), (rows, cols)).into_owned())
}

/// Eigenvalues of `A*A` (the `min(rows, cols)` nonzero candidates), sorted
/// descending.
///
/// One-sided Jacobi on the columns: small squared singular values keep their
/// relative accuracy when the conditioning comes from row or column scaling.
pub fn squared_singular_values(a: &CMatrix) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::Domain("matrix has an empty dimension".into()));
    }
    if a.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::Numerical("matrix has non-finite entries".into()));
    }
    let mut w = if a.nrows() >= a.ncols() { a.clone() } else { a.adjoint() };
    let n = w.ncols();
    let eps = n as f64 * f64::EPSILON;
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dotc(&w.column(q));
                let g = gamma.norm();
                if g == 0.0 || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // rotate (a_p, e^{-iφ} a_q), whose inner product is real
                let phase = gamma.conj() / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..w.nrows() {
                    let ap = w[(i, p)];
                    let aq = w[(i, q)] * phase;
                    w[(i, p)] = ap * c - aq * s;
                    w[(i, q)] = ap * s + aq * c;
                }
            }
        }
        if !rotated {
            let mut out: Vec<f64> = (0..n).map(|j| w.column(j).norm_squared()).collect();
            out.sort_by(|x, y| y.total_cmp(x));
            return Ok(out);
        }
    }
    Err(Error::Numerical("Jacobi singular value iteration did not converge".into()))
}

/// One factor of a matrix chain, applied to the running product from the left.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorSpec {
    /// `(n+ν) × d` Ginibre matrix, `d` the current dimension.
    Ginibre { nu: usize },
    /// `(G̃_K ⋯ G̃_1)^{-1}` with `G̃_j` of size `(n+ν̃_j) × (n+ν̃_{j−1})`,
    /// `tilde_nu = (ν̃_1, …, ν̃_K)` and `ν̃_K = 0`.
    InverseGinibreChain { tilde_nu: Vec<usize> },
    /// `(n+ν) × n` upper-left block of an `l × l` Haar unitary.
    TruncatedUnitary { nu: usize, l: usize },
}

/// `Y = F_last ⋯ F_1` acting on `C^n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixChainSpec {
    pub n: usize,
    pub factors: Vec<FactorSpec>,
}

impl MatrixChainSpec {
    pub fn new(n: usize, factors: Vec<FactorSpec>) -> Result<Self> {
        let s = Self { n, factors };
        s.validate()?;
        Ok(s)
    }

    /// Ginibre chain with `ν = (ν_1, …, ν_M)`.
    pub fn ginibre_chain(n: usize, nu: &[usize]) -> Result<Self> {
        Self::new(n, nu.iter().map(|&nu| FactorSpec::Ginibre { nu }).collect())
    }

    /// Truncated unitary with `ν_1` followed by Ginibre factors `ν_2, …, ν_M`.
    pub fn truncated_chain(n: usize, nu: &[usize], l: usize) -> Result<Self> {
        let (&first, rest) = nu.split_first().ok_or_else(|| Error::Domain("need at least one factor".into()))?;
        let mut factors = vec![FactorSpec::TruncatedUnitary { nu: first, l }];
        factors.extend(rest.iter().map(|&nu| FactorSpec::Ginibre { nu }));
        Self::new(n, factors)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.factors.is_empty() {
            return Err(Error::Domain("need n >= 1 and at least one factor".into()));
        }
        for (j, f) in self.factors.iter().enumerate() {
            match f {
                FactorSpec::Ginibre { .. } => {}
                FactorSpec::TruncatedUnitary { nu, l } => {
                    if j != 0 {
                        return Err(Error::Domain("a truncated unitary factor must come first".into()));
                    }
                    if *l < 2 * self.n + nu {
                        return Err(Error::Truncation(format!("l = {l} < 2n + nu_1 = {}", 2 * self.n + nu)));
                    }
                }
                FactorSpec::InverseGinibreChain { tilde_nu } => {
                    if j != 0 {
                        return Err(Error::Domain("an inverted chain must come first".into()));
                    }
                    if tilde_nu.last() != Some(&0) {
                        return Err(Error::Domain("the inverted chain must be square (last tilde_nu = 0)".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Squared singular values of `count` independent draws of a chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub spec: MatrixChainSpec,
    pub seed: u64,
    /// One descending `n`-vector per draw.
    pub samples: Vec<Vec<f64>>,
    /// Draws redrawn because an inverted factor was numerically singular.
    pub rejections: usize,
}

impl SampleBatch {
    /// All points of all draws.
    pub fn pooled(&self) -> Vec<f64> {
        self.samples.iter().flatten().copied().collect()
    }
}

/// One realization of the chain product. `Err(SingularFactor)` if an inverted
/// factor is too ill-conditioned.
pub fn sample_chain_matrix<R: Rng + ?Sized>(spec: &MatrixChainSpec, rng: &mut R) -> Result<CMatrix> {
    let n = spec.n;
    let mut inverse: Option<CMatrix> = None;
    let mut y: Option<CMatrix> = None;
    let mut dim = n;
    for f in &spec.factors {
        match f {
            FactorSpec::Ginibre { nu } => {
                let g = sample_ginibre(n + nu, dim, rng);
                y = Some(match y {
                    Some(y) => g * y,
                    None => g,
                });
                dim = n + nu;
            }
            FactorSpec::TruncatedUnitary { nu, l } => {
                y = Some(sample_haar_truncation(*l, n + nu, n, rng)?);
                dim = n + nu;
            }
            FactorSpec::InverseGinibreChain { tilde_nu } => {
                let mut p = CMatrix::identity(n, n);
                let mut d = n;
                for &t in tilde_nu {
                    p = sample_ginibre(n + t, d, rng) * p;
                    d = n + t;
                }
                inverse = Some(p);
            }
        }
    }
    let Some(p) = inverse else {
        return y.ok_or_else(|| Error::Domain("empty chain".into()));
    };
    let s = squared_singular_values(&p)?;
    let condition = (s[0] / s[s.len() - 1]).sqrt();
    if !(condition <= MAX_INVERSE_CONDITION) {
        return Err(Error::SingularFactor(format!("inverted factor has condition {condition:.3e}")));
    }
    // Y = B P^{-1}, so Y* solves P* Y* = B*
    let b = y.unwrap_or_else(|| CMatrix::identity(n, n));
    let lu = p.adjoint().lu();
    let yt = lu.solve(&b.adjoint()).ok_or_else(|| Error::SingularFactor("LU of the inverted factor failed".into()))?;
    Ok(yt.adjoint())
}

/// `count` independent draws; draw `i` uses [`draw_stream`]`(seed, i)`.
pub fn sample_chain(spec: &MatrixChainSpec, seed: u64, count: usize) -> Result<SampleBatch> {
    spec.validate()?;
    let draws: Vec<Result<(Vec<f64>, usize)>> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = draw_stream(seed, i);
            for redraw in 0..MAX_REDRAWS {
                match sample_chain_matrix(spec, &mut rng) {
                    Ok(y) => return Ok((squared_singular_values(&y)?, redraw)),
                    Err(Error::SingularFactor(_)) => continue,
                    Err(e) => return Err(e),
                }
            }
            Err(Error::SingularFactor(format!("draw {i} stayed singular after {MAX_REDRAWS} redraws")))
        })
        .collect();
    let mut samples = Vec::with_capacity(count);
    let mut rejections = 0;
    for d in draws {
        let (s, r) = d?;
        samples.push(s);
        rejections += r;
    }
    Ok(SampleBatch { spec: spec.clone(), seed, samples, rejections })
}

/// Squared singular values of `G X` for a fixed `X` and `(rows(X)+ν) × rows(X)`
/// Ginibre `G`, one vector per draw.
pub fn sample_ginibre_times_fixed(x: &CMatrix, nu: usize, seed: u64, count: usize) -> Result<Vec<Vec<f64>>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = draw_stream(seed, i);
            let g = sample_ginibre(x.nrows() + nu, x.nrows(), &mut rng);
            squared_singular_values(&(g * x))
        })
        .collect()
}

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::sampling::{draw_stream, SampleBatch};
use crate::ensembles::Support;
use crate::error::{Error, Result};
use crate::quad::gauss_legendre;

/// Panels of the tabulated model CDF.
const CDF_PANELS: usize = 512;
const PANEL_ORDER: usize = 8;
/// Bins of the chi-square diagnostic.
pub const CHI2_BINS: usize = 50;
/// Tail panels beyond the largest point stop once one carries less mass.
const TAIL_MASS: f64 = 1e-10;
const TAIL_PANELS: usize = 64;
/// Allowed deviation of the model's total mass from 1.
const MASS_TOLERANCE: f64 = 1e-3;
/// Stream offset of the point selection, disjoint from the sampling streams.
const SELECTION_STREAM: u64 = 1 << 63;

/// Goodness of fit of pooled points against a one-point density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodnessReport {
    pub ks_distance: f64,
    pub sample_count: usize,
    pub bin_chi2: f64,
    /// Upper tail of `χ²(CHI2_BINS − 1)` at `bin_chi2`; meaningful only for
    /// independent points.
    pub chi2_p_value: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Model CDF tabulated on panels whose edges follow the data, interpolated by
/// cubic Hermite from the CDF and density at the edges.
struct TabulatedCdf {
    edges: Vec<f64>,
    cdf: Vec<f64>,
    pdf: Vec<f64>,
}

impl TabulatedCdf {
    fn build<F>(sorted: &[f64], density: &F, support: Support) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let hi = match support {
            Support::UnitInterval => 1.0,
            Support::PositiveAxis => sorted[sorted.len() - 1],
        };
        let mut edges = vec![0.0];
        for j in 1..CDF_PANELS {
            let q = sorted[(j * sorted.len()) / CDF_PANELS];
            if q > *edges.last().unwrap() && q < hi {
                edges.push(q);
            }
        }
        edges.push(hi);
        let (gx, gw) = gauss_legendre(PANEL_ORDER);
        let mut cdf = vec![0.0; edges.len()];
        for i in 1..edges.len() {
            let (a, b) = (edges[i - 1], edges[i]);
            let half = 0.5 * (b - a);
            let mut mass = 0.0;
            for (x, w) in gx.iter().zip(&gw) {
                mass += w * density(a + half * (x + 1.0))?;
            }
            cdf[i] = cdf[i - 1] + half * mass;
        }
        let tail = match support {
            Support::UnitInterval => 0.0,
            Support::PositiveAxis => {
                // panels of doubling width until their mass is negligible
                let mut a = hi;
                let mut width = (hi - edges[edges.len() - 2]).max(hi / 64.0);
                let mut tail = 0.0;
                for _ in 0..TAIL_PANELS {
                    let half = 0.5 * width;
                    let mut mass = 0.0;
                    for (x, w) in gx.iter().zip(&gw) {
                        mass += w * density(a + half * (x + 1.0))?;
                    }
                    tail += half * mass;
                    if (half * mass).abs() < TAIL_MASS {
                        break;
                    }
                    a += width;
                    width *= 2.0;
                }
                tail
            }
        };
        let total = cdf[cdf.len() - 1] + tail;
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Numerical(format!("model density integrates to {total}, not 1")));
        }
        // the first edge may sit on an integrable singularity
        let mut pdf = vec![f64::NAN];
        for &e in &edges[1..] {
            pdf.push(if e >= 1.0 && support == Support::UnitInterval { f64::NAN } else { density(e)? });
        }
        Ok(Self { edges, cdf, pdf })
    }

    fn eval(&self, x: f64) -> f64 {
        let last = self.edges.len() - 1;
        if x <= 0.0 {
            return 0.0;
        }
        if x >= self.edges[last] {
            return if x > self.edges[last] { 1.0 } else { self.cdf[last] };
        }
        let i = self.edges.partition_point(|&e| e <= x) - 1;
        let (a, b) = (self.edges[i], self.edges[i + 1]);
        let (fa, fb) = (self.cdf[i], self.cdf[i + 1]);
        let h = b - a;
        let t = (x - a) / h;
        let (da, db) = (self.pdf[i], self.pdf[i + 1]);
        let v = if da.is_finite() && db.is_finite() {
            let t2 = t * t;
            let t3 = t2 * t;
            (2.0 * t3 - 3.0 * t2 + 1.0) * fa + (t3 - 2.0 * t2 + t) * h * da + (-2.0 * t3 + 3.0 * t2) * fb + (t3 - t2) * h * db
        } else {
            fa + t * (fb - fa)
        };
        v.clamp(fa, fb)
    }

    /// Smallest `x` with `F(x) >= level`, by bisection on the interpolant.
    fn quantile(&self, level: f64) -> f64 {
        let i = self.cdf.partition_point(|&f| f < level).clamp(1, self.edges.len() - 1);
        let (mut a, mut b) = (self.edges[i - 1], self.edges[i]);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if self.eval(m) < level {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }
}

/// KS distance and chi-square diagnostic of `points` against `density` on
/// `support`. `pass` is `ks_distance <= threshold`.
pub fn goodness_of_fit<F>(points: &[f64], density: F, support: Support, threshold: f64) -> Result<GoodnessReport>
where
    F: Fn(f64) -> Result<f64>,
{
    if points.is_empty() {
        return Err(Error::Domain("no points to compare".into()));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    let model = TabulatedCdf::build(&sorted, &density, support)?;
    let nf = sorted.len() as f64;
    let mut ks: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = model.eval(x);
        ks = ks.max((i as f64 + 1.0) / nf - f).max(f - i as f64 / nf);
    }
    // bins of equal model probability
    let mut bin_edges: Vec<f64> = (1..CHI2_BINS).map(|j| model.quantile(j as f64 / CHI2_BINS as f64)).collect();
    bin_edges.push(f64::INFINITY);
    let mut counts = vec![0usize; CHI2_BINS];
    let mut bin = 0;
    for &x in &sorted {
        while x > bin_edges[bin] {
            bin += 1;
        }
        counts[bin] += 1;
    }
    let expected = nf / CHI2_BINS as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dist = ChiSquared::new((CHI2_BINS - 1) as f64).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(GoodnessReport {
        ks_distance: ks,
        sample_count: sorted.len(),
        bin_chi2: chi2,
        chi2_p_value: dist.sf(chi2),
        threshold,
        pass: ks <= threshold,
    })
}

/// [`goodness_of_fit`] of the pooled points of `batch`; the density of a pooled
/// point is `K_n(x, x)/n`.
pub fn empirical_vs_density<F>(batch: &SampleBatch, density: F, support: Support, threshold: f64) -> Result<GoodnessReport>
where
    F: Fn(f64) -> Result<f64>,
{
    goodness_of_fit(&batch.pooled(), density, support, threshold)
}

/// One uniformly chosen point of each draw. Unlike pooled points these are
/// independent, so the chi-square p-value applies to them.
pub fn one_point_per_draw(samples: &[Vec<f64>], seed: u64) -> Vec<f64> {
    samples
        .iter()
        .enumerate()
        .map(|(i, s)| s[draw_stream(seed, SELECTION_STREAM + i as u64).gen_range(0..s.len())])
        .collect()
}

/// Two-sample KS distance.
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Monte Carlo estimate of `E[Π_j (x − x_j)]`: coefficients in ascending
/// powers of `x` with their standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharPolyEstimate {
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
}

/// Averages `(−1)^k e_k(x_1, …, x_n)` over the draws of `samples`.
pub fn average_char_poly(samples: &[Vec<f64>]) -> Result<CharPolyEstimate> {
    let Some(first) = samples.first() else {
        return Err(Error::Domain("empty batch".into()));
    };
    let n = first.len();
    let mut sum = vec![0.0; n + 1];
    let mut sum_sq = vec![0.0; n + 1];
    for s in samples {
        if s.len() != n {
            return Err(Error::Domain("draws have different sizes".into()));
        }
        // coefficients of Π (x − x_j), ascending
        let mut c = vec![0.0; n + 1];
        c[0] = 1.0;
        for (deg, &x) in s.iter().enumerate() {
            for k in (1..=deg + 1).rev() {
                c[k] = c[k - 1] - x * c[k];
            }
            c[0] *= -x;
        }
        for k in 0..=n {
            sum[k] += c[k];
            sum_sq[k] += c[k] * c[k];
        }
    }
    let m = samples.len() as f64;
    let coefficients: Vec<f64> = sum.iter().map(|s| s / m).collect();
    let standard_errors = sum_sq
        .iter()
        .zip(&coefficients)
        .map(|(sq, mean)| {
            if samples.len() < 2 {
                return f64::INFINITY;
            }
            let var = ((sq / m - mean * mean) * m / (m - 1.0)).max(0.0);
            (var / m).sqrt()
        })
        .collect();
    let mut coefficients = coefficients;
    coefficients[n] = 1.0;
    let mut standard_errors: Vec<f64> = standard_errors;
    standard_errors[n] = 0.0;
    Ok(CharPolyEstimate { coefficients, standard_errors })
}

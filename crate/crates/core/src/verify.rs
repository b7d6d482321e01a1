//! Verification suites. Each suite checks one family of identities or one
//! Monte Carlo experiment and reports named cases with a metric, the
//! threshold it is held to, and the verdict.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ensembles::{fixed_x_transition_density, ginibre_chain_ensemble, Support, TruncationModelParams};
use crate::error::{Error, Result};
use crate::kernels::{
    borodin_hard_edge_params_integer, borodin_hard_edge_params_inverse_integer, kernel_borodin, kernel_finite,
    kernel_generic, kernel_hard_edge, pk, pk_coefficients, qk, scaled_borodin_theta_integer,
    scaled_borodin_theta_inverse_integer, BorodinParams, GenericKernel, HardEdgeParams, KernelRoute,
};
use crate::quad::{
    gauss_legendre, integrate_half_line_abs, integrate_unit_interval_abs, QuadratureResult, KERNEL_TOLERANCE,
    SWEEP_TOLERANCE,
};
use crate::rmt_sim::{
    average_char_poly, empirical_vs_density, goodness_of_fit, one_point_per_draw, sample_chain,
    sample_ginibre_times_fixed, CMatrix, MatrixChainSpec,
};
use crate::specfun::gamma::{ln_gamma_real, log_gamma};
use crate::specfun::meijer::{
    convolve_exp_power, invert_argument, meijer_g_eval, meijer_mellin_moment, shift_parameters,
};
use crate::specfun::MeijerGSpec;

pub const GAMMA_IDENTITY_TOLERANCE: f64 = 1e-11;
pub const MELLIN_TOLERANCE: f64 = 1e-6;
pub const MEIJER_ALGEBRA_TOLERANCE: f64 = 1e-7;
pub const BIORTHOGONALITY_TOLERANCE: f64 = 1e-8;
pub const ROUTE_TOLERANCE: f64 = 1e-5;
pub const TRACE_TOLERANCE: f64 = 1e-4;
pub const TELESCOPE_TOLERANCE: f64 = 1e-10;
pub const HARD_EDGE_TOLERANCE: f64 = 5e-2;
pub const BESSEL_TOLERANCE: f64 = 1e-6;
pub const BORODIN_TOLERANCE: f64 = 1e-5;
pub const KS_THRESHOLD: f64 = 0.02;
pub const CHI2_P_FLOOR: f64 = 1e-3;
pub const CHAR_POLY_STANDARD_ERRORS: f64 = 3.0;

pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    SpecialFunctions,
    MeijerAlgebra,
    Biorthogonality,
    KernelRoutes,
    Telescoping,
    HardEdge,
    Bessel,
    Borodin,
    MonteCarlo,
    Determinism,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::SpecialFunctions,
        Suite::MeijerAlgebra,
        Suite::Biorthogonality,
        Suite::KernelRoutes,
        Suite::Telescoping,
        Suite::HardEdge,
        Suite::Bessel,
        Suite::Borodin,
        Suite::MonteCarlo,
        Suite::Determinism,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::SpecialFunctions => "special-functions",
            Suite::MeijerAlgebra => "meijer-algebra",
            Suite::Biorthogonality => "biorthogonality",
            Suite::KernelRoutes => "kernel-routes",
            Suite::Telescoping => "telescoping",
            Suite::HardEdge => "hard-edge",
            Suite::Bessel => "bessel",
            Suite::Borodin => "borodin",
            Suite::MonteCarlo => "monte-carlo",
            Suite::Determinism => "determinism",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.as_str() == s)
            .ok_or_else(|| Error::Domain(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub name: String,
    pub metric: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub pass: bool,
}

/// How a case metric is held against its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    AtMost,
    Below,
    Above,
}

impl Comparison {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::AtMost => "<=",
            Comparison::Below => "<",
            Comparison::Above => ">",
        }
    }

    pub fn holds(self, metric: f64, threshold: f64) -> bool {
        match self {
            Comparison::AtMost => metric <= threshold,
            Comparison::Below => metric < threshold,
            Comparison::Above => metric > threshold,
        }
    }
}

impl CaseReport {
    pub fn new(name: impl Into<String>, metric: f64, comparison: Comparison, threshold: f64) -> Self {
        Self { name: name.into(), metric, comparison, threshold, pass: comparison.holds(metric, threshold) }
    }

    /// Passes when `metric <= threshold`.
    pub fn at_most(name: impl Into<String>, metric: f64, threshold: f64) -> Self {
        Self::new(name, metric, Comparison::AtMost, threshold)
    }

    /// Passes when `metric < threshold`.
    pub fn below(name: impl Into<String>, metric: f64, threshold: f64) -> Self {
        Self::new(name, metric, Comparison::Below, threshold)
    }

    /// Passes when `metric > threshold`.
    pub fn above(name: impl Into<String>, metric: f64, threshold: f64) -> Self {
        Self::new(name, metric, Comparison::Above, threshold)
    }
}

impl fmt::Display for CaseReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} ({:.4e} {} {:.1e})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.metric,
            self.comparison.symbol(),
            self.threshold
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: Vec<CaseReport>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn new(suite: Suite, cases: Vec<CaseReport>) -> Self {
        let pass = !cases.is_empty() && cases.iter().all(|c| c.pass);
        Self { suite: suite.as_str().to_string(), cases, pass }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Restricts the biorthogonality suite to one `n`.
    pub n: Option<usize>,
    pub seed: u64,
    pub samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { n: None, seed: DEFAULT_SEED, samples: DEFAULT_SAMPLES }
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<SuiteReport> {
    let cases = match suite {
        Suite::SpecialFunctions => special_functions(opts.seed)?,
        Suite::MeijerAlgebra => meijer_algebra(opts.seed)?,
        Suite::Biorthogonality => biorthogonality(opts.n)?,
        Suite::KernelRoutes => kernel_routes()?,
        Suite::Telescoping => telescoping(opts.seed)?,
        Suite::HardEdge => hard_edge_convergence()?,
        Suite::Bessel => bessel_reduction()?,
        Suite::Borodin => borodin_identities()?,
        Suite::MonteCarlo => monte_carlo(opts)?,
        Suite::Determinism => {
            let first = run_suite(Suite::MonteCarlo, opts)?;
            return determinism(&first, opts);
        }
    };
    Ok(SuiteReport::new(suite, cases))
}

/// Reruns the Monte Carlo suite on a two-worker pool and compares every metric
/// bit for bit with `first`.
pub fn determinism(first: &SuiteReport, opts: &VerifyOptions) -> Result<SuiteReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(2)
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    let second = pool.install(|| run_suite(Suite::MonteCarlo, opts))?;
    if first.cases.len() != second.cases.len() {
        return Err(Error::Numerical("reruns produced different case lists".into()));
    }
    let cases = first
        .cases
        .iter()
        .zip(&second.cases)
        .map(|(a, b)| {
            let same = a.metric.to_bits() == b.metric.to_bits();
            let diff = if same { 0.0 } else { (a.metric - b.metric).abs() };
            CaseReport { name: format!("{} rerun", a.name), metric: diff, comparison: Comparison::AtMost, threshold: 0.0, pass: same }
        })
        .collect();
    Ok(SuiteReport::new(Suite::Determinism, cases))
}

fn suite_rng(seed: u64, suite: Suite) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(suite as u64);
    rng
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Runs a quadrature on a fallible integrand; the first error wins.
fn integrate_fallible<I, F>(integrator: I, f: F) -> Result<f64>
where
    I: FnOnce(&dyn Fn(f64) -> f64) -> Result<QuadratureResult>,
    F: Fn(f64) -> Result<f64>,
{
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let wrapped = |x: f64| {
        if failure.borrow().is_some() {
            return 0.0;
        }
        f(x).unwrap_or_else(|e| {
            *failure.borrow_mut() = Some(e);
            0.0
        })
    };
    let r = integrator(&wrapped);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(r?.value.re)
}

/// `G(spec | x)` evaluated well below the tolerances it is checked against.
fn meijer_g(spec: &MeijerGSpec, x: f64) -> Result<f64> {
    Ok(meijer_g_eval(spec, x, None, 1e-12)?.value)
}

fn half_line<F: Fn(f64) -> Result<f64>>(f: F, tolerance: f64, absolute: f64) -> Result<f64> {
    integrate_fallible(|g| integrate_half_line_abs(g, tolerance, absolute), f)
}

fn unit_interval<F: Fn(f64) -> Result<f64>>(f: F, powers: (f64, f64), tolerance: f64) -> Result<f64> {
    integrate_fallible(|g| integrate_unit_interval_abs(g, powers, tolerance, 0.0), f)
}

// ---------------------------------------------------------------------------
// special functions

fn special_functions(seed: u64) -> Result<Vec<CaseReport>> {
    let mut rng = suite_rng(seed, Suite::SpecialFunctions);
    let mut points = Vec::with_capacity(1000);
    while points.len() < 1000 {
        let z = Complex64::new(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0));
        // keep clear of the poles of Γ(z) and Γ(1 − z)
        if (z.re - z.re.round()).abs() > 1e-3 || z.im.abs() > 1e-3 {
            points.push(z);
        }
    }
    let one = Complex64::new(1.0, 0.0);
    let mut recurrence: f64 = 0.0;
    let mut reflection: f64 = 0.0;
    for &z in &points {
        // Γ(z+1) / (z Γ(z)) − 1
        let d = log_gamma(z + one)? - log_gamma(z)? - z.ln();
        recurrence = recurrence.max((d.exp() - one).norm());
        // Γ(z) Γ(1−z) sin(πz) / π − 1
        let p = (log_gamma(z)? + log_gamma(one - z)?).exp() * (z * PI).sin() / PI;
        reflection = reflection.max((p - one).norm());
    }
    let mut real_recurrence: f64 = 0.0;
    for _ in 0..1000 {
        let x: f64 = rng.gen_range(-30.0..30.0);
        if (x - x.round()).abs() < 1e-3 {
            continue;
        }
        let (l1, s1) = ln_gamma_real(x + 1.0)?;
        let (l0, s0) = ln_gamma_real(x)?;
        let ratio = s1 * s0 * x.signum() * (l1 - l0 - x.abs().ln()).exp();
        real_recurrence = real_recurrence.max((ratio - 1.0).abs());
    }
    Ok(vec![
        CaseReport::at_most("gamma recurrence, 1000 complex points", recurrence, GAMMA_IDENTITY_TOLERANCE),
        CaseReport::at_most("gamma reflection, 1000 complex points", reflection, GAMMA_IDENTITY_TOLERANCE),
        CaseReport::at_most("gamma recurrence, real axis", real_recurrence, GAMMA_IDENTITY_TOLERANCE),
        CaseReport::at_most("mellin round trip, 10 specs x 10 points", mellin_round_trip()?, MELLIN_TOLERANCE),
    ])
}

/// Weight-type specs with an interval `[lo, hi]` of real `s` inside their
/// fundamental strip, with `s ≥ 0.3` so that `x^{s−1}` stays finite at the
/// smallest quadrature nodes.
fn mellin_specs() -> Result<Vec<(MeijerGSpec, f64, f64)>> {
    let s = |m, n, a: &[f64], b: &[f64]| MeijerGSpec::new(m, n, a.to_vec(), b.to_vec());
    Ok(vec![
        (s(1, 0, &[], &[0.0])?, 0.3, 5.0),
        (s(2, 0, &[], &[0.0, 1.0])?, 0.3, 5.0),
        (s(2, 0, &[], &[1.0, 2.0])?, 0.3, 5.0),
        (s(3, 0, &[], &[0.0, 1.0, 2.0])?, 0.3, 5.0),
        (s(3, 0, &[], &[0.5, 0.0, 2.0])?, 0.3, 5.0),
        (s(1, 0, &[3.0], &[0.0])?, 0.3, 5.0),
        (s(2, 0, &[6.0], &[0.0, 1.0])?, 0.3, 5.0),
        (s(2, 0, &[5.0, 7.5], &[0.5, 1.0])?, -0.2, 3.0),
        (s(1, 1, &[-1.0], &[0.5])?, 0.3, 1.5),
        (s(2, 1, &[-2.0], &[0.0, 1.0])?, 0.3, 2.5),
    ])
}

fn mellin_round_trip() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (spec, lo, hi) in mellin_specs()? {
        let compact = spec.n == 0 && spec.p() == spec.q();
        let b_min = spec.b.iter().cloned().fold(f64::INFINITY, f64::min);
        for i in 0..10 {
            let s = lo + (hi - lo) * i as f64 / 9.0;
            let exact = meijer_mellin_moment(&spec, Complex64::new(s, 0.0))?.re;
            let f = |x: f64| -> Result<f64> { Ok(x.powf(s - 1.0) * meijer_g(&spec, x)?) };
            let numeric = if compact {
                let c = spec.a.iter().sum::<f64>() - spec.b.iter().sum::<f64>();
                unit_interval(f, (s - 1.0 + b_min, c - 1.0), 1e-9)?
            } else {
                half_line(f, 1e-9, 0.0)?
            };
            worst = worst.max(relative(numeric, exact));
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Meijer G parameter algebra

fn random_spec(rng: &mut ChaCha8Rng) -> Result<MeijerGSpec> {
    let shapes: [(usize, usize, usize, usize); 8] =
        [(1, 0, 0, 1), (2, 0, 0, 2), (3, 0, 0, 3), (2, 0, 1, 2), (3, 0, 1, 3), (1, 0, 1, 1), (2, 0, 2, 2), (2, 1, 1, 2)];
    let (m, n, p, q) = shapes[rng.gen_range(0..shapes.len())];
    let b: Vec<f64> = (0..q).map(|_| rng.gen_range(0.0..2.0)).collect();
    let b_max = b.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let a: Vec<f64> = if n > 0 {
        (0..p).map(|_| rng.gen_range(-2.0..-0.2)).collect()
    } else {
        (0..p).map(|_| b_max + rng.gen_range(1.0..3.0)).collect()
    };
    MeijerGSpec::new(m, n, a, b)
}

fn meijer_algebra(seed: u64) -> Result<Vec<CaseReport>> {
    let mut rng = suite_rng(seed, Suite::MeijerAlgebra);
    let (mut shift, mut invert, mut convolve): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..12 {
        let spec = random_spec(&mut rng)?;
        let compact = spec.n == 0 && spec.p() == spec.q();
        let alpha = rng.gen_range(-1.0..1.0);
        let nu = rng.gen_range(0.5..2.0);
        let shifted = shift_parameters(&spec, alpha)?;
        let inverted = invert_argument(&spec);
        let convolved = convolve_exp_power(&spec, nu);
        for _ in 0..5 {
            let x: f64 = if compact { rng.gen_range(0.05..0.95) } else { rng.gen_range((0.05f64).ln()..(20.0f64).ln()).exp() };
            shift = shift.max(relative(x.powf(alpha) * meijer_g(&spec, x)?, meijer_g(&shifted, x)?));
            invert = invert.max(relative(meijer_g(&spec, 1.0 / x)?, meijer_g(&inverted, x)?));
            if spec.n == 0 {
                // ∫_0^∞ t^{ν−1} e^{−t} G(x/t) dt
                let numeric = if compact {
                    // t = x/u with u ∈ (0, 1)
                    let c = spec.a.iter().sum::<f64>() - spec.b.iter().sum::<f64>();
                    unit_interval(
                        |u| Ok((x / u).powf(nu - 1.0) * (-x / u).exp() * meijer_g(&spec, u)? * x / (u * u)),
                        (0.0, c - 1.0),
                        1e-10,
                    )?
                } else {
                    half_line(|t| Ok(t.powf(nu - 1.0) * (-t).exp() * meijer_g(&spec, x / t)?), 1e-10, 0.0)?
                };
                convolve = convolve.max(relative(numeric, meijer_g(&convolved, x)?));
            }
        }
    }
    Ok(vec![
        CaseReport::at_most("shift x^a G(x), 12 specs x 5 points", shift, MEIJER_ALGEBRA_TOLERANCE),
        CaseReport::at_most("invert G(1/x), 12 specs x 5 points", invert, MEIJER_ALGEBRA_TOLERANCE),
        CaseReport::at_most("convolve with x^nu e^-x", convolve, MEIJER_ALGEBRA_TOLERANCE),
    ])
}

// ---------------------------------------------------------------------------
// biorthogonality

/// `max_{j,k} |∫ P_j Q_k − δ_{jk}|` for the truncation model.
pub fn biorthogonality_deviation(params: &TruncationModelParams) -> Result<f64> {
    let n = params.n;
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let cache: RefCell<HashMap<u64, f64>> = RefCell::new(HashMap::new());
        let q = |x: f64| -> Result<f64> {
            if let Some(&v) = cache.borrow().get(&x.to_bits()) {
                return Ok(v);
            }
            let v = qk(params, k, x, 1e-11)?.value;
            cache.borrow_mut().insert(x.to_bits(), v);
            Ok(v)
        };
        for j in 0..n {
            let f = |x: f64| -> Result<f64> { Ok(pk(params, j, x)? * q(x)?) };
            let v = if params.m() == 1 { unit_interval_polynomial(f)? } else { half_line(f, 1e-11, 1e-10)? };
            worst = worst.max((v - if j == k { 1.0 } else { 0.0 }).abs());
        }
    }
    Ok(worst)
}

/// `∫_0^1 f` for `f` polynomial, by Gauss–Legendre of doubling order until two
/// orders agree to rounding.
fn unit_interval_polynomial<F: Fn(f64) -> Result<f64>>(f: F) -> Result<f64> {
    let rule = |order: usize| -> Result<(f64, f64)> {
        let (x, w) = gauss_legendre(order);
        let (mut sum, mut l1) = (0.0, 0.0);
        for (xi, wi) in x.iter().zip(&w) {
            let term = 0.5 * wi * f(0.5 * (xi + 1.0))?;
            sum += term;
            l1 += term.abs();
        }
        Ok((sum, l1))
    };
    let (mut prev, _) = rule(16)?;
    for order in [32, 64, 128] {
        let (cur, l1) = rule(order)?;
        if (cur - prev).abs() <= 1e-12 * cur.abs().max(1.0) + 1e-13 * l1 {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Convergence("Gauss-Legendre orders disagree".into()))
}

fn biorthogonality(n: Option<usize>) -> Result<Vec<CaseReport>> {
    let ns = n.map_or(vec![4, 8], |n| vec![n]);
    let mut cases = Vec::new();
    for &n in &ns {
        for m in 1..=3usize {
            for base in [0usize, 1] {
                let nu: Vec<usize> = (0..m).map(|i| if base == 0 { 0 } else { i + 1 }).collect();
                let l = 2 * n + nu[0] + 2;
                let params = TruncationModelParams::new(n, nu.clone(), l)?;
                let d = biorthogonality_deviation(&params)?;
                cases.push(CaseReport::at_most(
                    format!("max |<P_j, Q_k> - delta|, n={n} M={m} nu={nu:?} l={l}"),
                    d,
                    BIORTHOGONALITY_TOLERANCE,
                ));
            }
        }
    }
    Ok(cases)
}

// ---------------------------------------------------------------------------
// kernel routes

fn kernel_routes() -> Result<Vec<CaseReport>> {
    let configs: [(usize, Vec<usize>, usize, [f64; 3]); 4] = [
        (3, vec![1], 8, [0.1, 0.4, 0.8]),
        (6, vec![0], 14, [0.1, 0.4, 0.8]),
        (4, vec![0, 1], 9, [0.2, 1.0, 3.0]),
        (6, vec![1, 0], 15, [0.2, 1.0, 3.0]),
    ];
    let mut cases = Vec::new();
    for (n, nu, l, grid) in configs {
        let params = TruncationModelParams::new(n, nu.clone(), l)?;
        let label = format!("n={n} nu={nu:?} l={l}");
        let mut routes: f64 = 0.0;
        let mut generic: f64 = 0.0;
        let ens = crate::ensembles::truncated_unitary_chain_ensemble(&params)?;
        for &x in &grid {
            for &y in &grid {
                let c = kernel_finite(&params, x, y, KernelRoute::Contour, KERNEL_TOLERANCE)?.value;
                let b = kernel_finite(&params, x, y, KernelRoute::BiorthogonalSum, KERNEL_TOLERANCE)?.value;
                let m = kernel_finite(&params, x, y, KernelRoute::MeijerProduct, KERNEL_TOLERANCE)?.value;
                routes = routes.max(relative(c, b)).max(relative(c, m)).max(relative(b, m));
                if n <= 4 {
                    generic = generic.max(relative(kernel_generic(&ens, x, y)?, c));
                }
            }
        }
        cases.push(CaseReport::at_most(format!("contour/biorthogonal/meijer routes, {label}"), routes, ROUTE_TOLERANCE));
        if n <= 4 {
            cases.push(CaseReport::at_most(format!("moment-matrix kernel vs contour, {label}"), generic, ROUTE_TOLERANCE));
        }
        // Σ P_k(x) Q_k(x) has no cancellation at large x, unlike the contour route
        let diag = |x: f64| -> Result<f64> {
            Ok(kernel_finite(&params, x, x, KernelRoute::BiorthogonalSum, KERNEL_TOLERANCE)?.value)
        };
        let trace = if params.m() == 1 {
            let powers = (nu[0] as f64, (l - 2 * n - nu[0]) as f64);
            unit_interval(diag, powers, SWEEP_TOLERANCE)?
        } else {
            half_line(diag, SWEEP_TOLERANCE, 0.0)?
        };
        cases.push(CaseReport::at_most(format!("trace of K_n equals n, {label}"), relative(trace, n as f64), TRACE_TOLERANCE));
    }
    Ok(cases)
}

// ---------------------------------------------------------------------------
// telescoping sum

fn gamma_ratio(num: &[f64], den: &[f64]) -> Result<f64> {
    let mut log = 0.0;
    let mut sign = 1.0;
    for &a in num {
        let (l, s) = ln_gamma_real(a)?;
        log += l;
        sign *= s;
    }
    for &a in den {
        let (l, s) = ln_gamma_real(a)?;
        log -= l;
        sign *= s;
    }
    Ok(sign * log.exp())
}

/// Both sides of the telescoping identity
/// `(s−t−1) Σ_{k<n} (L+2k+1) Γ(t−k)Γ(t+L+k+1) / (Γ(s−k)Γ(s+L+k+1))
///  = Γ(t−n+1)Γ(t+l−n+1)/(Γ(s−n)Γ(s+l−n)) − Γ(t+1)Γ(t+L+1)/(Γ(s)Γ(s+L))`, `L = l − 2n`.
pub fn telescope_sides(s: f64, t: f64, n: usize, l: usize) -> Result<(f64, f64)> {
    let nf = n as f64;
    let lf = l as f64;
    let big_l = lf - 2.0 * nf;
    let mut sum = 0.0;
    for k in 0..n {
        let kf = k as f64;
        sum += (big_l + 2.0 * kf + 1.0) * gamma_ratio(&[t - kf, t + big_l + kf + 1.0], &[s - kf, s + big_l + kf + 1.0])?;
    }
    let lhs = (s - t - 1.0) * sum;
    let rhs = gamma_ratio(&[t - nf + 1.0, t + lf - nf + 1.0], &[s - nf, s + lf - nf])?
        - gamma_ratio(&[t + 1.0, t + big_l + 1.0], &[s, s + big_l])?;
    Ok((lhs, rhs))
}

fn telescoping(seed: u64) -> Result<Vec<CaseReport>> {
    let mut rng = suite_rng(seed, Suite::Telescoping);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < 100 {
        let n = rng.gen_range(1..=6usize);
        let l = 2 * n + rng.gen_range(0..=4usize);
        let s: f64 = rng.gen_range(-4.0..8.0);
        let t: f64 = rng.gen_range(-4.0..8.0);
        let near_integer = |v: f64| (v - v.round()).abs() < 1e-3;
        if near_integer(s) || near_integer(t) {
            continue;
        }
        let (lhs, rhs) = telescope_sides(s, t, n, l)?;
        worst = worst.max((lhs - rhs).abs() / rhs.abs());
        done += 1;
    }
    Ok(vec![CaseReport::at_most("telescoping sum, 100 random (s, t, n, l)", worst, TELESCOPE_TOLERANCE)])
}

// ---------------------------------------------------------------------------
// hard-edge limit

/// `sup |K_n(x/c, y/c)/c − K_{ν}(x, y)|` over `grid²` with `c = (l−n)n`.
pub fn hard_edge_deviation(params: &TruncationModelParams, grid: &[f64]) -> Result<f64> {
    let c = ((params.l - params.n) * params.n) as f64;
    let limit = HardEdgeParams::new(params.nu.iter().map(|&v| v as f64).collect())?;
    let mut worst: f64 = 0.0;
    for &x in grid {
        for &y in grid {
            let kn = kernel_finite(params, x / c, y / c, KernelRoute::Contour, KERNEL_TOLERANCE)?.value / c;
            let k = kernel_hard_edge(&limit, x, y, KernelRoute::Contour, KERNEL_TOLERANCE)?.value;
            worst = worst.max((kn - k).abs());
        }
    }
    Ok(worst)
}

fn hard_edge_convergence() -> Result<Vec<CaseReport>> {
    let grid = [0.5, 1.0, 2.0, 4.0];
    let d10 = hard_edge_deviation(&TruncationModelParams::new(10, vec![0, 1], 23)?, &grid)?;
    let d40 = hard_edge_deviation(&TruncationModelParams::new(40, vec![0, 1], 83)?, &grid)?;
    Ok(vec![
        CaseReport::below("sup deviation at n=40", d40, HARD_EDGE_TOLERANCE),
        CaseReport::below(format!("deviation ratio n=40 / n=10 (n=10: {d10:.3e})"), d40 / d10, 1.0),
    ])
}

// ---------------------------------------------------------------------------
// Bessel reduction

/// `J_ν(z)` from its power series, `ν ≥ 0`.
pub fn bessel_j_series(nu: f64, z: f64) -> Result<f64> {
    let (lg, _) = ln_gamma_real(nu + 1.0)?;
    let mut term = (nu * (0.5 * z).ln() - lg).exp();
    let mut sum = term;
    for k in 1..400 {
        let kf = k as f64;
        term *= -(0.25 * z * z) / (kf * (kf + nu));
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::Convergence(format!("Bessel series at z = {z}")))
}

/// Classical hard-edge kernel in the variables of the M = 1 limit:
/// `K_ν(x, y) = 4 (y/x)^{ν/2} K^{Bessel}(4x, 4y)` with
/// `K^{Bessel}(X, Y) = [J_ν(√X) √Y J_ν'(√Y) − √X J_ν'(√X) J_ν(√Y)] / (2(X − Y))`.
pub fn bessel_kernel(nu: f64, x: f64, y: f64) -> Result<f64> {
    let (a, b) = ((4.0 * x).sqrt(), (4.0 * y).sqrt());
    let j = |z: f64| bessel_j_series(nu, z);
    let j1 = |z: f64| bessel_j_series(nu + 1.0, z);
    // J_ν'(z) = (ν/z) J_ν(z) − J_{ν+1}(z)
    let dj = |z: f64| -> Result<f64> { Ok(nu / z * j(z)? - j1(z)?) };
    let kb = if x == y {
        // (1/4)[J_ν² − J_{ν+1} J_{ν−1}] with J_{ν−1} = (2ν/z) J_ν − J_{ν+1}
        let (ja, j1a) = (j(a)?, j1(a)?);
        0.25 * (ja * ja - j1a * (2.0 * nu / a * ja - j1a))
    } else {
        (j(a)? * b * dj(b)? - a * dj(a)? * j(b)?) / (2.0 * (4.0 * x - 4.0 * y))
    };
    Ok(4.0 * (y / x).powf(nu / 2.0) * kb)
}

fn bessel_reduction() -> Result<Vec<CaseReport>> {
    let grid = [0.3, 1.2, 3.5];
    let mut cases = Vec::new();
    for nu in [0.0, 1.0, 2.5] {
        let params = HardEdgeParams::new(vec![nu])?;
        let mut worst: f64 = 0.0;
        for &x in &grid {
            for &y in &grid {
                let v = kernel_hard_edge(&params, x, y, KernelRoute::Contour, KERNEL_TOLERANCE)?.value;
                worst = worst.max(relative(v, bessel_kernel(nu, x, y)?));
            }
        }
        cases.push(CaseReport::at_most(format!("M=1 kernel vs Bessel series, nu={nu}"), worst, BESSEL_TOLERANCE));
    }
    Ok(cases)
}

// ---------------------------------------------------------------------------
// Borodin kernels

fn borodin_identities() -> Result<Vec<CaseReport>> {
    let points = [(0.4, 0.9), (0.2, 0.2), (1.5, 0.7)];
    let mut cases = Vec::new();
    for m in [2u32, 3] {
        for alpha in [0.0, 0.5, 1.0] {
            let params = borodin_hard_edge_params_inverse_integer(m, alpha)?;
            let mut worst: f64 = 0.0;
            for &(x, y) in &points {
                let lhs = scaled_borodin_theta_inverse_integer(m, alpha, x, y, KERNEL_TOLERANCE)?;
                let rhs = (x / y).powf(alpha)
                    * kernel_hard_edge(&params, x, y, KernelRoute::MeijerProduct, KERNEL_TOLERANCE)?.value;
                worst = worst.max(relative(lhs, rhs));
            }
            cases.push(CaseReport::at_most(format!("theta=1/M scaling, M={m} alpha={alpha}"), worst, BORODIN_TOLERANCE));
        }
    }
    for alpha in [0.0, 0.5, 1.0] {
        let params = borodin_hard_edge_params_integer(2, alpha)?;
        let mut worst: f64 = 0.0;
        for &(x, y) in &points {
            let lhs = scaled_borodin_theta_integer(2, alpha, x, y, KERNEL_TOLERANCE)?;
            let rhs = kernel_hard_edge(&params, y, x, KernelRoute::MeijerProduct, KERNEL_TOLERANCE)?.value;
            worst = worst.max(relative(lhs, rhs));
        }
        cases.push(CaseReport::at_most(format!("theta=M scaling, M=2 alpha={alpha}"), worst, BORODIN_TOLERANCE));
    }
    // (1/θ) x^{1/θ−1} K^{(α,θ)}(x^{1/θ}, y^{1/θ}) = (x/y)^{α'} K^{(α',1/θ)}(y, x), α' = (α+1)/θ − 1
    let (theta, alpha, x, y): (f64, f64, f64, f64) = (2.0, 0.5, 0.3, 0.6);
    let alpha_p = (alpha + 1.0) / theta - 1.0;
    let lhs = x.powf(1.0 / theta - 1.0) / theta
        * kernel_borodin(&BorodinParams::new(alpha, theta)?, x.powf(1.0 / theta), y.powf(1.0 / theta), KERNEL_TOLERANCE)?;
    let rhs = (x / y).powf(alpha_p) * kernel_borodin(&BorodinParams::new(alpha_p, 1.0 / theta)?, y, x, KERNEL_TOLERANCE)?;
    cases.push(CaseReport::at_most("reflection alpha -> alpha', theta=2", relative(lhs, rhs), BORODIN_TOLERANCE));
    Ok(cases)
}

// ---------------------------------------------------------------------------
// Monte Carlo

fn monte_carlo(opts: &VerifyOptions) -> Result<Vec<CaseReport>> {
    let (seed, count) = (opts.seed, opts.samples);
    let mut cases = Vec::new();

    let ens = ginibre_chain_ensemble(3, &[0, 1])?;
    let kernel = GenericKernel::new(&ens)?;
    let batch = sample_chain(&MatrixChainSpec::ginibre_chain(3, &[0, 1])?, seed, count)?;
    let r = empirical_vs_density(&batch, |x| kernel.density(x), Support::PositiveAxis, KS_THRESHOLD)?;
    cases.push(CaseReport::at_most("pooled KS, Ginibre chain n=3 nu=(0,1)", r.ks_distance, KS_THRESHOLD));

    let params = TruncationModelParams::new(2, vec![0, 1], 7)?;
    let batch = sample_chain(&MatrixChainSpec::truncated_chain(2, &[0, 1], 7)?, seed, count)?;
    let density = |x: f64| -> Result<f64> {
        Ok(kernel_finite(&params, x, x, KernelRoute::Contour, SWEEP_TOLERANCE)?.value / 2.0)
    };
    let r = empirical_vs_density(&batch, density, Support::PositiveAxis, KS_THRESHOLD)?;
    cases.push(CaseReport::at_most("pooled KS, truncated chain n=2 nu=(0,1) l=7", r.ks_distance, KS_THRESHOLD));

    let x0 = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(2f64.sqrt(), 0.0),
    ]));
    let samples = sample_ginibre_times_fixed(&x0, 0, seed, count)?;
    let points = one_point_per_draw(&samples, seed);
    // one uniformly chosen point of a symmetric two-point density
    let marginal = |y: f64| -> Result<f64> { half_line(|u| fixed_x_transition_density(&[1.0, 2.0], 0, &[y, u]), 1e-9, 0.0) };
    let r = goodness_of_fit(&points, marginal, Support::PositiveAxis, KS_THRESHOLD)?;
    cases.push(CaseReport::above("chi-square p-value, G X0 with X0 = diag(1, sqrt 2)", r.chi2_p_value, CHI2_P_FLOOR));

    let params = TruncationModelParams::new(2, vec![0], 4)?;
    let batch = sample_chain(&MatrixChainSpec::truncated_chain(2, &[0], 4)?, seed, count)?;
    let est = average_char_poly(&batch.samples)?;
    let exact = pk_coefficients(&params, 2)?;
    let mut worst: f64 = 0.0;
    for k in 0..2 {
        worst = worst.max((est.coefficients[k] - exact[k]).abs() / est.standard_errors[k]);
    }
    cases.push(CaseReport::at_most(
        "average characteristic polynomial vs P_2, truncated n=2 l=4 (standard errors)",
        worst,
        CHAR_POLY_STANDARD_ERRORS,
    ));
    Ok(cases)
}

//! The subcommands, from resolved settings to written output.

use rayon::prelude::*;
use serde_json::{json, Value};

use polyens::ensembles::{
    ginibre_chain_ensemble, inverse_chain_ensemble, truncated_unitary_chain_ensemble, PolynomialEnsemble,
    TruncationModelParams,
};
use polyens::kernels::{
    kernel_borodin, kernel_finite, kernel_hard_edge, BorodinParams, GenericKernel, HardEdgeParams, KernelRoute, KernelValue,
};
use polyens::rmt_sim::{empirical_vs_density, sample_chain, FactorSpec, MatrixChainSpec};
use polyens::verify::{determinism, run_suite, Suite, SuiteReport, VerifyOptions};
use polyens::Error;

use crate::config::{usage, CommandKind, Model, Settings, UsageError};
use crate::output::{emit, json_document, kernel_csv, samples_csv, KernelRow, Provenance};

#[derive(Debug)]
pub enum CliError {
    Usage(UsageError),
    Numerical { error: String, message: String, details: Value },
}

impl From<UsageError> for CliError {
    fn from(e: UsageError) -> Self {
        CliError::Usage(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numerical { error: error_kind(&e).into(), message: e.to_string(), details: Value::Null }
    }
}

fn io_error(e: std::io::Error) -> CliError {
    CliError::Numerical { error: "io".into(), message: format!("writing output: {e}"), details: Value::Null }
}

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Pole(_) => "pole",
        Error::Domain(_) => "domain",
        Error::Convergence(_) => "convergence",
        Error::Spec(_) => "spec",
        Error::Strip(_) => "strip",
        Error::Geometry(_) => "geometry",
        Error::Truncation(_) => "truncation",
        Error::Singularity(_) => "singularity",
        Error::DegenerateInput(_) => "degenerate_input",
        Error::RouteDisagreement(_) => "route_disagreement",
        Error::Numerical(_) => "numerical",
        Error::SingularFactor(_) => "singular_factor",
    }
}

/// Errors of parameter validation are usage errors; anything else is numerical.
fn param_error(e: Error) -> CliError {
    match e {
        Error::Domain(_) | Error::Truncation(_) | Error::Spec(_) => CliError::Usage(usage(e.to_string())),
        other => other.into(),
    }
}

fn require<T: Clone>(value: &Option<T>, flag: &str) -> Result<T, UsageError> {
    value.clone().ok_or_else(|| usage(format!("missing --{flag}")))
}

fn integer_nu(nu: &[f64]) -> Result<Vec<usize>, UsageError> {
    nu.iter()
        .map(|&v| {
            if v >= 0.0 && v.fract() == 0.0 && v < 1e6 {
                Ok(v as usize)
            } else {
                Err(usage(format!("this model needs nonnegative integer --nu entries, got {v}")))
            }
        })
        .collect()
}

/// Model parameters shared by the matrix-model commands.
struct ModelSetup {
    model: Model,
    n: usize,
    nu: Vec<usize>,
    tilde_nu: Vec<usize>,
    l: Option<usize>,
}

fn model_setup(s: &Settings) -> Result<ModelSetup, CliError> {
    let model = s.model.unwrap_or(Model::Truncated);
    let n = require(&s.n, "n")?;
    let nu = integer_nu(&require(&s.nu, "nu")?)?;
    if model != Model::Truncated && s.l.is_some() {
        return Err(usage("--l applies only to --model truncated").into());
    }
    if model != Model::Inverse && s.tilde_nu.is_some() {
        return Err(usage("--tilde-nu applies only to --model inverse").into());
    }
    let l = if model == Model::Truncated {
        let l = s.l.ok_or_else(|| usage("missing --l: the truncated model needs the size of the Haar unitary"))?;
        TruncationModelParams::new(n, nu.clone(), l).map_err(param_error)?;
        Some(l)
    } else {
        None
    };
    let tilde_nu = if model == Model::Inverse { require(&s.tilde_nu, "tilde-nu")? } else { Vec::new() };
    Ok(ModelSetup { model, n, nu, tilde_nu, l })
}

impl ModelSetup {
    fn truncation(&self) -> Result<TruncationModelParams, CliError> {
        TruncationModelParams::new(self.n, self.nu.clone(), self.l.unwrap_or(0)).map_err(param_error)
    }

    fn ensemble(&self) -> Result<PolynomialEnsemble, CliError> {
        match self.model {
            Model::Ginibre => ginibre_chain_ensemble(self.n, &self.nu),
            Model::Inverse => inverse_chain_ensemble(self.n, &self.nu, &self.tilde_nu),
            Model::Truncated => truncated_unitary_chain_ensemble(&self.truncation()?),
        }
        .map_err(param_error)
    }

    fn chain(&self) -> Result<MatrixChainSpec, CliError> {
        match self.model {
            Model::Ginibre => MatrixChainSpec::ginibre_chain(self.n, &self.nu),
            Model::Truncated => MatrixChainSpec::truncated_chain(self.n, &self.nu, self.l.unwrap_or(0)),
            Model::Inverse => {
                let mut factors = vec![FactorSpec::InverseGinibreChain { tilde_nu: self.tilde_nu.clone() }];
                factors.extend(self.nu.iter().map(|&nu| FactorSpec::Ginibre { nu }));
                MatrixChainSpec::new(self.n, factors)
            }
        }
        .map_err(param_error)
    }
}

fn route(s: &Settings, allowed: &[KernelRoute]) -> Result<KernelRoute, UsageError> {
    let name = s.route.as_deref().unwrap_or("contour");
    let r: KernelRoute = name.parse().map_err(|e: Error| usage(e.to_string()))?;
    if !allowed.contains(&r) {
        let names: Vec<&str> = allowed.iter().map(KernelRoute::as_str).collect();
        return Err(usage(format!("route `{name}` is not available here; use one of {}", names.join(", "))));
    }
    Ok(r)
}

pub fn run(kind: CommandKind, s: &Settings) -> Result<(), CliError> {
    match kind {
        CommandKind::Sample => sample(s),
        CommandKind::Kernel => kernel(s),
        CommandKind::HardEdge => hard_edge(s),
        CommandKind::Borodin => borodin(s),
        CommandKind::Verify => verify(s),
        CommandKind::DensityCompare => density_compare(s),
    }
}

fn sample(s: &Settings) -> Result<(), CliError> {
    let chain = model_setup(s)?.chain()?;
    let batch = sample_chain(&chain, require(&s.seed, "seed")?, require(&s.samples, "samples")?)?;
    let mut prov = Provenance::new(CommandKind::Sample, s);
    prov.rejections = Some(batch.rejections);
    emit(s.out.as_deref(), &samples_csv(&prov, &batch.samples)).map_err(io_error)
}

/// Evaluates `f` on the grid in parallel, writes the CSV, and reports the
/// points that failed.
fn grid_command<F>(kind: CommandKind, s: &Settings, route: KernelRoute, f: F) -> Result<(), CliError>
where
    F: Fn(f64, f64) -> polyens::Result<KernelValue> + Sync,
{
    let gx = require(&s.grid_x, "grid-x")?;
    let gy = require(&s.grid_y, "grid-y")?;
    let points: Vec<(f64, f64)> = gx.iter().flat_map(|&x| gy.iter().map(move |&y| (x, y))).collect();
    let values: Vec<polyens::Result<KernelValue>> = points.par_iter().map(|&(x, y)| f(x, y)).collect();
    let mut rows = Vec::with_capacity(points.len());
    let mut failures = Vec::new();
    for (&(x, y), v) in points.iter().zip(values) {
        match v {
            Ok(v) => rows.push(KernelRow {
                x,
                y,
                value: v.value,
                abs_imag_residual: v.abs_imag_residual,
                route: v.route.as_str().into(),
                converged: true,
            }),
            Err(e) => {
                failures.push(json!({ "x": x, "y": y, "error": error_kind(&e), "message": e.to_string() }));
                rows.push(KernelRow {
                    x,
                    y,
                    value: f64::NAN,
                    abs_imag_residual: f64::NAN,
                    route: route.as_str().into(),
                    converged: false,
                });
            }
        }
    }
    emit(s.out.as_deref(), &kernel_csv(&Provenance::new(kind, s), &rows)).map_err(io_error)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numerical {
            error: "grid_evaluation".into(),
            message: format!("{} of {} grid points failed", failures.len(), rows.len()),
            details: Value::Array(failures),
        })
    }
}

fn kernel(s: &Settings) -> Result<(), CliError> {
    let setup = model_setup(s)?;
    let tol = require(&s.tol, "tol")?;
    if setup.model == Model::Truncated {
        let r = route(s, &[KernelRoute::Contour, KernelRoute::BiorthogonalSum, KernelRoute::MeijerProduct, KernelRoute::MomentMatrix])?;
        if r != KernelRoute::MomentMatrix {
            let params = setup.truncation()?;
            return grid_command(CommandKind::Kernel, s, r, |x, y| kernel_finite(&params, x, y, r, tol));
        }
    } else {
        route(s, &[KernelRoute::MomentMatrix])?;
    }
    let kernel = GenericKernel::new(&setup.ensemble()?)?;
    grid_command(CommandKind::Kernel, s, KernelRoute::MomentMatrix, |x, y| {
        Ok(KernelValue { value: kernel.eval(x, y)?, abs_imag_residual: 0.0, route: KernelRoute::MomentMatrix })
    })
}

fn hard_edge(s: &Settings) -> Result<(), CliError> {
    let params = HardEdgeParams::new(require(&s.nu, "nu")?).map_err(param_error)?;
    let r = route(s, &[KernelRoute::Contour, KernelRoute::MeijerProduct])?;
    let tol = require(&s.tol, "tol")?;
    grid_command(CommandKind::HardEdge, s, r, |x, y| kernel_hard_edge(&params, x, y, r, tol))
}

fn borodin(s: &Settings) -> Result<(), CliError> {
    let params = BorodinParams::new(require(&s.alpha, "alpha")?, require(&s.theta, "theta")?).map_err(param_error)?;
    let r = route(s, &[KernelRoute::WrightIntegral])?;
    let tol = require(&s.tol, "tol")?;
    grid_command(CommandKind::Borodin, s, r, |x, y| {
        Ok(KernelValue { value: kernel_borodin(&params, x, y, tol)?, abs_imag_residual: 0.0, route: r })
    })
}

fn suites(name: &str) -> Result<Vec<Suite>, UsageError> {
    if name == "all" {
        return Ok(Suite::ALL.to_vec());
    }
    name.split(',').map(|p| p.trim().parse::<Suite>().map_err(|e: Error| usage(e.to_string()))).collect()
}

fn verify(s: &Settings) -> Result<(), CliError> {
    let selected = suites(s.suite.as_deref().unwrap_or("all"))?;
    let opts = VerifyOptions { n: s.n, seed: require(&s.seed, "seed")?, samples: require(&s.samples, "samples")? };
    let mut reports: Vec<SuiteReport> = Vec::new();
    let mut errors = Vec::new();
    let mut monte_carlo: Option<SuiteReport> = None;
    for suite in selected {
        let result = match (suite, &monte_carlo) {
            (Suite::Determinism, Some(first)) => determinism(first, &opts),
            _ => run_suite(suite, &opts),
        };
        match result {
            Ok(r) => {
                if suite == Suite::MonteCarlo {
                    monte_carlo = Some(r.clone());
                }
                reports.push(r);
            }
            Err(e) => errors.push(json!({ "suite": suite.as_str(), "error": error_kind(&e), "message": e.to_string() })),
        }
    }
    let pass = errors.is_empty() && reports.iter().all(|r| r.pass);
    let body = json!({ "reports": reports, "errors": errors, "pass": pass });
    emit(s.out.as_deref(), &json_document(&Provenance::new(CommandKind::Verify, s), &body)).map_err(io_error)?;
    if pass {
        return Ok(());
    }
    let failed: Vec<Value> = reports
        .iter()
        .flat_map(|r| r.cases.iter().filter(|c| !c.pass).map(move |c| json!({ "suite": r.suite, "case": c.name, "metric": c.metric, "threshold": c.threshold })))
        .chain(errors)
        .collect();
    Err(CliError::Numerical {
        error: "verification_failed".into(),
        message: format!("{} case(s) or suite(s) failed", failed.len()),
        details: Value::Array(failed),
    })
}

fn density_compare(s: &Settings) -> Result<(), CliError> {
    let setup = model_setup(s)?;
    let chain = setup.chain()?;
    let ens = setup.ensemble()?;
    let threshold = require(&s.threshold, "threshold")?;
    let kernel = GenericKernel::new(&ens)?;
    let batch = sample_chain(&chain, require(&s.seed, "seed")?, require(&s.samples, "samples")?)?;
    let report = empirical_vs_density(&batch, |x| kernel.density(x), ens.support(), threshold)?;
    let mut prov = Provenance::new(CommandKind::DensityCompare, s);
    prov.rejections = Some(batch.rejections);
    emit(s.out.as_deref(), &json_document(&prov, &report)).map_err(io_error)?;
    if report.pass {
        return Ok(());
    }
    Err(CliError::Numerical {
        error: "goodness_of_fit".into(),
        message: format!("KS distance {:.4e} exceeds {threshold:e}", report.ks_distance),
        details: serde_json::to_value(report).unwrap_or(Value::Null),
    })
}

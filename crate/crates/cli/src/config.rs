//! Command-line flags, the optional TOML config file, and their merge into one
//! resolved set of settings.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use polyens::quad::KERNEL_TOLERANCE;
use polyens::verify::{DEFAULT_SAMPLES, DEFAULT_SEED};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "POLYENS_THREADS";
pub const DEFAULT_KS_THRESHOLD: f64 = 0.02;

#[derive(Debug, Parser)]
#[command(name = "polyens", version, about = "Polynomial ensembles of random matrix products: kernels, hard-edge limits and Monte Carlo checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Flat TOML file of settings; flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: $POLYENS_THREADS, else all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Sample,
    Kernel,
    HardEdge,
    Borodin,
    Verify,
    DensityCompare,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw squared singular values of a matrix chain, one CSV row per draw.
    Sample(Settings),
    /// Finite-n correlation kernel on a grid.
    Kernel(Settings),
    /// Hard-edge limit kernel on a grid.
    HardEdge(Settings),
    /// Borodin kernel on a grid.
    Borodin(Settings),
    /// Run verification suites and write a pass/fail report.
    Verify(Settings),
    /// Monte Carlo sample against the model's one-point density.
    DensityCompare(Settings),
}

impl Command {
    pub fn split(self) -> (CommandKind, Settings) {
        match self {
            Command::Sample(s) => (CommandKind::Sample, s),
            Command::Kernel(s) => (CommandKind::Kernel, s),
            Command::HardEdge(s) => (CommandKind::HardEdge, s),
            Command::Borodin(s) => (CommandKind::Borodin, s),
            Command::Verify(s) => (CommandKind::Verify, s),
            Command::DensityCompare(s) => (CommandKind::DensityCompare, s),
        }
    }
}

impl CommandKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandKind::Sample => "sample",
            CommandKind::Kernel => "kernel",
            CommandKind::HardEdge => "hard-edge",
            CommandKind::Borodin => "borodin",
            CommandKind::Verify => "verify",
            CommandKind::DensityCompare => "density-compare",
        }
    }

    /// Settings keys the command reads, besides `out`.
    fn keys(self) -> &'static [&'static str] {
        match self {
            CommandKind::Sample => &["model", "n", "M", "nu", "tilde_nu", "l", "samples", "seed"],
            CommandKind::Kernel => &["model", "n", "M", "nu", "tilde_nu", "l", "grid", "grid_x", "grid_y", "route", "tol"],
            CommandKind::HardEdge => &["M", "nu", "grid", "grid_x", "grid_y", "route", "tol"],
            CommandKind::Borodin => &["alpha", "theta", "grid", "grid_x", "grid_y", "tol"],
            CommandKind::Verify => &["suite", "n", "seed", "samples"],
            CommandKind::DensityCompare => &["model", "n", "M", "nu", "tilde_nu", "l", "samples", "seed", "threshold"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// Product of Ginibre matrices.
    Ginibre,
    /// Ginibre product times an inverted Ginibre product.
    Inverse,
    /// Truncated Haar unitary followed by Ginibre matrices.
    Truncated,
}

/// Every setting a command may take. Each is a flag and a key of the config file.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<Model>,
    /// Number of points.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Number of factors; must match the length of --nu.
    #[arg(long = "M")]
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Comma-separated ν_1, …, ν_M.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<Vec<f64>>,
    /// Comma-separated ν̃_1, …, ν̃_K of the inverted factors (last must be 0).
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tilde_nu: Option<Vec<usize>>,
    /// Size of the Haar unitary of the truncated model.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// Comma-separated points used for both x and y.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_x: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_y: Option<Vec<f64>>,
    /// Number of Monte Carlo draws.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Relative tolerance of kernel evaluations.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Kernel route: contour, biorthogonal_sum, meijer_product, moment_matrix or wright_integral.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub route: Option<String>,
    /// Suite name, or `all`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    /// KS distance accepted by density-compare.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Output file (default: standard output).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Invalid invocation; exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

fn to_map(s: &Settings) -> Map<String, Value> {
    match serde_json::to_value(s) {
        Ok(Value::Object(m)) => m,
        _ => Map::new(),
    }
}

/// Parses the text of a config file.
pub fn parse_config_text(text: &str) -> Result<Settings, UsageError> {
    toml::from_str(text).map_err(|e| usage(format!("config file: {}", e.message())))
}

pub fn read_config(path: &Path) -> Result<Settings, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// `file` overlaid with every flag that was given.
pub fn merge(file: Settings, flags: Settings) -> Settings {
    let mut m = to_map(&file);
    m.extend(to_map(&flags));
    serde_json::from_value(Value::Object(m)).unwrap_or(flags)
}

/// Rejects settings the command does not read and fills in defaults, so the
/// result is the complete configuration of the run.
pub fn resolve(kind: CommandKind, mut s: Settings) -> Result<Settings, UsageError> {
    let allowed = kind.keys();
    for key in to_map(&s).keys() {
        if key != "out" && !allowed.contains(&key.as_str()) {
            return Err(usage(format!("`{key}` does not apply to `{}`", kind.as_str())));
        }
    }
    if let (Some(m), Some(nu)) = (s.m, &s.nu) {
        if m != nu.len() {
            return Err(usage(format!("--M {m} does not match the {} entries of --nu", nu.len())));
        }
    }
    if let Some(grid) = s.grid.take() {
        if s.grid_x.is_some() || s.grid_y.is_some() {
            return Err(usage("give either --grid or --grid-x/--grid-y"));
        }
        s.grid_x = Some(grid.clone());
        s.grid_y = Some(grid);
    }
    match kind {
        CommandKind::Sample | CommandKind::DensityCompare => {
            s.model.get_or_insert(Model::Truncated);
            s.samples.get_or_insert(DEFAULT_SAMPLES);
            s.seed.get_or_insert(DEFAULT_SEED);
            if kind == CommandKind::DensityCompare {
                s.threshold.get_or_insert(DEFAULT_KS_THRESHOLD);
            }
        }
        CommandKind::Kernel => {
            let model = *s.model.get_or_insert(Model::Truncated);
            let route = if model == Model::Truncated { "contour" } else { "moment_matrix" };
            s.route.get_or_insert_with(|| route.to_string());
            s.tol.get_or_insert(KERNEL_TOLERANCE);
        }
        CommandKind::HardEdge => {
            s.route.get_or_insert_with(|| "contour".to_string());
            s.tol.get_or_insert(KERNEL_TOLERANCE);
        }
        CommandKind::Borodin => {
            s.route.get_or_insert_with(|| "wright_integral".to_string());
            s.tol.get_or_insert(KERNEL_TOLERANCE);
        }
        CommandKind::Verify => {
            s.suite.get_or_insert_with(|| "all".to_string());
            s.seed.get_or_insert(DEFAULT_SEED);
            s.samples.get_or_insert(DEFAULT_SAMPLES);
        }
    }
    if matches!(kind, CommandKind::Kernel | CommandKind::HardEdge | CommandKind::Borodin) {
        let nonempty = |g: &Option<Vec<f64>>| g.as_ref().is_some_and(|g| !g.is_empty());
        if !(nonempty(&s.grid_x) && nonempty(&s.grid_y)) {
            return Err(usage("a kernel grid needs --grid or both --grid-x and --grid-y"));
        }
    }
    if let Some(tol) = s.tol {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(usage(format!("--tol must lie in (0, 1), got {tol}")));
        }
    }
    if s.samples == Some(0) {
        return Err(usage("--samples must be positive"));
    }
    Ok(s)
}

/// Worker count from the flag, else the environment; `None` leaves the default.
pub fn thread_count(flag: Option<usize>) -> Result<Option<usize>, UsageError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?),
            Err(_) => None,
        },
    };
    if n == Some(0) {
        return Err(usage("thread count must be positive"));
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> (CommandKind, Settings) {
        Cli::try_parse_from(std::iter::once("polyens").chain(args.iter().copied())).unwrap().command.split()
    }

    #[test]
    fn kernel_flags() {
        let (kind, s) = parse(&["kernel", "--n", "4", "--M", "2", "--nu", "0,1", "--l", "11", "--grid-x", "0.1,0.5", "--grid-y", "0.1,0.5"]);
        assert_eq!(kind, CommandKind::Kernel);
        let s = resolve(kind, s).unwrap();
        assert_eq!((s.n, s.m, s.l), (Some(4), Some(2), Some(11)));
        assert_eq!(s.nu, Some(vec![0.0, 1.0]));
        assert_eq!(s.grid_x, Some(vec![0.1, 0.5]));
        assert_eq!(s.model, Some(Model::Truncated));
        assert_eq!(s.route.as_deref(), Some("contour"));
        assert_eq!(s.tol, Some(KERNEL_TOLERANCE));
    }

    #[test]
    fn flags_override_file() {
        let file = parse_config_text("n = 3\nnu = [0.0, 1.0]\nseed = 11\n").unwrap();
        let (kind, flags) = parse(&["sample", "--seed", "5"]);
        let s = resolve(kind, merge(file, flags)).unwrap();
        assert_eq!(s.seed, Some(5));
        assert_eq!(s.n, Some(3));
        assert_eq!(s.nu, Some(vec![0.0, 1.0]));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse_config_text("n = 3\nbogus = 1\n").is_err());
        let (kind, s) = parse(&["verify", "--theta", "2"]);
        assert!(resolve(kind, s).unwrap_err().0.contains("theta"));
    }

    #[test]
    fn factor_count_must_match_nu() {
        let (kind, s) = parse(&["kernel", "--n", "2", "--M", "3", "--nu", "0,1", "--l", "6", "--grid", "0.5"]);
        assert!(resolve(kind, s).is_err());
    }

    #[test]
    fn kernel_grid_is_required() {
        let (kind, s) = parse(&["hard-edge", "--nu", "0,1"]);
        assert!(resolve(kind, s).is_err());
    }

    #[test]
    fn grid_sets_both_axes() {
        let (kind, s) = parse(&["borodin", "--alpha", "-0.5", "--theta", "2", "--grid", "0.3,1"]);
        let s = resolve(kind, s).unwrap();
        assert_eq!(s.grid_x, s.grid_y);
        assert_eq!(s.grid, None);
        assert_eq!(s.alpha, Some(-0.5));
    }
}

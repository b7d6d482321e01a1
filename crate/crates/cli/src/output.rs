//! Output files: provenance headers, CSV rows and JSON documents, written
//! atomically through a temporary file in the target directory.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{CommandKind, Settings};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const KERNEL_CSV_HEADER: &str = "x,y,value,abs_imag_residual,route,converged";

/// Run metadata embedded in every output.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub route: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rejections: Option<usize>,
}

impl Provenance {
    pub fn new(kind: CommandKind, settings: &Settings) -> Self {
        Self {
            tool: "polyens".into(),
            version: VERSION.into(),
            command: kind.as_str().into(),
            config: serde_json::to_value(settings).unwrap_or(Value::Null),
            tolerance: settings.tol,
            route: settings.route.clone(),
            seed: settings.seed,
            rejections: None,
        }
    }

    /// `#`-prefixed header lines for CSV files.
    pub fn csv_lines(&self) -> String {
        let mut s = format!("# polyens {}\n# command: {}\n# config: {}\n", self.version, self.command, self.config);
        if let Some(t) = self.tolerance {
            s += &format!("# tolerance: {t:e}\n");
        }
        if let Some(r) = &self.route {
            s += &format!("# route: {r}\n");
        }
        if let Some(seed) = self.seed {
            s += &format!("# seed: {seed}\n");
        }
        if let Some(r) = self.rejections {
            s += &format!("# rejections: {r}\n");
        }
        s
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// One row of a kernel grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelRow {
    pub x: f64,
    pub y: f64,
    pub value: f64,
    pub abs_imag_residual: f64,
    pub route: String,
    pub converged: bool,
}

pub fn kernel_csv(prov: &Provenance, rows: &[KernelRow]) -> String {
    let mut s = prov.csv_lines();
    s += KERNEL_CSV_HEADER;
    s.push('\n');
    for r in rows {
        s += &format!(
            "{},{},{},{},{},{}\n",
            fmt_f64(r.x),
            fmt_f64(r.y),
            fmt_f64(r.value),
            fmt_f64(r.abs_imag_residual),
            r.route,
            r.converged
        );
    }
    s
}

/// One row per draw: `draw,x1,…,xn`, descending.
pub fn samples_csv(prov: &Provenance, samples: &[Vec<f64>]) -> String {
    let mut s = prov.csv_lines();
    let n = samples.first().map_or(0, Vec::len);
    s += "draw";
    for j in 1..=n {
        s += &format!(",x{j}");
    }
    s.push('\n');
    for (i, draw) in samples.iter().enumerate() {
        s += &i.to_string();
        for &v in draw {
            s.push(',');
            s += &fmt_f64(v);
        }
        s.push('\n');
    }
    s
}

/// `{"provenance": …}` merged with the fields of `body`.
pub fn json_document<T: Serialize>(prov: &Provenance, body: &T) -> String {
    let mut doc = json!({ "provenance": prov });
    if let (Value::Object(d), Ok(Value::Object(b))) = (&mut doc, serde_json::to_value(body)) {
        d.extend(b);
    }
    serde_json::to_string_pretty(&doc).unwrap_or_default() + "\n"
}

/// Writes `text` to `path` through a temporary file renamed into place, or to
/// standard output without a path.
pub fn emit(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes())?;
        return out.flush();
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Diagnostic document printed on a numerical failure.
pub fn diagnostic(kind: CommandKind, settings: &Settings, error: &str, message: &str, details: Value) -> String {
    let doc = json!({
        "command": kind.as_str(),
        "config": serde_json::to_value(settings).unwrap_or(Value::Null),
        "error": error,
        "message": message,
        "details": details,
    });
    serde_json::to_string_pretty(&doc).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, 2.0f64.sqrt() * 1e-300, -123456.789e200] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        }
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }

    #[test]
    fn csv_has_provenance_and_header() {
        let s = Settings { n: Some(2), tol: Some(1e-9), route: Some("contour".into()), ..Default::default() };
        let prov = Provenance::new(CommandKind::Kernel, &s);
        let row = KernelRow { x: 0.5, y: 0.25, value: 1.0, abs_imag_residual: 0.0, route: "contour".into(), converged: true };
        let csv = kernel_csv(&prov, &[row]);
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# polyens "));
        assert!(csv.contains("# config: {\"n\":2,"));
        assert!(csv.contains("# tolerance: 1e-9"));
        let header = lines.iter().position(|l| *l == KERNEL_CSV_HEADER).unwrap();
        assert!(lines[header + 1].ends_with(",contour,true"));
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        emit(Some(&path), "first\n").unwrap();
        emit(Some(&path), "second\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}

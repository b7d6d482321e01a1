use nalgebra::DMatrix;

/// Determinant of a matrix given entrywise as `sign·exp(log_abs)`, returned as
/// `(ln|det|, sign)` together with the pivot spread of the scaled LU.
///
/// Rows and then columns are scaled so that their largest entry is 1 before a
/// full-pivot LU, which keeps gamma-sized entries out of floating point range.
pub(crate) struct LogDet {
    pub log_abs: f64,
    pub sign: f64,
    pub pivot_ratio: f64,
}

pub(crate) fn signed_log_det(log_abs: &DMatrix<f64>, signs: &DMatrix<f64>) -> LogDet {
    let n = log_abs.nrows();
    if n == 0 {
        return LogDet { log_abs: 0.0, sign: 1.0, pivot_ratio: 1.0 };
    }
    let zero = LogDet { log_abs: f64::NEG_INFINITY, sign: 0.0, pivot_ratio: f64::INFINITY };
    let mut row_scale = vec![0.0; n];
    for (j, r) in row_scale.iter_mut().enumerate() {
        *r = (0..n).map(|k| log_abs[(j, k)]).fold(f64::NEG_INFINITY, f64::max);
        if *r == f64::NEG_INFINITY {
            return zero;
        }
    }
    let mut col_scale = vec![0.0; n];
    for (k, c) in col_scale.iter_mut().enumerate() {
        *c = (0..n).map(|j| log_abs[(j, k)] - row_scale[j]).fold(f64::NEG_INFINITY, f64::max);
        if *c == f64::NEG_INFINITY {
            return zero;
        }
    }
    let scaled = DMatrix::from_fn(n, n, |j, k| signs[(j, k)] * (log_abs[(j, k)] - row_scale[j] - col_scale[k]).exp());
    let lu = scaled.full_piv_lu();
    let u = lu.u();
    let diag: Vec<f64> = (0..n).map(|i| u[(i, i)].abs()).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let det = lu.determinant();
    if det == 0.0 || !det.is_finite() {
        return zero;
    }
    LogDet {
        log_abs: det.abs().ln() + row_scale.iter().sum::<f64>() + col_scale.iter().sum::<f64>(),
        sign: det.signum(),
        pivot_ratio: max / min,
    }
}

/// [`signed_log_det`] of a plain matrix.
pub(crate) fn log_det(m: &DMatrix<f64>) -> LogDet {
    let la = m.map(|v| if v == 0.0 { f64::NEG_INFINITY } else { v.abs().ln() });
    let sg = m.map(f64::signum);
    signed_log_det(&la, &sg)
}

/// `ln|Δ(x)|` and sign of `Δ(x) = Π_{j<k} (x_k - x_j)`.
pub(crate) fn log_vandermonde(x: &[f64]) -> (f64, f64) {
    let mut acc = 0.0;
    let mut sign = 1.0;
    for j in 0..x.len() {
        for k in (j + 1)..x.len() {
            let d = x[k] - x[j];
            acc += d.abs().ln();
            sign *= d.signum();
        }
    }
    (acc, sign)
}

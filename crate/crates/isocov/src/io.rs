//! Kernel loading and report writers.
//!
//! Kernel descriptions are JSON documents of [`KernelSpec`]. A tabulated kernel
//! may name a CSV file with header `theta,c11,c12,...`; the path is resolved
//! relative to the JSON file.

use std::fs;
use std::path::{Path, PathBuf};

use isocov_core::coefficients::IdentityResidual;
use isocov_core::euclid::SpectralCheckResult;
use isocov_core::kernels::{make_kernel, KernelSpec, MatrixKernel};
use isocov_core::simulate::{CovCheckReport, FieldEnsemble};
use isocov_core::validity::{MinfSeries, ValidityReport};
use serde::Serialize;
use thiserror::Error;

/// Errors raised while reading inputs or writing outputs.
#[derive(Debug, Error)]
pub enum IoError {
    /// Filesystem failure.
    #[error("{}", path.display())]
    Io {
        /// Offending path.
        path: PathBuf,
        /// Underlying error.
        source: std::io::Error,
    },
    /// Malformed JSON.
    #[error("{}", path.display())]
    Json {
        /// Offending path.
        path: PathBuf,
        /// Underlying error.
        source: serde_json::Error,
    },
    /// Malformed CSV.
    #[error("{}", path.display())]
    Csv {
        /// Offending path.
        path: PathBuf,
        /// Underlying error.
        source: csv::Error,
    },
    /// Well-formed file with unusable content.
    #[error("{}: {message}", path.display())]
    Format {
        /// Offending path.
        path: PathBuf,
        /// Description.
        message: String,
    },
    /// Worker pool could not be started.
    #[error(transparent)]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
    /// Rejected by the numerical core.
    #[error(transparent)]
    Core(#[from] isocov_core::Error),
}

/// IO result.
pub type Result<T> = std::result::Result<T, IoError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> IoError + '_ {
    move |source| IoError::Csv { path: path.to_path_buf(), source }
}

/// Read a kernel description and inline any tabulated CSV data.
pub fn load_kernel_spec(path: &Path) -> Result<KernelSpec> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut spec: KernelSpec =
        serde_json::from_str(&text).map_err(|source| IoError::Json { path: path.to_path_buf(), source })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    resolve_tables(&mut spec, base)?;
    Ok(spec)
}

/// Read and build a kernel.
pub fn load_kernel(path: &Path) -> Result<MatrixKernel> {
    Ok(make_kernel(&load_kernel_spec(path)?)?)
}

fn resolve_tables(spec: &mut KernelSpec, base: &Path) -> Result<()> {
    match spec {
        KernelSpec::Tabulated { csv: Some(file), theta, values } if theta.is_empty() => {
            let (t, v) = read_tabulated_csv(&base.join(file.as_str()))?;
            *theta = t;
            *values = v;
            Ok(())
        }
        KernelSpec::HadamardPower { kernel, .. }
        | KernelSpec::Projective { kernel, .. }
        | KernelSpec::Rescaled { kernel, .. } => resolve_tables(kernel, base),
        _ => Ok(()),
    }
}

/// Parse a tabulated kernel CSV: header `theta,c11,c12,...`, one row per grid
/// point with the upper triangle entries in row order.
pub fn read_tabulated_csv(path: &Path) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_err(path))?;
    let headers = rdr.headers().map_err(csv_err(path))?.clone();
    let format = |message: String| IoError::Format { path: path.to_path_buf(), message };
    if headers.get(0) != Some("theta") || headers.len() < 2 {
        return Err(format("header must be `theta,c11,...`".into()));
    }
    let (mut theta, mut values) = (Vec::new(), Vec::new());
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_err(path))?;
        let row = record
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| format(format!("row {}: {e}", line + 1)))?;
        theta.push(row[0]);
        values.push(row[1..].to_vec());
    }
    Ok((theta, values))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|source| IoError::Json { path: path.to_path_buf(), source })?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Per-index eigenvalue trace of a validity report.
pub fn write_trace_csv(path: &Path, report: &ValidityReport) -> Result<()> {
    let rows = report.trace.iter().map(|t| {
        vec![
            t.index.to_string(),
            t.min_eigenvalue.to_string(),
            t.max_abs_eigenvalue.to_string(),
            t.max_abs_entry.to_string(),
            t.pass.to_string(),
        ]
    });
    write_rows(path, &["n", "min_eigenvalue", "max_abs_eigenvalue", "max_abs_entry", "pass"], rows)
}

/// Power-series coefficients `c_k` in `x = cos(ϑ/2)`, one row per entry.
pub fn write_coeff_table_csv(path: &Path, series: &MinfSeries) -> Result<()> {
    let rows = series.coefficients.iter().enumerate().flat_map(|(k, c)| {
        let m = c.dim();
        (0..m).flat_map(move |i| (0..m).map(move |j| vec![k.to_string(), i.to_string(), j.to_string(), c.get(i, j).to_string()]))
    });
    write_rows(path, &["degree", "i", "j", "coefficient"], rows)
}

/// `(ω, transform)` pairs, one column per probe direction.
pub fn write_spectral_csv(path: &Path, result: &SpectralCheckResult) -> Result<()> {
    let mut header = vec!["omega".to_string()];
    header.extend((0..result.directions.len()).map(|j| format!("direction_{j}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = result.omega_grid.iter().enumerate().map(|(i, w)| {
        let mut row = vec![w.to_string()];
        row.extend(result.transform_values.iter().map(|v| v[i].to_string()));
        row
    });
    write_rows(path, &header, rows)
}

/// One row per `(replicate, point)` with `m` value columns.
pub fn write_ensemble_csv(path: &Path, ensemble: &FieldEnsemble) -> Result<()> {
    let mut header = vec!["replicate".to_string(), "point".to_string()];
    header.extend((1..=ensemble.m).map(|k| format!("z{k}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = (0..ensemble.replicates).flat_map(|r| {
        (0..ensemble.n_points()).map(move |p| {
            let mut row = vec![r.to_string(), p.to_string()];
            row.extend(ensemble.value(r, p).iter().map(f64::to_string));
            row
        })
    });
    write_rows(path, &header, rows)
}

/// Empirical against theoretical covariance entries.
pub fn write_cov_csv(path: &Path, report: &CovCheckReport) -> Result<()> {
    let rows = report.entries.iter().map(|e| {
        vec![
            e.i.to_string(),
            e.j.to_string(),
            e.k.to_string(),
            e.l.to_string(),
            e.rho.to_string(),
            e.empirical.to_string(),
            e.theoretical.to_string(),
            e.std_error.to_string(),
            e.flagged.to_string(),
        ]
    });
    write_rows(path, &["i", "j", "k", "l", "rho", "empirical", "theoretical", "std_error", "flagged"], rows)
}

/// Coefficient identity residuals.
pub fn write_identity_csv(path: &Path, residuals: &[IdentityResidual], tol: f64) -> Result<()> {
    let rows = residuals.iter().map(|r| {
        vec![
            format!("{:?}", r.identity),
            r.alpha.to_string(),
            r.beta.to_string(),
            r.n_check.to_string(),
            r.residual.to_string(),
            r.scale.to_string(),
            r.passes(tol).to_string(),
        ]
    });
    write_rows(path, &["identity", "alpha", "beta", "n_check", "residual", "scale", "pass"], rows)
}

//! Command-line front end.
//!
//! Exit codes: `0` when a verdict was computed (valid or not), `1` when the
//! verdict is invalid and `--strict` is set, `2` on usage or input errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use isocov_core::coefficients::{compute_h, identity_checks};
use isocov_core::euclid::{default_omega_max, euclid_spectral_check, DEFAULT_OMEGA_POINTS};
use isocov_core::kernels::MatrixKernel;
use isocov_core::simulate::{default_truncation, empirical_cov_check, RandomStream, StreamId};
use isocov_core::spaces::{sample_uniform, Point, Space};
use isocov_core::validity::{minf_series_coeffs, transfer_implications, validate_minf, validate_on_space, MINF_DEGREE_CAP};
use serde::Serialize;

use crate::io;
use crate::parallel::simulate_field_parallel;

/// Numeric defaults shared by all subcommands.
pub mod defaults {
    /// Largest coefficient index tested.
    pub const N_MAX: usize = 40;
    /// Relative PSD tolerance.
    pub const TOL: f64 = 1e-9;
    /// Simulation replicates.
    pub const REPS: usize = 10_000;
    /// Simulation points.
    pub const POINTS: usize = 20;
    /// Root seed.
    pub const SEED: u64 = 0;
    /// Confidence band half-width in standard errors.
    pub const MULTIPLIER: f64 = 4.0;
}

/// Validation, transfer and simulation of isotropic covariance matrix functions.
#[derive(Debug, Parser)]
#[command(name = "isocov", version)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Kernel description (JSON).
    #[arg(long)]
    kernel: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Relative PSD tolerance.
    #[arg(long, default_value_t = defaults::TOL)]
    tol: f64,
    /// Exit with code 1 on an invalid verdict.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test `H_n ⪰ 0` for `n ≤ n-max` on one space.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Space such as `S:2`, `PR:3`, `PC:4`, `PH:8`, `CAY:16`.
        #[arg(long)]
        space: Space,
        /// Largest index tested.
        #[arg(long, default_value_t = defaults::N_MAX)]
        n_max: usize,
    },
    /// Test validity on all spaces through the power series in `cos(ϑ/2)`.
    ValidateMinf {
        #[command(flatten)]
        common: Common,
        /// Highest series degree.
        #[arg(long, default_value_t = MINF_DEGREE_CAP)]
        degree: usize,
    },
    /// Write the coefficient matrices `H_n` and `B_n`.
    Coeffs {
        #[command(flatten)]
        common: Common,
        /// Space.
        #[arg(long)]
        space: Space,
        /// Largest index.
        #[arg(long, default_value_t = defaults::N_MAX)]
        n_max: usize,
        /// Quadrature nodes; automatic when omitted.
        #[arg(long)]
        quad_order: Option<usize>,
    },
    /// Evaluate the implications between spaces on one kernel.
    Transfer {
        #[command(flatten)]
        common: Common,
        /// Largest index tested.
        #[arg(long, default_value_t = defaults::N_MAX)]
        n_max: usize,
    },
    /// Bessel-transform positivity in odd dimension `d`.
    EuclidCheck {
        #[command(flatten)]
        common: Common,
        /// Odd Euclidean dimension.
        #[arg(long)]
        d: usize,
        /// Upper end of the frequency grid; `40·d` when omitted.
        #[arg(long)]
        omega_max: Option<f64>,
        /// Number of frequencies.
        #[arg(long, default_value_t = DEFAULT_OMEGA_POINTS)]
        grid_points: usize,
    },
    /// Simulate a Gaussian field and compare empirical covariances.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Space.
        #[arg(long)]
        space: Space,
        /// Replicates.
        #[arg(long, default_value_t = defaults::REPS)]
        reps: usize,
        /// Root seed.
        #[arg(long, default_value_t = defaults::SEED)]
        seed: u64,
        /// Number of uniformly drawn evaluation points.
        #[arg(long, default_value_t = defaults::POINTS)]
        points: usize,
        /// Coefficients computed before truncation.
        #[arg(long, default_value_t = defaults::N_MAX)]
        n_max: usize,
        /// Confidence band half-width in standard errors.
        #[arg(long, default_value_t = defaults::MULTIPLIER)]
        multiplier: f64,
        /// Worker threads; `0` uses all cores. Output does not depend on it.
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Residuals of the contiguous coefficient identities.
    VerifyIdentities {
        #[command(flatten)]
        common: Common,
        /// Space providing `(α, β)`.
        #[arg(long)]
        space: Space,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Validate { common, .. }
            | Command::ValidateMinf { common, .. }
            | Command::Coeffs { common, .. }
            | Command::Transfer { common, .. }
            | Command::EuclidCheck { common, .. }
            | Command::Simulate { common, .. }
            | Command::VerifyIdentities { common, .. } => common,
        }
    }
}

/// Parse `argv` (including the program name), run and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return 0;
            }
            let text = e.render().to_string();
            eprintln!("{}", text.lines().next().unwrap_or("usage error"));
            return 2;
        }
    };
    match execute(&cli.command) {
        Ok(valid) => {
            if !valid && cli.command.common().strict {
                1
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            2
        }
    }
}

#[derive(Serialize)]
struct SimulationMetadata<'a> {
    seed: u64,
    space: Space,
    n_max: usize,
    replicates: usize,
    points: &'a [Point],
    m: usize,
    stream: &'a StreamId,
    kernel: &'a str,
    flagged: usize,
    entries: usize,
    max_z: f64,
}

fn out_file(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

/// Returns whether the verdict is valid.
fn execute(cmd: &Command) -> Result<bool> {
    let common = cmd.common();
    let kernel = io::load_kernel(&common.kernel)?;
    fs::create_dir_all(&common.out).with_context(|| format!("creating {}", common.out.display()))?;
    let out = common.out.as_path();
    let tol = common.tol;
    match cmd {
        Command::Validate { space, n_max, .. } => {
            let report = validate_on_space(&kernel, *space, *n_max, tol)?;
            io::write_json(&out_file(out, "report.json"), &report)?;
            io::write_trace_csv(&out_file(out, "trace.csv"), &report)?;
            println!("{}: {:?} ({})", report.space, report.verdict, report.label);
            Ok(report.is_valid())
        }
        Command::ValidateMinf { degree, .. } => {
            let report = validate_minf(&kernel, *degree, tol)?;
            io::write_json(&out_file(out, "minf_report.json"), &report)?;
            if let Ok(series) = minf_series_coeffs(&kernel, *degree) {
                io::write_coeff_table_csv(&out_file(out, "minf_coefficients.csv"), &series)?;
            }
            println!("{}: {:?} ({})", report.space, report.verdict, report.label);
            Ok(report.is_valid())
        }
        Command::Coeffs { space, n_max, quad_order, .. } => {
            let (alpha, beta) = space.params();
            let seq = compute_h(&kernel, alpha, beta, *n_max, *quad_order)?;
            io::write_json(&out_file(out, "coefficients.json"), &seq)?;
            println!("{space}: {} coefficient matrices, quadrature order {}", seq.h.len(), seq.quad_order);
            Ok(true)
        }
        Command::Transfer { n_max, .. } => {
            let matrix = transfer_implications(&kernel, *n_max, tol)?;
            io::write_json(&out_file(out, "transfer.json"), &matrix)?;
            for row in &matrix.rows {
                println!(
                    "{} -> {}: {:?} -> {:?}, holds {}",
                    row.source, row.target, row.source_verdict, row.target_verdict, row.holds
                );
            }
            Ok(matrix.all_hold)
        }
        Command::EuclidCheck { d, omega_max, grid_points, .. } => {
            let w = omega_max.unwrap_or_else(|| default_omega_max(*d));
            let result = euclid_spectral_check(&kernel, *d, w, *grid_points, tol)?;
            io::write_json(&out_file(out, "spectral.json"), &result)?;
            io::write_spectral_csv(&out_file(out, "spectral.csv"), &result)?;
            println!(
                "d = {}: pass {} (min {:e}, max |value| {:e}, sign change {})",
                result.d, result.pass, result.min_value, result.max_abs, result.sign_change
            );
            Ok(result.pass)
        }
        Command::Simulate { space, reps, seed, points, n_max, multiplier, threads, .. } => {
            simulate(&kernel, *space, *reps, *seed, *points, *n_max, *multiplier, *threads, common, out)
        }
        Command::VerifyIdentities { space, .. } => {
            let (alpha, beta) = space.params();
            let residuals = identity_checks(&kernel, alpha, beta)?;
            io::write_identity_csv(&out_file(out, "identities.csv"), &residuals, tol)?;
            let ok = residuals.iter().all(|r| r.passes(tol));
            println!("{space}: {} identities checked, all pass {ok}", residuals.len());
            Ok(ok)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    kernel: &MatrixKernel,
    space: Space,
    reps: usize,
    seed: u64,
    n_points: usize,
    n_max: usize,
    multiplier: f64,
    threads: usize,
    common: &Common,
    out: &Path,
) -> Result<bool> {
    let (alpha, beta) = space.params();
    let seq = compute_h(kernel, alpha, beta, n_max, None)?;
    let trunc = default_truncation(&seq.b, alpha);
    let root = RandomStream::new(seed);
    let mut point_stream = root.split(0);
    let points = (0..n_points).map(|_| sample_uniform(space, &mut point_stream)).collect::<Result<Vec<_>, _>>()?;
    let field_stream = root.split(1);
    let ensemble = simulate_field_parallel(space, &seq.b, trunc, points, reps, &field_stream, threads)?;
    io::write_ensemble_csv(&out_file(out, "ensemble.csv"), &ensemble)?;
    let check = empirical_cov_check(&ensemble, kernel, multiplier);
    let (flagged, entries, max_z) = match &check {
        Ok(c) => {
            io::write_cov_csv(&out_file(out, "covariance.csv"), c)?;
            (c.n_flagged, c.entries.len(), c.max_z)
        }
        Err(_) => (0, 0, 0.0),
    };
    let meta = SimulationMetadata {
        seed,
        space,
        n_max: trunc,
        replicates: reps,
        points: &ensemble.points,
        m: ensemble.m,
        stream: &ensemble.stream,
        kernel: &common.kernel.to_string_lossy(),
        flagged,
        entries,
        max_z,
    };
    io::write_json(&out_file(out, "metadata.json"), &meta)?;
    match check {
        Ok(_) => println!("{space}: {reps} replicates, n_max {trunc}, {flagged}/{entries} entries flagged"),
        Err(e) => println!("{space}: {reps} replicates, n_max {trunc}, covariance check skipped ({e})"),
    }
    Ok(entries == 0 || (flagged as f64) <= 0.01 * entries as f64)
}

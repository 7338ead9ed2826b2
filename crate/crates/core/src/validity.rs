//! Validity decisions: per-space tests on the Jacobi coefficients, the test on
//! all spaces at once through the power series of `C(π − 2 arcsin x)`, the
//! transfer implications between spaces and the projective constructions.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::{compute_h, eigen_extremes, tail_diagnostic};
use crate::kernels::{projective_pair, MatrixKernel};
use crate::linalg::Matrix;
use crate::spaces::Space;
use crate::{Error, Result};

/// Outcome of a validity test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Every tested matrix passes.
    Valid,
    /// Some tested matrix fails.
    Invalid,
    /// The kernel could not be evaluated.
    Inconclusive,
}

/// One index of the eigenvalue trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// Series index `n`, or monomial degree for the all-spaces test.
    pub index: usize,
    /// Smallest eigenvalue of the tested matrix.
    pub min_eigenvalue: f64,
    /// Largest absolute eigenvalue of the tested matrix.
    pub max_abs_eigenvalue: f64,
    /// Largest absolute entry of the tested matrix.
    pub max_abs_entry: f64,
    /// Whether this index passes.
    pub pass: bool,
}

/// First failing index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    /// Index or degree.
    pub index: usize,
    /// Smallest eigenvalue there.
    pub min_eigenvalue: f64,
}

/// How the power series coefficients were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesRoute {
    /// Cauchy integral of the analytic continuation on a circle of radius `0.9`.
    Cauchy,
    /// Chebyshev interpolation of the even extension on `[−1, 1]`.
    Chebyshev,
}

/// Verdict with its supporting evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    /// Verdict.
    pub verdict: Verdict,
    /// Space spelling, or `"M_infinity"`.
    pub space: String,
    /// Largest index or degree tested.
    pub n_max: usize,
    /// Tolerance used.
    pub tol: f64,
    /// First failing index, present for invalid verdicts.
    pub first_failure: Option<Failure>,
    /// Non-decay warning of the convergence diagnostic.
    pub tail_warning: bool,
    /// Ratio behind `tail_warning`.
    pub tail_ratio: f64,
    /// Per-index trace.
    pub trace: Vec<TraceEntry>,
    /// Human-readable qualifier such as "valid up to degree 30".
    pub label: String,
    /// Recovered `B_n = coeff(x^{2n})/2^n` for the all-spaces test.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub recovered_b: Vec<Matrix>,
    /// Coefficient route for the all-spaces test.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub route: Option<SeriesRoute>,
}

impl ValidityReport {
    /// `verdict == Valid`.
    pub fn is_valid(&self) -> bool {
        self.verdict == Verdict::Valid
    }

    fn inconclusive(space: String, n_max: usize, tol: f64, why: &Error) -> Self {
        Self {
            verdict: Verdict::Inconclusive,
            space,
            n_max,
            tol,
            first_failure: None,
            tail_warning: false,
            tail_ratio: 0.0,
            trace: Vec::new(),
            label: format!("inconclusive: {why}"),
            recovered_b: Vec::new(),
            route: None,
        }
    }
}

/// Test `H_n ⪰ 0` for `n ≤ n_max` on a space.
pub fn validate_on_space(kernel: &MatrixKernel, space: Space, n_max: usize, tol: f64) -> Result<ValidityReport> {
    let (alpha, beta) = space.params();
    validate_on_params(kernel, alpha, beta, &space.to_string(), n_max, tol)
}

/// Test `H_n ⪰ 0` for `n ≤ n_max` for arbitrary Jacobi parameters.
///
/// Every `H_n` is compared against `−tol·max(s, 1)` with `s` the largest
/// `‖H_k‖`, since quadrature noise is absolute. The trace reports eigenvalues of `B_n`.
pub fn validate_on_params(
    kernel: &MatrixKernel,
    alpha: f64,
    beta: f64,
    label: &str,
    n_max: usize,
    tol: f64,
) -> Result<ValidityReport> {
    if n_max == 0 {
        return Err(Error::OutOfRange { name: "n_max", value: 0.0 });
    }
    let seq = match compute_h(kernel, alpha, beta, n_max, None) {
        Ok(s) => s,
        Err(e @ Error::NonFinite(_)) => return Ok(ValidityReport::inconclusive(label.into(), n_max, tol, &e)),
        Err(e) => return Err(e),
    };
    let h_ext: Vec<(f64, f64)> = seq.h.iter().map(eigen_extremes).collect();
    let global = h_ext.iter().fold(0.0_f64, |a, e| a.max(e.1));
    let mut trace = Vec::with_capacity(n_max + 1);
    let mut first_failure = None;
    for (n, (b, &(h_min, _))) in seq.b.iter().zip(&h_ext).enumerate() {
        let pass = h_min >= -tol * global.max(1.0);
        let (b_min, b_scale) = eigen_extremes(b);
        if !pass && first_failure.is_none() {
            first_failure = Some(Failure { index: n, min_eigenvalue: b_min });
        }
        trace.push(TraceEntry {
            index: n,
            min_eigenvalue: b_min,
            max_abs_eigenvalue: b_scale,
            max_abs_entry: b.max_abs(),
            pass,
        });
    }
    let tail = tail_diagnostic(&seq);
    let verdict = if first_failure.is_some() { Verdict::Invalid } else { Verdict::Valid };
    Ok(ValidityReport {
        verdict,
        space: label.into(),
        n_max,
        tol,
        first_failure,
        tail_warning: tail.warning,
        tail_ratio: tail.ratio,
        trace,
        label: format!("{verdict:?} for n <= {n_max}").to_lowercase(),
        recovered_b: Vec::new(),
        route: None,
    })
}

/// Highest monomial degree accepted by [`minf_series_coeffs`].
pub const MINF_DEGREE_CAP: usize = 30;

const CAUCHY_RADIUS: f64 = 0.9;
const CAUCHY_POINTS: usize = 512;

/// Monomial coefficients of `g(x) = C(π − 2 arcsin x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinfSeries {
    /// Highest degree `N`.
    pub degree: usize,
    /// Coefficient matrices of `x^0, …, x^N`.
    pub coefficients: Vec<Matrix>,
    /// How they were obtained.
    pub route: SeriesRoute,
    /// Largest mismatch between the series and `g` at sample points in `[0, 0.8]`,
    /// relative to the largest coefficient.
    pub residual: f64,
}

/// Maclaurin coefficients of `C(π − 2 arcsin x)` up to degree `N ≤ 30`.
///
/// Kernels with an analytic continuation use a Cauchy integral on `|x| = 0.9`,
/// which is well conditioned and sees odd as well as even terms. Other kernels
/// fall back to Chebyshev interpolation of the even extension at `N + 1`
/// extrema with exact conversion to monomials; odd terms are then zero by
/// construction.
pub fn minf_series_coeffs(kernel: &MatrixKernel, n: usize) -> Result<MinfSeries> {
    if n > MINF_DEGREE_CAP {
        return Err(Error::OutOfRange { name: "N", value: n as f64 });
    }
    if let Some(series) = cauchy_coeffs(kernel, n)? {
        return Ok(series);
    }
    chebyshev_coeffs(kernel, n)
}

fn g_real(kernel: &MatrixKernel, x: f64) -> Result<Matrix> {
    let theta = PI - 2.0 * libm::asin(x.clamp(-1.0, 1.0));
    kernel.eval(theta.clamp(0.0, PI))
}

fn cauchy_coeffs(kernel: &MatrixKernel, n: usize) -> Result<Option<MinfSeries>> {
    let m = kernel.dim();
    let mm = m * m;
    let kmax = CAUCHY_POINTS / 2;
    let mut acc = vec![Complex64::new(0.0, 0.0); (kmax + 1) * mm];
    for j in 0..CAUCHY_POINTS {
        let phase = 2.0 * PI * j as f64 / CAUCHY_POINTS as f64;
        let x = Complex64::from_polar(CAUCHY_RADIUS, phase);
        let theta = Complex64::new(PI, 0.0) - x.asin() * 2.0;
        let Some(g) = kernel.eval_complex(theta) else {
            return Ok(None);
        };
        if g.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Ok(None);
        }
        for k in 0..=kmax {
            let w = Complex64::from_polar(1.0, -phase * k as f64);
            for e in 0..mm {
                acc[k * mm + e] += g[e] * w;
            }
        }
    }
    let coeffs: Vec<Matrix> = (0..=kmax)
        .map(|k| {
            let f = 1.0 / (CAUCHY_POINTS as f64 * libm::pow(CAUCHY_RADIUS, k as f64));
            Matrix::from_row_major(m, acc[k * mm..(k + 1) * mm].iter().map(|v| v.re * f).collect())
                .map(|c| c.symmetrized())
        })
        .collect::<Result<_>>()?;
    let scale = coeffs.iter().fold(0.0_f64, |a, c| a.max(c.max_abs())).max(f64::MIN_POSITIVE);
    let mut residual: f64 = 0.0;
    for i in 0..=16 {
        let x = 0.05 * i as f64;
        let exact = g_real(kernel, x)?;
        let mut series = Matrix::zeros(m);
        let mut xp = 1.0;
        for c in &coeffs {
            series.add_scaled(c, xp);
            xp *= x;
        }
        residual = residual.max(series.sub(&exact).max_abs() / scale);
    }
    if residual > 1e-8 {
        return Ok(None);
    }
    Ok(Some(MinfSeries { degree: n, coefficients: coeffs[..=n].to_vec(), route: SeriesRoute::Cauchy, residual }))
}

/// Monomial coefficients of `T_0, …, T_n` as rows, exact in floating point for `n ≤ 30`.
fn chebyshev_monomials(n: usize) -> Vec<Vec<f64>> {
    let mut t = vec![vec![0.0; n + 1]; n + 1];
    t[0][0] = 1.0;
    if n >= 1 {
        t[1][1] = 1.0;
    }
    for k in 2..=n {
        for p in 0..=n {
            let shifted = if p >= 1 { 2.0 * t[k - 1][p - 1] } else { 0.0 };
            t[k][p] = shifted - t[k - 2][p];
        }
    }
    t
}

fn chebyshev_coeffs(kernel: &MatrixKernel, n: usize) -> Result<MinfSeries> {
    let m = kernel.dim();
    if n == 0 {
        let c = g_real(kernel, 1.0)?;
        return Ok(MinfSeries { degree: 0, coefficients: vec![c], route: SeriesRoute::Chebyshev, residual: 0.0 });
    }
    let nf = n as f64;
    let values: Vec<Matrix> =
        (0..=n).map(|k| g_real(kernel, libm::cos(k as f64 * PI / nf).abs())).collect::<Result<_>>()?;
    let mut cheb = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let mut a = Matrix::zeros(m);
        for (k, v) in values.iter().enumerate() {
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            a.add_scaled(v, w * libm::cos(j as f64 * k as f64 * PI / nf));
        }
        let norm = if j == 0 || j == n { 1.0 / nf } else { 2.0 / nf };
        cheb.push(a.scaled(norm));
    }
    let t = chebyshev_monomials(n);
    let mut coefficients = vec![Matrix::zeros(m); n + 1];
    for (j, a) in cheb.iter().enumerate() {
        for (p, c) in coefficients.iter_mut().enumerate() {
            if t[j][p] != 0.0 {
                c.add_scaled(a, t[j][p]);
            }
        }
    }
    Ok(MinfSeries { degree: n, coefficients, route: SeriesRoute::Chebyshev, residual: 0.0 })
}

/// Validity on all compact two-point homogeneous spaces at once.
///
/// Valid iff every odd-degree coefficient vanishes and every even-degree one
/// is PSD, both within `tol·max(s, 1)` with `s` the largest coefficient magnitude.
pub fn validate_minf(kernel: &MatrixKernel, n: usize, tol: f64) -> Result<ValidityReport> {
    let series = match minf_series_coeffs(kernel, n) {
        Ok(s) => s,
        Err(e @ Error::NonFinite(_)) => return Ok(ValidityReport::inconclusive("M_infinity".into(), n, tol, &e)),
        Err(e) => return Err(e),
    };
    let scale = series.coefficients.iter().fold(0.0_f64, |a, c| a.max(c.max_abs()));
    let bound = tol * scale.max(1.0);
    let mut trace = Vec::with_capacity(n + 1);
    let mut first_failure = None;
    let mut recovered_b = Vec::with_capacity(n / 2 + 1);
    for (k, c) in series.coefficients.iter().enumerate() {
        let (min, abs) = eigen_extremes(c);
        let max_abs_entry = c.max_abs();
        let pass = if k % 2 == 1 { max_abs_entry <= bound } else { min >= -bound };
        if k % 2 == 0 {
            recovered_b.push(c.scaled(libm::pow(0.5, (k / 2) as f64)));
        }
        if !pass && first_failure.is_none() {
            first_failure = Some(Failure { index: k, min_eigenvalue: min });
        }
        trace.push(TraceEntry { index: k, min_eigenvalue: min, max_abs_eigenvalue: abs, max_abs_entry, pass });
    }
    let verdict = if first_failure.is_some() { Verdict::Invalid } else { Verdict::Valid };
    let label = match verdict {
        Verdict::Valid => format!("valid up to degree {n}"),
        _ => format!("invalid at degree {}", first_failure.map_or(0, |f| f.index)),
    };
    Ok(ValidityReport {
        verdict,
        space: "M_infinity".into(),
        n_max: n,
        tol,
        first_failure,
        tail_warning: false,
        tail_ratio: 0.0,
        trace,
        label,
        recovered_b,
        route: Some(series.route),
    })
}

/// `(K⁺, K⁻)` with `K⁺(ρ) = C(ρ/2) + C(π − ρ/2)` and `K⁻(ρ) = (C(ρ/2) − C(π − ρ/2))·cos(ρ/2)`.
pub fn projective_constructions(kernel: &MatrixKernel) -> (MatrixKernel, MatrixKernel) {
    projective_pair(kernel)
}

/// One implication "valid on source ⇒ valid on target".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferRow {
    /// Source space.
    pub source: Space,
    /// Target space.
    pub target: Space,
    /// Verdict on the source.
    pub source_verdict: Verdict,
    /// Verdict on the target.
    pub target_verdict: Verdict,
    /// `source valid ⇒ target valid`.
    pub holds: bool,
}

/// All tested implications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    /// One row per implication.
    pub rows: Vec<TransferRow>,
    /// Every implication holds.
    pub all_hold: bool,
}

/// The implication pairs checked by [`transfer_implications`].
pub fn transfer_pairs() -> Vec<(Space, Space)> {
    let s = |f: fn(usize) -> Result<Space>, d| f(d).expect("fixed test dimension");
    vec![
        (s(Space::real_projective, 3), s(Space::sphere, 3)),
        (s(Space::real_projective, 4), s(Space::sphere, 3)),
        (s(Space::complex_projective, 4), s(Space::sphere, 4)),
        (s(Space::complex_projective, 8), s(Space::quaternion_projective, 8)),
        (s(Space::quaternion_projective, 8), s(Space::sphere, 8)),
    ]
}

/// Validate both sides of each transfer pair independently and record whether
/// the implication holds.
pub fn transfer_implications(kernel: &MatrixKernel, n_max: usize, tol: f64) -> Result<TransferMatrix> {
    let mut rows = Vec::new();
    for (source, target) in transfer_pairs() {
        let sv = validate_on_space(kernel, source, n_max, tol)?.verdict;
        let tv = validate_on_space(kernel, target, n_max, tol)?.verdict;
        let holds = sv != Verdict::Valid || tv == Verdict::Valid;
        rows.push(TransferRow { source, target, source_verdict: sv, target_verdict: tv, holds });
    }
    let all_hold = rows.iter().all(|r| r.holds);
    Ok(TransferMatrix { rows, all_hold })
}

/// Spaces used to cross-check validity on all spaces against per-space tests.
pub fn test_spaces() -> Vec<Space> {
    ["S:1", "S:2", "S:5", "PR:3", "PC:4", "PH:8", "CAY:16"]
        .iter()
        .map(|s| s.parse().expect("fixed test space"))
        .collect()
}

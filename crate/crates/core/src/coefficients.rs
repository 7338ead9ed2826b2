//! Jacobi coefficient matrices `H_n` of a kernel, the `H ↔ B` conversion,
//! series reconstruction, and the contiguous coefficient identities.
//!
//! `H_n = ∫₀^π C(ϑ) P_n^{(α,β)}(cos ϑ) sin^{2α+1}(ϑ/2) cos^{2β+1}(ϑ/2) dϑ`, and
//! `C(ϑ) = Σ B_n P_n^{(α,β)}(cos ϑ)` with `B_n = conversion_factor(n)·H_n`.
//!
//! The integral is taken in the angle itself: `ϑ = π(1+y)/2` and a Gauss–Jacobi
//! rule in `y` with exponents `(2β+1, 2α+1)` absorbs the endpoint behaviour of the
//! weight. Kernels smooth in `ϑ` then converge geometrically, which a rule in
//! `u = cos ϑ` cannot offer because `arccos` is not smooth at `u = ±1`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::check_jacobi_params;
use crate::kernels::MatrixKernel;
use crate::linalg::{sym_eigen, Matrix};
use crate::special::{contiguous_coeffs, conversion_factor, gauss_jacobi_rule, jacobi_fill, Ladder};
use crate::{Error, Result};

/// Coefficient matrices of a kernel on a fixed `(α, β)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSequence {
    /// Jacobi `α`.
    pub alpha: f64,
    /// Jacobi `β`.
    pub beta: f64,
    /// Matrix size.
    pub m: usize,
    /// `H_0, …, H_{n_max}`.
    pub h: Vec<Matrix>,
    /// `B_0, …, B_{n_max}`.
    pub b: Vec<Matrix>,
    /// Number of quadrature nodes used.
    pub quad_order: usize,
}

impl CoefficientSequence {
    /// Largest index.
    pub fn n_max(&self) -> usize {
        self.h.len().saturating_sub(1)
    }

    /// Sequence from given `B_n`.
    pub fn from_b(alpha: f64, beta: f64, b: Vec<Matrix>) -> Result<Self> {
        check_jacobi_params(alpha, beta)?;
        let m = b.first().map(Matrix::dim).ok_or_else(|| Error::Invalid("empty sequence".into()))?;
        let h = b.iter().enumerate().map(|(n, bn)| b_to_h(bn, alpha, beta, n)).collect();
        Ok(Self { alpha, beta, m, h, b, quad_order: 0 })
    }
}

/// Default quadrature order for coefficients up to `n_max`.
pub fn default_quad_order(n_max: usize) -> usize {
    (2 * n_max + 16).max(64)
}

/// Nodes `ϑ_i` and weights `W_i` with
/// `Σ W_i f(ϑ_i) ≈ ∫₀^π f(ϑ) sin^{2α+1}(ϑ/2) cos^{2β+1}(ϑ/2) dϑ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleRule {
    /// Angles in `(0, π)`.
    pub theta: Vec<f64>,
    /// Positive weights.
    pub weights: Vec<f64>,
}

/// Angle-variable Gauss rule for the weight of the `(α, β)` expansion.
pub fn angle_rule(order: usize, alpha: f64, beta: f64) -> Result<AngleRule> {
    let (ea, eb) = (2.0 * alpha + 1.0, 2.0 * beta + 1.0);
    let rule = gauss_jacobi_rule(order, eb, ea)?;
    let mut theta = Vec::with_capacity(order);
    let mut weights = Vec::with_capacity(order);
    for (&y, &w) in rule.nodes.iter().zip(&rule.weights) {
        let (up, down) = (1.0 + y, 1.0 - y);
        let s = libm::sin(0.25 * PI * up) / up;
        let c = libm::sin(0.25 * PI * down) / down;
        theta.push(0.5 * PI * up);
        weights.push(0.5 * PI * w * libm::pow(s, ea) * libm::pow(c, eb));
    }
    Ok(AngleRule { theta, weights })
}

/// `H_0, …, H_{n_max}` and the matching `B_n`.
///
/// `quad_order = None` selects [`default_quad_order`].
pub fn compute_h(
    kernel: &MatrixKernel,
    alpha: f64,
    beta: f64,
    n_max: usize,
    quad_order: Option<usize>,
) -> Result<CoefficientSequence> {
    check_jacobi_params(alpha, beta)?;
    let order = quad_order.unwrap_or_else(|| default_quad_order(n_max));
    if order < n_max {
        return Err(Error::Aliasing { quad_order: order, n_max });
    }
    let rule = angle_rule(order, alpha, beta)?;
    let m = kernel.dim();
    let mut h = vec![Matrix::zeros(m); n_max + 1];
    let mut p = vec![0.0; n_max + 1];
    for (&t, &w) in rule.theta.iter().zip(&rule.weights) {
        let c = kernel.eval_unchecked(t);
        if !c.is_finite() {
            return Err(Error::NonFinite(t));
        }
        jacobi_fill(alpha, beta, libm::cos(t), &mut p);
        for (hn, pn) in h.iter_mut().zip(&p) {
            hn.add_scaled(&c, w * pn);
        }
    }
    let h: Vec<Matrix> = h.iter().map(Matrix::symmetrized).collect();
    let b = h.iter().enumerate().map(|(n, hn)| h_to_b(hn, alpha, beta, n)).collect();
    Ok(CoefficientSequence { alpha, beta, m, h, b, quad_order: order })
}

/// `B_n = n!(2n+α+β+1)Γ(n+α+β+1)/(Γ(n+α+1)Γ(n+β+1))·H_n`.
pub fn h_to_b(h: &Matrix, alpha: f64, beta: f64, n: usize) -> Matrix {
    h.scaled(conversion_factor(n, alpha, beta))
}

/// Inverse of [`h_to_b`].
pub fn b_to_h(b: &Matrix, alpha: f64, beta: f64, n: usize) -> Matrix {
    b.scaled(1.0 / conversion_factor(n, alpha, beta))
}

/// Truncated series `Σ_{n ≤ n_max} B_n P_n^{(α,β)}(cos ϑ)`.
pub fn reconstruct_kernel(seq: &CoefficientSequence) -> Result<MatrixKernel> {
    MatrixKernel::jacobi_series(seq.alpha, seq.beta, &seq.b)
}

/// Outcome of an eigenvalue-based PSD test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsdVerdict {
    /// `min_eigenvalue ≥ −tol·max(scale, 1)`.
    pub is_psd: bool,
    /// Smallest eigenvalue.
    pub min_eigenvalue: f64,
    /// Largest absolute eigenvalue.
    pub scale: f64,
}

/// Nonnegative-definiteness test with tolerance `tol·max(scale, 1)`.
pub fn is_psd(m: &Matrix, tol: f64) -> Result<PsdVerdict> {
    let asym = m.asymmetry();
    if asym > 1e-10 * m.max_abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NotSymmetric(asym));
    }
    if !m.is_finite() {
        return Err(Error::Invalid("matrix has non-finite entries".into()));
    }
    let (min_eigenvalue, scale) = eigen_extremes(m);
    Ok(PsdVerdict { is_psd: min_eigenvalue >= -tol * scale.max(1.0), min_eigenvalue, scale })
}

/// Smallest eigenvalue and largest absolute eigenvalue.
pub(crate) fn eigen_extremes(m: &Matrix) -> (f64, f64) {
    if m.dim() == 1 {
        let v = m.get(0, 0);
        return (v, v.abs());
    }
    let e = sym_eigen(m);
    let min = e.values[0];
    let scale = e.values.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
    (min, scale)
}

/// Partial sums of `n^{α+1}‖H_n‖` and a non-decay flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailDiagnostic {
    /// `S_N = Σ_{n ≤ N} n^{α+1}‖H_n‖`, spectral norm.
    pub partial_sums: Vec<f64>,
    /// Last-quarter increment over first-quarter increment.
    pub ratio: f64,
    /// `ratio > 0.5`.
    pub warning: bool,
}

/// Convergence diagnostic for `Σ n^{α+1} H_n`.
pub fn tail_diagnostic(seq: &CoefficientSequence) -> TailDiagnostic {
    let norms: Vec<f64> = seq.h.iter().map(|h| eigen_extremes(h).1).collect();
    let global = norms.iter().fold(0.0_f64, |a, &b| a.max(b));
    let terms: Vec<f64> = norms
        .iter()
        .enumerate()
        .map(|(n, &v)| if v <= 1e-13 * global { 0.0 } else { libm::pow(n as f64, seq.alpha + 1.0) * v })
        .collect();
    let mut partial_sums = Vec::with_capacity(terms.len());
    let mut acc = 0.0;
    for t in &terms {
        acc += t;
        partial_sums.push(acc);
    }
    let len = terms.len();
    let q = (len / 4).max(1);
    let first: f64 = terms[..q.min(len)].iter().sum();
    let last: f64 = terms[len.saturating_sub(q)..].iter().sum();
    let ratio = if first > 0.0 {
        last / first
    } else if last > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    TailDiagnostic { partial_sums, ratio, warning: ratio > 0.5 }
}

/// The four contiguous coefficient identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Identity {
    /// `H^{(α,β)}_n = [(n+α)H^{(α−1,β)}_n − (n+1)H^{(α−1,β)}_{n+1}]/(2n+α+β+1)`, needs `α > 0`.
    AlphaStep,
    /// `H^{(α,β)}_n = [(n+β)H^{(α,β−1)}_n + (n+1)H^{(α,β−1)}_{n+1}]/(2n+α+β+1)`, needs `β > 0`.
    BetaStep,
    /// `H^{(α,β)}_n = Σ_j (−1)^j a_j^{(0)}(n) H^{(0,β)}_{n+j}`, needs integer `α ≥ 1`.
    IntegerLadder,
    /// `H^{(α,β)}_n = Σ_j (−1)^j a_j^{(−1/2)}(n) H^{(−1/2,β)}_{n+j}`, needs half-integer `α ≥ 1/2`.
    HalfLadder,
}

impl Identity {
    /// All identities.
    pub const ALL: [Identity; 4] =
        [Identity::AlphaStep, Identity::BetaStep, Identity::IntegerLadder, Identity::HalfLadder];

    fn applies(self, alpha: f64, beta: f64) -> bool {
        let int = |v: f64| libm::floor(v) == v;
        match self {
            Identity::AlphaStep => alpha > 0.0,
            Identity::BetaStep => beta > 0.0,
            Identity::IntegerLadder => alpha >= 1.0 && int(alpha),
            Identity::HalfLadder => alpha >= 0.5 && int(alpha + 0.5),
        }
    }

    /// Lower parameters and the number of extra indices needed.
    fn lower(self, alpha: f64, beta: f64) -> ((f64, f64), usize) {
        match self {
            Identity::AlphaStep => ((alpha - 1.0, beta), 1),
            Identity::BetaStep => ((alpha, beta - 1.0), 1),
            Identity::IntegerLadder => ((0.0, beta), alpha as usize),
            Identity::HalfLadder => ((-0.5, beta), (alpha + 0.5) as usize),
        }
    }
}

/// Residual of one identity over `n = 0..=n_check`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    /// Which identity.
    pub identity: Identity,
    /// Target `α`.
    pub alpha: f64,
    /// Target `β`.
    pub beta: f64,
    /// Largest entrywise `|lhs − rhs|`.
    pub residual: f64,
    /// Largest entrywise `|H_n^{(α,β)}|`.
    pub scale: f64,
    /// Highest index checked.
    pub n_check: usize,
}

impl IdentityResidual {
    /// `residual ≤ tol·scale`, with an absolute floor for the zero kernel.
    pub fn passes(&self, tol: f64) -> bool {
        self.residual <= tol * self.scale.max(f64::MIN_POSITIVE) || self.residual == 0.0
    }
}

/// Check one identity by computing both sides with [`compute_h`].
pub fn identity_check(
    kernel: &MatrixKernel,
    identity: Identity,
    alpha: f64,
    beta: f64,
    n_check: usize,
) -> Result<IdentityResidual> {
    check_jacobi_params(alpha, beta)?;
    if !identity.applies(alpha, beta) {
        return Err(Error::NotApplicable(format!("{identity:?} at (alpha, beta) = ({alpha}, {beta})")));
    }
    let ((la, lb), extra) = identity.lower(alpha, beta);
    let top = compute_h(kernel, alpha, beta, n_check, None)?;
    let low = compute_h(kernel, la, lb, n_check + extra, Some(default_quad_order(n_check + extra)))?;
    let mut residual: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for n in 0..=n_check {
        let nf = n as f64;
        let denom = 2.0 * nf + alpha + beta + 1.0;
        let rhs = match identity {
            Identity::AlphaStep => low.h[n].scaled((nf + alpha) / denom).sub(&low.h[n + 1].scaled((nf + 1.0) / denom)),
            Identity::BetaStep => low.h[n].scaled((nf + beta) / denom).add(&low.h[n + 1].scaled((nf + 1.0) / denom)),
            Identity::IntegerLadder | Identity::HalfLadder => {
                let ladder = if identity == Identity::IntegerLadder { Ladder::Integer } else { Ladder::Half };
                let mut acc = Matrix::zeros(kernel.dim());
                for j in 0..=extra {
                    let a = contiguous_coeffs(ladder, alpha, beta, n, j)?;
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    acc.add_scaled(&low.h[n + j], sign * a);
                }
                acc
            }
        };
        residual = residual.max(top.h[n].sub(&rhs).max_abs());
        scale = scale.max(top.h[n].max_abs());
    }
    Ok(IdentityResidual { identity, alpha, beta, residual, scale, n_check })
}

/// Every identity applicable at `(α, β)`, checked for `n ≤ 20`.
pub fn identity_checks(kernel: &MatrixKernel, alpha: f64, beta: f64) -> Result<Vec<IdentityResidual>> {
    let out: Vec<IdentityResidual> = Identity::ALL
        .iter()
        .filter(|id| id.applies(alpha, beta))
        .map(|&id| identity_check(kernel, id, alpha, beta, 20))
        .collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(Error::NotApplicable(format!("no identity at (alpha, beta) = ({alpha}, {beta})")));
    }
    Ok(out)
}

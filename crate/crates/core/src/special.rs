//! Jacobi polynomials, Gauss–Jacobi quadrature, half-integer Bessel functions
//! and the coefficients of the contiguous Jacobi identities.
//!
//! Gamma-function ratios are formed from log-gamma differences so that degrees
//! in the thousands do not overflow.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::check_jacobi_params;
use crate::linalg::tridiag_eigen_first;
use crate::{Error, Result};

/// `ln Γ(x)` for `x > 0`.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Euler Beta function `B(a, b)` for positive arguments.
pub fn beta_fn(a: f64, b: f64) -> f64 {
    libm::exp(ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b))
}

/// `ln[(2n+a+b+1)·Γ(n+a+b+1)]` through `Γ(n+a+b+2) + n·Γ(n+a+b+1)`, finite at
/// `n = 0`, `a + b = −1`.
fn ln_two_n_gamma(n: usize, a: f64, b: f64) -> f64 {
    let nf = n as f64;
    let s = nf + a + b + 1.0;
    let mut v = ln_gamma(s + 1.0);
    if n > 0 {
        v += libm::log1p(nf / s);
    }
    v
}

/// Fill `out[k] = P_k^{(α,β)}(x)` for `k < out.len()` by the three-term recurrence.
///
/// Parameters are not checked. Works for any field type, including complex `x`.
pub fn jacobi_fill<T>(alpha: f64, beta: f64, x: T, out: &mut [T])
where
    T: Copy + From<f64> + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Mul<f64, Output = T>,
{
    if out.is_empty() {
        return;
    }
    let (a, b) = (alpha, beta);
    out[0] = T::from(1.0);
    if out.len() == 1 {
        return;
    }
    out[1] = x * (0.5 * (a + b + 2.0)) + T::from(0.5 * (a - b));
    for n in 2..out.len() {
        let nf = n as f64;
        let s = 2.0 * nf + a + b;
        let c = 2.0 * nf * (nf + a + b) * (s - 2.0);
        let ca = (s - 1.0) * s * (s - 2.0) / c;
        let cb = (s - 1.0) * (a * a - b * b) / c;
        let cc = 2.0 * (nf + a - 1.0) * (nf + b - 1.0) * s / c;
        out[n] = (x * ca + T::from(cb)) * out[n - 1] - out[n - 2] * cc;
    }
}

/// `P_k^{(α,β)}(x)` for `k = 0..=n_max`.
pub fn jacobi_sequence(n_max: usize, alpha: f64, beta: f64, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    jacobi_fill(alpha, beta, x, &mut out);
    out
}

/// Jacobi polynomial `P_n^{(α,β)}(x)` by the three-term recurrence.
pub fn jacobi_eval(n: usize, alpha: f64, beta: f64, x: f64) -> Result<f64> {
    check_jacobi_params(alpha, beta)?;
    if !(x.is_finite() && (-1.0..=1.0).contains(&x)) {
        return Err(Error::OutOfRange { name: "x", value: x });
    }
    Ok(jacobi_sequence(n, alpha, beta, x)[n])
}

/// `P_n^{(α,β)}(1) = Γ(n+α+1)/(n!·Γ(α+1))`.
pub fn jacobi_at_one(n: usize, alpha: f64, beta: f64) -> Result<f64> {
    check_jacobi_params(alpha, beta)?;
    Ok(jacobi_at_one_unchecked(n, alpha))
}

pub(crate) fn jacobi_at_one_unchecked(n: usize, alpha: f64) -> f64 {
    let nf = n as f64;
    libm::exp(ln_gamma(nf + alpha + 1.0) - ln_gamma(nf + 1.0) - ln_gamma(alpha + 1.0))
}

/// Squared norm `∫ P_n² (1−x)^α (1+x)^β dx`.
pub fn jacobi_norm_sq(n: usize, alpha: f64, beta: f64) -> f64 {
    let nf = n as f64;
    let (a, b) = (alpha, beta);
    libm::exp(
        (a + b + 1.0) * core::f64::consts::LN_2 + ln_gamma(nf + a + 1.0) + ln_gamma(nf + b + 1.0)
            - ln_gamma(nf + 1.0)
            - ln_two_n_gamma(n, a, b),
    )
}

/// Factor `n!(2n+α+β+1)Γ(n+α+β+1)/(Γ(n+α+1)Γ(n+β+1))` turning `H_n` into `B_n`.
pub fn conversion_factor(n: usize, alpha: f64, beta: f64) -> f64 {
    let nf = n as f64;
    libm::exp(
        ln_gamma(nf + 1.0) + ln_two_n_gamma(n, alpha, beta)
            - ln_gamma(nf + alpha + 1.0)
            - ln_gamma(nf + beta + 1.0),
    )
}

/// Gauss–Jacobi rule for the weight `(1−x)^α (1+x)^β` on `[−1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    /// Number of nodes.
    pub order: usize,
    /// Exponent of `1 − x`.
    pub alpha: f64,
    /// Exponent of `1 + x`.
    pub beta: f64,
    /// Nodes, strictly increasing.
    pub nodes: Vec<f64>,
    /// Positive weights.
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// `Σ w_i f(x_i)`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Gauss–Jacobi nodes and weights.
///
/// Initial nodes come from the Golub–Welsch eigenproblem; each node is then
/// refined by Newton steps on `P_order` and the weights are taken from the
/// derivative formula, which keeps tiny end weights accurate.
pub fn gauss_jacobi_rule(order: usize, alpha: f64, beta: f64) -> Result<QuadratureRule> {
    check_jacobi_params(alpha, beta)?;
    if order == 0 {
        return Err(Error::OutOfRange { name: "order", value: 0.0 });
    }
    let (a, b) = (alpha, beta);
    let mut diag = Vec::with_capacity(order);
    let mut off = Vec::with_capacity(order.saturating_sub(1));
    for k in 0..order {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        diag.push(if k == 0 { (b - a) / (a + b + 2.0) } else { (b * b - a * a) / (s * (s + 2.0)) });
    }
    for k in 1..order {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let b2 = if k == 1 {
            4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b) * (2.0 + a + b) * (3.0 + a + b))
        } else {
            4.0 * kf * (kf + a) * (kf + b) * (kf + a + b) / (s * s * (s + 1.0) * (s - 1.0))
        };
        off.push(libm::sqrt(b2));
    }
    let (mut nodes, first) = tridiag_eigen_first(&diag, &off)?;
    let mu0 = libm::exp((a + b + 1.0) * core::f64::consts::LN_2) * beta_fn(a + 1.0, b + 1.0);
    let gw: Vec<f64> = first.iter().map(|v| mu0 * v * v).collect();

    let nf = order as f64;
    let ln_c = (a + b + 1.0) * core::f64::consts::LN_2 + ln_gamma(nf + a + 1.0)
        + ln_gamma(nf + b + 1.0)
        - ln_gamma(nf + a + b + 1.0)
        - ln_gamma(nf + 1.0);
    let dscale = 0.5 * (nf + a + b + 1.0);
    let mut weights = Vec::with_capacity(order);
    let mut pn = vec![0.0; order + 1];
    let mut dn = vec![0.0; order];
    for (i, x) in nodes.iter_mut().enumerate() {
        let mut deriv = 0.0;
        for _ in 0..3 {
            jacobi_fill(a, b, *x, &mut pn);
            jacobi_fill(a + 1.0, b + 1.0, *x, &mut dn);
            deriv = dscale * dn[order - 1];
            if deriv == 0.0 || !deriv.is_finite() {
                break;
            }
            let step = pn[order] / deriv;
            let nx = *x - step;
            if !(nx > -1.0 && nx < 1.0) {
                break;
            }
            *x = nx;
            if step.abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-3) {
                jacobi_fill(a + 1.0, b + 1.0, *x, &mut dn);
                deriv = dscale * dn[order - 1];
                break;
            }
        }
        let denom = (1.0 - *x * *x) * deriv * deriv;
        let w = libm::exp(ln_c) / denom;
        weights.push(if w.is_finite() && w > 0.0 { w } else { gw[i] });
    }
    Ok(QuadratureRule { order, alpha, beta, nodes, weights })
}

/// Gauss–Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(order: usize) -> Result<QuadratureRule> {
    gauss_jacobi_rule(order, 0.0, 0.0)
}

fn half_integer_index(order: f64) -> Option<i64> {
    let k = order - 0.5;
    if order.is_finite() && order >= -0.5 && libm::floor(k) == k {
        Some(k as i64)
    } else {
        None
    }
}

/// Power series for `J_ν(z)/z^ν = 2^{−ν} Σ (−z²/4)^k / (k! Γ(k+ν+1))`.
fn bessel_scaled_series(nu: f64, z: f64) -> f64 {
    let q = -0.25 * z * z;
    let mut term = libm::exp(-nu * core::f64::consts::LN_2 - ln_gamma(nu + 1.0));
    let mut sum = term;
    for k in 1..1000 {
        let kf = k as f64;
        term *= q / (kf * (kf + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Spherical Bessel `j_k(x)` for `k ≥ −1` by upward recurrence, `x ≥ k`.
fn spherical_upward(k: i64, x: f64) -> f64 {
    let (s, c) = (libm::sin(x), libm::cos(x));
    let jm1 = c / x;
    if k == -1 {
        return jm1;
    }
    let mut prev = jm1;
    let mut cur = s / x;
    for l in 0..k {
        let next = (2 * l + 1) as f64 / x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Bessel `J_ν(x)` for half-integer `ν ≥ −1/2` and `x > 0`.
///
/// Uses the spherical-Bessel closed forms with upward recurrence when
/// `x ≥ ν`, and the power series below that.
pub fn bessel_j_half_integer(order: f64, x: f64) -> Result<f64> {
    let k = half_integer_index(order).ok_or(Error::OutOfRange { name: "order", value: order })?;
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::OutOfRange { name: "x", value: x });
    }
    Ok(bessel_j_half_unchecked(k, order, x))
}

fn bessel_j_half_unchecked(k: i64, nu: f64, x: f64) -> f64 {
    if x >= nu.max(1.0) {
        libm::sqrt(2.0 * x / PI) * spherical_upward(k, x)
    } else {
        bessel_scaled_series(nu, x) * libm::pow(x, nu)
    }
}

/// `J_ν(z)/z^ν` for half-integer `ν ≥ −1/2`, continuous at `z = 0` where it
/// equals `2^{−ν}/Γ(ν+1)`.
pub fn bessel_j_scaled(order: f64, z: f64) -> Result<f64> {
    let k = half_integer_index(order).ok_or(Error::OutOfRange { name: "order", value: order })?;
    if !(z.is_finite() && z >= 0.0) {
        return Err(Error::OutOfRange { name: "z", value: z });
    }
    Ok(bessel_scaled_unchecked(k, order, z))
}

#[inline]
pub(crate) fn bessel_scaled_unchecked(k: i64, nu: f64, z: f64) -> f64 {
    if z < nu.max(1.0) {
        bessel_scaled_series(nu, z)
    } else {
        libm::sqrt(2.0 * z / PI) * spherical_upward(k, z) / libm::pow(z, nu)
    }
}

pub(crate) fn half_index_checked(order: f64) -> Result<i64> {
    half_integer_index(order).ok_or(Error::OutOfRange { name: "alpha", value: order })
}

/// `Ω_d(ω) = 2^{d/2−1}Γ(d/2)·ω^{1−d/2}·J_{d/2−1}(ω)`, equal to 1 at `ω = 0`.
pub fn omega_d(d: usize, omega: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::OutOfRange { name: "d", value: 0.0 });
    }
    if !(omega.is_finite() && omega >= 0.0) {
        return Err(Error::OutOfRange { name: "omega", value: omega });
    }
    let df = d as f64;
    if omega < 1e-6 {
        let w2 = omega * omega;
        return Ok(1.0 - w2 / (2.0 * df) + w2 * w2 / (8.0 * df * (df + 2.0)));
    }
    let nu = 0.5 * df - 1.0;
    let norm = libm::exp(ln_gamma(nu + 1.0) + nu * core::f64::consts::LN_2);
    if d % 2 == 1 {
        Ok(norm * bessel_scaled_unchecked((d as i64 - 3) / 2, nu, omega))
    } else {
        let n = (d / 2 - 1) as i32;
        Ok(norm * libm::jn(n, omega) / libm::pow(omega, nu))
    }
}

/// Which contiguous ladder a coefficient belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ladder {
    /// `((1−x)/2)^α P_n^{(α,β)} = Σ (−1)^j a_j^{(0)}(n) P_{n+j}^{(0,β)}` for integer `α`.
    Integer,
    /// `((1−x)/2)^{α+1/2} P_n^{(α,β)} = Σ (−1)^j a_j^{(−1/2)}(n) P_{n+j}^{(−1/2,β)}` for half-integer `α`.
    Half,
}

/// `ln[(x+j)Γ(x)]` as `ln Γ(x+1) + ln(1 + j/x)`, finite at `x = 0` when `j = 0`.
fn ln_shifted_gamma(x: f64, j: f64) -> f64 {
    let mut v = ln_gamma(x + 1.0);
    if j > 0.0 {
        v += libm::log1p(j / x);
    }
    v
}

/// Coefficient `a_j(n)` of the integer or half-integer contiguous ladder.
pub fn contiguous_coeffs(kind: Ladder, alpha: f64, beta: f64, n: usize, j: usize) -> Result<f64> {
    check_jacobi_params(alpha, beta)?;
    let (nf, jf) = (n as f64, j as f64);
    let lg = ln_gamma;
    match kind {
        Ladder::Integer => {
            if alpha < 0.0 || libm::floor(alpha) != alpha {
                return Err(Error::OutOfRange { name: "alpha", value: alpha });
            }
            if jf > alpha {
                return Err(Error::OutOfRange { name: "j", value: jf });
            }
            let x = 2.0 * nf + jf + beta + 1.0;
            Ok(libm::exp(
                lg(alpha + 1.0) + lg(nf + alpha + 1.0) + ln_shifted_gamma(x, jf)
                    - lg(jf + 1.0)
                    - lg(alpha - jf + 1.0)
                    - lg(nf + 1.0)
                    - lg(2.0 * nf + jf + alpha + beta + 2.0),
            ))
        }
        Ladder::Half => {
            let top = alpha + 0.5;
            if top < 0.0 || libm::floor(top) != top {
                return Err(Error::OutOfRange { name: "alpha", value: alpha });
            }
            if jf > top {
                return Err(Error::OutOfRange { name: "j", value: jf });
            }
            let x = 2.0 * nf + jf + beta + 0.5;
            Ok(libm::exp(
                lg(alpha + 1.5) + lg(nf + jf + 1.0) + lg(nf + alpha + 1.0) + ln_shifted_gamma(x, jf)
                    - lg(jf + 1.0)
                    - lg(alpha - jf + 1.5)
                    - lg(nf + 1.0)
                    - lg(nf + jf + 0.5)
                    - lg(2.0 * nf + jf + alpha + beta + 2.0),
            ))
        }
    }
}

//! Euclidean side of the transfer: Bessel-integral positivity of compactly
//! supported kernels, transfer of valid kernels to `S^d` and `P^d(R)` for odd
//! `d`, and the `ξ_n` bracket identity with its divided-difference form.
//!
//! All transforms use the normalization
//! `g_(α)(ω) = (√π/2^{α+1})·∫₀^π g(x)·(J_α(ωx)/ω^α)·x^{α+1} dx`,
//! a positive multiple of `∫ J_α(ωx) g(x) x^{α+1} dx` for `ω > 0`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::kernels::{MatrixKernel, Support};
use crate::special::{bessel_scaled_unchecked, gauss_legendre, half_index_checked, jacobi_fill, ln_gamma};
use crate::spaces::Space;
use crate::validity::{validate_on_space, ValidityReport};
use crate::{Error, Result};

const PANEL_ORDER: usize = 64;
const XI_SCAN_POINTS: usize = 512;

/// Default `ω` upper end for dimension `d`.
pub fn default_omega_max(d: usize) -> f64 {
    40.0 * d as f64
}

/// Default number of `ω` grid points.
pub const DEFAULT_OMEGA_POINTS: usize = 2048;

/// Composite Gauss–Legendre rule on `[0, len]`.
struct PanelRule {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl PanelRule {
    fn new(len: f64, panels: usize) -> Result<Self> {
        let base = gauss_legendre(PANEL_ORDER)?;
        let h = len / panels as f64;
        let mut x = Vec::with_capacity(panels * PANEL_ORDER);
        let mut w = Vec::with_capacity(panels * PANEL_ORDER);
        for p in 0..panels {
            let mid = h * (p as f64 + 0.5);
            for (&t, &wt) in base.nodes.iter().zip(&base.weights) {
                x.push(mid + 0.5 * h * t);
                w.push(0.5 * h * wt);
            }
        }
        Ok(Self { x, w })
    }
}

/// Precomputed `g(x_i)·x_i^{2α+1}·w_i` for repeated transforms.
struct Transformer {
    k: i64,
    alpha: f64,
    x: Vec<f64>,
    gw: Vec<f64>,
    norm: f64,
}

impl Transformer {
    fn new(rule: &PanelRule, alpha: f64, g: impl Fn(f64) -> f64) -> Result<Self> {
        let gx: Vec<f64> = rule.x.iter().map(|&x| g(x)).collect();
        Self::from_values(rule, alpha, &gx)
    }

    fn from_values(rule: &PanelRule, alpha: f64, gx: &[f64]) -> Result<Self> {
        let k = half_index_checked(alpha)?;
        let p = 2.0 * alpha + 1.0;
        let gw = rule.x.iter().zip(&rule.w).zip(gx).map(|((&x, &w), &g)| g * libm::pow(x, p) * w).collect();
        let norm = libm::sqrt(PI) / libm::pow(2.0, alpha + 1.0);
        Ok(Self { k, alpha, x: rule.x.clone(), gw, norm })
    }

    fn at(&self, omega: f64) -> f64 {
        let mut s = 0.0;
        for (&x, &gw) in self.x.iter().zip(&self.gw) {
            s += gw * bessel_scaled_unchecked(self.k, self.alpha, omega * x);
        }
        self.norm * s
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if omega.is_finite() && omega >= 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange { name: "omega", value: omega })
    }
}

/// `g_(α)(ω)` for half-integer `α ≥ −1/2`, continuous at `ω = 0`.
pub fn g_alpha_transform(g: &dyn Fn(f64) -> f64, alpha: f64, omega: f64) -> Result<f64> {
    check_omega(omega)?;
    let panels = 8 + libm::ceil(omega) as usize;
    let t = Transformer::new(&PanelRule::new(PI, panels)?, alpha, g)?;
    Ok(t.at(omega))
}

/// Bessel transforms of a kernel along probe directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCheckResult {
    /// Euclidean dimension (odd).
    pub d: usize,
    /// Relative tolerance.
    pub tol: f64,
    /// `ω` grid on `[0, omega_max]`.
    pub omega_grid: Vec<f64>,
    /// Probe directions `a`.
    pub directions: Vec<Vec<f64>>,
    /// `transform_values[j][i]`: transform of `a_j′C a_j` at `omega_grid[i]`.
    pub transform_values: Vec<Vec<f64>>,
    /// Smallest transform value.
    pub min_value: f64,
    /// Largest transform magnitude.
    pub max_abs: f64,
    /// Some direction takes both clearly positive and clearly negative values.
    pub sign_change: bool,
    /// `min_value ≥ −tol·max_abs`.
    pub pass: bool,
}

fn probe_directions(m: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..m {
        let mut e = vec![0.0; m];
        e[i] = 1.0;
        out.push(e);
    }
    for i in 0..m {
        for j in i + 1..m {
            let mut e = vec![0.0; m];
            e[i] = 1.0;
            e[j] = 1.0;
            out.push(e);
        }
    }
    out
}

fn check_odd(d: usize) -> Result<()> {
    if d % 2 == 1 {
        Ok(())
    } else {
        Err(Error::NotApplicable(format!("dimension {d} is not odd")))
    }
}

fn support_len(kernel: &MatrixKernel) -> Result<f64> {
    match kernel.support() {
        Support::Bounded(l) if l <= PI => Ok(l),
        _ => Err(Error::NotApplicable(format!(
            "kernel `{}` is not known to vanish on [pi, inf)",
            kernel.family_name()
        ))),
    }
}

/// Transforms of `a′C(x)a` with `α = (d−2)/2` on `grid_points` values of
/// `ω ∈ [0, omega_max]`, for `a` in the canonical basis and pairwise sums.
pub fn euclid_spectral_check(
    kernel: &MatrixKernel,
    d: usize,
    omega_max: f64,
    grid_points: usize,
    tol: f64,
) -> Result<SpectralCheckResult> {
    check_odd(d)?;
    check_omega(omega_max)?;
    if grid_points < 2 {
        return Err(Error::OutOfRange { name: "grid_points", value: grid_points as f64 });
    }
    let len = support_len(kernel)?;
    let alpha = (d as f64 - 2.0) / 2.0;
    let panels = 4 + libm::ceil(omega_max * len / PI) as usize;
    let rule = PanelRule::new(len, panels)?;
    let values: Vec<_> = rule.x.iter().map(|&x| kernel.eval_unchecked(x)).collect();
    let step = omega_max / (grid_points - 1) as f64;
    let omega_grid: Vec<f64> = (0..grid_points).map(|i| i as f64 * step).collect();
    let directions = probe_directions(kernel.dim());
    let mut transform_values = Vec::with_capacity(directions.len());
    for a in &directions {
        let gx: Vec<f64> = values.iter().map(|c| c.quad_form(a)).collect();
        let t = Transformer::from_values(&rule, alpha, &gx)?;
        transform_values.push(omega_grid.iter().map(|&w| t.at(w)).collect::<Vec<_>>());
    }
    let all = transform_values.iter().flatten();
    let min_value = all.clone().fold(f64::INFINITY, |a, &v| a.min(v));
    let max_abs = all.fold(0.0_f64, |a, &v| a.max(v.abs()));
    let thr = tol * max_abs;
    let sign_change = transform_values
        .iter()
        .any(|row| row.iter().any(|&v| v > thr) && row.iter().any(|&v| v < -thr));
    Ok(SpectralCheckResult {
        d,
        tol,
        omega_grid,
        directions,
        transform_values,
        min_value,
        max_abs,
        pass: min_value >= -thr,
        sign_change,
    })
}

/// `∫₀^π g(ϑ)P_n^{(α,β)}(cos ϑ)sin^{2α+1}(ϑ/2)cos^{2β+1}(ϑ/2)dϑ` for
/// half-integer `α, β ≥ −1/2`.
pub fn jacobi_moment(g: &dyn Fn(f64) -> f64, alpha: f64, beta: f64, n: usize) -> Result<f64> {
    half_index_checked(alpha)?;
    half_index_checked(beta).map_err(|_| Error::OutOfRange { name: "beta", value: beta })?;
    let (ea, eb) = (2.0 * alpha + 1.0, 2.0 * beta + 1.0);
    let rule = PanelRule::new(PI, 8 + n)?;
    let mut p = vec![0.0; n + 1];
    let mut s = 0.0;
    for (&t, &w) in rule.x.iter().zip(&rule.w) {
        jacobi_fill(alpha, beta, libm::cos(t), &mut p);
        let weight = libm::pow(libm::sin(0.5 * t), ea) * libm::pow(libm::cos(0.5 * t), eb);
        s += w * g(t) * p[n] * weight;
    }
    Ok(s)
}

/// Outcome of the `ξ_n` search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiBracket {
    /// Index `n`.
    pub n: usize,
    /// Jacobi `α`.
    pub alpha: f64,
    /// Jacobi `β`.
    pub beta: f64,
    /// `[n, n+α+β+1]`.
    pub interval: [f64; 2],
    /// Root found in the interval, if any.
    pub xi: Option<f64>,
    /// The Jacobi moment of `g`.
    pub lhs: f64,
    /// `Γ(n+α+1)/(n!√π)`.
    pub scale_factor: f64,
    /// `|scale_factor·g_(α)(ξ) − lhs|` at the root, or the smaller endpoint
    /// value when no sign change was seen.
    pub residual: f64,
    /// No sign change in the scan.
    pub tangential: bool,
}

/// Find `ξ ∈ [n, n+α+β+1]` with `Γ(n+α+1)/(n!√π)·g_(α)(ξ)` equal to the
/// Jacobi moment of `g`, by a uniform scan and bisection.
pub fn xi_bracket_verify(g: &dyn Fn(f64) -> f64, alpha: f64, beta: f64, n: usize) -> Result<XiBracket> {
    let lhs = jacobi_moment(g, alpha, beta, n)?;
    let lo = n as f64;
    let hi = lo + alpha + beta + 1.0;
    let scale_factor = libm::exp(ln_gamma(n as f64 + alpha + 1.0) - ln_gamma(n as f64 + 1.0)) / libm::sqrt(PI);
    let t = Transformer::new(&PanelRule::new(PI, 8 + libm::ceil(hi) as usize)?, alpha, g)?;
    let f = |xi: f64| scale_factor * t.at(xi) - lhs;
    let mut out = XiBracket {
        n,
        alpha,
        beta,
        interval: [lo, hi],
        xi: None,
        lhs,
        scale_factor,
        residual: 0.0,
        tangential: false,
    };
    if hi == lo {
        out.xi = Some(lo);
        out.residual = f(lo).abs();
        return Ok(out);
    }
    let step = (hi - lo) / XI_SCAN_POINTS as f64;
    let mut a = lo;
    let mut fa = f(a);
    for i in 1..=XI_SCAN_POINTS {
        if fa == 0.0 {
            out.xi = Some(a);
            return Ok(out);
        }
        let b = if i == XI_SCAN_POINTS { hi } else { lo + i as f64 * step };
        let fb = f(b);
        if fa * fb <= 0.0 {
            let root = bisect(&f, a, b, fa);
            out.xi = Some(root);
            out.residual = f(root).abs();
            return Ok(out);
        }
        a = b;
        fa = fb;
    }
    out.tangential = true;
    out.residual = f(lo).abs().min(f(hi).abs());
    Ok(out)
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// The `(k−1)`-th divided difference of the pairs `(y_j, h(y_j))`.
pub fn divided_difference(values: &[(f64, f64)]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Invalid("divided difference needs at least one node".into()));
    }
    for (i, a) in values.iter().enumerate() {
        if values[..i].iter().any(|b| b.0 == a.0) {
            return Err(Error::Invalid(format!("repeated node {}", a.0)));
        }
    }
    let mut c: Vec<f64> = values.iter().map(|v| v.1).collect();
    let k = c.len();
    for level in 1..k {
        for i in (level..k).rev() {
            c[i] = (c[i] - c[i - 1]) / (values[i].0 - values[i - level].0);
        }
    }
    Ok(c[k - 1])
}

/// `(−1)^{α+1/2}(α+1/2)!·D[n², …, (n+α+1/2)²]h` with `h(ω) = g_(−1/2)(√ω)`.
///
/// Multiplied by `Γ(n+α+1)/(n!√π)` it equals the Jacobi moment of `g` with
/// `β = −1/2`.
pub fn divided_difference_coefficient(g: &dyn Fn(f64) -> f64, alpha: f64, n: usize) -> Result<f64> {
    let k = (half_index_checked(alpha)? + 1) as usize;
    let top = n + k;
    let t = Transformer::new(&PanelRule::new(PI, 8 + top)?, -0.5, g)?;
    let pts: Vec<(f64, f64)> = (n..=top).map(|j| ((j * j) as f64, t.at(j as f64))).collect();
    let fact = libm::exp(ln_gamma(k as f64 + 1.0));
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * fact * divided_difference(&pts)?)
}

/// Euclidean check followed by the sphere and projective validations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EuclidTransfer {
    /// Bessel-transform positivity check.
    pub spectral: SpectralCheckResult,
    /// Report on `S^d`, present when the spectral check passes.
    pub sphere: Option<ValidityReport>,
    /// Report on `P^d(R)`, present when the spectral check passes and `d ≥ 3`.
    pub projective: Option<ValidityReport>,
    /// Both reports are valid; `None` when the spectral check fails.
    pub claim_holds: Option<bool>,
}

/// Run [`euclid_spectral_check`] with default grid, then validate on `S^d`
/// and `P^d(R)` when it passes.
pub fn euclid_to_sphere_validate(kernel: &MatrixKernel, d: usize, n_max: usize, tol: f64) -> Result<EuclidTransfer> {
    let spectral = euclid_spectral_check(kernel, d, default_omega_max(d), DEFAULT_OMEGA_POINTS, tol)?;
    if !spectral.pass {
        return Ok(EuclidTransfer { spectral, sphere: None, projective: None, claim_holds: None });
    }
    let sphere = validate_on_space(kernel, Space::sphere(d)?, n_max, tol)?;
    let projective = if d >= 3 {
        Some(validate_on_space(kernel, Space::real_projective(d)?, n_max, tol)?)
    } else {
        None
    };
    let holds = sphere.is_valid() && projective.as_ref().is_none_or(ValidityReport::is_valid);
    Ok(EuclidTransfer { spectral, sphere: Some(sphere), projective, claim_holds: Some(holds) })
}

//! Matrix kernels `C(ϑ)` on `[0, π]`: the evaluable abstraction, its JSON
//! description and the built-in families.
//!
//! Every kernel is immutable. Nested kernels (Hadamard powers, projective
//! constructions, rescalings) share their inner kernel through `Arc`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::check_jacobi_params;
use crate::linalg::Matrix;
use crate::special::{gauss_jacobi_rule, jacobi_at_one_unchecked, jacobi_fill, jacobi_norm_sq, ln_gamma};
use crate::{Error, Result};

/// A matrix given either as a scalar (`1 × 1`) or as a list of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    /// `1 × 1` matrix.
    Scalar(f64),
    /// Row-major rows.
    Rows(Vec<Vec<f64>>),
}

impl MatrixSpec {
    fn to_matrix(&self) -> Result<Matrix> {
        match self {
            MatrixSpec::Scalar(v) => Ok(Matrix::scalar(*v)),
            MatrixSpec::Rows(rows) => Matrix::from_rows(rows),
        }
    }
}

impl From<&Matrix> for MatrixSpec {
    fn from(m: &Matrix) -> Self {
        if m.dim() == 1 {
            MatrixSpec::Scalar(m.get(0, 0))
        } else {
            MatrixSpec::Rows(m.to_rows())
        }
    }
}

impl From<f64> for MatrixSpec {
    fn from(v: f64) -> Self {
        MatrixSpec::Scalar(v)
    }
}

/// Sign of a projective construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectiveSign {
    /// `K⁺(ρ) = C(ρ/2) + C(π − ρ/2)`.
    Plus,
    /// `K⁻(ρ) = (C(ρ/2) − C(π − ρ/2))·cos(ρ/2)`.
    Minus,
}

/// JSON-representable kernel description.
///
/// Matrices are written as lists of rows or, for `m = 1`, as plain numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    /// `C(ϑ) = c`.
    Constant {
        /// Constant value.
        c: MatrixSpec,
    },
    /// `C(ϑ) = B₀ + B₁ϑ + B₂ϑ²`.
    Quadratic {
        /// Constant term.
        b0: MatrixSpec,
        /// Linear term.
        b1: MatrixSpec,
        /// Quadratic term.
        b2: MatrixSpec,
    },
    /// `C(ϑ) = B₁ exp(ϑ/2) + B₂ exp(−ϑ/2)`.
    ExpPair {
        /// Coefficient of `exp(ϑ/2)`.
        b1: MatrixSpec,
        /// Coefficient of `exp(−ϑ/2)`.
        b2: MatrixSpec,
    },
    /// `C_ij(ϑ) = exp(b_ij cos(ϑ/2)) + exp(−b_ij cos(ϑ/2))`.
    ExpCos {
        /// Symmetric parameter matrix.
        b: MatrixSpec,
    },
    /// `C_ij(ϑ) = 1 − sin(ϑ/2)^{max(ν_i, ν_j)}` with `ν_i ∈ (0, 2]`.
    PoweredSine {
        /// Exponents, one per component.
        nu: Vec<f64>,
    },
    /// `C(ϑ) = ((1 + cos ϑ)/2)^n · B`.
    Power {
        /// Exponent.
        n: u32,
        /// Matrix factor, identity `1 × 1` when omitted.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<MatrixSpec>,
    },
    /// `C(ϑ) = Σ B_n P_n^{(α,β)}(cos ϑ)`.
    JacobiSeries {
        /// Jacobi `α`.
        alpha: f64,
        /// Jacobi `β`.
        beta: f64,
        /// `B_0, B_1, …`.
        coefficients: Vec<MatrixSpec>,
    },
    /// `C(ϑ) = Σ A_k cos(kϑ)`.
    CosineSeries {
        /// `A_0, A_1, …`.
        coefficients: Vec<MatrixSpec>,
    },
    /// `(1 − ϑ/l)₊ · B`.
    Triangle {
        /// Support length `l ∈ (0, π]`.
        support: f64,
        /// Matrix factor, `1` when omitted.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<MatrixSpec>,
    },
    /// `(1 − (3/2)(ϑ/l) + (1/2)(ϑ/l)³)₊ · B` on `[0, l]`.
    Spherical {
        /// Support length `l ∈ (0, π]`.
        support: f64,
        /// Matrix factor, `1` when omitted.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<MatrixSpec>,
    },
    /// `B` on `[0, l]` and `0` beyond.
    Boxcar {
        /// Support length `l ∈ (0, π]`.
        support: f64,
        /// Matrix factor, `1` when omitted.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<MatrixSpec>,
    },
    /// Piecewise-linear interpolation of tabulated upper-triangle entries.
    Tabulated {
        /// CSV file with header `theta,c11,c12,...`, resolved by the IO layer.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        csv: Option<String>,
        /// Grid from `0` to `π`, strictly increasing.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        theta: Vec<f64>,
        /// Per grid point, the upper triangle `c11, c12, …, c1m, c22, …` row by row.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        values: Vec<Vec<f64>>,
    },
    /// Entrywise power of another kernel.
    HadamardPower {
        /// Inner kernel.
        kernel: Box<KernelSpec>,
        /// Exponent `ℓ ≥ 1`.
        ell: u32,
    },
    /// Projective construction from a kernel on `[0, π]`.
    Projective {
        /// Inner kernel.
        kernel: Box<KernelSpec>,
        /// Which construction.
        sign: ProjectiveSign,
    },
    /// `C(s·ϑ)` with `s ∈ (0, 1]`.
    Rescaled {
        /// Inner kernel.
        kernel: Box<KernelSpec>,
        /// Scale factor `s`.
        factor: f64,
    },
}

/// Where a kernel is known to vanish.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    /// No vanishing claim.
    Full,
    /// `C(ϑ) = 0` for `ϑ ≥ l`.
    Bounded(f64),
}

type CustomFn = dyn Fn(f64) -> Matrix + Send + Sync;

#[derive(Clone)]
enum Kind {
    Constant(Matrix),
    Quadratic([Matrix; 3]),
    ExpPair(Matrix, Matrix),
    ExpCos(Matrix),
    PoweredSine(Vec<f64>),
    Power(u32, Matrix),
    Jacobi { alpha: f64, beta: f64, coeffs: Vec<Matrix> },
    Cosine(Vec<Matrix>),
    Triangle(f64, Matrix),
    Spherical(f64, Matrix),
    Boxcar(f64, Matrix),
    Tabulated { theta: Vec<f64>, values: Vec<Matrix> },
    Hadamard(Arc<MatrixKernel>, u32),
    Projective(Arc<MatrixKernel>, ProjectiveSign),
    Rescaled(Arc<MatrixKernel>, f64),
    Custom(Arc<CustomFn>),
}

/// An `m × m` symmetric continuous matrix function on `[0, π]`.
#[derive(Clone)]
pub struct MatrixKernel {
    m: usize,
    support: Support,
    kind: Kind,
    spec: Option<KernelSpec>,
}

impl fmt::Debug for MatrixKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatrixKernel")
            .field("m", &self.m)
            .field("family", &self.family_name())
            .field("support", &self.support)
            .finish()
    }
}

fn check_symmetric(m: &Matrix) -> Result<()> {
    let asym = m.asymmetry();
    if asym > 1e-12 * m.max_abs().max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    if !m.is_finite() {
        return Err(Error::Invalid("matrix has non-finite entries".into()));
    }
    Ok(())
}

fn same_dim(m: usize, mat: &Matrix) -> Result<()> {
    if mat.dim() != m {
        return Err(Error::DimensionMismatch { expected: m, found: mat.dim() });
    }
    Ok(())
}

fn sym_matrix(spec: &MatrixSpec) -> Result<Matrix> {
    let m = spec.to_matrix()?;
    check_symmetric(&m)?;
    Ok(m)
}

fn optional_factor(b: &Option<MatrixSpec>) -> Result<Matrix> {
    match b {
        Some(s) => sym_matrix(s),
        None => Ok(Matrix::scalar(1.0)),
    }
}

fn check_support(l: f64) -> Result<f64> {
    if l.is_finite() && l > 0.0 && l <= PI {
        Ok(l)
    } else {
        Err(Error::OutOfRange { name: "support", value: l })
    }
}

fn upper_len(m: usize) -> usize {
    m * (m + 1) / 2
}

fn matrix_from_upper(m: usize, upper: &[f64]) -> Matrix {
    let mut out = Matrix::zeros(m);
    let mut k = 0;
    for i in 0..m {
        for j in i..m {
            out.set(i, j, upper[k]);
            out.set(j, i, upper[k]);
            k += 1;
        }
    }
    out
}

/// Build a kernel from its description.
pub fn make_kernel(spec: &KernelSpec) -> Result<MatrixKernel> {
    let (m, support, kind) = match spec {
        KernelSpec::Constant { c } => {
            let c = sym_matrix(c)?;
            (c.dim(), Support::Full, Kind::Constant(c))
        }
        KernelSpec::Quadratic { b0, b1, b2 } => {
            let b = [sym_matrix(b0)?, sym_matrix(b1)?, sym_matrix(b2)?];
            same_dim(b[0].dim(), &b[1])?;
            same_dim(b[0].dim(), &b[2])?;
            (b[0].dim(), Support::Full, Kind::Quadratic(b))
        }
        KernelSpec::ExpPair { b1, b2 } => {
            let (b1, b2) = (sym_matrix(b1)?, sym_matrix(b2)?);
            same_dim(b1.dim(), &b2)?;
            (b1.dim(), Support::Full, Kind::ExpPair(b1, b2))
        }
        KernelSpec::ExpCos { b } => {
            let b = sym_matrix(b)?;
            (b.dim(), Support::Full, Kind::ExpCos(b))
        }
        KernelSpec::PoweredSine { nu } => {
            if nu.is_empty() {
                return Err(Error::Invalid("powered_sine needs at least one exponent".into()));
            }
            for &v in nu {
                if !(v > 0.0 && v <= 2.0) {
                    return Err(Error::OutOfRange { name: "nu", value: v });
                }
            }
            (nu.len(), Support::Full, Kind::PoweredSine(nu.clone()))
        }
        KernelSpec::Power { n, b } => {
            let b = optional_factor(b)?;
            (b.dim(), Support::Full, Kind::Power(*n, b))
        }
        KernelSpec::JacobiSeries { alpha, beta, coefficients } => {
            check_jacobi_params(*alpha, *beta)?;
            if coefficients.is_empty() {
                return Err(Error::Invalid("jacobi_series needs at least one coefficient".into()));
            }
            let coeffs = coefficients.iter().map(sym_matrix).collect::<Result<Vec<_>>>()?;
            let m = coeffs[0].dim();
            for c in &coeffs {
                same_dim(m, c)?;
            }
            (m, Support::Full, Kind::Jacobi { alpha: *alpha, beta: *beta, coeffs })
        }
        KernelSpec::CosineSeries { coefficients } => {
            if coefficients.is_empty() {
                return Err(Error::Invalid("cosine_series needs at least one coefficient".into()));
            }
            let coeffs = coefficients.iter().map(sym_matrix).collect::<Result<Vec<_>>>()?;
            let m = coeffs[0].dim();
            for c in &coeffs {
                same_dim(m, c)?;
            }
            (m, Support::Full, Kind::Cosine(coeffs))
        }
        KernelSpec::Triangle { support, b } => {
            let (l, b) = (check_support(*support)?, optional_factor(b)?);
            (b.dim(), Support::Bounded(l), Kind::Triangle(l, b))
        }
        KernelSpec::Spherical { support, b } => {
            let (l, b) = (check_support(*support)?, optional_factor(b)?);
            (b.dim(), Support::Bounded(l), Kind::Spherical(l, b))
        }
        KernelSpec::Boxcar { support, b } => {
            let (l, b) = (check_support(*support)?, optional_factor(b)?);
            (b.dim(), Support::Bounded(l), Kind::Boxcar(l, b))
        }
        KernelSpec::Tabulated { csv, theta, values } => {
            if theta.is_empty() {
                return Err(match csv {
                    Some(path) => Error::Invalid(format!("tabulated kernel `{path}` has not been loaded")),
                    None => Error::Invalid("tabulated kernel has no data".into()),
                });
            }
            tabulated_kind(theta, values)?
        }
        KernelSpec::HadamardPower { kernel, ell } => {
            let inner = make_kernel(kernel)?;
            return hadamard_power(&inner, *ell);
        }
        KernelSpec::Projective { kernel, sign } => {
            let inner = make_kernel(kernel)?;
            return Ok(projective(&inner, *sign));
        }
        KernelSpec::Rescaled { kernel, factor } => {
            let inner = make_kernel(kernel)?;
            return rescaled(&inner, *factor);
        }
    };
    Ok(MatrixKernel { m, support, kind, spec: Some(spec.clone()) })
}

fn tabulated_kind(theta: &[f64], values: &[Vec<f64>]) -> Result<(usize, Support, Kind)> {
    if theta.len() < 2 || theta.len() != values.len() {
        return Err(Error::Invalid("tabulated kernel needs matching theta and value rows".into()));
    }
    if theta[0].abs() > 1e-12 || (theta[theta.len() - 1] - PI).abs() > 1e-9 {
        return Err(Error::Invalid("tabulated theta must run from 0 to pi".into()));
    }
    if theta.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Invalid("tabulated theta must be strictly increasing".into()));
    }
    let len = values[0].len();
    let m = (1..=64).find(|&m| upper_len(m) == len).ok_or_else(|| {
        Error::Invalid(format!("{len} columns is not an upper triangle size"))
    })?;
    let mut mats = Vec::with_capacity(values.len());
    for row in values {
        if row.len() != len || row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("tabulated rows must be finite and of equal length".into()));
        }
        mats.push(matrix_from_upper(m, row));
    }
    let mut grid = theta.to_vec();
    grid[0] = 0.0;
    let last = grid.len() - 1;
    grid[last] = PI;
    Ok((m, Support::Full, Kind::Tabulated { theta: grid, values: mats }))
}

/// Entrywise `ℓ`-th power.
pub fn hadamard_power(kernel: &MatrixKernel, ell: u32) -> Result<MatrixKernel> {
    if ell == 0 {
        return Err(Error::OutOfRange { name: "ell", value: 0.0 });
    }
    let spec = kernel
        .spec
        .as_ref()
        .map(|s| KernelSpec::HadamardPower { kernel: Box::new(s.clone()), ell });
    Ok(MatrixKernel {
        m: kernel.m,
        support: kernel.support,
        kind: Kind::Hadamard(Arc::new(kernel.clone()), ell),
        spec,
    })
}

fn projective(kernel: &MatrixKernel, sign: ProjectiveSign) -> MatrixKernel {
    let spec = kernel
        .spec
        .as_ref()
        .map(|s| KernelSpec::Projective { kernel: Box::new(s.clone()), sign });
    MatrixKernel {
        m: kernel.m,
        support: Support::Full,
        kind: Kind::Projective(Arc::new(kernel.clone()), sign),
        spec,
    }
}

fn rescaled(kernel: &MatrixKernel, factor: f64) -> Result<MatrixKernel> {
    if !(factor > 0.0 && factor <= 1.0) {
        return Err(Error::OutOfRange { name: "factor", value: factor });
    }
    let support = match kernel.support {
        Support::Bounded(l) if l / factor < PI => Support::Bounded(l / factor),
        Support::Bounded(_) => Support::Bounded(PI),
        Support::Full => Support::Full,
    };
    let spec = kernel
        .spec
        .as_ref()
        .map(|s| KernelSpec::Rescaled { kernel: Box::new(s.clone()), factor });
    Ok(MatrixKernel { m: kernel.m, support, kind: Kind::Rescaled(Arc::new(kernel.clone()), factor), spec })
}

/// `K⁺` and `K⁻` built from `C`.
pub fn projective_pair(kernel: &MatrixKernel) -> (MatrixKernel, MatrixKernel) {
    (projective(kernel, ProjectiveSign::Plus), projective(kernel, ProjectiveSign::Minus))
}

/// `C(s·ϑ)` for `s ∈ (0, 1]`.
pub fn rescale(kernel: &MatrixKernel, factor: f64) -> Result<MatrixKernel> {
    rescaled(kernel, factor)
}

/// Evaluate a kernel; same as [`MatrixKernel::eval`].
pub fn eval_kernel(kernel: &MatrixKernel, theta: f64) -> Result<Matrix> {
    kernel.eval(theta)
}

impl MatrixKernel {
    /// Kernel from a closure. The closure must return symmetric `m × m` matrices.
    pub fn from_fn(m: usize, support: Support, f: impl Fn(f64) -> Matrix + Send + Sync + 'static) -> Self {
        Self { m, support, kind: Kind::Custom(Arc::new(f)), spec: None }
    }

    /// `C(ϑ) = c` for a symmetric matrix `c`.
    pub fn constant(c: &Matrix) -> Result<Self> {
        make_kernel(&KernelSpec::Constant { c: c.into() })
    }

    /// Scalar kernel `C(ϑ) = Σ a_k cos(kϑ)`.
    pub fn cosine_series(coefficients: &[f64]) -> Result<Self> {
        make_kernel(&KernelSpec::CosineSeries {
            coefficients: coefficients.iter().map(|&a| MatrixSpec::Scalar(a)).collect(),
        })
    }

    /// `C(ϑ) = Σ B_n P_n^{(α,β)}(cos ϑ)`.
    pub fn jacobi_series(alpha: f64, beta: f64, coefficients: &[Matrix]) -> Result<Self> {
        make_kernel(&KernelSpec::JacobiSeries {
            alpha,
            beta,
            coefficients: coefficients.iter().map(MatrixSpec::from).collect(),
        })
    }

    /// Matrix size `m`.
    pub fn dim(&self) -> usize {
        self.m
    }

    /// Vanishing claim.
    pub fn support(&self) -> Support {
        self.support
    }

    /// Description, when the kernel was built from one.
    pub fn spec(&self) -> Option<&KernelSpec> {
        self.spec.as_ref()
    }

    /// Family tag.
    pub fn family_name(&self) -> &'static str {
        match &self.kind {
            Kind::Constant(_) => "constant",
            Kind::Quadratic(_) => "quadratic",
            Kind::ExpPair(..) => "exp_pair",
            Kind::ExpCos(_) => "exp_cos",
            Kind::PoweredSine(_) => "powered_sine",
            Kind::Power(..) => "power",
            Kind::Jacobi { .. } => "jacobi_series",
            Kind::Cosine(_) => "cosine_series",
            Kind::Triangle(..) => "triangle",
            Kind::Spherical(..) => "spherical",
            Kind::Boxcar(..) => "boxcar",
            Kind::Tabulated { .. } => "tabulated",
            Kind::Hadamard(..) => "hadamard_power",
            Kind::Projective(..) => "projective",
            Kind::Rescaled(..) => "rescaled",
            Kind::Custom(_) => "custom",
        }
    }

    /// `C(ϑ)` for `ϑ ∈ [0, π]`.
    pub fn eval(&self, theta: f64) -> Result<Matrix> {
        if !(theta.is_finite() && (-1e-12..=PI + 1e-12).contains(&theta)) {
            return Err(Error::OutOfRange { name: "theta", value: theta });
        }
        let out = self.eval_unchecked(theta.clamp(0.0, PI));
        if !out.is_finite() {
            return Err(Error::NonFinite(theta));
        }
        Ok(out)
    }

    fn entrywise(&self, f: impl Fn(usize, usize) -> f64) -> Matrix {
        let mut out = Matrix::zeros(self.m);
        for i in 0..self.m {
            for j in i..self.m {
                let v = f(i, j);
                out.set(i, j, v);
                out.set(j, i, v);
            }
        }
        out
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> Matrix {
        match &self.kind {
            Kind::Constant(c) => c.clone(),
            Kind::Quadratic(b) => {
                let mut out = b[0].clone();
                out.add_scaled(&b[1], t);
                out.add_scaled(&b[2], t * t);
                out
            }
            Kind::ExpPair(b1, b2) => {
                let mut out = b1.scaled(libm::exp(0.5 * t));
                out.add_scaled(b2, libm::exp(-0.5 * t));
                out
            }
            Kind::ExpCos(b) => {
                let c = libm::cos(0.5 * t);
                self.entrywise(|i, j| {
                    let x = b.get(i, j) * c;
                    libm::exp(x) + libm::exp(-x)
                })
            }
            Kind::PoweredSine(nu) => {
                let s = libm::sin(0.5 * t);
                self.entrywise(|i, j| 1.0 - libm::pow(s, nu[i].max(nu[j])))
            }
            Kind::Power(n, b) => {
                let c = libm::cos(0.5 * t);
                b.scaled(libm::pow(c * c, *n as f64))
            }
            Kind::Jacobi { alpha, beta, coeffs } => {
                let mut p = vec![0.0; coeffs.len()];
                jacobi_fill(*alpha, *beta, libm::cos(t), &mut p);
                let mut out = Matrix::zeros(self.m);
                for (c, pn) in coeffs.iter().zip(&p) {
                    out.add_scaled(c, *pn);
                }
                out
            }
            Kind::Cosine(coeffs) => {
                let mut out = Matrix::zeros(self.m);
                for (k, c) in coeffs.iter().enumerate() {
                    out.add_scaled(c, libm::cos(k as f64 * t));
                }
                out
            }
            Kind::Triangle(l, b) => b.scaled(if t < *l { 1.0 - t / l } else { 0.0 }),
            Kind::Spherical(l, b) => {
                let r = t / l;
                b.scaled(if r < 1.0 { 1.0 - 1.5 * r + 0.5 * r * r * r } else { 0.0 })
            }
            Kind::Boxcar(l, b) => b.scaled(if t <= *l { 1.0 } else { 0.0 }),
            Kind::Tabulated { theta, values } => {
                let k = theta.partition_point(|&g| g <= t);
                if k == 0 {
                    return values[0].clone();
                }
                if k >= theta.len() {
                    return values[theta.len() - 1].clone();
                }
                let (t0, t1) = (theta[k - 1], theta[k]);
                let w = (t - t0) / (t1 - t0);
                if w == 0.0 {
                    return values[k - 1].clone();
                }
                let mut out = values[k - 1].scaled(1.0 - w);
                out.add_scaled(&values[k], w);
                out
            }
            Kind::Hadamard(inner, ell) => {
                let c = inner.eval_unchecked(t);
                Matrix::from_fn(self.m, |i, j| libm::pow(c.get(i, j), *ell as f64))
            }
            Kind::Projective(inner, sign) => {
                let a = inner.eval_unchecked(0.5 * t);
                let b = inner.eval_unchecked(PI - 0.5 * t);
                match sign {
                    ProjectiveSign::Plus => a.add(&b),
                    ProjectiveSign::Minus => a.sub(&b).scaled(libm::cos(0.5 * t)),
                }
            }
            Kind::Rescaled(inner, s) => inner.eval_unchecked(s * t),
            Kind::Custom(f) => f(t),
        }
    }

    /// Analytic continuation of `C` to a complex argument, row-major.
    ///
    /// `None` for kernels without a closed form valid off the real segment
    /// (tabulated, custom, and truncated piecewise families).
    pub fn eval_complex(&self, t: Complex64) -> Option<Vec<Complex64>> {
        let m = self.m;
        let lift = |mat: &Matrix, f: Complex64| -> Vec<Complex64> {
            mat.as_slice().iter().map(|&v| f * v).collect()
        };
        let one = Complex64::new(1.0, 0.0);
        let full = |l: f64| l >= PI - 1e-15;
        Some(match &self.kind {
            Kind::Constant(c) => lift(c, one),
            Kind::Quadratic(b) => {
                let mut out = lift(&b[0], one);
                axpy(&mut out, &lift(&b[1], t));
                axpy(&mut out, &lift(&b[2], t * t));
                out
            }
            Kind::ExpPair(b1, b2) => {
                let mut out = lift(b1, (t * 0.5).exp());
                axpy(&mut out, &lift(b2, (-t * 0.5).exp()));
                out
            }
            Kind::ExpCos(b) => {
                let c = (t * 0.5).cos();
                b.as_slice().iter().map(|&v| (c * v).exp() + (-c * v).exp()).collect()
            }
            Kind::PoweredSine(nu) => {
                let s = (t * 0.5).sin();
                let mut out = vec![Complex64::new(0.0, 0.0); m * m];
                for i in 0..m {
                    for j in 0..m {
                        out[i * m + j] = one - s.powf(nu[i].max(nu[j]));
                    }
                }
                out
            }
            Kind::Power(n, b) => {
                let c = (t * 0.5).cos();
                lift(b, (c * c).powu(*n))
            }
            Kind::Jacobi { alpha, beta, coeffs } => {
                let mut p = vec![Complex64::new(0.0, 0.0); coeffs.len()];
                jacobi_fill(*alpha, *beta, t.cos(), &mut p);
                let mut out = vec![Complex64::new(0.0, 0.0); m * m];
                for (c, pn) in coeffs.iter().zip(&p) {
                    axpy(&mut out, &lift(c, *pn));
                }
                out
            }
            Kind::Cosine(coeffs) => {
                let mut out = vec![Complex64::new(0.0, 0.0); m * m];
                for (k, c) in coeffs.iter().enumerate() {
                    axpy(&mut out, &lift(c, (t * k as f64).cos()));
                }
                out
            }
            Kind::Triangle(l, b) if full(*l) => lift(b, one - t / *l),
            Kind::Spherical(l, b) if full(*l) => {
                let r = t / *l;
                lift(b, one - r * 1.5 + r * r * r * 0.5)
            }
            Kind::Boxcar(l, b) if full(*l) => lift(b, one),
            Kind::Hadamard(inner, ell) => {
                inner.eval_complex(t)?.into_iter().map(|v| v.powu(*ell)).collect()
            }
            Kind::Projective(inner, sign) => {
                let a = inner.eval_complex(t * 0.5)?;
                let b = inner.eval_complex(Complex64::new(PI, 0.0) - t * 0.5)?;
                match sign {
                    ProjectiveSign::Plus => a.iter().zip(&b).map(|(x, y)| x + y).collect(),
                    ProjectiveSign::Minus => {
                        let c = (t * 0.5).cos();
                        a.iter().zip(&b).map(|(x, y)| (x - y) * c).collect()
                    }
                }
            }
            Kind::Rescaled(inner, s) if matches!(inner.support, Support::Full) => {
                inner.eval_complex(t * *s)?
            }
            _ => return None,
        })
    }
}

fn axpy(acc: &mut [Complex64], add: &[Complex64]) {
    for (a, b) in acc.iter_mut().zip(add) {
        *a += b;
    }
}

/// Coefficients `φ_k`, `k = 0..=n`, with `((1+x)/2)^n = Σ φ_k P_k^{(α,β)}(x)`.
///
/// `φ_k = Γ(n+β+1)·n!·(2k+α+β+1)·Γ(k+α+β+1) / (Γ(k+n+α+β+2)·Γ(k+β+1)·(n−k)!)`.
pub fn power_kernel_coeffs(n: usize, alpha: f64, beta: f64) -> Result<Vec<f64>> {
    check_jacobi_params(alpha, beta)?;
    let (a, b) = (alpha, beta);
    let nf = n as f64;
    Ok((0..=n)
        .map(|k| {
            let kf = k as f64;
            let s = kf + a + b + 1.0;
            let mut ln_top = ln_gamma(s + 1.0);
            if k > 0 {
                ln_top += libm::log1p(kf / s);
            }
            libm::exp(
                ln_gamma(nf + b + 1.0) + ln_gamma(nf + 1.0) + ln_top
                    - ln_gamma(kf + nf + a + b + 2.0)
                    - ln_gamma(kf + b + 1.0)
                    - ln_gamma(nf - kf + 1.0),
            )
        })
        .collect())
}

/// `φ_k` by Gauss–Jacobi projection of `((1+x)/2)^n` onto `P_k^{(α,β)}`.
pub fn power_kernel_coeffs_projection(n: usize, alpha: f64, beta: f64) -> Result<Vec<f64>> {
    let rule = gauss_jacobi_rule(n + 1, alpha, beta)?;
    let mut acc = vec![0.0; n + 1];
    let mut p = vec![0.0; n + 1];
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        jacobi_fill(alpha, beta, x, &mut p);
        let f = libm::pow(0.5 * (1.0 + x), n as f64);
        for k in 0..=n {
            acc[k] += w * f * p[k];
        }
    }
    Ok((0..=n).map(|k| acc[k] / jacobi_norm_sq(k, alpha, beta)).collect())
}

/// `Σ_k φ_k P_k(1)`, which equals 1.
pub fn power_kernel_check(n: usize, alpha: f64, beta: f64) -> Result<f64> {
    let phi = power_kernel_coeffs(n, alpha, beta)?;
    Ok(phi.iter().enumerate().map(|(k, f)| f * jacobi_at_one_unchecked(k, alpha)).sum())
}

//! Gaussian vector random fields from the Jacobi series representation, with
//! counter-based splittable random streams and empirical covariance checks.
//!
//! `Z(x) = Σ_n B_n^{1/2} V_n P_n^{(α,β)}(cos ρ(x, U))` with `U` uniform on the
//! space and independent `V_n ~ N(0, a_n² I)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::coefficients::eigen_extremes;
use crate::kernels::MatrixKernel;
use crate::linalg::{pairwise_sum, sym_eigen, Matrix};
use crate::spaces::{cos_distance_unchecked, geodesic_distance, sample_uniform, Point, Space};
use crate::special::{gauss_legendre, jacobi_at_one_unchecked, jacobi_fill, ln_gamma};
use crate::{Error, Result};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Splittable random stream identified by a seed and a path of split indices.
///
/// The `(seed, path)` pair is hashed into a ChaCha20 key, so output depends only
/// on the identity of the stream and never on which thread consumes it.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    path: Vec<u64>,
    rng: ChaCha20Rng,
}

impl RandomStream {
    /// Root stream for `seed`.
    pub fn new(seed: u64) -> Self {
        Self::with_path(seed, Vec::new())
    }

    /// Stream at an explicit path.
    pub fn with_path(seed: u64, path: Vec<u64>) -> Self {
        let mut h = splitmix64(seed ^ 0x5EED_0000_0000_0000);
        for (depth, &p) in path.iter().enumerate() {
            h = splitmix64(h ^ splitmix64(p.wrapping_add((depth as u64 + 1).wrapping_mul(GOLDEN))));
        }
        let mut key = [0u8; 32];
        for (k, chunk) in key.chunks_exact_mut(8).enumerate() {
            h = splitmix64(h.wrapping_add(k as u64));
            chunk.copy_from_slice(&h.to_le_bytes());
        }
        Self { seed, path, rng: ChaCha20Rng::from_seed(key) }
    }

    /// Child stream `path ++ [index]`, independent of the parent's position.
    pub fn split(&self, index: u64) -> Self {
        let mut path = self.path.clone();
        path.push(index);
        Self::with_path(self.seed, path)
    }

    /// Seed.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Split path.
    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// Next raw 64-bit word.
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw.
    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }
}

/// Provenance of a stream, as stored in ensemble metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamId {
    /// Seed.
    pub seed: u64,
    /// Split path.
    pub path: Vec<u64>,
}

impl From<&RandomStream> for StreamId {
    fn from(s: &RandomStream) -> Self {
        Self { seed: s.seed, path: s.path.clone() }
    }
}

/// `a_n = √(Γ(β+1)(2n+α+β+1)Γ(n+α+β+1)/(Γ(α+β+2)Γ(n+β+1)))`.
pub fn a_n_coeff(alpha: f64, beta: f64, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let n = n as f64;
    let s = alpha + beta;
    // (2n+s+1)Γ(n+s+1) = Γ(n+s+2)·(1 + n/(n+s+1)), stable at s = −1.
    let ln = ln_gamma(beta + 1.0) + ln_gamma(n + s + 2.0) + libm::log1p(n / (n + s + 1.0))
        - ln_gamma(s + 2.0)
        - ln_gamma(n + beta + 1.0);
    libm::exp(0.5 * ln)
}

/// Symmetric square root of a PSD matrix; eigenvalues above `−1e−10·scale`
/// are clipped to zero.
pub fn psd_sqrt(m: &Matrix) -> Result<Matrix> {
    if !m.is_finite() {
        return Err(Error::Invalid("matrix has non-finite entries".into()));
    }
    let asym = m.asymmetry();
    if asym > 1e-10 * m.max_abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NotSymmetric(asym));
    }
    let e = sym_eigen(&m.symmetrized());
    let scale = e.values.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
    if e.values[0] < -1e-10 * scale {
        return Err(Error::Indefinite { min_eigenvalue: e.values[0], scale });
    }
    let n = m.dim();
    let roots: Vec<f64> = e.values.iter().map(|&v| libm::sqrt(v.max(0.0))).collect();
    Ok(Matrix::from_fn(n, |i, j| (0..n).map(|k| e.vectors.get(i, k) * roots[k] * e.vectors.get(j, k)).sum()))
}

/// Smallest `N` with `Σ_{n>N} ‖B_n‖P_n(1) < 1e−3·Σ_n ‖B_n‖P_n(1)`.
pub fn default_truncation(b_seq: &[Matrix], alpha: f64) -> usize {
    let terms: Vec<f64> = b_seq
        .iter()
        .enumerate()
        .map(|(n, b)| eigen_extremes(b).1 * jacobi_at_one_unchecked(n, alpha))
        .collect();
    let total: f64 = terms.iter().sum();
    let mut tail = total;
    for (n, t) in terms.iter().enumerate() {
        tail -= t;
        if tail < 1e-3 * total {
            return n;
        }
    }
    terms.len().saturating_sub(1)
}

/// Realized fields: `values[(r·points + p)·m + k]` is component `k` of
/// replicate `r` at point `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldEnsemble {
    /// Space.
    pub space: Space,
    /// Evaluation points.
    pub points: Vec<Point>,
    /// Field dimension.
    pub m: usize,
    /// Number of replicates.
    pub replicates: usize,
    /// Series truncation index.
    pub n_max: usize,
    /// Replicate-major values.
    pub values: Vec<f64>,
    /// Root stream; replicate `r` used `path ++ [r]`.
    pub stream: StreamId,
}

impl FieldEnsemble {
    /// Number of points.
    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    /// The `m`-vector of replicate `r` at point `p`.
    pub fn value(&self, r: usize, p: usize) -> &[f64] {
        let at = (r * self.points.len() + p) * self.m;
        &self.values[at..at + self.m]
    }
}

/// Precomputed series data for drawing replicates.
#[derive(Debug, Clone)]
pub struct FieldSimulator {
    space: Space,
    alpha: f64,
    beta: f64,
    roots: Vec<Matrix>,
    points: Vec<Point>,
}

impl FieldSimulator {
    /// Factor `a_n B_n^{1/2}` for `n ≤ n_max`.
    pub fn new(space: Space, b_seq: &[Matrix], n_max: usize, points: Vec<Point>) -> Result<Self> {
        if !space.has_geometry() {
            return Err(Error::Unsupported("simulation on the Cayley plane".into()));
        }
        if n_max >= b_seq.len() {
            return Err(Error::Invalid(format!("n_max {n_max} exceeds {} coefficients", b_seq.len())));
        }
        let m = b_seq[0].dim();
        let (alpha, beta) = space.params();
        let mut roots = Vec::with_capacity(n_max + 1);
        for (n, b) in b_seq.iter().take(n_max + 1).enumerate() {
            if b.dim() != m {
                return Err(Error::DimensionMismatch { expected: m, found: b.dim() });
            }
            roots.push(psd_sqrt(b)?.scaled(a_n_coeff(alpha, beta, n)));
        }
        let amb = space.ambient_dim();
        for p in &points {
            if p.coords().len() != amb {
                return Err(Error::DimensionMismatch { expected: amb, found: p.coords().len() });
            }
        }
        Ok(Self { space, alpha, beta, roots, points })
    }

    /// Field dimension.
    pub fn m(&self) -> usize {
        self.roots[0].dim()
    }

    /// Series truncation index.
    pub fn n_max(&self) -> usize {
        self.roots.len() - 1
    }

    /// Values of replicate `r`, drawn from `stream.split(r)`, point-major.
    pub fn replicate(&self, stream: &RandomStream, r: u64) -> Result<Vec<f64>> {
        let mut s = stream.split(r);
        let u = sample_uniform(self.space, &mut s)?;
        let m = self.m();
        let w: Vec<Vec<f64>> = self
            .roots
            .iter()
            .map(|root| {
                let v: Vec<f64> = (0..m).map(|_| s.normal()).collect();
                root.mul_vec(&v)
            })
            .collect();
        let mut p = vec![0.0; self.roots.len()];
        let mut out = vec![0.0; self.points.len() * m];
        for (pt, z) in self.points.iter().zip(out.chunks_exact_mut(m)) {
            let c = cos_distance_unchecked(self.space, pt.coords(), u.coords());
            jacobi_fill(self.alpha, self.beta, c, &mut p);
            for (wn, pn) in w.iter().zip(&p) {
                for (zk, wk) in z.iter_mut().zip(wn) {
                    *zk += pn * wk;
                }
            }
        }
        Ok(out)
    }

    /// Assemble replicates produced by [`FieldSimulator::replicate`], in order.
    pub fn ensemble(&self, rows: Vec<Vec<f64>>, stream: &RandomStream) -> FieldEnsemble {
        let replicates = rows.len();
        FieldEnsemble {
            space: self.space,
            points: self.points.clone(),
            m: self.m(),
            replicates,
            n_max: self.n_max(),
            values: rows.into_iter().flatten().collect(),
            stream: stream.into(),
        }
    }
}

/// Draw `replicates` fields `Z(x) = Σ_{n ≤ n_max} B_n^{1/2}V_n P_n^{(α,β)}(cos ρ(x, U))`.
pub fn simulate_field(
    space: Space,
    b_seq: &[Matrix],
    n_max: usize,
    points: Vec<Point>,
    replicates: usize,
    stream: &RandomStream,
) -> Result<FieldEnsemble> {
    let sim = FieldSimulator::new(space, b_seq, n_max, points)?;
    let rows = (0..replicates as u64).map(|r| sim.replicate(stream, r)).collect::<Result<Vec<_>>>()?;
    Ok(sim.ensemble(rows, stream))
}

/// One compared covariance entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovEntry {
    /// First point.
    pub i: usize,
    /// Second point.
    pub j: usize,
    /// Component at the first point.
    pub k: usize,
    /// Component at the second point.
    pub l: usize,
    /// Geodesic distance.
    pub rho: f64,
    /// Mean of replicate products.
    pub empirical: f64,
    /// `C_{kl}(ρ)`.
    pub theoretical: f64,
    /// Standard error of the mean.
    pub std_error: f64,
    /// Outside the confidence band.
    pub flagged: bool,
}

/// Empirical covariances against the kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovCheckReport {
    /// Band half-width in standard errors.
    pub multiplier: f64,
    /// Entries for point pairs `i ≤ j` and all component pairs.
    pub entries: Vec<CovEntry>,
    /// Number of flagged entries.
    pub n_flagged: usize,
    /// `n_flagged / entries.len()`.
    pub flagged_fraction: f64,
    /// Largest `|empirical − theoretical|/std_error`.
    pub max_z: f64,
}

/// Compare zero-mean replicate products with `C(ρ(x_i, x_j))`.
pub fn empirical_cov_check(ensemble: &FieldEnsemble, kernel: &MatrixKernel, multiplier: f64) -> Result<CovCheckReport> {
    let (m, reps) = (ensemble.m, ensemble.replicates);
    if kernel.dim() != m {
        return Err(Error::DimensionMismatch { expected: m, found: kernel.dim() });
    }
    if reps < 100 {
        return Err(Error::OutOfRange { name: "replicates", value: reps as f64 });
    }
    let np = ensemble.n_points();
    let mut entries = Vec::new();
    let mut prod = vec![0.0; reps];
    for i in 0..np {
        for j in i..np {
            let rho = geodesic_distance(ensemble.space, &ensemble.points[i], &ensemble.points[j])?;
            let c = kernel.eval(rho)?;
            for k in 0..m {
                for l in 0..m {
                    for (r, x) in prod.iter_mut().enumerate() {
                        *x = ensemble.value(r, i)[k] * ensemble.value(r, j)[l];
                    }
                    let mean = pairwise_sum(&prod) / reps as f64;
                    for x in prod.iter_mut() {
                        *x = (*x - mean) * (*x - mean);
                    }
                    let var = pairwise_sum(&prod) / (reps - 1) as f64;
                    let std_error = libm::sqrt(var / reps as f64);
                    let theoretical = c.get(k, l);
                    let diff = (mean - theoretical).abs();
                    let flagged = if std_error > 0.0 {
                        diff > multiplier * std_error
                    } else {
                        diff > 1e-12 * theoretical.abs().max(1.0)
                    };
                    entries.push(CovEntry { i, j, k, l, rho, empirical: mean, theoretical, std_error, flagged });
                }
            }
        }
    }
    let n_flagged = entries.iter().filter(|e| e.flagged).count();
    let max_z = entries
        .iter()
        .filter(|e| e.std_error > 0.0)
        .fold(0.0_f64, |a, e| a.max((e.empirical - e.theoretical).abs() / e.std_error));
    Ok(CovCheckReport {
        multiplier,
        flagged_fraction: n_flagged as f64 / entries.len() as f64,
        entries,
        n_flagged,
        max_z,
    })
}

/// Quadrature check of `a_n²·E_U[P_n(cos ρ(x₁,U))P_n(cos ρ(x₂,U))] = P_n(cos ρ₁₂)` on `S²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditionCheck {
    /// Degree.
    pub n: usize,
    /// `ρ₁₂`.
    pub rho: f64,
    /// Quadrature value of the left side.
    pub quadrature: f64,
    /// `P_n(cos ρ₁₂)`.
    pub exact: f64,
    /// `|quadrature − exact|`, relative to `P_n(1) = 1`.
    pub rel_error: f64,
}

/// Gauss–Legendre in `z` and the trapezoid rule in azimuth, exact for the
/// degree-`2n` integrand once both orders exceed `n`.
pub fn addition_formula_check(n: usize, rho: f64) -> Result<AdditionCheck> {
    if !(0.0..=core::f64::consts::PI).contains(&rho) {
        return Err(Error::OutOfRange { name: "rho", value: rho });
    }
    let order = 2 * n + 8;
    let gl = gauss_legendre(order)?;
    let n_phi = 4 * n + 8;
    let (s2, c2) = (libm::sin(rho), libm::cos(rho));
    let mut p = vec![0.0; n + 1];
    let mut q = vec![0.0; n + 1];
    let mut sum = 0.0;
    for (&z, &wz) in gl.nodes.iter().zip(&gl.weights) {
        jacobi_fill(0.0, 0.0, z, &mut p);
        let r = libm::sqrt((1.0 - z * z).max(0.0));
        let mut inner = 0.0;
        for k in 0..n_phi {
            let phi = 2.0 * core::f64::consts::PI * k as f64 / n_phi as f64;
            jacobi_fill(0.0, 0.0, r * libm::cos(phi) * s2 + z * c2, &mut q);
            inner += q[n];
        }
        sum += wz * p[n] * inner / n_phi as f64;
    }
    let a = a_n_coeff(0.0, 0.0, n);
    let quadrature = a * a * 0.5 * sum;
    let exact = crate::special::jacobi_sequence(n, 0.0, 0.0, c2)[n];
    Ok(AdditionCheck { n, rho, quadrature, exact, rel_error: (quadrature - exact).abs() })
}

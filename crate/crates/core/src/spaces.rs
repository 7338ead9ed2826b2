//! The five families of compact two-point homogeneous spaces, their Jacobi
//! parameters, geodesic distances and uniform sampling.
//!
//! Distances are normalized so that every closed geodesic has length `2π`, which
//! puts all distances in `[0, π]`. Projective points are unit representatives in
//! `F^{k+1}` for `F ∈ {ℝ, ℂ, ℍ}`, stored as flat real coordinates.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::simulate::RandomStream;
use crate::{Error, Result};

/// Family of a compact two-point homogeneous space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// Sphere `S^d`.
    Sphere,
    /// Real projective space `P^d(ℝ)`.
    RealProjective,
    /// Complex projective space `P^d(ℂ)`.
    ComplexProjective,
    /// Quaternionic projective space `P^d(ℍ)`.
    QuaternionProjective,
    /// Cayley plane `P^16(Cay)`.
    Cayley,
}

impl Family {
    fn tag(self) -> &'static str {
        match self {
            Family::Sphere => "S",
            Family::RealProjective => "PR",
            Family::ComplexProjective => "PC",
            Family::QuaternionProjective => "PH",
            Family::Cayley => "CAY",
        }
    }

    /// Real dimension of the base field.
    fn field_dim(self) -> usize {
        match self {
            Family::Sphere | Family::RealProjective => 1,
            Family::ComplexProjective => 2,
            Family::QuaternionProjective => 4,
            Family::Cayley => 8,
        }
    }
}

/// A compact two-point homogeneous space of real dimension `d`.
///
/// Serializes as its CLI spelling, e.g. `"PC:4"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Space {
    family: Family,
    d: usize,
}

impl Space {
    /// Validated constructor.
    pub fn new(family: Family, d: usize) -> Result<Self> {
        let ok = match family {
            Family::Sphere => d >= 1,
            Family::RealProjective => d >= 2,
            Family::ComplexProjective => d >= 4 && d % 2 == 0,
            Family::QuaternionProjective => d >= 8 && d % 4 == 0,
            Family::Cayley => d == 16,
        };
        if ok {
            Ok(Self { family, d })
        } else {
            Err(Error::Invalid(format!("no space {}:{}", family.tag(), d)))
        }
    }

    /// `S^d`.
    pub fn sphere(d: usize) -> Result<Self> {
        Self::new(Family::Sphere, d)
    }

    /// `P^d(ℝ)`.
    pub fn real_projective(d: usize) -> Result<Self> {
        Self::new(Family::RealProjective, d)
    }

    /// `P^d(ℂ)`.
    pub fn complex_projective(d: usize) -> Result<Self> {
        Self::new(Family::ComplexProjective, d)
    }

    /// `P^d(ℍ)`.
    pub fn quaternion_projective(d: usize) -> Result<Self> {
        Self::new(Family::QuaternionProjective, d)
    }

    /// `P^16(Cay)`.
    pub fn cayley() -> Self {
        Self { family: Family::Cayley, d: 16 }
    }

    /// Family.
    pub fn family(&self) -> Family {
        self.family
    }

    /// Real dimension.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Jacobi parameters `(α, β)`.
    pub fn params(&self) -> (f64, f64) {
        space_params(*self)
    }

    /// Number of real coordinates of a point representative.
    pub fn ambient_dim(&self) -> usize {
        match self.family {
            Family::Sphere | Family::RealProjective => self.d + 1,
            Family::ComplexProjective => self.d + 2,
            Family::QuaternionProjective => self.d + 4,
            Family::Cayley => 0,
        }
    }

    /// True when points can be represented and sampled.
    pub fn has_geometry(&self) -> bool {
        self.family != Family::Cayley
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.family.tag(), self.d)
    }
}

impl FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("unknown space `{s}`"));
        let (tag, d) = s.trim().split_once(':').ok_or_else(bad)?;
        let d: usize = d.trim().parse().map_err(|_| bad())?;
        let family = match tag.trim().to_ascii_uppercase().as_str() {
            "S" => Family::Sphere,
            "PR" => Family::RealProjective,
            "PC" => Family::ComplexProjective,
            "PH" => Family::QuaternionProjective,
            "CAY" => Family::Cayley,
            _ => return Err(bad()),
        };
        Self::new(family, d)
    }
}

impl TryFrom<String> for Space {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Space> for String {
    fn from(s: Space) -> Self {
        s.to_string()
    }
}

/// Jacobi parameters `(α, β)` attached to a space.
pub fn space_params(space: Space) -> (f64, f64) {
    let alpha = (space.d as f64 - 2.0) / 2.0;
    let beta = match space.family {
        Family::Sphere => alpha,
        Family::RealProjective => -0.5,
        Family::ComplexProjective => 0.0,
        Family::QuaternionProjective => 1.0,
        Family::Cayley => 3.0,
    };
    (alpha, beta)
}

/// A unit representative of a point, as flat real coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    /// Point from coordinates of norm 1 (to `1e−12`).
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let norm = norm2(&coords);
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("point norm {norm} is not 1")));
        }
        Ok(Self { coords })
    }

    /// Point from any nonzero vector, normalized.
    pub fn normalized(mut coords: Vec<f64>) -> Result<Self> {
        let norm = norm2(&coords);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Invalid("cannot normalize a zero vector".into()));
        }
        coords.iter_mut().for_each(|c| *c /= norm);
        Ok(Self { coords })
    }

    /// Flat real coordinates.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

fn norm2(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|c| c * c).sum())
}

/// `|⟨p, q⟩|` over the base field of the family.
fn inner_modulus(family: Family, p: &[f64], q: &[f64]) -> f64 {
    match family.field_dim() {
        1 => p.iter().zip(q).map(|(a, b)| a * b).sum::<f64>().abs(),
        2 => {
            let (mut re, mut im) = (0.0, 0.0);
            for (a, b) in p.chunks_exact(2).zip(q.chunks_exact(2)) {
                re += a[0] * b[0] + a[1] * b[1];
                im += a[0] * b[1] - a[1] * b[0];
            }
            libm::hypot(re, im)
        }
        _ => {
            let mut acc = [0.0; 4];
            for (a, b) in p.chunks_exact(4).zip(q.chunks_exact(4)) {
                let c = [a[0], -a[1], -a[2], -a[3]];
                acc[0] += c[0] * b[0] - c[1] * b[1] - c[2] * b[2] - c[3] * b[3];
                acc[1] += c[0] * b[1] + c[1] * b[0] + c[2] * b[3] - c[3] * b[2];
                acc[2] += c[0] * b[2] - c[1] * b[3] + c[2] * b[0] + c[3] * b[1];
                acc[3] += c[0] * b[3] + c[1] * b[2] - c[2] * b[1] + c[3] * b[0];
            }
            norm2(&acc)
        }
    }
}

fn check_points(space: Space, p: &Point, q: &Point) -> Result<()> {
    if !space.has_geometry() {
        return Err(Error::Unsupported("point geometry on the Cayley plane".into()));
    }
    let n = space.ambient_dim();
    for pt in [p, q] {
        if pt.coords.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: pt.coords.len() });
        }
    }
    Ok(())
}

/// `cos ρ(p, q)`, computed without an inverse cosine.
pub fn cos_distance(space: Space, p: &Point, q: &Point) -> Result<f64> {
    check_points(space, p, q)?;
    Ok(cos_distance_unchecked(space, &p.coords, &q.coords))
}

pub(crate) fn cos_distance_unchecked(space: Space, p: &[f64], q: &[f64]) -> f64 {
    if space.family == Family::Sphere {
        let dot: f64 = p.iter().zip(q).map(|(a, b)| a * b).sum();
        dot.clamp(-1.0, 1.0)
    } else {
        let m = inner_modulus(space.family, p, q).min(1.0);
        2.0 * m * m - 1.0
    }
}

/// Geodesic distance in `[0, π]`.
///
/// Sphere: `arccos⟨p, q⟩`. Projective families: `2·arccos|⟨p, q⟩|`.
pub fn geodesic_distance(space: Space, p: &Point, q: &Point) -> Result<f64> {
    check_points(space, p, q)?;
    let d = if space.family == Family::Sphere {
        let dot: f64 = p.coords.iter().zip(&q.coords).map(|(a, b)| a * b).sum();
        libm::acos(dot.clamp(-1.0, 1.0))
    } else {
        2.0 * libm::acos(inner_modulus(space.family, &p.coords, &q.coords).min(1.0))
    };
    Ok(d.clamp(0.0, PI))
}

/// True when `p` and `q` represent the same point (`|⟨p, q⟩| = 1` within `1e−10`).
pub fn same_point(space: Space, p: &Point, q: &Point) -> Result<bool> {
    check_points(space, p, q)?;
    let m = if space.family == Family::Sphere {
        p.coords.iter().zip(&q.coords).map(|(a, b)| a * b).sum::<f64>()
    } else {
        inner_modulus(space.family, &p.coords, &q.coords)
    };
    Ok((m - 1.0).abs() <= 1e-10)
}

/// Uniform random point: a normalized vector of standard Gaussians.
pub fn sample_uniform(space: Space, stream: &mut RandomStream) -> Result<Point> {
    if !space.has_geometry() {
        return Err(Error::Unsupported("sampling on the Cayley plane".into()));
    }
    loop {
        let coords: Vec<f64> = (0..space.ambient_dim()).map(|_| stream.normal()).collect();
        if norm2(&coords) > 1e-150 {
            return Point::normalized(coords);
        }
    }
}

//! Charts, metrics, Levi-Civita connections and Ricci curvature of the model
//! manifolds.
//!
//! Every manifold uses a single chart:
//!
//! * `torusN`: `[0,1)^N` with periodic identification and the identity metric.
//! * `sphere2`: `(theta, phi)` in `(0, pi) x [0, 2 pi)` with metric
//!   `diag(1, sin^2 theta)`. The poles are not part of the chart.
//! * `boxN`: `[0,1]^N` with the identity metric and faces `x_i = 0`, `x_i = 1`.
//!
//! Points and tensors are stored in fixed `3`-sized arrays; only the leading
//! `dim` entries are meaningful and the rest are zero.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

pub type Vector = [f64; MAX_DIM];
pub type Matrix = [[f64; MAX_DIM]; MAX_DIM];

pub const ZERO_VECTOR: Vector = [0.0; MAX_DIM];
pub const ZERO_MATRIX: Matrix = [[0.0; MAX_DIM]; MAX_DIM];

pub fn identity(dim: usize) -> Matrix {
    let mut m = ZERO_MATRIX;
    for (i, row) in m.iter_mut().enumerate().take(dim) {
        row[i] = 1.0;
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ManifoldSpec {
    FlatTorus { dim: usize },
    UnitSphere2,
    FlatBox { dim: usize },
}

impl ManifoldSpec {
    pub fn torus(dim: usize) -> Result<Self> {
        if (1..=3).contains(&dim) {
            Ok(Self::FlatTorus { dim })
        } else {
            Err(Error::Config(format!("torus dimension must be 1..=3, got {dim}")))
        }
    }

    pub fn flat_box(dim: usize) -> Result<Self> {
        if (1..=2).contains(&dim) {
            Ok(Self::FlatBox { dim })
        } else {
            Err(Error::Config(format!("box dimension must be 1..=2, got {dim}")))
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Self::FlatTorus { dim } | Self::FlatBox { dim } => dim,
            Self::UnitSphere2 => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match *self {
            Self::FlatTorus { dim: 1 } => "torus1",
            Self::FlatTorus { dim: 2 } => "torus2",
            Self::FlatTorus { .. } => "torus3",
            Self::UnitSphere2 => "sphere2",
            Self::FlatBox { dim: 1 } => "box1",
            Self::FlatBox { .. } => "box2",
        }
    }

    /// Riemannian volume of the whole manifold.
    pub fn volume(&self) -> f64 {
        match self {
            Self::UnitSphere2 => 4.0 * std::f64::consts::PI,
            _ => 1.0,
        }
    }

    pub fn is_flat(&self) -> bool {
        !matches!(self, Self::UnitSphere2)
    }

    pub fn has_boundary(&self) -> bool {
        matches!(self, Self::FlatBox { .. })
    }

    /// Validates `p` against the chart domain and packs it into a [`Vector`].
    pub fn chart_point(&self, p: &[f64]) -> Result<Vector> {
        let dim = self.dim();
        let in_domain = p.len() == dim
            && p.iter().all(|x| x.is_finite())
            && match self {
                Self::FlatTorus { .. } => true,
                Self::UnitSphere2 => p[0] > 0.0 && p[0] < std::f64::consts::PI,
                Self::FlatBox { .. } => p.iter().all(|x| (0.0..=1.0).contains(x)),
            };
        if !in_domain {
            return Err(Error::Domain {
                manifold: self.name().to_string(),
                point: p.to_vec(),
            });
        }
        let mut v = ZERO_VECTOR;
        v[..dim].copy_from_slice(p);
        Ok(v)
    }
}

impl fmt::Display for ManifoldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ManifoldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "torus1" => Self::torus(1),
            "torus2" => Self::torus(2),
            "torus3" => Self::torus(3),
            "sphere2" => Ok(Self::UnitSphere2),
            "box1" => Self::flat_box(1),
            "box2" => Self::flat_box(2),
            other => Err(Error::Config(format!(
                "unknown manifold '{other}' (expected torus1, torus2, torus3, sphere2, box1 or box2)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricAtPoint {
    pub dim: usize,
    pub g: Matrix,
    pub g_inv: Matrix,
    /// `sqrt(det g)`, the density of `vol_M` in chart coordinates.
    pub sqrt_det: f64,
}

impl MetricAtPoint {
    pub fn euclidean(dim: usize) -> Self {
        Self {
            dim,
            g: identity(dim),
            g_inv: identity(dim),
            sqrt_det: 1.0,
        }
    }

    /// `g(u, v)` for two vectors (upper indices).
    pub fn inner(&self, u: &Vector, v: &Vector) -> f64 {
        quadratic_form(&self.g, u, v, self.dim)
    }
}

/// Christoffel symbols of the second kind, indexed `gamma[k][i][j]` for `Γ^k_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChristoffelAtPoint {
    pub dim: usize,
    pub gamma: [Matrix; MAX_DIM],
}

impl ChristoffelAtPoint {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            gamma: [ZERO_MATRIX; MAX_DIM],
        }
    }
}

/// Ricci tensor with lower indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicciAtPoint {
    pub dim: usize,
    pub ric: Matrix,
}

/// Metric, connection and curvature at one chart point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalGeometry {
    pub metric: MetricAtPoint,
    pub christoffel: ChristoffelAtPoint,
    pub ricci: RicciAtPoint,
}

pub fn metric_at(m: &ManifoldSpec, p: &[f64]) -> Result<MetricAtPoint> {
    let p = m.chart_point(p)?;
    Ok(match m {
        ManifoldSpec::UnitSphere2 => sphere_metric(p[0]),
        _ => MetricAtPoint::euclidean(m.dim()),
    })
}

pub fn christoffel_at(m: &ManifoldSpec, p: &[f64]) -> Result<ChristoffelAtPoint> {
    let p = m.chart_point(p)?;
    Ok(match m {
        ManifoldSpec::UnitSphere2 => sphere_christoffel(p[0]),
        _ => ChristoffelAtPoint::zero(m.dim()),
    })
}

pub fn ricci_at(m: &ManifoldSpec, p: &[f64]) -> Result<RicciAtPoint> {
    let p = m.chart_point(p)?;
    Ok(match m {
        // Ric = (n - 1) g = g on the unit round 2-sphere.
        ManifoldSpec::UnitSphere2 => RicciAtPoint {
            dim: 2,
            ric: sphere_metric(p[0]).g,
        },
        _ => RicciAtPoint {
            dim: m.dim(),
            ric: ZERO_MATRIX,
        },
    })
}

pub fn local_geometry(m: &ManifoldSpec, p: &[f64]) -> Result<LocalGeometry> {
    Ok(local_geometry_unchecked(m, &m.chart_point(p)?))
}

pub(crate) fn local_geometry_unchecked(m: &ManifoldSpec, p: &Vector) -> LocalGeometry {
    let dim = m.dim();
    match m {
        ManifoldSpec::UnitSphere2 => {
            let metric = sphere_metric(p[0]);
            LocalGeometry {
                metric,
                christoffel: sphere_christoffel(p[0]),
                ricci: RicciAtPoint { dim, ric: metric.g },
            }
        }
        _ => LocalGeometry {
            metric: MetricAtPoint::euclidean(dim),
            christoffel: ChristoffelAtPoint::zero(dim),
            ricci: RicciAtPoint {
                dim,
                ric: ZERO_MATRIX,
            },
        },
    }
}

/// The musical isomorphism `♯`: returns `g_inv · covector`.
pub fn raise_index(m: &MetricAtPoint, covector: &[f64]) -> Vector {
    let mut out = ZERO_VECTOR;
    for (i, o) in out.iter_mut().enumerate().take(m.dim) {
        *o = (0..m.dim.min(covector.len()))
            .map(|j| m.g_inv[i][j] * covector[j])
            .sum();
    }
    out
}

/// Unit-sphere embedding of the `(theta, phi)` chart into `R^3`.
pub fn sphere_embedding(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

pub(crate) fn quadratic_form(a: &Matrix, u: &Vector, v: &Vector, dim: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            s += a[i][j] * u[i] * v[j];
        }
    }
    s
}

fn sphere_metric(theta: f64) -> MetricAtPoint {
    let s = theta.sin();
    let s2 = s * s;
    let mut g = ZERO_MATRIX;
    let mut g_inv = ZERO_MATRIX;
    g[0][0] = 1.0;
    g[1][1] = s2;
    g_inv[0][0] = 1.0;
    g_inv[1][1] = 1.0 / s2;
    MetricAtPoint {
        dim: 2,
        g,
        g_inv,
        sqrt_det: s,
    }
}

fn sphere_christoffel(theta: f64) -> ChristoffelAtPoint {
    let (s, c) = theta.sin_cos();
    let mut out = ChristoffelAtPoint::zero(2);
    out.gamma[0][1][1] = -s * c;
    out.gamma[1][0][1] = c / s;
    out.gamma[1][1][0] = c / s;
    out
}

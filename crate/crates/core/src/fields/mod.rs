//! Analytic scalar fields with exact second-order jets.

mod harmonics;
mod poly;
mod random;
pub mod syntax;
mod trig;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    self, ChristoffelAtPoint, LocalGeometry, ManifoldSpec, Matrix, MetricAtPoint, RicciAtPoint,
    Vector, ZERO_MATRIX, ZERO_VECTOR,
};
use crate::grid::TensorGrid;

pub use harmonics::{legendre_coefficients, HarmonicTerm, SphericalHarmonicSum, MAX_DEGREE};
pub use poly::{Monomial, Polynomial};
pub use random::{expand_random, representative_frequencies, splitmix64, RandomTrig, XorShift64Star};
pub use trig::{TrigPolynomial, TrigTerm};

/// Relative nondegeneracy threshold: a field is rejected when
/// `min eta_f <= EPS_ND_REL * sup |f|` over the scan grid.
pub const EPS_ND_REL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum FieldSpec {
    #[serde(rename = "trig")]
    Trig(TrigPolynomial),
    #[serde(rename = "sph")]
    Sph(SphericalHarmonicSum),
    #[serde(rename = "random")]
    Random(RandomTrig),
    #[serde(rename = "poly")]
    Poly(Polynomial),
}

impl FieldSpec {
    /// Single-document JSON serialization.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("field specs always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("field spec: {e}")))
    }

    /// Replaces the seed of a random field; other families are unchanged.
    pub fn with_seed(self, seed: u64) -> Self {
        match self {
            Self::Random(r) => Self::Random(RandomTrig { seed, ..r }),
            other => other,
        }
    }
}

/// Value and raw chart partials `df_i`, `d2f_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartJet2 {
    pub dim: usize,
    pub f: f64,
    pub df: Vector,
    pub d2f: Matrix,
}

/// Every pointwise symbol appearing in the volume formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovariantJet2 {
    pub dim: usize,
    pub f: f64,
    /// `grad f` (upper index).
    pub grad: Vector,
    pub grad_norm: f64,
    /// Covariant Hessian (lower indices).
    pub hess: Matrix,
    pub laplacian: f64,
    /// `sqrt(f^2 + |grad f|^2)`.
    pub eta: f64,
    pub sigma: i8,
    /// `Hess f (grad f, grad f)`.
    pub hess_qf: f64,
    /// Squared Hilbert-Schmidt norm of `Hess f`.
    pub hess_hs_sq: f64,
    /// `nabla_{grad f} grad f` (upper index).
    pub nabla_grad: Vector,
    /// `Ric(grad f, grad f)`.
    pub ric_qf: f64,
}

impl CovariantJet2 {
    /// `Hess f (grad f, nabla_{grad f} grad f)`.
    pub fn hess_grad_nabla(&self) -> f64 {
        geometry::quadratic_form(&self.hess, &self.grad, &self.nabla_grad, self.dim)
    }
}

pub fn covariant_jet(
    chart: &ChartJet2,
    metric: &MetricAtPoint,
    gamma: &ChristoffelAtPoint,
    ric: &RicciAtPoint,
) -> CovariantJet2 {
    let n = chart.dim;
    let g_inv = &metric.g_inv;
    let grad = geometry::raise_index(metric, &chart.df[..n]);
    let grad_sq: f64 = (0..n).map(|i| chart.df[i] * grad[i]).sum::<f64>().max(0.0);

    let mut hess = ZERO_MATRIX;
    for i in 0..n {
        for j in 0..n {
            let christoffel: f64 = (0..n).map(|k| gamma.gamma[k][i][j] * chart.df[k]).sum();
            hess[i][j] = chart.d2f[i][j] - christoffel;
        }
    }

    // Mixed tensor A = g^-1 H; Laplacian is its trace, |H|^2 is tr(A A).
    let mut mixed = ZERO_MATRIX;
    for i in 0..n {
        for j in 0..n {
            mixed[i][j] = (0..n).map(|k| g_inv[i][k] * hess[k][j]).sum();
        }
    }
    let laplacian: f64 = (0..n).map(|i| mixed[i][i]).sum();
    let mut hess_hs_sq = 0.0;
    for i in 0..n {
        for j in 0..n {
            hess_hs_sq += mixed[i][j] * mixed[j][i];
        }
    }

    let mut nabla_grad = ZERO_VECTOR;
    for (k, out) in nabla_grad.iter_mut().enumerate().take(n) {
        *out = (0..n).map(|j| mixed[k][j] * grad[j]).sum();
    }

    let f = chart.f;
    CovariantJet2 {
        dim: n,
        f,
        grad,
        grad_norm: grad_sq.sqrt(),
        hess,
        laplacian,
        eta: (f * f + grad_sq).sqrt(),
        sigma: if f > 0.0 {
            1
        } else if f < 0.0 {
            -1
        } else {
            0
        },
        hess_qf: geometry::quadratic_form(&hess, &grad, &grad, n),
        hess_hs_sq,
        nabla_grad,
        ric_qf: geometry::quadratic_form(&ric.ric, &grad, &grad, n),
    }
}

#[derive(Debug, Clone)]
enum Evaluator {
    Trig(trig::TrigEval),
    Harmonic(harmonics::HarmonicEval),
    Poly(Polynomial),
}

/// A field spec validated against a manifold and compiled for evaluation.
#[derive(Debug, Clone)]
pub struct Field {
    manifold: ManifoldSpec,
    eval: Evaluator,
}

impl Field {
    pub fn new(spec: &FieldSpec, m: &ManifoldSpec) -> Result<Self> {
        let dim_mismatch = |d: usize| {
            Error::Config(format!(
                "field dimension {d} does not match manifold {m} (dimension {})",
                m.dim()
            ))
        };
        let eval = match spec {
            FieldSpec::Trig(p) => {
                if matches!(m, ManifoldSpec::UnitSphere2) {
                    return Err(Error::Config("trig fields are not defined on sphere2".into()));
                }
                if p.dim != m.dim() {
                    return Err(dim_mismatch(p.dim));
                }
                if let Some(t) = p.terms.iter().find(|t| t.k.len() != p.dim) {
                    return Err(Error::Config(format!(
                        "frequency {:?} has length {} but field dimension is {}",
                        t.k,
                        t.k.len(),
                        p.dim
                    )));
                }
                if p.terms.iter().any(|t| {
                    !t.a.is_finite() || !t.b.is_finite() || t.k.iter().any(|k| !k.is_finite())
                }) {
                    return Err(Error::Config("non-finite trig coefficient".into()));
                }
                if matches!(m, ManifoldSpec::FlatTorus { .. }) && !p.has_integer_frequencies() {
                    return Err(Error::Config(
                        "trig fields on a torus need integer frequencies".into(),
                    ));
                }
                Evaluator::Trig(trig::TrigEval::new(p))
            }
            FieldSpec::Random(r) => {
                if matches!(m, ManifoldSpec::UnitSphere2) {
                    return Err(Error::Config("random trig fields are not defined on sphere2".into()));
                }
                if r.dim != m.dim() {
                    return Err(dim_mismatch(r.dim));
                }
                if r.max_freq < 1 || !r.scale.is_finite() {
                    return Err(Error::Config("random field needs max_freq >= 1 and finite scale".into()));
                }
                Evaluator::Trig(trig::TrigEval::new(&expand_random(r)))
            }
            FieldSpec::Sph(s) => {
                if !matches!(m, ManifoldSpec::UnitSphere2) {
                    return Err(Error::Config(format!(
                        "spherical harmonic fields need sphere2, got {m}"
                    )));
                }
                for t in &s.terms {
                    if t.l > MAX_DEGREE || t.m.unsigned_abs() > t.l || !t.c.is_finite() {
                        return Err(Error::Config(format!(
                            "unsupported harmonic (l={}, m={}, c={}); need l <= {MAX_DEGREE}, |m| <= l",
                            t.l, t.m, t.c
                        )));
                    }
                }
                Evaluator::Harmonic(harmonics::HarmonicEval::new(s))
            }
            FieldSpec::Poly(p) => {
                if !matches!(m, ManifoldSpec::FlatBox { .. }) {
                    return Err(Error::Config(format!(
                        "polynomial fields are only periodic-free on boxes, got {m}"
                    )));
                }
                if p.dim != m.dim() {
                    return Err(dim_mismatch(p.dim));
                }
                if p.terms.iter().any(|t| t.e.len() != p.dim || !t.c.is_finite()) {
                    return Err(Error::Config("malformed polynomial term".into()));
                }
                Evaluator::Poly(p.clone())
            }
        };
        Ok(Self { manifold: *m, eval })
    }

    pub fn manifold(&self) -> &ManifoldSpec {
        &self.manifold
    }

    /// Plain value. Also valid at the sphere poles and outside the box, since
    /// oracles evaluate on closed vertex grids.
    pub fn value(&self, p: &Vector) -> f64 {
        match &self.eval {
            Evaluator::Trig(t) => t.value(p),
            Evaluator::Harmonic(h) => h.value(p),
            Evaluator::Poly(q) => q.value(p),
        }
    }

    pub fn chart_jet(&self, p: &Vector) -> ChartJet2 {
        match &self.eval {
            Evaluator::Trig(t) => t.jet(p),
            Evaluator::Harmonic(h) => h.jet(p),
            Evaluator::Poly(q) => q.jet(p),
        }
    }

    /// Covariant jet at a point already known to lie in the chart.
    pub fn covariant_jet(&self, p: &Vector) -> CovariantJet2 {
        let chart = self.chart_jet(p);
        let LocalGeometry {
            metric,
            christoffel,
            ricci,
        } = geometry::local_geometry_unchecked(&self.manifold, p);
        covariant_jet(&chart, &metric, &christoffel, &ricci)
    }
}

pub fn eval_chart_jet(spec: &FieldSpec, m: &ManifoldSpec, p: &[f64]) -> Result<ChartJet2> {
    let field = Field::new(spec, m)?;
    Ok(field.chart_jet(&m.chart_point(p)?))
}

/// Result of scanning `eta_f` over a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanReport {
    pub min_eta: f64,
    pub argmin: Vector,
    /// `sup |f|` over the scanned points.
    pub sup_abs: f64,
    pub points: usize,
}

impl ScanReport {
    pub fn threshold(&self) -> f64 {
        EPS_ND_REL * self.sup_abs
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.min_eta > self.threshold())
    }

    pub fn check(&self) -> Result<()> {
        if self.is_degenerate() {
            Err(Error::Degenerate {
                min_eta: self.min_eta,
                threshold: self.threshold(),
            })
        } else {
            Ok(())
        }
    }

    pub(crate) fn merge(self, other: Self) -> Self {
        let (min_eta, argmin) = if other.min_eta < self.min_eta {
            (other.min_eta, other.argmin)
        } else {
            (self.min_eta, self.argmin)
        };
        Self {
            min_eta,
            argmin,
            sup_abs: self.sup_abs.max(other.sup_abs),
            points: self.points + other.points,
        }
    }
}

/// The vertex grid used by [`nondegeneracy_scan`].
///
/// Tori use `i / R` (including lattice points where symmetric fields tend to
/// be critical), boxes `i / R` for `i = 0..=R`, and the sphere
/// `theta = i pi / R` (`0 < i < R`) times `phi = 2 pi j / (2R)`.
pub fn scan_grid(m: &ManifoldSpec, resolution: usize) -> TensorGrid {
    let r = resolution as f64;
    match *m {
        ManifoldSpec::FlatTorus { dim } => {
            TensorGrid::new(vec![(0..resolution).map(|i| i as f64 / r).collect(); dim])
        }
        ManifoldSpec::FlatBox { dim } => {
            TensorGrid::new(vec![(0..=resolution).map(|i| i as f64 / r).collect(); dim])
        }
        ManifoldSpec::UnitSphere2 => {
            let pi = std::f64::consts::PI;
            TensorGrid::new(vec![
                (1..resolution).map(|i| i as f64 * pi / r).collect(),
                (0..2 * resolution)
                    .map(|j| j as f64 * pi / r)
                    .collect(),
            ])
        }
    }
}

pub(crate) fn scan_points(field: &Field, grid: &TensorGrid) -> ScanReport {
    let empty = ScanReport {
        min_eta: f64::INFINITY,
        argmin: ZERO_VECTOR,
        sup_abs: 0.0,
        points: 0,
    };
    (0..grid.len())
        .into_par_iter()
        .with_min_len(1024)
        .map(|i| {
            let p = grid.point(i);
            let j = field.covariant_jet(&p);
            ScanReport {
                min_eta: j.eta,
                argmin: p,
                sup_abs: j.f.abs(),
                points: 1,
            }
        })
        .reduce(|| empty, ScanReport::merge)
}

/// Minimum of `eta_f` (and `sup |f|`) over the scan grid of resolution `R`.
pub fn nondegeneracy_scan(
    spec: &FieldSpec,
    m: &ManifoldSpec,
    grid_resolution: usize,
) -> Result<ScanReport> {
    if grid_resolution < 8 {
        return Err(Error::Usage(format!(
            "scan resolution must be >= 8, got {grid_resolution}"
        )));
    }
    let field = Field::new(spec, m)?;
    Ok(scan_points(&field, &scan_grid(m, grid_resolution)))
}

//! Volume estimators: integrate a pointwise integrand against a quadrature
//! rule and apply the formula's prefactor.
//!
//! Every closed-manifold formula here comes from one divergence identity,
//! `vol(Z_f) = -1/2 ∫ div(F(grad f / f))`, specialised to radial `F`
//! (`F(u) = G(|u|) u`). The unspecialised `F` form is only used directly for
//! the boundary flux of [`estimate_corner`], with `F(u) = u / sqrt(1 + |u|^2)`.

mod integrands;

use std::f64::consts::FRAC_1_PI;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

pub use integrands::*;

use crate::error::{Error, Result};
use crate::fields::{scan_grid, scan_points, CovariantJet2, Field, FieldSpec, ScanReport};
use crate::geometry::{ManifoldSpec, Vector, ZERO_VECTOR};
use crate::quadrature::{FaceRule, QuadratureRule};
use crate::report::EstimateReport;
use crate::summation::{self, KahanSum};

#[derive(Debug, Clone, Copy)]
pub enum EstimatorId {
    Algebraic,
    Arctan,
    Tanh,
    GeneralG(GBigSpec),
    G1(GSpec),
    G2(GSpec),
    Lipschitz,
    /// Lipschitz integrand with the Ricci term dropped (diagnostic).
    LipschitzNoRicci,
}

impl EstimatorId {
    /// The estimators exposed by name on the command line.
    pub const NAMES: [&'static str; 8] = [
        "algebraic",
        "arctan",
        "tanh",
        "lipschitz",
        "g1:tanh",
        "g2:tanh",
        "g2:arctan",
        "G:invsqrt",
    ];

    pub fn all() -> Vec<Self> {
        Self::NAMES.iter().map(|n| n.parse().unwrap()).collect()
    }

    pub fn name(&self) -> String {
        match self {
            Self::Algebraic => "algebraic".into(),
            Self::Arctan => "arctan".into(),
            Self::Tanh => "tanh".into(),
            Self::GeneralG(s) => format!("G:{}", s.name),
            Self::G1(s) => format!("g1:{}", s.name),
            Self::G2(s) => format!("g2:{}", s.name),
            Self::Lipschitz => "lipschitz".into(),
            Self::LipschitzNoRicci => "lipschitz:noricci".into(),
        }
    }

    /// Outer factor of the volume formula.
    pub fn prefactor(&self) -> f64 {
        match self {
            Self::Arctan => FRAC_1_PI,
            _ => 0.5,
        }
    }

    /// The bracketed integrand at one jet.
    #[inline]
    pub fn integrand(&self, j: &CovariantJet2) -> f64 {
        match self {
            Self::Algebraic => integrand_algebraic(j),
            Self::Arctan => integrand_arctan(j),
            Self::Tanh => integrand_tanh(j),
            Self::GeneralG(s) => integrand_general_g(s, j),
            Self::G1(s) => integrand_g1(s, j),
            Self::G2(s) => integrand_g2(s, j),
            Self::Lipschitz => integrand_lipschitz(j),
            Self::LipschitzNoRicci => integrand_lipschitz_without_ricci(j),
        }
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for EstimatorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || {
            Error::Config(format!(
                "unknown estimator '{s}' (expected one of {})",
                Self::NAMES.join(", ")
            ))
        };
        Ok(match s {
            "algebraic" => Self::Algebraic,
            "arctan" => Self::Arctan,
            "tanh" => Self::Tanh,
            "lipschitz" => Self::Lipschitz,
            "lipschitz:noricci" => Self::LipschitzNoRicci,
            _ => {
                let (family, g) = s.split_once(':').ok_or_else(unknown)?;
                match family {
                    "G" => Self::GeneralG(GBigSpec::by_name(g).ok_or_else(unknown)?),
                    "g1" => Self::G1(GSpec::by_name(g).ok_or_else(unknown)?),
                    // g2 needs g(0) = 0.
                    "g2" if g != "one" => Self::G2(GSpec::by_name(g).ok_or_else(unknown)?),
                    _ => return Err(unknown()),
                }
            }
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct ChunkStats {
    sum: f64,
    scan: ScanReport,
    integrand_min: f64,
    integrand_max: f64,
    zero_nodes: usize,
    bad: Option<(usize, f64)>,
}

fn integrate_nodes(
    field: &Field,
    rule: &QuadratureRule,
    integrand: impl Fn(&CovariantJet2) -> f64 + Sync + Send,
) -> ChunkStats {
    let chunks = summation::map_chunks(rule.len(), |range| {
        let mut acc = KahanSum::new();
        let mut stats = ChunkStats {
            sum: 0.0,
            scan: ScanReport {
                min_eta: f64::INFINITY,
                argmin: ZERO_VECTOR,
                sup_abs: 0.0,
                points: 0,
            },
            integrand_min: f64::INFINITY,
            integrand_max: f64::NEG_INFINITY,
            zero_nodes: 0,
            bad: None,
        };
        for i in range {
            let p = &rule.nodes[i];
            let j = field.covariant_jet(p);
            let v = integrand(&j);
            if !v.is_finite() && stats.bad.is_none() {
                stats.bad = Some((i, v));
            }
            acc.add(rule.weights[i] * v);
            stats.integrand_min = stats.integrand_min.min(v);
            stats.integrand_max = stats.integrand_max.max(v);
            if j.f == 0.0 {
                stats.zero_nodes += 1;
            }
            stats.scan = stats.scan.merge(ScanReport {
                min_eta: j.eta,
                argmin: *p,
                sup_abs: j.f.abs(),
                points: 1,
            });
        }
        stats.sum = acc.value();
        stats
    });
    let mut total = KahanSum::new();
    let mut out = chunks[0];
    for c in &chunks {
        total.add(c.sum);
    }
    for c in &chunks[1..] {
        out.scan = out.scan.merge(c.scan);
        out.integrand_min = out.integrand_min.min(c.integrand_min);
        out.integrand_max = out.integrand_max.max(c.integrand_max);
        out.zero_nodes += c.zero_nodes;
        out.bad = out.bad.or(c.bad);
    }
    out.sum = total.value();
    out
}

fn check_rule(m: &ManifoldSpec, rule: &QuadratureRule) -> Result<()> {
    if rule.is_empty() || rule.dim != m.dim() || rule.resolution.is_empty() {
        return Err(Error::Usage(format!(
            "rule '{}' does not fit manifold {m}",
            rule.label
        )));
    }
    Ok(())
}

fn point_vec(p: &Vector, dim: usize) -> Vec<f64> {
    p[..dim].to_vec()
}

/// Integrates one estimator over a closed manifold.
///
/// The field is first scanned on the vertex grid matching the rule
/// resolution; the scan and the rule nodes together decide degeneracy.
pub fn estimate(
    spec: &FieldSpec,
    m: &ManifoldSpec,
    est: &EstimatorId,
    rule: &QuadratureRule,
) -> Result<EstimateReport> {
    let start = Instant::now();
    if m.has_boundary() {
        return Err(Error::Config(format!(
            "{m} has a boundary; use the corner estimator"
        )));
    }
    check_rule(m, rule)?;
    let field = Field::new(spec, m)?;
    let grid_scan = scan_points(&field, &scan_grid(m, rule.resolution[0].max(8)));
    grid_scan.check()?;

    let stats = integrate_nodes(&field, rule, |j| est.integrand(j));
    let scan = grid_scan.merge(stats.scan);
    scan.check()?;
    if let Some((index, value)) = stats.bad {
        return Err(Error::Numerical {
            index,
            point: point_vec(&rule.nodes[index], m.dim()),
            value,
        });
    }
    Ok(EstimateReport {
        estimator: est.name(),
        manifold: m.name().to_string(),
        rule: rule.label.clone(),
        resolution: rule.resolution_label(),
        value: est.prefactor() * stats.sum,
        min_eta: scan.min_eta,
        integrand_min: stats.integrand_min,
        integrand_max: stats.integrand_max,
        node_count: rule.len(),
        zero_nodes: stats.zero_nodes,
        min_face_eta: None,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Volume on a flat box from the divergence identity with boundary flux:
///
/// `vol(Z_f) = 1/2 (∫_∂M sigma_f <grad f, nu> / eta_f + ∫_M algebraic integrand)`.
///
/// Requires `Z_f` to be transverse to every face and to avoid the corners.
pub fn estimate_corner(
    spec: &FieldSpec,
    m: &ManifoldSpec,
    rule: &QuadratureRule,
    faces: &[FaceRule],
) -> Result<EstimateReport> {
    let start = Instant::now();
    let dim = match *m {
        ManifoldSpec::FlatBox { dim } => dim,
        _ => {
            return Err(Error::Config(format!(
                "the corner estimator needs box1 or box2, got {m}"
            )))
        }
    };
    check_rule(m, rule)?;
    if faces.len() != 2 * dim {
        return Err(Error::Usage(format!(
            "{} face rules for a {dim}-dimensional box",
            faces.len()
        )));
    }
    let field = Field::new(spec, m)?;
    let grid_scan = scan_points(&field, &scan_grid(m, rule.resolution[0].max(8)));
    grid_scan.check()?;
    let eps = grid_scan.threshold();

    // Corners first: the nodal set must stay away from them.
    for c in 0..(1usize << dim) {
        let mut p = ZERO_VECTOR;
        for (d, x) in p.iter_mut().enumerate().take(dim) {
            *x = ((c >> d) & 1) as f64;
        }
        let f = field.value(&p);
        if !(f.abs() > eps) {
            return Err(Error::Transversality {
                face: format!("corner {:?}", point_vec(&p, dim)),
                value: f.abs(),
                threshold: eps,
            });
        }
    }

    let mut boundary = KahanSum::new();
    let mut min_face_eta = f64::INFINITY;
    let scan_r = rule.resolution[0].max(8);
    for face in faces {
        // Transversality: `eta_f` and `max(|f|, |tangential grad f|)` stay
        // above eps on the face nodes and on the face's scan vertices.
        let mut worst = f64::INFINITY;
        let mut check = |j: &CovariantJet2| {
            let tangential = (0..dim)
                .filter(|&d| d != face.axis)
                .map(|d| j.grad[d] * j.grad[d])
                .sum::<f64>()
                .sqrt();
            worst = worst.min(j.eta).min(j.f.abs().max(tangential));
        };
        for (p, w) in face.rule.nodes.iter().zip(&face.rule.weights) {
            let j = field.covariant_jet(p);
            min_face_eta = min_face_eta.min(j.eta);
            check(&j);
            let flux: f64 = (0..dim).map(|d| j.grad[d] * face.normal[d]).sum();
            boundary.add(w * f64::from(j.sigma) * flux / j.eta);
        }
        if dim == 2 {
            for i in 0..=scan_r {
                let mut p = ZERO_VECTOR;
                p[face.axis] = face.side;
                p[1 - face.axis] = i as f64 / scan_r as f64;
                check(&field.covariant_jet(&p));
            }
        }
        if !(worst > eps) {
            return Err(Error::Transversality {
                face: face.face.clone(),
                value: worst,
                threshold: eps,
            });
        }
    }

    let stats = integrate_nodes(&field, rule, integrand_algebraic);
    let scan = grid_scan.merge(stats.scan);
    scan.check()?;
    if let Some((index, value)) = stats.bad {
        return Err(Error::Numerical {
            index,
            point: point_vec(&rule.nodes[index], dim),
            value,
        });
    }
    Ok(EstimateReport {
        estimator: "corner".into(),
        manifold: m.name().to_string(),
        rule: rule.label.clone(),
        resolution: rule.resolution_label(),
        value: 0.5 * summation::compensated_sum([boundary.value(), stats.sum]),
        min_eta: scan.min_eta,
        integrand_min: stats.integrand_min,
        integrand_max: stats.integrand_max,
        node_count: rule.len(),
        zero_nodes: stats.zero_nodes,
        min_face_eta: Some(min_face_eta),
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Largest difference of `est`'s integrand between consecutive samples
/// spaced `h` apart on the straight chart segment from `a` to `b`.
pub fn transect_max_jump(
    spec: &FieldSpec,
    m: &ManifoldSpec,
    est: &EstimatorId,
    a: &[f64],
    b: &[f64],
    h: f64,
) -> Result<f64> {
    let (pa, pb) = (m.chart_point(a)?, m.chart_point(b)?);
    let length = (0..m.dim()).map(|d| (pb[d] - pa[d]).powi(2)).sum::<f64>().sqrt();
    if !(h > 0.0) || !(length > h) {
        return Err(Error::Usage(format!(
            "transect of length {length} cannot be sampled with spacing {h}"
        )));
    }
    let field = Field::new(spec, m)?;
    let steps = (length / h).round() as usize;
    let sample = |i: usize| {
        let t = i as f64 * h / length;
        let mut p = ZERO_VECTOR;
        for d in 0..m.dim() {
            p[d] = pa[d] + t * (pb[d] - pa[d]);
        }
        est.integrand(&field.covariant_jet(&p))
    };
    let mut prev = sample(0);
    let mut jump: f64 = 0.0;
    for i in 1..=steps {
        let next = sample(i);
        jump = jump.max((next - prev).abs());
        prev = next;
    }
    Ok(jump)
}

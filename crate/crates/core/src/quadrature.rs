//! Deterministic quadrature rules whose weights already carry the Riemannian
//! volume element.
//!
//! Node order is canonical: tensor rules enumerate the first chart axis
//! slowest (see [`TensorGrid`]). On the sphere the first axis is `theta`,
//! increasing.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::{ManifoldSpec, Vector, ZERO_VECTOR};
use crate::grid::{midpoints, TensorGrid};
use crate::summation;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<Vector>,
    pub weights: Vec<f64>,
    pub label: String,
    pub dim: usize,
    /// Nodes per axis, e.g. `[N]` for tori and boxes, `[N_theta, N_phi]` on the sphere.
    pub resolution: Vec<usize>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        summation::compensated_sum(self.weights.iter().copied())
    }

    /// `"512"` or `"256x512"`.
    pub fn resolution_label(&self) -> String {
        resolution_label(&self.resolution)
    }
}

pub fn resolution_label(res: &[usize]) -> String {
    res.iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join("x")
}

fn from_grid(grid: &TensorGrid, weight: impl Fn(&[usize]) -> f64, label: String, resolution: Vec<usize>) -> QuadratureRule {
    let n = grid.len();
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        nodes.push(grid.point(i));
        weights.push(weight(&grid.multi_index(i)[..grid.dim()]));
    }
    QuadratureRule {
        nodes,
        weights,
        label,
        dim: grid.dim(),
        resolution,
    }
}

/// Midpoint rule on the flat torus: nodes `(i + 1/2) / N`, weights `N^-dim`.
pub fn torus_rule(dim: usize, n: usize) -> Result<QuadratureRule> {
    ManifoldSpec::torus(dim)?;
    if n < 8 {
        return Err(Error::Usage(format!("torus rule needs N >= 8, got {n}")));
    }
    let w = (n as f64).powi(-(dim as i32));
    Ok(from_grid(
        &TensorGrid::new(vec![midpoints(n); dim]),
        |_| w,
        format!("torus{dim}-uniform-{n}"),
        vec![n],
    ))
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes decreasing.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, refined by Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        weights[i] = w;
        nodes[n - 1 - i] = -x;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre in `u = cos theta` times a uniform midpoint rule in `phi`.
pub fn sphere_rule(n_theta: usize, n_phi: usize) -> Result<QuadratureRule> {
    if n_theta < 8 || n_phi < 16 {
        return Err(Error::Usage(format!(
            "sphere rule needs N_theta >= 8 and N_phi >= 16, got {n_theta}x{n_phi}"
        )));
    }
    let (u, wu) = gauss_legendre(n_theta);
    let theta: Vec<f64> = u.iter().map(|x| x.acos()).collect();
    let phi: Vec<f64> = midpoints(n_phi).into_iter().map(|t| TAU * t).collect();
    let wphi = TAU / n_phi as f64;
    Ok(from_grid(
        &TensorGrid::new(vec![theta, phi]),
        |idx| wu[idx[0]] * wphi,
        format!("sphere2-gauss-{n_theta}x{n_phi}"),
        vec![n_theta, n_phi],
    ))
}

/// Interior midpoint rule on `[0,1]^dim`.
pub fn box_rule(dim: usize, n: usize) -> Result<QuadratureRule> {
    ManifoldSpec::flat_box(dim)?;
    if n < 8 {
        return Err(Error::Usage(format!("box rule needs N >= 8, got {n}")));
    }
    let w = (n as f64).powi(-(dim as i32));
    Ok(from_grid(
        &TensorGrid::new(vec![midpoints(n); dim]),
        |_| w,
        format!("box{dim}-midpoint-{n}"),
        vec![n],
    ))
}

/// One boundary face of a box with its outward unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceRule {
    /// `"x0=0"`, `"x1=1"`, ...
    pub face: String,
    pub axis: usize,
    pub side: f64,
    pub normal: Vector,
    pub rule: QuadratureRule,
}

/// Faces of `[0,1]^dim` in the order `x0=0, x0=1, x1=0, x1=1`.
pub fn box_face_rules(dim: usize, n: usize) -> Result<Vec<FaceRule>> {
    ManifoldSpec::flat_box(dim)?;
    if n < 8 {
        return Err(Error::Usage(format!("box face rules need N >= 8, got {n}")));
    }
    let mut faces = Vec::with_capacity(2 * dim);
    for axis in 0..dim {
        for side in [0.0, 1.0] {
            let mut normal = ZERO_VECTOR;
            normal[axis] = if side == 0.0 { -1.0 } else { 1.0 };
            let axes: Vec<Vec<f64>> = (0..dim)
                .map(|d| if d == axis { vec![side] } else { midpoints(n) })
                .collect();
            let w = (n as f64).powi(-(dim as i32 - 1));
            let face = format!("x{axis}={side}");
            let rule = from_grid(
                &TensorGrid::new(axes),
                |_| w,
                format!("box{dim}-face-{face}-{n}"),
                vec![n],
            );
            faces.push(FaceRule {
                face,
                axis,
                side,
                normal,
                rule,
            });
        }
    }
    Ok(faces)
}

/// Builds the default rule for a manifold from a resolution list
/// (`[N]`, or `[N_theta, N_phi]` on the sphere; a single `N` on the sphere
/// means `N x 2N`).
pub fn rule_for(m: &ManifoldSpec, resolution: &[usize]) -> Result<QuadratureRule> {
    match (m, resolution) {
        (ManifoldSpec::FlatTorus { dim }, [n]) => torus_rule(*dim, *n),
        (ManifoldSpec::FlatBox { dim }, [n]) => box_rule(*dim, *n),
        (ManifoldSpec::UnitSphere2, [nt, np]) => sphere_rule(*nt, *np),
        (ManifoldSpec::UnitSphere2, [n]) => sphere_rule(*n, 2 * *n),
        _ => Err(Error::Usage(format!(
            "resolution {} does not fit manifold {m}",
            resolution_label(resolution)
        ))),
    }
}

/// Compensated dot product of `values` with the rule weights, in node order.
pub fn integrate(values: &[f64], rule: &QuadratureRule) -> Result<f64> {
    if values.len() != rule.len() {
        return Err(Error::Usage(format!(
            "{} values for a rule with {} nodes",
            values.len(),
            rule.len()
        )));
    }
    Ok(summation::deterministic_sum(values.len(), |i| {
        values[i] * rule.weights[i]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate_fn(rule: &QuadratureRule, f: impl Fn(&Vector) -> f64) -> f64 {
        let values: Vec<f64> = rule.nodes.iter().map(f).collect();
        integrate(&values, rule).unwrap()
    }

    #[test]
    fn torus_examples() {
        let r = torus_rule(1, 8).unwrap();
        assert_eq!(r.len(), 8);
        assert_eq!(r.nodes[0][0], 1.0 / 16.0);
        assert_eq!(r.nodes[1][0], 3.0 / 16.0);
        assert!(r.weights.iter().all(|&w| w == 0.125));
        assert_eq!(r.total_weight(), 1.0);
        assert_eq!(integrate_fn(&r, |x| x[0]), 0.5);

        let r2 = torus_rule(2, 8).unwrap();
        assert_eq!(r2.len(), 64);
        assert_eq!(r2.total_weight(), 1.0);
        assert_eq!(integrate_fn(&r2, |_| 1.0), 1.0);
        assert_eq!(r2.label, "torus2-uniform-8");
        assert!(torus_rule(2, 7).is_err());
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for n in [8, 9, 33, 256] {
            let (x, w) = gauss_legendre(n);
            assert!(x.windows(2).all(|p| p[0] > p[1]));
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for deg in 0..(2 * n).min(40) {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn sphere_examples() {
        let r = sphere_rule(32, 64).unwrap();
        assert!((r.total_weight() - 4.0 * PI).abs() < 1e-12);
        assert!(integrate_fn(&r, |p| p[0].cos()).abs() < 1e-12);
        let c2 = integrate_fn(&r, |p| p[0].cos().powi(2));
        assert!((c2 - 4.0 * PI / 3.0).abs() < 1e-10);
        assert!(r.nodes.iter().all(|p| p[0] > 0.0 && p[0] < PI));
        assert!(r.nodes.windows(2).all(|w| w[0][0] <= w[1][0]));
        assert!(sphere_rule(7, 64).is_err());
        assert!(sphere_rule(8, 15).is_err());
    }

    #[test]
    fn box_examples() {
        let faces = box_face_rules(1, 8).unwrap();
        assert_eq!(faces.len(), 2);
        assert_eq!(faces[0].normal[0], -1.0);
        assert_eq!(faces[1].normal[0], 1.0);
        for f in &faces {
            assert_eq!(f.rule.len(), 1);
            assert_eq!(f.rule.weights[0], 1.0);
        }
        assert_eq!(faces[1].rule.nodes[0][0], 1.0);

        let faces = box_face_rules(2, 8).unwrap();
        assert_eq!(faces.len(), 4);
        for f in &faces {
            assert_eq!(f.rule.len(), 8);
            assert!(f.rule.weights.iter().all(|&w| w == 0.125));
            assert!(f.rule.nodes.iter().all(|p| p[f.axis] == f.side));
        }
        assert_eq!(box_rule(2, 8).unwrap().total_weight(), 1.0);
    }

    #[test]
    fn integrate_rejects_length_mismatch() {
        let r = torus_rule(1, 8).unwrap();
        assert!(matches!(integrate(&[1.0; 7], &r), Err(Error::Usage(_))));
    }
}

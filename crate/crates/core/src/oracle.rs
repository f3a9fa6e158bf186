//! Derivative-free measurement of `vol(f^-1(0))` from sampled field values.
//!
//! * dimension 1: sign changes on a uniform grid, confirmed by bisection and
//!   counted until the count is stable under refinement;
//! * dimension 2: marching squares with linear edge interpolation (flat
//!   metric on tori and boxes, chord lengths in R^3 on the sphere);
//! * dimension 3: marching tetrahedra with a fixed 6-tetrahedron cube split.
//!
//! Samples with `|f| < NUDGE_BELOW` are replaced by `f + NUDGE` before any
//! sign test. Ambiguous squares are resolved by the sign at the cell centre.
//! Per-cell contributions are summed in cell order with the deterministic
//! reduction of [`crate::summation`].

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{self, Write};
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{Field, FieldSpec};
use crate::geometry::{sphere_embedding, ManifoldSpec, Vector, ZERO_VECTOR};
use crate::quadrature::resolution_label;
use crate::report::{OracleMethod, OracleReport};
use crate::summation::{self, KahanSum};

pub const NUDGE_BELOW: f64 = 1e-14;
pub const NUDGE: f64 = 1e-12;
/// Maximum number of grid doublings in [`count_zeros_1d`].
pub const MAX_DOUBLINGS: usize = 6;
const MIN_RESOLUTION: usize = 8;

#[inline]
fn nudge(v: f64) -> f64 {
    if v.abs() < NUDGE_BELOW {
        v + NUDGE
    } else {
        v
    }
}

/// One extracted piece: a root (1 point), a segment (2), a triangle (3) or a
/// quadrilateral (4), in chart coordinates (ambient R^3 on the sphere).
pub type Piece = Vec<Vector>;

#[derive(Debug, Clone)]
pub struct OracleOutput {
    pub report: OracleReport,
    /// Empty unless geometry was requested.
    pub pieces: Vec<Piece>,
}

impl OracleOutput {
    /// Writes one piece per line as `x y z; x y z; ...`.
    pub fn write_pieces(&self, mut out: impl Write) -> io::Result<()> {
        for piece in &self.pieces {
            let line: Vec<String> = piece
                .iter()
                .map(|p| format!("{} {} {}", p[0], p[1], p[2]))
                .collect();
            writeln!(out, "{}", line.join("; "))?;
        }
        Ok(())
    }
}

fn check_resolution(n: usize, what: &str) -> Result<()> {
    if n < MIN_RESOLUTION {
        return Err(Error::Usage(format!(
            "{what} resolution {n} is below {MIN_RESOLUTION}"
        )));
    }
    Ok(())
}

/// Runs the oracle matching the manifold. A single resolution `N` on the
/// sphere means `N x 2N`.
pub fn oracle(
    spec: &FieldSpec,
    m: &ManifoldSpec,
    resolution: &[usize],
    keep_pieces: bool,
) -> Result<OracleOutput> {
    let field = Field::new(spec, m)?;
    let n = *resolution
        .first()
        .ok_or_else(|| Error::Usage("empty oracle resolution".into()))?;
    match *m {
        ManifoldSpec::FlatTorus { dim: 1 } | ManifoldSpec::FlatBox { dim: 1 } => {
            zeros_1d(&field, n, keep_pieces)
        }
        ManifoldSpec::FlatTorus { dim: 2 } | ManifoldSpec::FlatBox { dim: 2 } => {
            squares_flat(&field, n, keep_pieces)
        }
        ManifoldSpec::UnitSphere2 => {
            let n_phi = resolution.get(1).copied().unwrap_or(2 * n);
            squares_sphere(&field, n, n_phi, keep_pieces)
        }
        ManifoldSpec::FlatTorus { .. } => tetrahedra_torus3(&field, n, keep_pieces),
        ManifoldSpec::FlatBox { .. } => Err(Error::Config(format!("no oracle for {m}"))),
    }
}

/// Zero count of a field on the circle (`torus1`) or on `[0, 1]` (`box1`).
pub fn count_zeros_1d(spec: &FieldSpec, m: &ManifoldSpec, n: usize) -> Result<OracleReport> {
    match m {
        ManifoldSpec::FlatTorus { dim: 1 } | ManifoldSpec::FlatBox { dim: 1 } => {
            Ok(oracle(spec, m, &[n], false)?.report)
        }
        _ => Err(Error::Config(format!("zero counting needs torus1 or box1, got {m}"))),
    }
}

/// Length of the nodal set on `torus2` or `box2`.
pub fn marching_squares(spec: &FieldSpec, m: &ManifoldSpec, n: usize) -> Result<OracleReport> {
    match m {
        ManifoldSpec::FlatTorus { dim: 2 } | ManifoldSpec::FlatBox { dim: 2 } => {
            Ok(oracle(spec, m, &[n], false)?.report)
        }
        _ => Err(Error::Config(format!("marching squares needs torus2 or box2, got {m}"))),
    }
}

/// Length of the nodal set on the unit sphere from an `n_theta x n_phi` grid.
pub fn sphere_grid_length(spec: &FieldSpec, n_theta: usize, n_phi: usize) -> Result<OracleReport> {
    Ok(oracle(spec, &ManifoldSpec::UnitSphere2, &[n_theta, n_phi], false)?.report)
}

/// Area of the nodal set on `torus3`.
pub fn marching_tetrahedra_torus3(spec: &FieldSpec, n: usize) -> Result<OracleReport> {
    Ok(oracle(spec, &ManifoldSpec::FlatTorus { dim: 3 }, &[n], false)?.report)
}

// ---------------------------------------------------------------------------
// dimension 1

fn bisect(field: &Field, mut a: f64, mut fa: f64, mut b: f64) -> f64 {
    for _ in 0..80 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = nudge(field.value(&[mid, 0.0, 0.0]));
        if (fm > 0.0) == (fa > 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

fn roots_on_grid(field: &Field, n: usize) -> Vec<f64> {
    let periodic = !field.manifold().has_boundary();
    let vertices = if periodic { n } else { n + 1 };
    let values: Vec<f64> = (0..vertices)
        .into_par_iter()
        .map(|i| nudge(field.value(&[i as f64 / n as f64, 0.0, 0.0])))
        .collect();
    let chunks = summation::map_chunks(n, |range| {
        let mut roots = Vec::new();
        for i in range {
            let (v0, v1) = (values[i], values[(i + 1) % vertices]);
            if (v0 > 0.0) != (v1 > 0.0) {
                let r = bisect(field, i as f64 / n as f64, v0, (i + 1) as f64 / n as f64);
                roots.push(if periodic { r.rem_euclid(1.0) } else { r });
            }
        }
        roots
    });
    chunks.into_iter().flatten().collect()
}

fn zeros_1d(field: &Field, n: usize, keep: bool) -> Result<OracleOutput> {
    let start = Instant::now();
    check_resolution(n, "zero counting")?;
    let mut history: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut current = n;
    for doubling in 0..=MAX_DOUBLINGS {
        history.push((current, roots_on_grid(field, current)));
        let k = history.len();
        if k >= 3 && (k - 3..k - 1).all(|i| history[i].1.len() == history[k - 1].1.len()) {
            let (res, roots) = history.pop().unwrap_or_default();
            return Ok(OracleOutput {
                report: OracleReport {
                    method: OracleMethod::Bisection1D,
                    resolution: res.to_string(),
                    value: roots.len() as f64,
                    component_hint: roots.len(),
                    runtime_ms: start.elapsed().as_secs_f64() * 1e3,
                },
                pieces: if keep {
                    roots.iter().map(|&r| vec![[r, 0.0, 0.0]]).collect()
                } else {
                    Vec::new()
                },
            });
        }
        if doubling < MAX_DOUBLINGS {
            current *= 2;
        }
    }
    let counts: Vec<String> = history
        .iter()
        .map(|(r, roots)| format!("{}@{r}", roots.len()))
        .collect();
    Err(Error::Resolution(format!(
        "zero count did not stabilize after {MAX_DOUBLINGS} doublings ({})",
        counts.join(", ")
    )))
}

// ---------------------------------------------------------------------------
// union-find over crossing identifiers, for the component hint

#[derive(Default)]
struct Components {
    index: HashMap<u64, usize>,
    parent: Vec<usize>,
}

impl Components {
    fn node(&mut self, key: u64) -> usize {
        let next = self.parent.len();
        let id = *self.index.entry(key).or_insert(next);
        if id == next {
            self.parent.push(next);
        }
        id
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn join(&mut self, keys: &[u64]) {
        let Some((&first, rest)) = keys.split_first() else {
            return;
        };
        let a = self.node(first);
        for &k in rest {
            let b = self.node(k);
            let (ra, rb) = (self.find(a), self.find(b));
            if ra != rb {
                self.parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }

    fn count(&mut self) -> usize {
        (0..self.parent.len()).filter(|&x| self.find(x) == x).count()
    }
}

struct Extracted {
    measure: KahanSum,
    links: Vec<Vec<u64>>,
    pieces: Vec<Piece>,
}

impl Extracted {
    fn new() -> Self {
        Self {
            measure: KahanSum::new(),
            links: Vec::new(),
            pieces: Vec::new(),
        }
    }
}

fn combine(chunks: Vec<Extracted>) -> (f64, usize, Vec<Piece>) {
    let mut total = KahanSum::new();
    let mut components = Components::default();
    let mut pieces = Vec::new();
    for c in chunks {
        total.add(c.measure.value());
        for l in &c.links {
            components.join(l);
        }
        pieces.extend(c.pieces);
    }
    (total.value(), components.count(), pieces)
}

fn sub(a: &Vector, b: &Vector) -> Vector {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: &Vector) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn cross(a: &Vector, b: &Vector) -> Vector {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

// ---------------------------------------------------------------------------
// dimension 2

/// Vertex lattice of a 2-d marching-squares run. Cell `(i, j)` spans
/// vertices `i..=i+1` along the first axis and `j..=j+1` along the second.
struct Lattice2 {
    cells: [usize; 2],
    periodic: [bool; 2],
}

impl Lattice2 {
    fn vertices(&self, axis: usize) -> usize {
        if self.periodic[axis] {
            self.cells[axis]
        } else {
            self.cells[axis] + 1
        }
    }

    fn vertex_id(&self, i: usize, j: usize) -> usize {
        (i % self.vertices(0)) * self.vertices(1) + j % self.vertices(1)
    }
}

/// Marching squares over a lattice. `values` is indexed by `vertex_id`,
/// `center(i, j)` samples the cell centre and `embed(s, t)` maps lattice
/// coordinates to the space where segment lengths are measured.
fn march_squares(
    lattice: &Lattice2,
    values: &[f64],
    center: impl Fn(usize, usize) -> f64 + Sync,
    embed: impl Fn(f64, f64) -> Vector + Sync,
    keep: bool,
) -> (f64, usize, Vec<Piece>) {
    let [ni, nj] = lattice.cells;
    let chunks = summation::map_chunks(ni * nj, |range| {
        let mut out = Extracted::new();
        for cell in range {
            let (i, j) = (cell / nj, cell % nj);
            // Corners counter-clockwise from (i, j).
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let v = corners.map(|(a, b)| values[lattice.vertex_id(a, b)]);
            let pos = v.map(|x| x > 0.0);
            if pos.iter().all(|&p| p == pos[0]) {
                continue;
            }
            // Edge e joins corner e and corner e + 1.
            let crossing = |e: usize| -> (Vector, u64) {
                let (a, b) = (e, (e + 1) % 4);
                let t = v[a] / (v[a] - v[b]);
                let (ca, cb) = (corners[a], corners[b]);
                let s = ca.0 as f64 + t * (cb.0 as f64 - ca.0 as f64);
                let u = ca.1 as f64 + t * (cb.1 as f64 - ca.1 as f64);
                // Edges are keyed by their lower-left vertex and direction.
                let (lo, dir) = match e {
                    0 => (ca, 0),
                    1 => (ca, 1),
                    2 => (cb, 0),
                    _ => (cb, 1),
                };
                let key = 2 * lattice.vertex_id(lo.0, lo.1) as u64 + dir;
                (embed(s, u), key)
            };
            let mut emit = |e0: usize, e1: usize| {
                let (p, kp) = crossing(e0);
                let (q, kq) = crossing(e1);
                out.measure.add(norm(&sub(&q, &p)));
                out.links.push(vec![kp, kq]);
                if keep {
                    out.pieces.push(vec![p, q]);
                }
            };
            let changes: Vec<usize> = (0..4).filter(|&e| pos[e] != pos[(e + 1) % 4]).collect();
            if changes.len() == 2 {
                emit(changes[0], changes[1]);
            } else {
                // Saddle: corners 0 and 2 share a sign. If the centre agrees
                // with them they are connected and corners 1, 3 are cut off.
                let c = nudge(center(i, j)) > 0.0;
                if c == pos[0] {
                    emit(0, 1);
                    emit(2, 3);
                } else {
                    emit(3, 0);
                    emit(1, 2);
                }
            }
        }
        out
    });
    combine(chunks)
}

fn squares_flat(field: &Field, n: usize, keep: bool) -> Result<OracleOutput> {
    let start = Instant::now();
    check_resolution(n, "marching squares")?;
    let periodic = !field.manifold().has_boundary();
    let lattice = Lattice2 {
        cells: [n; 2],
        periodic: [periodic; 2],
    };
    let (nv0, nv1) = (lattice.vertices(0), lattice.vertices(1));
    let h = 1.0 / n as f64;
    let values: Vec<f64> = (0..nv0 * nv1)
        .into_par_iter()
        .map(|k| nudge(field.value(&[(k / nv1) as f64 * h, (k % nv1) as f64 * h, 0.0])))
        .collect();
    let (value, hint, pieces) = march_squares(
        &lattice,
        &values,
        |i, j| field.value(&[(i as f64 + 0.5) * h, (j as f64 + 0.5) * h, 0.0]),
        |s, t| [s * h, t * h, 0.0],
        keep,
    );
    Ok(OracleOutput {
        report: OracleReport {
            method: OracleMethod::MarchingSquares2D,
            resolution: n.to_string(),
            value,
            component_hint: hint,
            runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        },
        pieces,
    })
}

fn squares_sphere(field: &Field, n_theta: usize, n_phi: usize, keep: bool) -> Result<OracleOutput> {
    let start = Instant::now();
    check_resolution(n_theta, "sphere grid")?;
    check_resolution(n_phi, "sphere grid")?;
    // Rows include both poles; every pole-row vertex is the same point.
    let lattice = Lattice2 {
        cells: [n_theta, n_phi],
        periodic: [false, true],
    };
    let (ht, hp) = (PI / n_theta as f64, 2.0 * PI / n_phi as f64);
    let nv = lattice.vertices(0) * n_phi;
    let values: Vec<f64> = (0..nv)
        .into_par_iter()
        .map(|k| nudge(field.value(&[(k / n_phi) as f64 * ht, (k % n_phi) as f64 * hp, 0.0])))
        .collect();
    let (value, hint, pieces) = march_squares(
        &lattice,
        &values,
        |i, j| field.value(&[(i as f64 + 0.5) * ht, (j as f64 + 0.5) * hp, 0.0]),
        |s, t| sphere_embedding(s * ht, t * hp),
        keep,
    );
    Ok(OracleOutput {
        report: OracleReport {
            method: OracleMethod::SphereGrid2D,
            resolution: resolution_label(&[n_theta, n_phi]),
            value,
            component_hint: hint,
            runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        },
        pieces,
    })
}

// ---------------------------------------------------------------------------
// dimension 3

/// Cube corner `c` sits at offset `(c & 1, (c >> 1) & 1, (c >> 2) & 1)`.
/// All six tetrahedra share the main diagonal from corner 0 to corner 7.
pub const CUBE_TETRAHEDRA: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 3, 2, 7],
    [0, 2, 6, 7],
    [0, 6, 4, 7],
    [0, 4, 5, 7],
    [0, 5, 1, 7],
];

fn tetrahedra_torus3(field: &Field, n: usize, keep: bool) -> Result<OracleOutput> {
    let start = Instant::now();
    check_resolution(n, "marching tetrahedra")?;
    let h = 1.0 / n as f64;
    let n2 = n * n;
    let values: Vec<f64> = (0..n2 * n)
        .into_par_iter()
        .map(|k| {
            let (i, j, l) = (k / n2, (k / n) % n, k % n);
            nudge(field.value(&[i as f64 * h, j as f64 * h, l as f64 * h]))
        })
        .collect();
    let vertex_id = |i: usize, j: usize, l: usize| ((i % n) * n2 + (j % n) * n + l % n) as u64;
    let total_vertices = (n2 * n) as u64;

    let chunks = summation::map_chunks(n2 * n, |range| {
        let mut out = Extracted::new();
        for cell in range {
            let (i, j, l) = (cell / n2, (cell / n) % n, cell % n);
            let mut corner_pos = [ZERO_VECTOR; 8];
            let mut corner_val = [0.0; 8];
            let mut corner_id = [0u64; 8];
            for c in 0..8 {
                let (a, b, d) = (i + (c & 1), j + ((c >> 1) & 1), l + ((c >> 2) & 1));
                corner_pos[c] = [a as f64 * h, b as f64 * h, d as f64 * h];
                corner_id[c] = vertex_id(a, b, d);
                corner_val[c] = values[corner_id[c] as usize];
            }
            if corner_val.iter().all(|&x| (x > 0.0) == (corner_val[0] > 0.0)) {
                continue;
            }
            for tet in &CUBE_TETRAHEDRA {
                let (inside, outside): (Vec<usize>, Vec<usize>) =
                    tet.iter().partition(|&&c| corner_val[c] > 0.0);
                if inside.is_empty() || outside.is_empty() {
                    continue;
                }
                let crossing = |a: usize, b: usize| -> (Vector, u64) {
                    let t = corner_val[a] / (corner_val[a] - corner_val[b]);
                    let (pa, pb) = (corner_pos[a], corner_pos[b]);
                    let p = [
                        pa[0] + t * (pb[0] - pa[0]),
                        pa[1] + t * (pb[1] - pa[1]),
                        pa[2] + t * (pb[2] - pa[2]),
                    ];
                    let (lo, hi) = (corner_id[a].min(corner_id[b]), corner_id[a].max(corner_id[b]));
                    (p, lo * total_vertices + hi)
                };
                let (points, keys): (Vec<Vector>, Vec<u64>) = match (inside.len(), outside.len()) {
                    (1, 3) => outside.iter().map(|&o| crossing(inside[0], o)).unzip(),
                    (3, 1) => inside.iter().map(|&p| crossing(p, outside[0])).unzip(),
                    _ => {
                        let (a, b, c, d) = (inside[0], inside[1], outside[0], outside[1]);
                        [(a, c), (a, d), (b, d), (b, c)]
                            .iter()
                            .map(|&(x, y)| crossing(x, y))
                            .unzip()
                    }
                };
                let area = if points.len() == 3 {
                    0.5 * norm(&cross(&sub(&points[1], &points[0]), &sub(&points[2], &points[0])))
                } else {
                    0.5 * norm(&cross(&sub(&points[2], &points[0]), &sub(&points[3], &points[1])))
                };
                out.measure.add(area);
                out.links.push(keys);
                if keep {
                    out.pieces.push(points);
                }
            }
        }
        out
    });
    let (value, hint, pieces) = combine(chunks);
    Ok(OracleOutput {
        report: OracleReport {
            method: OracleMethod::MarchingTetrahedra3D,
            resolution: n.to_string(),
            value,
            component_hint: hint,
            runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        },
        pieces,
    })
}

/// Oracle value at `n` and `2n` with the O(h^2) error estimate
/// `|v(2n) - v(n)| / 3` of the finer value.
pub fn self_converged(
    spec: &FieldSpec,
    m: &ManifoldSpec,
    n: usize,
) -> Result<(OracleReport, f64)> {
    let coarse = oracle(spec, m, &[n], false)?.report;
    let fine = oracle(spec, m, &[2 * n], false)?.report;
    let uncertainty = (fine.value - coarse.value).abs() / 3.0;
    Ok((fine, uncertainty))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components_count_joined_keys() {
        let mut c = Components::default();
        c.join(&[1, 2]);
        c.join(&[3, 4]);
        c.join(&[2, 5]);
        assert_eq!(c.count(), 2);
        c.join(&[5, 4]);
        assert_eq!(c.count(), 1);
    }

    #[test]
    fn tetrahedra_cover_the_cube() {
        // Six tetrahedra of volume 1/6 each, all containing the diagonal.
        for t in &CUBE_TETRAHEDRA {
            assert_eq!((t[0], t[3]), (0, 7));
            let p = t.map(|c| [(c & 1) as f64, ((c >> 1) & 1) as f64, ((c >> 2) & 1) as f64]);
            let vol = {
                let (a, b, c) = (sub(&p[1], &p[0]), sub(&p[2], &p[0]), sub(&p[3], &p[0]));
                let x = cross(&a, &b);
                (x[0] * c[0] + x[1] * c[1] + x[2] * c[2]).abs() / 6.0
            };
            assert!((vol - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn nudge_only_touches_tiny_values() {
        assert_eq!(nudge(0.0), NUDGE);
        assert_eq!(nudge(-1e-15), -1e-15 + NUDGE);
        assert_eq!(nudge(1e-13), 1e-13);
    }
}

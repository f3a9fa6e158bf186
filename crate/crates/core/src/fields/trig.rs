use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::ChartJet2;
use crate::geometry::{Vector, MAX_DIM, ZERO_MATRIX, ZERO_VECTOR};

/// One term `a cos(2 pi k.x) + b sin(2 pi k.x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub k: Vec<f64>,
    pub a: f64,
    pub b: f64,
}

/// `f(x) = sum a cos(2 pi k.x) + b sin(2 pi k.x)`.
///
/// Frequencies must be integers on a torus. Boxes accept real frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPolynomial {
    pub dim: usize,
    pub terms: Vec<TrigTerm>,
}

impl TrigPolynomial {
    pub fn has_integer_frequencies(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.k.iter().all(|k| k.fract() == 0.0 && k.abs() <= i32::MAX as f64))
    }

    pub fn max_abs_frequency(&self) -> f64 {
        self.terms
            .iter()
            .flat_map(|t| t.k.iter())
            .fold(0.0, |m, k| m.max(k.abs()))
    }
}

/// Evaluator for a validated trig polynomial.
///
/// Small integer frequencies go through per-axis tables of
/// `cos/sin(2 pi m x_d)` built by repeated rotation; other frequencies
/// evaluate `sin_cos` per term.
#[derive(Debug, Clone)]
pub(crate) struct TrigEval {
    dim: usize,
    terms: Vec<CompiledTerm>,
    table_size: Option<usize>,
}

#[derive(Debug, Clone)]
struct CompiledTerm {
    k: Vector,
    ik: [i64; MAX_DIM],
    a: f64,
    b: f64,
}

const MAX_TABLE: usize = 16;

impl TrigEval {
    pub(crate) fn new(p: &TrigPolynomial) -> Self {
        let terms = p
            .terms
            .iter()
            .map(|t| {
                let mut k = ZERO_VECTOR;
                let mut ik = [0i64; MAX_DIM];
                for (d, &kd) in t.k.iter().enumerate() {
                    k[d] = kd;
                    ik[d] = kd as i64;
                }
                CompiledTerm { k, ik, a: t.a, b: t.b }
            })
            .collect();
        let kmax = p.max_abs_frequency();
        let table_size = (p.has_integer_frequencies() && kmax <= MAX_TABLE as f64)
            .then_some(kmax as usize + 1);
        Self {
            dim: p.dim,
            terms,
            table_size,
        }
    }

    /// Calls `visit(term, cos theta, sin theta)` for each term.
    #[inline]
    fn for_each_phase(&self, x: &Vector, mut visit: impl FnMut(&CompiledTerm, f64, f64)) {
        match self.table_size {
            Some(size) => {
                let mut table = [[(1.0, 0.0); MAX_TABLE + 1]; MAX_DIM];
                for row in table.iter_mut().take(self.dim).zip(x) {
                    let (row, &xd) = row;
                    let (s1, c1) = (TAU * xd).sin_cos();
                    for m in 1..size {
                        let (c, s) = row[m - 1];
                        row[m] = (c * c1 - s * s1, s * c1 + c * s1);
                    }
                }
                for t in &self.terms {
                    let (mut c, mut s) = (1.0, 0.0);
                    for d in 0..self.dim {
                        let (cd, mut sd) = table[d][t.ik[d].unsigned_abs() as usize];
                        if t.ik[d] < 0 {
                            sd = -sd;
                        }
                        (c, s) = (c * cd - s * sd, s * cd + c * sd);
                    }
                    visit(t, c, s);
                }
            }
            None => {
                for t in &self.terms {
                    let phase: f64 = (0..self.dim).map(|d| t.k[d] * x[d]).sum();
                    let (s, c) = (TAU * phase).sin_cos();
                    visit(t, c, s);
                }
            }
        }
    }

    pub(crate) fn value(&self, x: &Vector) -> f64 {
        let mut f = 0.0;
        self.for_each_phase(x, |t, c, s| f += t.a * c + t.b * s);
        f
    }

    pub(crate) fn jet(&self, x: &Vector) -> ChartJet2 {
        let dim = self.dim;
        let mut f = 0.0;
        let mut df = ZERO_VECTOR;
        let mut d2f = ZERO_MATRIX;
        self.for_each_phase(x, |t, c, s| {
            let v = t.a * c + t.b * s;
            let dv = t.b * c - t.a * s;
            f += v;
            for i in 0..dim {
                let wi = TAU * t.k[i];
                df[i] += wi * dv;
                for j in 0..=i {
                    d2f[i][j] -= wi * TAU * t.k[j] * v;
                }
            }
        });
        for i in 0..dim {
            for j in 0..i {
                d2f[j][i] = d2f[i][j];
            }
        }
        ChartJet2 { dim, f, df, d2f }
    }
}

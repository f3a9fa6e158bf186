use serde::{Deserialize, Serialize};

use super::ChartJet2;
use crate::geometry::{Vector, ZERO_MATRIX, ZERO_VECTOR};

/// Monomial `c * prod x_d^e_d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub e: Vec<u32>,
    pub c: f64,
}

/// Polynomial in the chart coordinates. Only meaningful on boxes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub dim: usize,
    pub terms: Vec<Monomial>,
}

/// `(x^e, d/dx x^e, d2/dx2 x^e)`.
fn power_jet(x: f64, e: u32) -> (f64, f64, f64) {
    let e = e as i32;
    let ef = e as f64;
    let v = x.powi(e);
    let d = if e >= 1 { ef * x.powi(e - 1) } else { 0.0 };
    let d2 = if e >= 2 { ef * (ef - 1.0) * x.powi(e - 2) } else { 0.0 };
    (v, d, d2)
}

impl Polynomial {
    pub(crate) fn value(&self, x: &Vector) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.c * t
                    .e
                    .iter()
                    .enumerate()
                    .map(|(d, &e)| x[d].powi(e as i32))
                    .product::<f64>()
            })
            .sum()
    }

    pub(crate) fn jet(&self, x: &Vector) -> ChartJet2 {
        let dim = self.dim;
        let mut f = 0.0;
        let mut df = ZERO_VECTOR;
        let mut d2f = ZERO_MATRIX;
        for t in &self.terms {
            let mut jets = [(1.0, 0.0, 0.0); 3];
            for (d, &e) in t.e.iter().enumerate() {
                jets[d] = power_jet(x[d], e);
            }
            let product_except = |skip: &[usize]| -> f64 {
                (0..dim)
                    .filter(|d| !skip.contains(d))
                    .map(|d| jets[d].0)
                    .product()
            };
            f += t.c * product_except(&[]);
            for i in 0..dim {
                df[i] += t.c * jets[i].1 * product_except(&[i]);
                d2f[i][i] += t.c * jets[i].2 * product_except(&[i]);
                for j in 0..i {
                    let v = t.c * jets[i].1 * jets[j].1 * product_except(&[i, j]);
                    d2f[i][j] += v;
                    d2f[j][i] += v;
                }
            }
        }
        ChartJet2 { dim, f, df, d2f }
    }
}

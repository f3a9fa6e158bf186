//! Real spherical harmonics without normalization constants:
//!
//! * `Y_l^0 = P_l(cos theta)`
//! * `Y_l^m = cos(m phi) P_l^m(cos theta)` for `m > 0`
//! * `Y_l^m = sin(|m| phi) P_l^|m|(cos theta)` for `m < 0`
//!
//! with `P_l^m(u) = (1 - u^2)^(m/2) d^m/du^m P_l(u)` (no Condon-Shortley
//! phase). Writing `P_l^m(cos theta) = sin^m(theta) Q(cos theta)` with
//! `Q = d^m P_l / du^m` gives closed-form `theta` derivatives.

use serde::{Deserialize, Serialize};

use super::ChartJet2;
use crate::geometry::{Vector, ZERO_MATRIX, ZERO_VECTOR};

pub const MAX_DEGREE: u32 = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicTerm {
    pub l: u32,
    pub m: i32,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalHarmonicSum {
    pub terms: Vec<HarmonicTerm>,
}

/// Coefficients (lowest degree first) of the Legendre polynomial `P_l`.
pub fn legendre_coefficients(l: u32) -> Vec<f64> {
    let l = l as u64;
    let mut coeffs = vec![0.0; l as usize + 1];
    for k in 0..=l / 2 {
        let magnitude = binomial(l, k) * binomial(2 * l - 2 * k, l);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        coeffs[(l - 2 * k) as usize] = sign * magnitude as f64 / 2f64.powi(l as i32);
    }
    coeffs
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn derivative(p: &[f64]) -> Vec<f64> {
    if p.len() <= 1 {
        return vec![0.0];
    }
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * i as f64)
        .collect()
}

fn horner(p: &[f64], u: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * u + c)
}

#[derive(Debug, Clone)]
struct CompiledHarmonic {
    m: i32,
    c: f64,
    q: Vec<f64>,
    dq: Vec<f64>,
    d2q: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct HarmonicEval {
    terms: Vec<CompiledHarmonic>,
}

impl HarmonicEval {
    pub(crate) fn new(s: &SphericalHarmonicSum) -> Self {
        let terms = s
            .terms
            .iter()
            .map(|t| {
                let mut q = legendre_coefficients(t.l);
                for _ in 0..t.m.unsigned_abs() {
                    q = derivative(&q);
                }
                let dq = derivative(&q);
                let d2q = derivative(&dq);
                CompiledHarmonic {
                    m: t.m,
                    c: t.c,
                    q,
                    dq,
                    d2q,
                }
            })
            .collect();
        Self { terms }
    }

    /// `(Phi, Phi', Phi'')` of the azimuthal factor.
    fn azimuthal(m: i32, phi: f64) -> (f64, f64, f64) {
        let mu = m.unsigned_abs() as f64;
        match m.signum() {
            0 => (1.0, 0.0, 0.0),
            1 => {
                let (s, c) = (mu * phi).sin_cos();
                (c, -mu * s, -mu * mu * c)
            }
            _ => {
                let (s, c) = (mu * phi).sin_cos();
                (s, mu * c, -mu * mu * s)
            }
        }
    }

    /// Shares the jet code path so that `value(x) == jet(x).f` bitwise.
    pub(crate) fn value(&self, x: &Vector) -> f64 {
        self.jet(x).f
    }

    pub(crate) fn jet(&self, x: &Vector) -> ChartJet2 {
        let (s, c) = x[0].sin_cos();
        let mut f = 0.0;
        let mut df = ZERO_VECTOR;
        let mut d2f = ZERO_MATRIX;
        for t in &self.terms {
            let m = t.m.abs();
            let mf = m as f64;
            let q = horner(&t.q, c);
            let dq = horner(&t.dq, c);
            let d2q = horner(&t.d2q, c);
            let sm = s.powi(m);
            // h(theta) = sin^m Q(cos), differentiated twice by hand.
            let h = sm * q;
            let mut dh = -s.powi(m + 1) * dq;
            if m >= 1 {
                dh += mf * s.powi(m - 1) * c * q;
            }
            let mut d2h = -mf * sm * q - (2.0 * mf + 1.0) * sm * c * dq + s.powi(m + 2) * d2q;
            if m >= 2 {
                d2h += mf * (mf - 1.0) * s.powi(m - 2) * c * c * q;
            }
            let (p0, p1, p2) = Self::azimuthal(t.m, x[1]);
            f += t.c * h * p0;
            df[0] += t.c * dh * p0;
            df[1] += t.c * h * p1;
            d2f[0][0] += t.c * d2h * p0;
            d2f[0][1] += t.c * dh * p1;
            d2f[1][1] += t.c * h * p2;
        }
        d2f[1][0] = d2f[0][1];
        ChartJet2 { dim: 2, f, df, d2f }
    }
}

//! Deterministic pseudo-Gaussian trig polynomials.
//!
//! Bit-exact procedure, so that any implementation reproduces the same
//! coefficients:
//!
//! 1. Frequencies `k` range over `[-max_freq, max_freq]^dim` in lexicographic
//!    order (first component slowest). Only the representative of each `±k`
//!    pair whose first nonzero component is positive is kept; `k = 0` is
//!    skipped, so the field has zero mean.
//! 2. The generator state for `k` is `s = splitmix64(seed)`, then
//!    `s = splitmix64(s ^ (k_d as i64 as u64))` for each component in order.
//!    A zero state is replaced by `0x9E3779B97F4A7C15`.
//! 3. Two draws `r1, r2` of xorshift64* (shifts 12, 25, 27; multiplier
//!    `0x2545F4914F6CDD1D`) map to `u = ((r >> 11) + 1) * 2^-53` in `(0, 1]`.
//! 4. Box-Muller: `rho = sqrt(-2 ln u1)`, `a = scale * rho * cos(2 pi u2)`,
//!    `b = scale * rho * sin(2 pi u2)`.

use serde::{Deserialize, Serialize};

use super::trig::{TrigPolynomial, TrigTerm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomTrig {
    pub dim: usize,
    pub max_freq: u32,
    pub seed: u64,
    pub scale: f64,
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// xorshift64* generator.
#[derive(Debug, Clone)]
pub struct XorShift64Star {
    state: u64,
}

impl XorShift64Star {
    pub fn new(state: u64) -> Self {
        Self {
            state: if state == 0 { 0x9E37_79B9_7F4A_7C15 } else { state },
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform in `(0, 1]`.
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Two independent standard normals by Box-Muller.
    pub fn next_gaussian_pair(&mut self) -> (f64, f64) {
        let u1 = self.next_open01();
        let u2 = self.next_open01();
        let rho = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        (rho * c, rho * s)
    }
}

fn frequency_state(seed: u64, k: &[i64]) -> u64 {
    k.iter()
        .fold(splitmix64(seed), |s, &kd| splitmix64(s ^ kd as u64))
}

/// Half-space representatives of `[-max_freq, max_freq]^dim \ {0}` in
/// canonical order.
pub fn representative_frequencies(dim: usize, max_freq: u32) -> Vec<Vec<i64>> {
    let f = max_freq as i64;
    let side = (2 * f + 1) as usize;
    let total = side.pow(dim as u32);
    (0..total)
        .map(|mut idx| {
            let mut k = vec![0i64; dim];
            for d in (0..dim).rev() {
                k[d] = (idx % side) as i64 - f;
                idx /= side;
            }
            k
        })
        .filter(|k| k.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0))
        .collect()
}

pub fn expand_random(spec: &RandomTrig) -> TrigPolynomial {
    let terms = representative_frequencies(spec.dim, spec.max_freq)
        .into_iter()
        .map(|k| {
            let mut rng = XorShift64Star::new(frequency_state(spec.seed, &k));
            let (a, b) = rng.next_gaussian_pair();
            TrigTerm {
                k: k.iter().map(|&c| c as f64).collect(),
                a: spec.scale * a,
                b: spec.scale * b,
            }
        })
        .collect();
    TrigPolynomial {
        dim: spec.dim,
        terms,
    }
}

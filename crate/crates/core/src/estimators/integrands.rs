//! Pointwise integrands. Each function returns the bracketed expression of
//! its volume formula only; the outer prefactor (`1/2`, or `1/pi` for
//! [`integrand_arctan`]) is applied by the caller.
//!
//! Notation: `gn = |grad f|`, `q = Hess f(grad f, grad f)`, `lap = Delta f`,
//! `y = gn / |f|`, `x = gn / f`.
//!
//! Guards:
//! * `q / gn^2` is replaced by `lap / n` when `gn < DELTA_G`. The limit is
//!   direction dependent but bounded, and critical points have measure zero.
//! * `arctan(x)/x`, `tanh(x)/x` and `g(y)/y` switch to their Taylor series
//!   for arguments below `DELTA_G`.
//! * At nodes with `f == 0` every term carrying `sigma_f` or `1/f` is 0.
//! * `cosh(x)^-2` is taken as 0 for `|x| > COSH_GUARD`.

use std::f64::consts::FRAC_2_PI;

use crate::fields::CovariantJet2;

pub const DELTA_G: f64 = 1e-7;
pub const COSH_GUARD: f64 = 350.0;

/// `q / gn^2`, or the directional average `lap / n` near critical points.
#[inline]
pub fn direction_quotient(j: &CovariantJet2) -> f64 {
    if j.grad_norm < DELTA_G {
        j.laplacian / j.dim as f64
    } else {
        j.hess_qf / (j.grad_norm * j.grad_norm)
    }
}

/// `arctan(x) / x`.
#[inline]
pub fn atan_over_x(x: f64) -> f64 {
    if x.abs() < DELTA_G {
        1.0 - x * x / 3.0
    } else {
        x.atan() / x
    }
}

/// `tanh(x) / x`.
#[inline]
pub fn tanh_over_x(x: f64) -> f64 {
    if x.abs() < DELTA_G {
        1.0 - x * x / 3.0
    } else {
        x.tanh() / x
    }
}

/// `cosh(x)^-2`, flushed to 0 beyond the overflow guard.
#[inline]
pub fn sech_sq(x: f64) -> f64 {
    if x.abs() > COSH_GUARD {
        0.0
    } else {
        let c = x.cosh();
        1.0 / (c * c)
    }
}

/// A function `g` on `[0, inf)` with `g(+inf) = 1` and integrable `g'`.
#[derive(Debug, Clone, Copy)]
pub struct GSpec {
    pub name: &'static str,
    pub g: fn(f64) -> f64,
    pub g_prime: fn(f64) -> f64,
    /// `g''(0)`, used by the series of `g(y)/y` near 0.
    pub g_second_at_zero: f64,
}

impl GSpec {
    pub fn one() -> Self {
        Self {
            name: "one",
            g: |_| 1.0,
            g_prime: |_| 0.0,
            g_second_at_zero: 0.0,
        }
    }

    pub fn tanh() -> Self {
        Self {
            name: "tanh",
            g: f64::tanh,
            g_prime: sech_sq,
            g_second_at_zero: 0.0,
        }
    }

    /// `(2/pi) arctan`.
    pub fn arctan() -> Self {
        Self {
            name: "arctan",
            g: |x| FRAC_2_PI * x.atan(),
            g_prime: |x| FRAC_2_PI / (1.0 + x * x),
            g_second_at_zero: 0.0,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "one" => Some(Self::one()),
            "tanh" => Some(Self::tanh()),
            "arctan" => Some(Self::arctan()),
            _ => None,
        }
    }

    /// `g(y) / y` for `y >= 0`.
    #[inline]
    fn over_y(&self, y: f64) -> f64 {
        if y < DELTA_G {
            (self.g_prime)(0.0) + 0.5 * self.g_second_at_zero * y
        } else {
            (self.g)(y) / y
        }
    }
}

/// A function `G` on `[0, inf)` with `G(x) ~ 1/x` at infinity.
#[derive(Debug, Clone, Copy)]
pub struct GBigSpec {
    pub name: &'static str,
    pub big_g: fn(f64) -> f64,
    pub big_g_prime: fn(f64) -> f64,
}

impl GBigSpec {
    /// `G(x) = 1 / sqrt(1 + x^2)`.
    pub fn inv_sqrt() -> Self {
        Self {
            name: "invsqrt",
            big_g: |x| 1.0 / (1.0 + x * x).sqrt(),
            big_g_prime: |x| -x / (1.0 + x * x).powf(1.5),
        }
    }

    /// `G(x) = (2/pi) arctan(x) / x`.
    pub fn arctan_over_x() -> Self {
        Self {
            name: "arctan",
            big_g: |x| FRAC_2_PI * atan_over_x(x),
            big_g_prime: |x| {
                if x.abs() < 1e-3 {
                    let x2 = x * x;
                    FRAC_2_PI * x * (-2.0 / 3.0 + x2 * (4.0 / 5.0 - x2 * 6.0 / 7.0))
                } else {
                    FRAC_2_PI * (x / (1.0 + x * x) - x.atan()) / (x * x)
                }
            },
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "invsqrt" => Some(Self::inv_sqrt()),
            "arctan" => Some(Self::arctan_over_x()),
            _ => None,
        }
    }
}

/// `sigma / eta^3 (f gn^2 + q - eta^2 lap)`.
pub fn integrand_algebraic(j: &CovariantJet2) -> f64 {
    if j.sigma == 0 {
        return 0.0;
    }
    let gn2 = j.grad_norm * j.grad_norm;
    let eta2 = j.eta * j.eta;
    f64::from(j.sigma) / (eta2 * j.eta) * (j.f * gn2 + j.hess_qf - eta2 * j.laplacian)
}

/// `gn^-1 arctan(gn/f) (q/gn^2 - lap) + eta^-2 (gn^2 - f q / gn^2)`.
pub fn integrand_arctan(j: &CovariantJet2) -> f64 {
    let u = direction_quotient(j);
    let gn2 = j.grad_norm * j.grad_norm;
    // arctan(gn/f) = (pi/2) sigma_f = 0 at f = 0.
    let first = if j.f == 0.0 {
        0.0
    } else {
        atan_over_x(j.grad_norm / j.f) / j.f * (u - j.laplacian)
    };
    first + (gn2 - j.f * u) / (j.eta * j.eta)
}

/// `gn^-1 tanh(gn/f) (q/gn^2 - lap) + cosh(gn/f)^-2 (gn^2/f^2 - q/(f gn^2))`.
pub fn integrand_tanh(j: &CovariantJet2) -> f64 {
    if j.f == 0.0 {
        return 0.0;
    }
    let u = direction_quotient(j);
    let x = j.grad_norm / j.f;
    let first = tanh_over_x(x) / j.f * (u - j.laplacian);
    let s = sech_sq(x);
    let second = if s == 0.0 { 0.0 } else { s * (x * x - u / j.f) };
    first + second
}

/// `G(y)(gn^2/f^2 - lap/f) + sigma G'(y)(gn^3/f^3 - q/(f^2 gn))`.
pub fn integrand_general_g(spec: &GBigSpec, j: &CovariantJet2) -> f64 {
    if j.f == 0.0 {
        return 0.0;
    }
    let u = direction_quotient(j);
    let af = j.f.abs();
    let y = j.grad_norm / af;
    let sigma = f64::from(j.sigma);
    let first = (spec.big_g)(y) * (y * y - j.laplacian / j.f);
    // sigma * gn^3/f^3 = y^3 and q/(f^2 gn) = u gn / f^2.
    let second = (spec.big_g_prime)(y) * (y * y * y - sigma * u * j.grad_norm / (j.f * j.f));
    first + second
}

/// `sigma/eta^3 g(y) (f gn^2 + q - eta^2 lap) + gn/(f^2 eta) g'(y) (gn^2 - f q/gn^2)`.
pub fn integrand_g1(spec: &GSpec, j: &CovariantJet2) -> f64 {
    if j.f == 0.0 {
        return 0.0;
    }
    let u = direction_quotient(j);
    let gn2 = j.grad_norm * j.grad_norm;
    let eta2 = j.eta * j.eta;
    let y = j.grad_norm / j.f.abs();
    let first = f64::from(j.sigma) / (eta2 * j.eta)
        * (spec.g)(y)
        * (j.f * gn2 + j.hess_qf - eta2 * j.laplacian);
    let gp = (spec.g_prime)(y);
    let second = if gp == 0.0 {
        0.0
    } else {
        j.grad_norm / (j.f * j.f * j.eta) * gp * (gn2 - j.f * u)
    };
    first + second
}

/// `sigma/gn g(y) (q/gn^2 - lap) + g'(y) (gn^2/f^2 - q/(f gn^2))`.
pub fn integrand_g2(spec: &GSpec, j: &CovariantJet2) -> f64 {
    if j.f == 0.0 {
        return 0.0;
    }
    let u = direction_quotient(j);
    let y = j.grad_norm / j.f.abs();
    // sigma g(y) / gn = (g(y)/y) / f.
    let first = spec.over_y(y) / j.f * (u - j.laplacian);
    let gp = (spec.g_prime)(y);
    let second = if gp == 0.0 { 0.0 } else { gp * (y * y - u / j.f) };
    first + second
}

/// Continuous integrand obtained by integrating the `sigma_f` term of
/// [`integrand_algebraic`] by parts:
///
/// ```text
/// |f|/eta^3 (gn^2 - f lap + lap^2 - |Hess f|^2 - Ric(grad f, grad f))
///   + 3 |f|/eta^5 (f q + Hess f(grad f, N) - lap (f gn^2 + q))
/// ```
///
/// with `N = nabla_{grad f} grad f`. Both terms vanish on the nodal set.
pub fn integrand_lipschitz(j: &CovariantJet2) -> f64 {
    lipschitz_terms(j, true)
}

/// [`integrand_lipschitz`] with `Ric(grad f, grad f)` forced to 0; only
/// meaningful as a curvature diagnostic.
pub fn integrand_lipschitz_without_ricci(j: &CovariantJet2) -> f64 {
    lipschitz_terms(j, false)
}

fn lipschitz_terms(j: &CovariantJet2, with_ricci: bool) -> f64 {
    let af = j.f.abs();
    if af == 0.0 {
        return 0.0;
    }
    let gn2 = j.grad_norm * j.grad_norm;
    let lap = j.laplacian;
    let ric = if with_ricci { j.ric_qf } else { 0.0 };
    let eta2 = j.eta * j.eta;
    let eta3 = eta2 * j.eta;
    let first = af / eta3 * (gn2 - j.f * lap + lap * lap - j.hess_hs_sq - ric);
    let second = 3.0 * af / (eta3 * eta2)
        * (j.f * j.hess_qf + j.hess_grad_nabla() - lap * (j.f * gn2 + j.hess_qf));
    first + second
}

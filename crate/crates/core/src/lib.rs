//! Volume of nodal sets `f^-1(0)` on model Riemannian manifolds.
//!
//! The crate evaluates closed-form integral formulas for `vol(f^-1(0))` built
//! from the value, gradient, covariant Hessian, Laplacian and Ricci curvature
//! of a nondegenerate field, and checks them against level-set extraction
//! that never looks at derivatives.
//!
//! * [`geometry`]: flat tori, the unit round 2-sphere and flat boxes.
//! * [`fields`]: analytic field families with exact 2-jets.
//! * [`quadrature`]: tensor rules including the volume element.
//! * [`estimators`]: pointwise integrands and their integrals.
//! * [`oracle`]: marching squares / tetrahedra and zero counting.

pub mod error;
pub mod estimators;
pub mod fields;
pub mod geometry;
pub mod grid;
pub mod oracle;
pub mod quadrature;
pub mod report;
pub mod summation;

pub use error::{Error, Result};

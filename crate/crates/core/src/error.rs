use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A chart point outside the chart domain of the manifold.
    #[error("point {point:?} is outside the chart domain of {manifold}")]
    Domain { manifold: String, point: Vec<f64> },

    /// Malformed or inconsistent configuration (field, manifold, estimator names).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// The field fails the nondegeneracy scan.
    #[error("degenerate field: min_eta = {min_eta:e} is below threshold {threshold:e}")]
    Degenerate { min_eta: f64, threshold: f64 },

    /// The nodal set is not transverse to a boundary face of a box.
    #[error("nodal set is not transverse to face {face}: min value {value:e} below threshold {threshold:e}")]
    Transversality {
        face: String,
        value: f64,
        threshold: f64,
    },

    /// A non-finite integrand value.
    #[error("non-finite integrand {value} at node {index} {point:?}")]
    Numerical {
        index: usize,
        point: Vec<f64>,
        value: f64,
    },

    /// Mismatched lengths and other API misuse.
    #[error("usage error: {0}")]
    Usage(String),

    /// An oracle failed to stabilize under grid refinement.
    #[error("resolution error: {0}")]
    Resolution(String),
}

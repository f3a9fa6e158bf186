//! Result records and their CSV rows.
//!
//! Floats are written with Rust's shortest round-trip formatting so that
//! identical values always produce identical bytes.

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub estimator: String,
    pub manifold: String,
    pub rule: String,
    pub resolution: String,
    /// Estimated `vol(f^-1(0))`.
    pub value: f64,
    pub min_eta: f64,
    pub integrand_min: f64,
    pub integrand_max: f64,
    pub node_count: usize,
    /// Nodes where `f == 0` exactly.
    pub zero_nodes: usize,
    /// Minimum `eta_f` over boundary face nodes (boxes only).
    pub min_face_eta: Option<f64>,
    pub runtime_ms: f64,
}

impl EstimateReport {
    pub const CSV_HEADER: &'static str = "estimator,manifold,rule,resolution,value,min_eta,integrand_min,integrand_max,node_count,zero_nodes,min_face_eta,runtime_ms";

    pub fn csv_row(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.estimator,
            self.manifold,
            self.rule,
            self.resolution,
            self.value,
            self.min_eta,
            self.integrand_min,
            self.integrand_max,
            self.node_count,
            self.zero_nodes,
            self.min_face_eta.map(|x| x.to_string()).unwrap_or_default(),
            self.runtime_ms
        );
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    Bisection1D,
    MarchingSquares2D,
    SphereGrid2D,
    MarchingTetrahedra3D,
}

impl OracleMethod {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Bisection1D => "bisection1d",
            Self::MarchingSquares2D => "marching_squares2d",
            Self::SphereGrid2D => "sphere_grid2d",
            Self::MarchingTetrahedra3D => "marching_tetrahedra3d",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub method: OracleMethod,
    pub resolution: String,
    pub value: f64,
    /// Number of connected pieces found by the extraction (informational).
    pub component_hint: usize,
    pub runtime_ms: f64,
}

impl OracleReport {
    pub const CSV_HEADER: &'static str = "method,resolution,value,component_hint,runtime_ms";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.method.name(),
            self.resolution,
            self.value,
            self.component_hint,
            self.runtime_ms
        )
    }
}

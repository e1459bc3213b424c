//! Warped-product charts and their intrinsic curvature.

pub mod chart;
pub mod curvature;
pub mod einstein;
pub mod fiber;

pub use chart::{BaseKind, ChartDescriptor, ChartSpec, MetricField};
pub use curvature::{christoffel_fd, ricci_fd, riemann_fd, Christoffel, CurvatureReport, Riemann};
pub use einstein::{
    clifford_radii, einstein_conditions_residual, einstein_radii, product_condition, EinsteinRadii, RadiiFamily,
};
pub use fiber::{FiberKind, FiberSpec};

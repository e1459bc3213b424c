//! Construction and numerical verification of Einstein warped-product
//! submanifolds `L^2 x_phi F^(n-2)` of Euclidean space.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod extrinsic;
pub mod geometry;
pub mod immersions;
pub mod io;
pub mod jet;
pub mod verify;
pub mod warpfunc;

pub use error::{Error, Result};
pub use geometry::{ChartSpec, FiberSpec, MetricField};
pub use immersions::{ImmersionKind, ImmersionSpec};
pub use jet::{Dual2, Jet2};
pub use warpfunc::{Warp, WarpParams, WarpSample, WarpSolution};

//! Explicit immersions of warped products into Euclidean space.

pub mod mesh;
pub mod profile;
pub mod spec;
pub mod sphere;
pub mod surface;

pub use mesh::{export_mesh, MeshSlice, MeshSummary};
pub use profile::{Profile, DEFAULT_T_MIN};
pub use spec::{
    clifford_immersion, clifford_immersion_with_radii, example_one, example_two, extra_codim_default,
    extra_codim_example, extra_codim_params, profile_1b, profile_surface_immersion, rotational_immersion,
    schwarzschild_default, schwarzschild_immersion, warped_composite, BaseCurvature, ImmersionDescriptor,
    ImmersionKind, ImmersionSpec, Pullback, TorusPlacement, TOL_PULLBACK_ANALYTIC, TOL_PULLBACK_QUADRATURE,
};
pub use sphere::FiberEmbedding;
pub use surface::Surface;

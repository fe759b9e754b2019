//! Triangulated domains, perforation layouts and piecewise-affine fields.

mod bisect;
pub mod cell_mesh;
mod field;
pub mod layout;
mod locate;
mod mesh;
pub mod primitives;
mod refine;
mod square;

pub use cell_mesh::{elliptic_segment_mesh, polar_ball_mesh, reflect_half_mesh};
pub use field::DisplacementField;
pub use layout::{
    boundary_perforation, bulk_perforation, interior_perforation_on_curve, Curve, ElementKind, ElementShape,
    PerforationElement, PerforationLayout, Scaling, ScalingRule,
};
pub use locate::Locator;
pub use mesh::{BoundaryEdge, BoundaryTag, Mesh};
pub use primitives::Point;
pub use refine::{conforming_refine_to_layout, element_vertices, RefineOptions};
pub use square::{build_square_mesh, build_square_mesh_capped, RefinementZone, Region, DEFAULT_MAX_VERTICES};

//! Cones `Σ`, star-shaped domains `Ω` and triangulations of `Ω ∩ Σ`.

mod cone;
mod domain;
mod mesh;
mod mesher;

pub use cone::ConeSpec;
pub use domain::{
    classify_boundary, wulff_boundary_points, wulff_point, BoundaryPolyline, BoundarySegment, Domain,
    DomainSpec, ShapeSpec,
};
pub use mesh::{BoundaryEdge, BoundaryTag, Mesh};
pub use mesher::{triangulate, triangulate_nested, triangulate_with, MeshOptions, NestedMesh};

pub(crate) fn polar_angle(x: [f64; 2]) -> f64 {
    x[1].atan2(x[0])
}

pub(crate) fn unit(phi: f64) -> [f64; 2] {
    [phi.cos(), phi.sin()]
}

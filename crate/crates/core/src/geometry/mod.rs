//! Star-shaped domains, boundary and volume quadrature, and global geometry.

mod domain;
mod grid;
mod summary;

pub use domain::{build_domain, sphere_direction, BoundaryPoint, Domain, DomainSpec, Ellipsoid, FourierCurve};
pub use grid::{
    boundary_grid, default_boundary_order, default_volume_orders, volume_grid, BoundaryGrid, VolumeGrid, MIN_ORDER,
};
#[allow(unused_imports)]
pub(crate) use grid::{dot, norm};
pub use summary::{geometric_summary, radii_about, radii_about_grid, summary_from_grid, GeometrySummary};

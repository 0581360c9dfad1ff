//! Shared computational geometry: planes, planar polygons, hulls, booleans
//! and in-plane sampling.
//!
//! Everything here is value-semantic and deterministic; the polygon boolean
//! kernel uses an epsilon snap of 1e-9 m for vertex coincidence.

mod boolean;
mod hull;
mod plane;
mod polygon;
mod ransac;

pub use hull::convex_hull_planar;
pub use plane::{Plane, PlaneBasis};
pub use polygon::{
    polygon_area, polygon_iou, polygon_union, sample_polygon_grid, vertex_centroid, PlanarPolygon,
};
pub(crate) use polygon::polygon_intersection_area;
pub use ransac::{fit_plane_ransac, least_squares_plane};

use nalgebra::{Vector2, Vector3};
use thiserror::Error;

/// World-frame 3D vector/point in meters.
pub type Vec3 = Vector3<f64>;
/// In-plane 2D coordinates in meters, expressed in a plane's local frame.
pub type Vec2 = Vector2<f64>;

/// Vertex-coincidence snap used by the polygon boolean kernel.
pub const EPS_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    /// The input does not span a unique plane/polygon (collinear or
    /// near-collinear points, fewer than 3 vertices, ...).
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    /// Union was requested for polygons with an empty intersection.
    #[error("polygon union requires overlapping inputs")]
    DisjointInputs,
    /// An input that must be a unit vector is not.
    #[error("vector is not unit length (|v| = {0})")]
    NonUnit(f64),
}

/// Angle between two unit normals treated as unoriented directions,
/// folded into `[0, pi/2]`.
pub fn unoriented_angle(n1: &Vec3, n2: &Vec3) -> Result<f64, GeometryError> {
    for n in [n1, n2] {
        let len = n.norm();
        if (len - 1.0).abs() > 1e-6 {
            return Err(GeometryError::NonUnit(len));
        }
    }
    Ok(n1.dot(n2).abs().clamp(0.0, 1.0).acos())
}

/// Orthogonal projection of points onto a plane. Idempotent.
pub fn project_to_plane(points: &[Vec3], plane: &Plane) -> Vec<Vec3> {
    points.iter().map(|p| plane.project(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unoriented_angle_perpendicular() {
        let a = Vec3::new(1.0, 0.0, 0.0);
        let b = Vec3::new(0.0, 1.0, 0.0);
        assert_relative_eq!(
            unoriented_angle(&a, &b).unwrap(),
            std::f64::consts::FRAC_PI_2
        );
    }

    #[test]
    fn unoriented_angle_parallel_and_antiparallel() {
        let a = Vec3::new(1.0, 0.0, 0.0);
        assert_relative_eq!(unoriented_angle(&a, &a).unwrap(), 0.0);
        let neg = -a;
        assert_relative_eq!(unoriented_angle(&a, &neg).unwrap(), 0.0);
    }

    #[test]
    fn unoriented_angle_rejects_non_unit() {
        let a = Vec3::new(2.0, 0.0, 0.0);
        let b = Vec3::new(0.0, 1.0, 0.0);
        assert!(matches!(
            unoriented_angle(&a, &b),
            Err(GeometryError::NonUnit(_))
        ));
    }

    #[test]
    fn projection_moves_point_onto_plane() {
        let plane = Plane::new(Vec3::new(0.0, 0.0, 1.0), 0.0).unwrap();
        let projected = project_to_plane(&[Vec3::new(0.0, 0.0, 5.0)], &plane);
        assert_relative_eq!(projected[0], Vec3::new(0.0, 0.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn projection_is_idempotent_on_plane_points() {
        let plane = Plane::new(Vec3::new(1.0, 0.0, 0.0), 1.0).unwrap();
        let p = Vec3::new(1.0, 2.0, 3.0);
        let q = plane.project(&p);
        assert_relative_eq!(q, p, epsilon = 1e-12);
        assert_relative_eq!(plane.project(&q), q, epsilon = 1e-12);
    }
}

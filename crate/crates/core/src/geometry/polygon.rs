use super::boolean::{self, Containment};
use super::{GeometryError, Plane, Vec2, Vec3};
use serde::{Deserialize, Serialize};

/// A simple polygon embedded in a 3D plane. Vertices are stored in the
/// plane's canonical local frame, counter-clockwise, and may be non-convex
/// (unions are not re-hulled).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarPolygon {
    plane: Plane,
    vertices: Vec<Vec2>,
}

impl PlanarPolygon {
    /// Builds a polygon from local-frame vertices. Enforces CCW orientation;
    /// rejects inputs with fewer than 3 vertices or near-zero area.
    pub fn from_local(plane: Plane, mut vertices: Vec<Vec2>) -> Result<Self, GeometryError> {
        dedup_ring(&mut vertices);
        if vertices.len() < 3 {
            return Err(GeometryError::Degenerate(
                "polygon needs at least 3 vertices".into(),
            ));
        }
        let signed = signed_area(&vertices);
        if signed.abs() < 1e-12 {
            return Err(GeometryError::Degenerate("polygon area is zero".into()));
        }
        if signed < 0.0 {
            vertices.reverse();
        }
        Ok(Self { plane, vertices })
    }

    pub fn plane(&self) -> &Plane {
        &self.plane
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn local_vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    /// Vertices lifted back into world coordinates.
    pub fn world_vertices(&self) -> Vec<Vec3> {
        let basis = self.plane.basis();
        self.vertices.iter().map(|v| basis.to_world(v)).collect()
    }

    /// Re-expresses this polygon on another plane by projecting its world
    /// vertices orthogonally. A parallel projection of a simple planar
    /// polygon stays simple as long as the planes are not near-perpendicular.
    pub fn project_onto(&self, plane: &Plane) -> Result<PlanarPolygon, GeometryError> {
        let basis = plane.basis();
        let local: Vec<Vec2> = self
            .world_vertices()
            .iter()
            .map(|p| basis.to_local(&plane.project(p)))
            .collect();
        PlanarPolygon::from_local(*plane, local)
    }

    /// True if the 2D point is inside or on the boundary.
    pub fn contains_local(&self, p: &Vec2) -> bool {
        boolean::contains(&self.vertices, p) != Containment::Outside
    }

    /// Distance from a world point to the polygon (0 inside/on it).
    pub fn distance_to_point(&self, p: &Vec3) -> f64 {
        let basis = self.plane.basis();
        let foot = self.plane.project(p);
        let local = basis.to_local(&foot);
        let normal_dist = self.plane.distance(p);
        if self.contains_local(&local) {
            return normal_dist;
        }
        let mut best = f64::INFINITY;
        let n = self.vertices.len();
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let d = dist_point_segment(&local, &a, &b);
            if d < best {
                best = d;
            }
        }
        (best * best + normal_dist * normal_dist).sqrt()
    }
}

fn dist_point_segment(p: &Vec2, a: &Vec2, b: &Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 < 1e-24 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn signed_area(vertices: &[Vec2]) -> f64 {
    let n = vertices.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        acc += a.perp(&b);
    }
    acc * 0.5
}

/// Removes repeated and collinear-in-between vertices (within 1e-9).
fn dedup_ring(vertices: &mut Vec<Vec2>) {
    vertices.dedup_by(|a, b| (*a - *b).norm() < 1e-9);
    while vertices.len() > 1 && (vertices[0] - *vertices.last().unwrap()).norm() < 1e-9 {
        vertices.pop();
    }
    let mut i = 0;
    while vertices.len() > 3 && i < vertices.len() {
        let n = vertices.len();
        let prev = vertices[(i + n - 1) % n];
        let cur = vertices[i];
        let next = vertices[(i + 1) % n];
        let cross = (cur - prev).perp(&(next - prev));
        if cross.abs() < 1e-9 && (next - prev).dot(&(cur - prev)) > 0.0 {
            vertices.remove(i);
        } else {
            i += 1;
        }
    }
}

/// Shoelace area in square meters.
pub fn polygon_area(p: &PlanarPolygon) -> Result<f64, GeometryError> {
    if p.vertices.len() < 3 {
        return Err(GeometryError::Degenerate("fewer than 3 vertices".into()));
    }
    Ok(signed_area(&p.vertices).abs())
}

/// Arithmetic mean of the polygon's 3D vertices (vertex mean, not the area
/// centroid).
pub fn vertex_centroid(p: &PlanarPolygon) -> Vec3 {
    let world = p.world_vertices();
    world.iter().sum::<Vec3>() / world.len() as f64
}

/// Intersection-over-union of two polygons sharing a plane. Exactly
/// symmetric in its arguments.
pub fn polygon_iou(a: &PlanarPolygon, b: &PlanarPolygon) -> Result<f64, GeometryError> {
    if a.vertices.len() < 3 || b.vertices.len() < 3 {
        return Err(GeometryError::Degenerate("fewer than 3 vertices".into()));
    }
    // Canonical operand order so iou(a, b) and iou(b, a) run the identical
    // computation.
    let swap = ring_key(&b.vertices) < ring_key(&a.vertices);
    let (first, second) = if swap { (b, a) } else { (a, b) };
    let inter = boolean::intersection_area(&first.vertices, &second.vertices);
    let area_a = signed_area(&first.vertices).abs();
    let area_b = signed_area(&second.vertices).abs();
    let union = area_a + area_b - inter;
    if union <= 0.0 {
        return Ok(0.0);
    }
    Ok((inter / union).clamp(0.0, 1.0))
}

/// Intersection area of two polygons sharing a plane.
pub(crate) fn polygon_intersection_area(a: &PlanarPolygon, b: &PlanarPolygon) -> f64 {
    boolean::intersection_area(&a.vertices, &b.vertices)
}

fn ring_key(vertices: &[Vec2]) -> (usize, [u64; 2]) {
    let first = vertices
        .iter()
        .min_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).expect("finite"))
        .expect("non-empty ring");
    (vertices.len(), [first.x.to_bits(), first.y.to_bits()])
}

/// Set-theoretic union of two overlapping polygons on a shared plane. The
/// result may be non-convex; holes cannot arise from the overlap guarantee
/// and are discarded if numerical noise produces one.
pub fn polygon_union(
    a: &PlanarPolygon,
    b: &PlanarPolygon,
) -> Result<PlanarPolygon, GeometryError> {
    let ring = boolean::union_ring(&a.vertices, &b.vertices)?;
    PlanarPolygon::from_local(a.plane, ring)
}

/// Regular in-plane grid over the polygon's interior and boundary, lifted to
/// 3D. A degenerate-small polygon still yields one point (its vertex mean).
pub fn sample_polygon_grid(p: &PlanarPolygon, spacing: f64) -> Vec<Vec3> {
    assert!(spacing > 0.0, "grid spacing must be positive");
    let basis = p.plane.basis();
    let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
    let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for v in &p.vertices {
        min_x = min_x.min(v.x);
        min_y = min_y.min(v.y);
        max_x = max_x.max(v.x);
        max_y = max_y.max(v.y);
    }
    let nx = ((max_x - min_x) / spacing).floor() as i64 + 1;
    let ny = ((max_y - min_y) / spacing).floor() as i64 + 1;
    let mut out = Vec::new();
    for iy in 0..ny {
        for ix in 0..nx {
            let q = Vec2::new(min_x + ix as f64 * spacing, min_y + iy as f64 * spacing);
            if p.contains_local(&q) {
                out.push(basis.to_world(&q));
            }
        }
    }
    if out.is_empty() {
        out.push(vertex_centroid(p));
    }
    out
}

use super::{GeometryError, Plane, PlanarPolygon, Vec2, Vec3};

/// Convex hull of points known to lie on `plane`, returned as a CCW planar
/// polygon in the plane's canonical frame. Andrew's monotone chain.
pub fn convex_hull_planar(points: &[Vec3], plane: &Plane) -> Result<PlanarPolygon, GeometryError> {
    if points.len() < 3 {
        return Err(GeometryError::Degenerate(
            "convex hull needs at least 3 points".into(),
        ));
    }
    let basis = plane.basis();
    let mut local: Vec<Vec2> = points.iter().map(|p| basis.to_local(p)).collect();
    local.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).expect("finite coords"));
    local.dedup_by(|a, b| (*a - *b).norm() < 1e-12);
    if local.len() < 3 {
        return Err(GeometryError::Degenerate(
            "fewer than 3 distinct points".into(),
        ));
    }

    let cross = |o: &Vec2, a: &Vec2, b: &Vec2| (a - o).perp(&(b - o));

    let mut lower: Vec<Vec2> = Vec::new();
    for p in &local {
        while lower.len() >= 2
            && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0
        {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<Vec2> = Vec::new();
    for p in local.iter().rev() {
        while upper.len() >= 2
            && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0
        {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        return Err(GeometryError::Degenerate("all points collinear".into()));
    }
    PlanarPolygon::from_local(*plane, lower)
}

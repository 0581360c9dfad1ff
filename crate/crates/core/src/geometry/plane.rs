use super::{GeometryError, Vec2, Vec3};
use serde::{Deserialize, Serialize};

/// An infinite plane `{ x : normal . x = offset }` with unit normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    normal: Vec3,
    offset: f64,
}

/// Orthonormal in-plane frame: `origin + u * axis_u + v * axis_v` lifts local
/// coordinates back to world space. Derived canonically from the plane, so
/// two polygons projected onto the same plane share a frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneBasis {
    pub origin: Vec3,
    pub axis_u: Vec3,
    pub axis_v: Vec3,
}

impl Plane {
    pub fn new(normal: Vec3, offset: f64) -> Result<Self, GeometryError> {
        let len = normal.norm();
        if (len - 1.0).abs() > 1e-9 {
            return Err(GeometryError::NonUnit(len));
        }
        Ok(Self { normal, offset })
    }

    /// Plane through three points. Normal sign is canonicalized.
    pub fn from_points(a: &Vec3, b: &Vec3, c: &Vec3) -> Result<Self, GeometryError> {
        let cross = (b - a).cross(&(c - a));
        let len = cross.norm();
        if len < 1e-12 {
            return Err(GeometryError::Degenerate(
                "three points are collinear".into(),
            ));
        }
        let normal = canonical_sign(cross / len);
        let offset = normal.dot(a);
        Ok(Self { normal, offset })
    }

    pub fn normal(&self) -> Vec3 {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Signed distance from the point to the plane (along the normal).
    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }

    pub fn distance(&self, p: &Vec3) -> f64 {
        self.signed_distance(p).abs()
    }

    /// Orthogonal projection onto the plane.
    pub fn project(&self, p: &Vec3) -> Vec3 {
        p - self.normal * self.signed_distance(p)
    }

    /// Canonical in-plane frame anchored at the plane point closest to the
    /// world origin.
    pub fn basis(&self) -> PlaneBasis {
        let n = self.normal;
        // Seed axis: the world axis least aligned with the normal.
        let ax = n.x.abs();
        let ay = n.y.abs();
        let az = n.z.abs();
        let seed = if ax <= ay && ax <= az {
            Vec3::new(1.0, 0.0, 0.0)
        } else if ay <= az {
            Vec3::new(0.0, 1.0, 0.0)
        } else {
            Vec3::new(0.0, 0.0, 1.0)
        };
        let axis_u = (seed - n * seed.dot(&n)).normalize();
        let axis_v = n.cross(&axis_u);
        PlaneBasis {
            origin: n * self.offset,
            axis_u,
            axis_v,
        }
    }
}

impl PlaneBasis {
    pub fn to_local(&self, p: &Vec3) -> Vec2 {
        let d = p - self.origin;
        Vec2::new(d.dot(&self.axis_u), d.dot(&self.axis_v))
    }

    pub fn to_world(&self, p: &Vec2) -> Vec3 {
        self.origin + self.axis_u * p.x + self.axis_v * p.y
    }
}

/// Flips the normal so its largest-magnitude component is positive, making
/// fitted normals reproducible regardless of winding of the source points.
pub(crate) fn canonical_sign(n: Vec3) -> Vec3 {
    let ax = n.x.abs();
    let ay = n.y.abs();
    let az = n.z.abs();
    let lead = if ax >= ay && ax >= az {
        n.x
    } else if ay >= az {
        n.y
    } else {
        n.z
    };
    if lead < 0.0 {
        -n
    } else {
        n
    }
}

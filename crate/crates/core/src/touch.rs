//! Touch actions: geometry of the deliberate slow approach used to verify a
//! potential glass surface by contact. Execution runs inside the navigation
//! loop; this module plans the poses.

use crate::geometry::Vec3;
use crate::perception::GlassSurface;
use crate::sim::Pose;
use serde::Serialize;
use thiserror::Error;

/// Touch approach distances and speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TouchParams {
    /// Start distance from the target point along the oriented normal.
    pub delta_s: f64,
    /// Overshoot distance past the target point.
    pub delta_e: f64,
    /// Approach speed cap.
    pub v_touch: f64,
}

impl Default for TouchParams {
    fn default() -> Self {
        Self {
            delta_s: 1.0,
            delta_e: 1.0,
            v_touch: 0.2,
        }
    }
}

/// A fully planned touch action: hover at `ready`, fly straight through the
/// target to `end_position` at `touch_speed` with constant yaw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TouchAction {
    pub surface_id: u64,
    pub ready: Pose,
    pub end_position: Vec3,
    pub touch_speed: f64,
}

impl TouchAction {
    /// Unit direction of the approach (ready towards end).
    pub fn approach_dir(&self) -> Vec3 {
        (self.end_position - self.ready.position).normalize()
    }
}

/// What the touch established.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TouchOutcome {
    /// The contact module registered a touch; the surface is real.
    Confirmed { contact_position: Vec3 },
    /// The approach reached the end position untouched; the detection was a
    /// false positive.
    Invalidated,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TouchError {
    #[error("surface {0} is not in the Potential state")]
    NotPotential(u64),
    #[error("surface normal is within 5 degrees of vertical; touch yaw undefined")]
    VerticalNormal,
    #[error("agent lies on the surface plane; cannot orient the normal")]
    OnPlane,
    #[error("agent is not at the ready pose (position error {0} m, yaw error {1} rad)")]
    NotAtReadyPose(f64, f64),
}

/// Resolves the stored unoriented normal into the one pointing at the agent.
pub fn orient_normal_toward(
    surface: &GlassSurface,
    agent_position: &Vec3,
) -> Result<Vec3, TouchError> {
    let side = surface.normal.dot(&(agent_position - surface.centroid));
    if side.abs() < 1e-9 {
        return Err(TouchError::OnPlane);
    }
    Ok(if side > 0.0 {
        surface.normal
    } else {
        -surface.normal
    })
}

/// Plans the touch against the surface centroid.
pub fn plan_touch(
    surface: &GlassSurface,
    agent_position: &Vec3,
    params: &TouchParams,
) -> Result<TouchAction, TouchError> {
    plan_touch_at(surface, &surface.centroid, agent_position, params)
}

/// Plans the touch aimed at an arbitrary point on the surface; used when the
/// centroid's ready position is blocked and the approach shifts to another
/// interior point.
pub fn plan_touch_at(
    surface: &GlassSurface,
    target: &Vec3,
    agent_position: &Vec3,
    params: &TouchParams,
) -> Result<TouchAction, TouchError> {
    if !surface.is_potential() {
        return Err(TouchError::NotPotential(surface.id));
    }
    let n = orient_normal_toward(surface, agent_position)?;
    if n.z.abs() >= 5.0_f64.to_radians().cos() {
        return Err(TouchError::VerticalNormal);
    }
    let approach = -n;
    let yaw = approach.y.atan2(approach.x);
    Ok(TouchAction {
        surface_id: surface.id,
        ready: Pose::new(target + n * params.delta_s, yaw),
        end_position: target - n * params.delta_e,
        touch_speed: params.v_touch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_polygon_grid, vertex_centroid, Plane, PlanarPolygon, Vec2};
    use crate::perception::SurfaceStatus;
    use approx::assert_relative_eq;

    fn surface(normal: Vec3, centroid_hint: Vec3) -> GlassSurface {
        let plane = Plane::new(normal, normal.dot(&centroid_hint)).unwrap();
        let basis = plane.basis();
        let c2 = basis.to_local(&centroid_hint);
        let half = 0.75;
        let local = vec![
            Vec2::new(c2.x - half, c2.y - half),
            Vec2::new(c2.x + half, c2.y - half),
            Vec2::new(c2.x + half, c2.y + half),
            Vec2::new(c2.x - half, c2.y + half),
        ];
        let polygon = PlanarPolygon::from_local(plane, local).unwrap();
        GlassSurface {
            id: 11,
            centroid: vertex_centroid(&polygon),
            normal: plane.normal(),
            polygon: polygon.clone(),
            cloud: sample_polygon_grid(&polygon, 0.1),
            status: SurfaceStatus::Potential,
            observation_count: 1,
        }
    }

    #[test]
    fn normal_is_flipped_toward_agent() {
        let s = surface(Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 1.0));
        let n = orient_normal_toward(&s, &Vec3::new(0.0, 0.0, 1.0)).unwrap();
        assert_relative_eq!(n, Vec3::new(-1.0, 0.0, 0.0), epsilon = 1e-12);
        // Already oriented toward the agent: unchanged.
        let mut s2 = s.clone();
        s2.normal = Vec3::new(-1.0, 0.0, 0.0);
        let n2 = orient_normal_toward(&s2, &Vec3::new(0.0, 0.0, 1.0)).unwrap();
        assert_relative_eq!(n2, Vec3::new(-1.0, 0.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn agent_on_plane_cannot_orient() {
        let s = surface(Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 1.0));
        assert!(matches!(
            orient_normal_toward(&s, &Vec3::new(2.0, 3.0, 0.5)),
            Err(TouchError::OnPlane)
        ));
    }

    #[test]
    fn touch_geometry_follows_the_formulas() {
        let s = surface(Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 1.0));
        let action = plan_touch(&s, &Vec3::new(0.0, 0.0, 1.0), &TouchParams::default()).unwrap();
        // Oriented normal is -x, so ready sits at x = 1 facing +x and the
        // end position overshoots to x = 3.
        assert_relative_eq!(action.ready.position, Vec3::new(1.0, 0.0, 1.0), epsilon = 1e-9);
        assert_relative_eq!(action.ready.yaw, 0.0, epsilon = 1e-12);
        assert_relative_eq!(action.end_position, Vec3::new(3.0, 0.0, 1.0), epsilon = 1e-9);
        assert_relative_eq!(action.touch_speed, 0.2);
    }

    #[test]
    fn shorter_start_distance() {
        let s = surface(Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 1.0));
        let params = TouchParams {
            delta_s: 0.5,
            ..TouchParams::default()
        };
        let action = plan_touch(&s, &Vec3::new(0.0, 0.0, 1.0), &params).unwrap();
        assert_relative_eq!(
            (action.ready.position - s.centroid).norm(),
            0.5,
            epsilon = 1e-9
        );
    }

    #[test]
    fn confirmed_surface_is_rejected() {
        let mut s = surface(Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 1.0));
        s.status = SurfaceStatus::Confirmed;
        assert!(matches!(
            plan_touch(&s, &Vec3::new(0.0, 0.0, 1.0), &TouchParams::default()),
            Err(TouchError::NotPotential(11))
        ));
    }

    #[test]
    fn near_vertical_normal_is_rejected() {
        let tilt = 2.0_f64.to_radians();
        let n = Vec3::new(tilt.sin(), 0.0, tilt.cos());
        let s = surface(n, Vec3::new(2.0, 0.0, 2.0));
        assert!(matches!(
            plan_touch(&s, &Vec3::new(2.0, 0.0, 0.0), &TouchParams::default()),
            Err(TouchError::VerticalNormal)
        ));
    }
}

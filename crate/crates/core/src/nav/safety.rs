use crate::geometry::Vec3;
use crate::perception::SurfaceRegistry;
use crate::planner::Trajectory;

/// Earliest trajectory sample (walking at `step` arc length, from time
/// `from_t` onward) whose robot-radius sphere intersects a Potential
/// surface's polygon. Confirmed surfaces are already in the grid and
/// Invalidated ones are traversable, so both are ignored.
pub fn safety_check(
    traj: &Trajectory,
    registry: &SurfaceRegistry,
    step: f64,
    robot_radius: f64,
    from_t: f64,
) -> Option<(u64, f64)> {
    let mut last_checked: Option<Vec3> = None;
    for sample in &traj.samples {
        if sample.t < from_t {
            continue;
        }
        let due = match last_checked {
            None => true,
            Some(prev) => (sample.position - prev).norm() >= step,
        };
        let is_last = sample.t >= traj.duration();
        if !due && !is_last {
            continue;
        }
        last_checked = Some(sample.position);
        for s in registry.potentials() {
            if s.polygon.distance_to_point(&sample.position) <= robot_radius {
                return Some((s.id, sample.t));
            }
        }
    }
    None
}

/// First Potential surface whose polygon comes within `radius` of the
/// straight segment between two points; used to rule out premature
/// infeasibility declarations.
pub fn corridor_intersection(
    registry: &SurfaceRegistry,
    a: &Vec3,
    b: &Vec3,
    radius: f64,
    step: f64,
) -> Option<u64> {
    let d = b - a;
    let len = d.norm();
    let steps = (len / step).ceil().max(1.0) as usize;
    for k in 0..=steps {
        let p = a + d * (k as f64 / steps as f64);
        for s in registry.potentials() {
            if s.polygon.distance_to_point(&p) <= radius {
                return Some(s.id);
            }
        }
    }
    None
}

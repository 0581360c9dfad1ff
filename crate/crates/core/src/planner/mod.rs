//! Grid path planning and time parameterization for the standard
//! point-to-point trajectories.

mod astar;
mod trajectory;

pub use astar::{line_of_sight, plan_path, PlanError};
pub use trajectory::{time_parameterize, SpeedPlan, TrajSample, Trajectory};

use crate::geometry::Vec3;
use crate::mapping::OccupancyGrid;
use crate::sim::DynamicsLimits;

/// Result of the standard planner: a flyable trajectory or proof that the
/// known map admits no path.
#[derive(Debug, Clone)]
pub enum PlanOutcome {
    Planned(Trajectory),
    Infeasible,
}

/// Plans a collision-free trajectory from `start` to `goal` over the
/// current map: 26-connected A* over Free and Unknown space with the robot
/// radius inflation, shortcut smoothing and trapezoidal timing.
pub fn plan_standard(
    grid: &OccupancyGrid,
    start: &Vec3,
    goal: &Vec3,
    limits: &DynamicsLimits,
    start_yaw: f64,
    speed: &SpeedPlan,
    dt: f64,
) -> Result<PlanOutcome, PlanError> {
    match plan_path(grid, start, goal)? {
        None => Ok(PlanOutcome::Infeasible),
        Some(waypoints) => Ok(PlanOutcome::Planned(time_parameterize(
            &waypoints, start_yaw, limits, speed, dt,
        ))),
    }
}

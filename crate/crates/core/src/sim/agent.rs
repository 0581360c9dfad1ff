use super::scenario::{wrap_angle, DynamicsLimits, Pose};
use crate::geometry::Vec3;

/// Kinematic state of the vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub pose: Pose,
    pub velocity: Vec3,
    pub yaw_rate: f64,
}

impl AgentState {
    pub fn at_rest(pose: Pose) -> Self {
        Self {
            pose,
            velocity: Vec3::zeros(),
            yaw_rate: 0.0,
        }
    }
}

/// Velocity and yaw setpoints for one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentCommand {
    pub velocity: Vec3,
    pub yaw: f64,
}

/// Advances the state one tick toward the command under the dynamics
/// limits: velocity changes are clamped by `a_m * dt` and speed by `v_m`;
/// yaw follows the setpoint through rate/acceleration clamps.
pub fn step_agent(
    state: &AgentState,
    command: &AgentCommand,
    dt: f64,
    limits: &DynamicsLimits,
) -> AgentState {
    assert!(dt > 0.0, "time step must be positive");

    let mut dv = command.velocity - state.velocity;
    let max_dv = limits.a_m * dt;
    let dv_norm = dv.norm();
    if dv_norm > max_dv {
        dv *= max_dv / dv_norm;
    }
    let mut velocity = state.velocity + dv;
    let speed = velocity.norm();
    if speed > limits.v_m {
        velocity *= limits.v_m / speed;
    }

    let yaw_err = wrap_angle(command.yaw - state.pose.yaw);
    // Braking-aware rate setpoint: never commands a rate the acceleration
    // limit cannot stop within the remaining error.
    let mag = (yaw_err.abs() / dt)
        .min(limits.yaw_rate_m)
        .min((2.0 * limits.yaw_acc_m * yaw_err.abs()).sqrt());
    let desired_rate = yaw_err.signum() * mag;
    let mut dr = desired_rate - state.yaw_rate;
    let max_dr = limits.yaw_acc_m * dt;
    dr = dr.clamp(-max_dr, max_dr);
    let yaw_rate = (state.yaw_rate + dr).clamp(-limits.yaw_rate_m, limits.yaw_rate_m);

    AgentState {
        pose: Pose::new(state.pose.position + velocity * dt, state.pose.yaw + yaw_rate * dt),
        velocity,
        yaw_rate,
    }
}

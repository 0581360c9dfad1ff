//! Parameter bundle for simulation and navigation, with the defaults used
//! throughout the experiments. Every field is overridable from the CLI.

use crate::perception::{CameraModel, PerceptionParams};
use crate::sim::ContactSensorGeometry;
use crate::touch::TouchParams;
use serde::Serialize;

/// Simulator-side parameters: tick, sensing and body geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimParams {
    /// Simulation tick in seconds.
    pub dt: f64,
    pub camera: CameraModel,
    pub sensor: ContactSensorGeometry,
    /// Collision radius used for inflation and safety checks.
    pub robot_radius: f64,
    /// Standard deviation of the depth noise in meters.
    pub depth_sigma: f64,
    /// Occupancy grid resolution in meters per voxel.
    pub grid_resolution: f64,
    /// Body impacts on glass at normal speed up to this are cushioned stops
    /// (the bumper compresses); faster impacts are crashes.
    pub bump_safe_speed: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            dt: 0.02,
            camera: CameraModel::default(),
            sensor: ContactSensorGeometry::default(),
            robot_radius: 0.3,
            depth_sigma: 0.01,
            grid_resolution: 0.1,
            bump_safe_speed: 0.6,
        }
    }
}

/// Navigation-loop parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NavParams {
    /// Arc-length step of the trajectory safety check in meters.
    pub safety_step: f64,
    /// Goal acceptance radius in meters.
    pub goal_tolerance: f64,
    /// Perception cadence in simulation ticks (mapping runs every tick).
    pub perception_interval: u64,
    /// Radius of the occupied disc stamped by the contact-based baseline;
    /// kept small so mapping a pane takes many passive contacts.
    pub r_mark: f64,
    /// Back-off distance after an unplanned contact.
    pub backoff: f64,
    /// Speed of the post-touch retreat along the just-cleared approach line.
    pub retreat_speed: f64,
    /// Cruise speed of the contact-based baseline; low enough to stop
    /// within the sensor reach from a surprise contact even on diagonal
    /// approaches.
    pub contact_cruise: f64,
    /// Per-task wall of simulated seconds before giving up.
    pub task_timeout: f64,
}

impl Default for NavParams {
    fn default() -> Self {
        Self {
            safety_step: 0.1,
            goal_tolerance: 0.2,
            perception_interval: 5,
            r_mark: 0.15,
            backoff: 0.5,
            retreat_speed: 0.5,
            contact_cruise: 0.6,
            task_timeout: 240.0,
        }
    }
}

/// Root parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Params {
    pub sim: SimParams,
    pub nav: NavParams,
    pub perception: PerceptionParams,
    pub touch: TouchParams,
}

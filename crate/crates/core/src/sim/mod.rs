//! Deterministic ground-truth world and synthetic sensing: depth that passes
//! through glass, simulator-provided segmentation with true and phantom
//! regions, bounded agent kinematics and geometric contact detection.

mod agent;
mod scenario;
mod sensor;

pub use agent::{step_agent, AgentCommand, AgentState};
pub use scenario::{
    wrap_angle, Aabb, DynamicsLimits, GlassPanel, PanelKind, Pose, Scenario, ScenarioError,
    ScenarioSeeds,
};
pub use sensor::{
    body_in_obstacle, check_contact, crash_crossing, render_depth, render_segmentation,
    ContactEvent, ContactSensorGeometry,
};

//! Glass-aware aerial navigation stack.
//!
//! The crate couples an incremental planar glass-surface mapper (plane
//! fitting, polygon fusion, IoU data association) with an occupancy-grid
//! world model, a deterministic flight simulator, touch-action verification
//! of suspected glass, and three point-to-point navigators (active touch,
//! vision-only, passive contact) plus a benchmark harness over them.

pub mod bench;
pub mod geometry;
pub mod mapping;
pub mod nav;
pub mod plot;
pub mod params;
pub mod perception;
pub mod planner;
pub mod sim;
pub mod touch;

pub use geometry::{GeometryError, Vec2, Vec3};

use crate::geometry::Vec3;
use crate::touch::TouchAction;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Terminal state of one navigation task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Reached,
    Infeasible,
    Crashed,
}

/// Event annotations in the trajectory log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogEvent {
    TaskStart { index: u32 },
    TouchStart { surface_id: u64 },
    Contact { surface_id: u64, position: Vec3 },
    Invalidated { surface_id: u64 },
    Bump { position: Vec3 },
    Reached,
    Infeasible,
    Crashed,
}

/// One tick of the trajectory log (newline-delimited JSON on disk).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub t: f64,
    pub position: Vec3,
    pub yaw: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub event: Option<LogEvent>,
}

/// A touch action executed during a run, with the surface geometry at plan
/// time (kept for verification).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TouchRecord {
    pub action: TouchAction,
    /// The aimed surface point (the centroid unless it was occluded).
    pub target: Vec3,
    pub centroid: Vec3,
    pub oriented_normal: Vec3,
}

/// Run diagnostics that are not part of the serialized result.
#[derive(Debug, Clone, Default)]
pub struct RunDiag {
    /// Ground-truth indices of true panels crossed by any planned
    /// trajectory during the run.
    pub planned_true_panels: BTreeSet<usize>,
    pub touch_records: Vec<TouchRecord>,
}

/// Outcome and totals of one navigation task.
#[derive(Debug, Clone, Serialize)]
pub struct NavResult {
    pub outcome: Outcome,
    pub duration_s: f64,
    pub path_length_m: f64,
    pub contact_count: u32,
    pub touch_count: u32,
    #[serde(skip)]
    pub log: Vec<LogRecord>,
    #[serde(skip)]
    pub diag: RunDiag,
}

//! Point-to-point navigation: the active-contact loop plus the two
//! baselines, all driven through a shared deterministic run context.

mod active;
mod baselines;
mod result;
mod run;
mod safety;

pub use active::{navigate_active, navigate_active_task};
pub use baselines::{
    navigate_contact_based, navigate_contact_based_task, navigate_noncontact,
    navigate_noncontact_task,
};
pub use result::{LogEvent, LogRecord, NavResult, Outcome, RunDiag, TouchRecord};
pub use run::{NavMode, NavRun};
pub use safety::{corridor_intersection, safety_check};

use super::result::{LogEvent, NavResult, Outcome};
use super::run::{FlyOutcome, NavMode, NavRun};
use crate::geometry::Vec3;
use crate::params::Params;
use crate::planner::{PlanError, PlanOutcome, SpeedPlan};
use crate::sim::{ContactEvent, Scenario};

/// Vision-only baseline: every visually detected glass surface is filled
/// into the map immediately and treated as a hard obstacle; no touches.
pub fn navigate_noncontact(scenario: &Scenario, params: &Params, seed: u64) -> NavResult {
    let mut run = NavRun::new(scenario, params, NavMode::NonContact, seed);
    navigate_noncontact_task(&mut run, scenario.goal, 0)
}

pub fn navigate_noncontact_task(run: &mut NavRun, goal: Vec3, task_index: u32) -> NavResult {
    task_wrapper(run, goal, task_index, |run, goal, deadline| {
        baseline_loop(run, goal, deadline, run.scenario.limits.v_m, None)
    })
}

/// Passive-contact baseline: ignores glass segmentation entirely, flies at a
/// guarded cruise speed, and on every bump stamps an occupied disc around
/// the contact point before backing off and replanning.
pub fn navigate_contact_based(scenario: &Scenario, params: &Params, seed: u64) -> NavResult {
    let mut run = NavRun::new(scenario, params, NavMode::ContactBased, seed);
    navigate_contact_based_task(&mut run, scenario.goal, 0)
}

pub fn navigate_contact_based_task(run: &mut NavRun, goal: Vec3, task_index: u32) -> NavResult {
    task_wrapper(run, goal, task_index, |run, goal, deadline| {
        let cruise = run.params.nav.contact_cruise;
        baseline_loop(run, goal, deadline, cruise, Some(mark_contact_disc))
    })
}

fn task_wrapper(
    run: &mut NavRun,
    goal: Vec3,
    task_index: u32,
    body: impl FnOnce(&mut NavRun, &Vec3, f64) -> Outcome,
) -> NavResult {
    let t0 = run.t;
    let len0 = run.path_length;
    let contacts0 = run.contacts;
    let touches0 = run.touches;
    let log0 = run.log.len();
    run.log_event(LogEvent::TaskStart { index: task_index });
    let deadline = run.t + run.params.nav.task_timeout;
    let outcome = body(run, &goal, deadline);
    run.log_event(match outcome {
        Outcome::Reached => LogEvent::Reached,
        Outcome::Infeasible => LogEvent::Infeasible,
        Outcome::Crashed => LogEvent::Crashed,
    });
    NavResult {
        outcome,
        duration_s: run.t - t0,
        path_length_m: run.path_length - len0,
        contact_count: run.contacts - contacts0,
        touch_count: run.touches - touches0,
        log: run.log[log0..].to_vec(),
        diag: run.diag.clone(),
    }
}

/// Shared plan-fly-react loop of both baselines. `on_contact` stamps the
/// map for the contact-based method; the vision-only method never expects
/// contacts but reacts defensively all the same.
fn baseline_loop(
    run: &mut NavRun,
    goal: &Vec3,
    deadline: f64,
    cruise: f64,
    on_contact: Option<fn(&mut NavRun, &ContactEvent)>,
) -> Outcome {
    let goal_tol = run.params.nav.goal_tolerance;
    loop {
        if run.crashed {
            return Outcome::Crashed;
        }
        if run.t >= deadline {
            run.safe_hover(0.5, deadline + 30.0);
            return Outcome::Infeasible;
        }
        if (run.position() - goal).norm() <= goal_tol {
            run.brake_to_rest();
            return Outcome::Reached;
        }
        match run.plan_to(goal, &SpeedPlan::cruise(cruise)) {
            Err(PlanError::StartOccupied) => {
                if !run.escape_blocked_start(deadline) {
                    run.safe_hover(0.5, deadline + 30.0);
                    return Outcome::Infeasible;
                }
            }
            Err(PlanError::GoalOccupied) | Ok(PlanOutcome::Infeasible) => {
                run.safe_hover(0.5, deadline + 30.0);
                return Outcome::Infeasible;
            }
            Ok(PlanOutcome::Planned(traj)) => match run.fly_trajectory(&traj, false, deadline) {
                FlyOutcome::Completed
                | FlyOutcome::DivertedBlocked
                | FlyOutcome::DivertedUnsafe(_) => {}
                FlyOutcome::Contact(ev) => {
                    run.log_event(LogEvent::Bump {
                        position: ev.contact_position,
                    });
                    if let Some(mark) = on_contact {
                        mark(run, &ev);
                    }
                    run.backoff_from_contact(deadline);
                }
                FlyOutcome::Crashed => return Outcome::Crashed,
                FlyOutcome::Deadline => {
                    run.safe_hover(0.5, deadline + 30.0);
                    return Outcome::Infeasible;
                }
            },
        }
    }
}

/// Stamps an occupied disc of radius `r_mark` around the contact point on
/// the touched surface's tangent plane.
fn mark_contact_disc(run: &mut NavRun, ev: &ContactEvent) {
    let panel = &run.scenario.glass_panels[ev.panel];
    let (w_axis, h_axis) = panel.axes();
    let r = run.params.nav.r_mark;
    let step = run.grid.resolution() * 0.5;
    let n = (r / step).ceil() as i32;
    let mut points = Vec::new();
    for b in -n..=n {
        for a in -n..=n {
            let da = a as f64 * step;
            let db = b as f64 * step;
            if da * da + db * db <= r * r {
                points.push(ev.contact_position + w_axis * da + h_axis * db);
            }
        }
    }
    run.grid.mark_occupied_points(&points);
}

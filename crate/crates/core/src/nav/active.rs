use super::result::{LogEvent, NavResult, Outcome};
use super::run::{FlyOutcome, NavMode, NavRun};
use super::safety::{corridor_intersection, safety_check};
use crate::geometry::Vec3;
use crate::params::Params;
use crate::planner::{PlanError, PlanOutcome, SpeedPlan};
use crate::sim::Scenario;
use std::collections::BTreeMap;

/// Runs the full active-contact navigation task on a fresh world.
pub fn navigate_active(scenario: &Scenario, params: &Params, seed: u64) -> NavResult {
    let mut run = NavRun::new(scenario, params, NavMode::Active, seed);
    navigate_active_task(&mut run, scenario.goal, 0)
}

/// One active-contact point-to-point task on an existing run (map and
/// registry persist across tasks within a run).
pub fn navigate_active_task(run: &mut NavRun, goal: Vec3, task_index: u32) -> NavResult {
    let t0 = run.t;
    let len0 = run.path_length;
    let contacts0 = run.contacts;
    let touches0 = run.touches;
    let log0 = run.log.len();
    run.log_event(LogEvent::TaskStart { index: task_index });

    let deadline = run.t + run.params.nav.task_timeout;
    let outcome = active_loop(run, &goal, deadline);
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

fn active_loop(run: &mut NavRun, goal: &Vec3, deadline: f64) -> Outcome {
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

        match run.plan_to(goal, &SpeedPlan::cruise(run.scenario.limits.v_m)) {
            Err(PlanError::StartOccupied) => {
                if !run.escape_blocked_start(deadline) {
                    run.safe_hover(0.5, deadline + 30.0);
                    return Outcome::Infeasible;
                }
            }
            Err(PlanError::GoalOccupied) | Ok(PlanOutcome::Infeasible) => {
                // The known map admits no path. Give up only once no
                // Potential surface blocks the straight corridor; otherwise
                // resolve one first.
                let blocking = corridor_intersection(
                    &run.registry,
                    &run.position(),
                    goal,
                    run.params.sim.robot_radius,
                    run.params.nav.safety_step,
                );
                match blocking {
                    Some(sid) => match touch_chain(run, sid, deadline) {
                        ChainOutcome::Progress => {}
                        ChainOutcome::Crashed => return Outcome::Crashed,
                        ChainOutcome::Stuck => {
                            run.safe_hover(0.5, deadline + 30.0);
                            return Outcome::Infeasible;
                        }
                    },
                    None => {
                        run.safe_hover(0.5, deadline + 30.0);
                        return Outcome::Infeasible;
                    }
                }
            }
            Ok(PlanOutcome::Planned(traj)) => {
                match safety_check(
                    &traj,
                    &run.registry,
                    run.params.nav.safety_step,
                    run.params.sim.robot_radius,
                    0.0,
                ) {
                    None => match run.fly_trajectory(&traj, true, deadline) {
                        FlyOutcome::Completed
                        | FlyOutcome::DivertedUnsafe(_)
                        | FlyOutcome::DivertedBlocked => {}
                        FlyOutcome::Contact(_) => run.backoff_from_contact(deadline),
                        FlyOutcome::Crashed => return Outcome::Crashed,
                        FlyOutcome::Deadline => {
                            run.safe_hover(0.5, deadline + 30.0);
                            return Outcome::Infeasible;
                        }
                    },
                    Some((sid, _)) => match touch_chain(run, sid, deadline) {
                        ChainOutcome::Progress => {}
                        ChainOutcome::Crashed => return Outcome::Crashed,
                        ChainOutcome::Stuck => {
                            run.safe_hover(0.5, deadline + 30.0);
                            return Outcome::Infeasible;
                        }
                    },
                }
            }
        }
    }
}

enum ChainOutcome {
    /// Something got resolved or the world changed; replan from the top.
    Progress,
    Crashed,
    /// No touchable target remains.
    Stuck,
}

/// Transit to the first intersected surface's ready pose and touch it. If
/// the transit itself is unsafe against a different Potential surface, that
/// surface becomes the target ("first intersected" chains forward).
fn touch_chain(run: &mut NavRun, first_sid: u64, deadline: f64) -> ChainOutcome {
    let mut target = first_sid;
    let mut attempts: BTreeMap<u64, u32> = BTreeMap::new();
    loop {
        if run.t >= deadline {
            return ChainOutcome::Stuck;
        }
        let tries = attempts.entry(target).or_insert(0);
        *tries += 1;
        if *tries > 4 {
            return ChainOutcome::Stuck;
        }

        // The surface may have been resolved or merged away meanwhile.
        let Some(surface) = run.registry.get(target) else {
            return ChainOutcome::Progress;
        };
        if !surface.is_potential() {
            return ChainOutcome::Progress;
        }

        let Some((action, transit)) = run.plan_touch_transit(target) else {
            return ChainOutcome::Stuck;
        };

        // Divert to any Potential surface the transit would cross first.
        if let Some((other, _)) = safety_check(
            &transit,
            &run.registry,
            run.params.nav.safety_step,
            run.params.sim.robot_radius,
            0.0,
        ) {
            if other != target {
                target = other;
                continue;
            }
            // The transit grazes its own target: the ready pose keeps a full
            // delta_s of clearance, so treat it as acceptable only when the
            // flagged point is the approach end; otherwise retry.
            if attempts.get(&target).copied().unwrap_or(0) > 2 {
                return ChainOutcome::Stuck;
            }
            continue;
        }

        match run.fly_trajectory(&transit, true, deadline) {
            FlyOutcome::Completed => {}
            FlyOutcome::DivertedUnsafe(other) => {
                if other != target {
                    target = other;
                }
                continue;
            }
            FlyOutcome::DivertedBlocked => return ChainOutcome::Progress,
            FlyOutcome::Contact(_) => {
                run.backoff_from_contact(deadline);
                return ChainOutcome::Progress;
            }
            FlyOutcome::Crashed => return ChainOutcome::Crashed,
            FlyOutcome::Deadline => return ChainOutcome::Stuck,
        }

        // Re-anchor on the surface's current geometry: merges during the
        // transit may have shifted the ready pose.
        let Some((action, _)) = refreshed_action(run, target, &action) else {
            return ChainOutcome::Progress; // resolved meanwhile
        };
        run.align_yaw(action.ready.yaw, deadline);
        match run.execute_touch(&action) {
            Ok(_) => return ChainOutcome::Progress,
            Err(_) => continue, // e.g. drifted off the ready pose: retry
        }
    }
}

/// Replans the touch action against the current surface state; keeps the
/// original when the surface is unchanged. Returns None if the surface is no
/// longer Potential.
fn refreshed_action(
    run: &mut NavRun,
    sid: u64,
    planned: &crate::touch::TouchAction,
) -> Option<(crate::touch::TouchAction, ())> {
    let surface = run.registry.get(sid)?;
    if !surface.is_potential() {
        return None;
    }
    // If we are still within tolerance of the planned ready pose, keep it.
    let perr = (run.position() - planned.ready.position).norm();
    if perr <= 0.08 {
        return Some((*planned, ()));
    }
    let (action, _) = run.plan_touch_transit(sid)?;
    Some((action, ()))
}

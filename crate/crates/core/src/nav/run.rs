use super::result::{LogEvent, LogRecord, RunDiag, TouchRecord};
use super::safety::safety_check;
use crate::geometry::Vec3;
use crate::mapping::OccupancyGrid;
use crate::params::Params;
use crate::perception::{detect_glass_frame, FrameInput, SurfaceRegistry, SurfaceStatus};
use crate::planner::{plan_standard, PlanError, PlanOutcome, SpeedPlan, Trajectory};
use crate::sim::{
    check_contact, crash_crossing, render_depth, render_segmentation, step_agent, AgentCommand,
    AgentState, ContactEvent, Scenario,
};
use crate::touch::{plan_touch_at, TouchAction, TouchError, TouchOutcome};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Behavioral flavor of the sensing loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NavMode {
    /// Full perception; unsafe trajectories trigger touch actions.
    Active,
    /// Full perception; every detection is trusted and filled immediately.
    NonContact,
    /// Depth-only sensing; glass is discovered by bumping into it.
    ContactBased,
}

/// Result of flying one trajectory inside the loop.
#[derive(Debug, Clone, PartialEq)]
pub enum FlyOutcome {
    Completed,
    /// Perception re-check flagged a Potential surface on the remaining path.
    DivertedUnsafe(u64),
    /// Newly occupied voxels block the remaining path.
    DivertedBlocked,
    /// An unplanned physical contact happened.
    Contact(ContactEvent),
    Crashed,
    Deadline,
}

/// Single mutable context of one simulated navigation run. All three
/// navigators drive this; runs are single-threaded and deterministic for a
/// fixed (scenario, params, seed).
pub struct NavRun<'a> {
    pub scenario: &'a Scenario,
    pub params: &'a Params,
    pub mode: NavMode,
    pub grid: OccupancyGrid,
    pub registry: SurfaceRegistry,
    pub state: AgentState,
    pub t: f64,
    pub ticks: u64,
    pub log: Vec<LogRecord>,
    pub contacts: u32,
    pub touches: u32,
    pub crashed: bool,
    pub path_length: f64,
    pub diag: RunDiag,
    rng: ChaCha8Rng,
    last_contact: BTreeMap<usize, f64>,
}

/// Debounce window for contact re-crossings: pulling the tip back off the
/// glass is a release, not a new touch.
const CONTACT_DEBOUNCE_S: f64 = 1.0;

impl<'a> NavRun<'a> {
    pub fn new(scenario: &'a Scenario, params: &'a Params, mode: NavMode, seed: u64) -> Self {
        let grid = OccupancyGrid::from_bounds(
            &scenario.bounds,
            params.sim.grid_resolution,
            params.sim.robot_radius,
        );
        Self {
            scenario,
            params,
            mode,
            grid,
            registry: SurfaceRegistry::new(params.perception),
            state: AgentState::at_rest(scenario.start),
            t: 0.0,
            ticks: 0,
            log: Vec::new(),
            contacts: 0,
            touches: 0,
            crashed: false,
            path_length: 0.0,
            diag: RunDiag::default(),
            rng: ChaCha8Rng::seed_from_u64(scenario.seeds.depth_noise ^ seed),
            last_contact: BTreeMap::new(),
        }
    }

    pub fn position(&self) -> Vec3 {
        self.state.pose.position
    }

    pub fn log_event(&mut self, event: LogEvent) {
        self.log.push(LogRecord {
            t: self.t,
            position: self.state.pose.position,
            yaw: self.state.pose.yaw,
            event: Some(event),
        });
    }

    /// Advances the world one tick: kinematics, crash/contact checks,
    /// mapping every tick and perception on its cadence. Returns a debounced
    /// physical contact if one happened.
    pub fn tick(&mut self, command: &AgentCommand) -> Option<ContactEvent> {
        let dt = self.params.sim.dt;
        let prev = self.state;
        self.state = step_agent(&prev, command, dt, &self.scenario.limits);
        self.t += dt;
        self.ticks += 1;
        self.path_length += (self.state.pose.position - prev.pose.position).norm();

        // Body-vs-glass: a crossing attempt at gentle normal speed is a
        // cushioned bumper stop (the pane blocks penetration); a fast one is
        // a crash. Opaque boxes are always fatal to enter.
        let mut body_bump: Option<ContactEvent> = None;
        if let Some(panel_idx) = crash_crossing(
            self.scenario,
            &prev.pose.position,
            &self.state.pose.position,
        ) {
            let panel = &self.scenario.glass_panels[panel_idx];
            let n = panel.normal.normalize();
            let impact = self.state.velocity.dot(&n).abs();
            if impact > self.params.sim.bump_safe_speed {
                self.crashed = true;
            } else {
                let q = panel
                    .segment_crossing(&prev.pose.position, &self.state.pose.position)
                    .expect("crossing reported");
                let back = prev.pose.position - self.state.pose.position;
                let clamped = q + if back.norm() > 1e-12 {
                    back / back.norm() * 1e-3
                } else {
                    n * 1e-3
                };
                self.path_length -= (self.state.pose.position - clamped).norm();
                self.state.pose.position = clamped;
                self.state.velocity -= n * self.state.velocity.dot(&n);
                body_bump = Some(ContactEvent {
                    time: self.t,
                    contact_position: q,
                    panel: panel_idx,
                });
            }
        }
        if crate::sim::body_in_obstacle(self.scenario, &self.state.pose.position) {
            self.crashed = true;
        }

        let raw_contact = check_contact(
            self.scenario,
            &prev.pose,
            &self.state.pose,
            &self.params.sim.sensor,
            self.t,
        )
        .or(body_bump);
        let contact = raw_contact.and_then(|ev| {
            let recent = self
                .last_contact
                .get(&ev.panel)
                .is_some_and(|&t0| self.t - t0 < CONTACT_DEBOUNCE_S);
            self.last_contact.insert(ev.panel, self.t);
            if recent {
                None
            } else {
                self.contacts += 1;
                Some(ev)
            }
        });

        // Sensing: mapping every tick (full free-space marching on the
        // perception cadence, hit marking in between), segmentation on the
        // perception cadence (the contact-based baseline ignores vision).
        // Stationary hover ticks between perception frames re-observe an
        // identical scene and are skipped.
        let cadence_due = self.ticks % self.params.nav.perception_interval == 0;
        let perception_due = cadence_due && self.mode != NavMode::ContactBased;
        let moved = (self.state.pose.position - prev.pose.position).norm() > 1e-9
            || (self.state.pose.yaw - prev.pose.yaw).abs() > 1e-9;
        if cadence_due || moved {
            let depth = render_depth(
                self.scenario,
                &self.state.pose,
                &self.params.sim.camera,
                self.params.sim.depth_sigma,
                &mut self.rng,
            );
            let masks = if perception_due {
                render_segmentation(self.scenario, &self.state.pose, &self.params.sim.camera)
            } else {
                Vec::new()
            };
            let frame = FrameInput {
                depth,
                masks,
                pose: self.state.pose,
            };
            let _ = if cadence_due {
                self.grid.integrate_depth(&frame, &self.params.sim.camera)
            } else {
                self.grid.integrate_hits(&frame, &self.params.sim.camera)
            };
            if perception_due {
                let candidates =
                    detect_glass_frame(&frame, &self.params.sim.camera, &self.params.perception);
                if !candidates.is_empty() || !self.registry.surfaces.is_empty() {
                    self.registry.ingest_frame(candidates);
                }
                if self.mode == NavMode::NonContact {
                    // Trust every detection: stamp the clouds straight into
                    // the grid (no contact information, so no offset).
                    for i in 0..self.registry.surfaces.len() {
                        let cloud = self.registry.surfaces[i].cloud.clone();
                        self.grid.mark_occupied_points(&cloud);
                    }
                }
            }
        }

        self.log.push(LogRecord {
            t: self.t,
            position: self.state.pose.position,
            yaw: self.state.pose.yaw,
            event: None,
        });
        contact
    }

    /// Plans a standard trajectory from the current pose to `goal` and
    /// records which true panels it would cross (diagnostics).
    pub fn plan_to(&mut self, goal: &Vec3, speed: &SpeedPlan) -> Result<PlanOutcome, PlanError> {
        let outcome = plan_standard(
            &self.grid,
            &self.state.pose.position,
            goal,
            &self.scenario.limits,
            self.state.pose.yaw,
            speed,
            self.params.sim.dt,
        )?;
        if let PlanOutcome::Planned(traj) = &outcome {
            self.record_planned_panels(traj);
        }
        Ok(outcome)
    }

    fn record_planned_panels(&mut self, traj: &Trajectory) {
        for w in traj.samples.windows(8) {
            let (a, b) = (w[0].position, w[w.len() - 1].position);
            for (idx, panel) in self.scenario.glass_panels.iter().enumerate() {
                if panel.kind == crate::sim::PanelKind::True
                    && panel.segment_crossing(&a, &b).is_some()
                {
                    self.diag.planned_true_panels.insert(idx);
                }
            }
        }
    }

    /// Flies a trajectory with periodic safety/grid rechecks.
    pub fn fly_trajectory(
        &mut self,
        traj: &Trajectory,
        with_safety: bool,
        deadline: f64,
    ) -> FlyOutcome {
        let dt = self.params.sim.dt;
        let t0 = self.t;
        loop {
            if self.t >= deadline {
                return FlyOutcome::Deadline;
            }
            let elapsed = self.t - t0 + dt;
            let target = traj.at(elapsed);
            let cmd = AgentCommand {
                velocity: (target.position - self.state.pose.position) / dt,
                yaw: target.yaw,
            };
            let contact = self.tick(&cmd);
            if self.crashed {
                return FlyOutcome::Crashed;
            }
            if let Some(ev) = contact {
                return FlyOutcome::Contact(ev);
            }
            if elapsed >= traj.duration() {
                if (self.state.pose.position - traj.end_position()).norm() <= 0.05 {
                    return FlyOutcome::Completed;
                }
                if elapsed > traj.duration() + 3.0 {
                    return FlyOutcome::DivertedBlocked; // tracking failure, replan
                }
            }
            if self.ticks % self.params.nav.perception_interval == 0 {
                if with_safety {
                    if let Some((sid, _)) = safety_check(
                        traj,
                        &self.registry,
                        self.params.nav.safety_step,
                        self.params.sim.robot_radius,
                        elapsed,
                    ) {
                        return FlyOutcome::DivertedUnsafe(sid);
                    }
                }
                // Divert for freshly blocked cells only once they are near
                // in time; distant blockage is replanned without breaking
                // the current smooth flight.
                if let Some(t_block) = self.remaining_blocked(traj, elapsed) {
                    if t_block - elapsed < 3.0 {
                        return FlyOutcome::DivertedBlocked;
                    }
                }
            }
        }
    }

    /// Earliest trajectory time at which newly occupied voxels intrude on
    /// the remaining path.
    fn remaining_blocked(&self, traj: &Trajectory, from_t: f64) -> Option<f64> {
        let mut last: Option<Vec3> = None;
        for s in &traj.samples {
            if s.t < from_t {
                continue;
            }
            let due = match last {
                None => true,
                Some(prev) => (s.position - prev).norm() >= 0.1,
            };
            if due || s.t >= traj.duration() {
                last = Some(s.position);
                if self.grid.is_blocked_point(&s.position) {
                    return Some(s.t);
                }
            }
        }
        None
    }

    /// Hover in place and slew yaw to the target; deadbeat converges to
    /// double precision.
    pub fn align_yaw(&mut self, yaw: f64, deadline: f64) {
        let hold = self.state.pose.position;
        for _ in 0..2000 {
            if self.t >= deadline || self.crashed {
                return;
            }
            let err = crate::sim::wrap_angle(yaw - self.state.pose.yaw);
            if err.abs() <= 1e-9 && self.state.yaw_rate.abs() <= 1e-9 {
                return;
            }
            let cmd = AgentCommand {
                velocity: (hold - self.state.pose.position) / self.params.sim.dt,
                yaw,
            };
            self.tick(&cmd);
        }
    }

    /// Commands zero velocity until at rest.
    pub fn brake_to_rest(&mut self) {
        let yaw = self.state.pose.yaw;
        for _ in 0..500 {
            if self.state.velocity.norm() <= 1e-9 {
                return;
            }
            self.tick(&AgentCommand {
                velocity: Vec3::zeros(),
                yaw,
            });
        }
    }

    /// Straight-line hop at a speed cap with constant yaw; no rechecks.
    /// Returns the contact if one interrupts the hop.
    pub fn fly_straight_to(
        &mut self,
        target: &Vec3,
        speed_cap: f64,
        yaw: f64,
        deadline: f64,
    ) -> Option<ContactEvent> {
        let a_m = self.scenario.limits.a_m;
        loop {
            if self.t >= deadline || self.crashed {
                return None;
            }
            let to_go = target - self.state.pose.position;
            let dist = to_go.norm();
            if dist <= 0.02 {
                self.brake_to_rest();
                return None;
            }
            let speed = speed_cap.min((2.0 * a_m * dist).sqrt());
            let cmd = AgentCommand {
                velocity: to_go / dist * speed,
                yaw,
            };
            if let Some(ev) = self.tick(&cmd) {
                return Some(ev);
            }
        }
    }

    /// Executes a planned touch action from the ready pose: slow constant-yaw
    /// approach, confirm on contact (fill the map before retreating) or
    /// invalidate at the end position, then retreat to ready.
    pub fn execute_touch(&mut self, action: &TouchAction) -> Result<TouchOutcome, TouchError> {
        let perr = (self.state.pose.position - action.ready.position).norm();
        let yerr = crate::sim::wrap_angle(self.state.pose.yaw - action.ready.yaw).abs();
        if perr > 0.1 || yerr > 0.1 {
            return Err(TouchError::NotAtReadyPose(perr, yerr));
        }
        self.touches += 1;
        self.log_event(LogEvent::TouchStart {
            surface_id: action.surface_id,
        });

        let dir = action.approach_dir();
        let yaw = action.ready.yaw;
        let a_m = self.scenario.limits.a_m;
        let mut outcome = TouchOutcome::Invalidated;
        let max_ticks = ((2.5 * (action.end_position - action.ready.position).norm()
            / action.touch_speed)
            / self.params.sim.dt) as u64
            + 500;
        for _ in 0..max_ticks {
            let remaining = (action.end_position - self.state.pose.position).dot(&dir);
            if remaining <= 0.02 {
                break; // reached the end position: nothing there
            }
            let speed = action
                .touch_speed
                .min((2.0 * a_m * remaining.max(0.0)).sqrt());
            let contact = self.tick(&AgentCommand {
                velocity: dir * speed,
                yaw,
            });
            if self.crashed {
                break;
            }
            if let Some(ev) = contact {
                outcome = TouchOutcome::Confirmed {
                    contact_position: ev.contact_position,
                };
                break;
            }
        }
        self.brake_to_rest();
        if self.crashed {
            return Ok(outcome);
        }

        match outcome {
            TouchOutcome::Confirmed { contact_position } => {
                if let Some(s) = self.registry.get_mut(action.surface_id) {
                    s.status = SurfaceStatus::Confirmed;
                }
                // The map fill happens before the retreat so replanning sees
                // the updated grid immediately.
                if let Some(s) = self.registry.get(action.surface_id).cloned() {
                    let _ = self.grid.fill_glass(&s, &contact_position);
                }
                self.log_event(LogEvent::Contact {
                    surface_id: action.surface_id,
                    position: contact_position,
                });
            }
            TouchOutcome::Invalidated => {
                if let Some(s) = self.registry.get_mut(action.surface_id) {
                    s.status = SurfaceStatus::Invalidated;
                }
                self.log_event(LogEvent::Invalidated {
                    surface_id: action.surface_id,
                });
            }
        }

        // Retreat to the ready pose for safety and replanning. The line
        // back was just traversed, so the retreat may run faster than the
        // approach.
        self.fly_straight_to(
            &action.ready.position,
            self.params.nav.retreat_speed,
            yaw,
            f64::INFINITY,
        );
        Ok(outcome)
    }

    /// Picks a touchable interior point of the surface (centroid first) whose
    /// ready position is clear, plans the transit and the touch action.
    pub fn plan_touch_transit(
        &mut self,
        surface_id: u64,
    ) -> Option<(TouchAction, Trajectory)> {
        let surface = self.registry.get(surface_id)?.clone();
        if !surface.is_potential() {
            return None;
        }
        let mut targets: Vec<Vec3> = vec![surface.centroid];
        let mut cloud: Vec<(f64, Vec3)> = surface
            .cloud
            .iter()
            .map(|p| ((p - surface.centroid).norm(), *p))
            .collect();
        cloud.sort_by(|a, b| a.0.total_cmp(&b.0));
        targets.extend(cloud.into_iter().take(40).map(|(_, p)| p));

        let agent_pos = self.state.pose.position;
        for target in targets {
            let Ok(action) = plan_touch_at(&surface, &target, &agent_pos, &self.params.touch)
            else {
                continue;
            };
            if self.grid.voxel_of(&action.ready.position).is_none()
                || self.grid.is_blocked_point(&action.ready.position)
            {
                continue;
            }
            let transit = plan_standard(
                &self.grid,
                &agent_pos,
                &action.ready.position,
                &self.scenario.limits,
                self.state.pose.yaw,
                &SpeedPlan {
                    cruise: self.scenario.limits.v_m,
                    terminal_slow: Some((0.5, self.params.touch.v_touch)),
                },
                self.params.sim.dt,
            );
            if let Ok(PlanOutcome::Planned(traj)) = transit {
                self.record_planned_panels(&traj);
                self.diag.touch_records.push(TouchRecord {
                    action,
                    target,
                    centroid: surface.centroid,
                    oriented_normal: (action.ready.position - target).normalize(),
                });
                return Some((action, traj));
            }
        }
        None
    }

    /// Nudges the agent out of a freshly inflated start cell.
    pub fn escape_blocked_start(&mut self, deadline: f64) -> bool {
        let Some(cur) = self.grid.voxel_of(&self.state.pose.position) else {
            return false;
        };
        for r in 1..=10i32 {
            let mut best: Option<Vec3> = None;
            for dz in -r..=r {
                for dy in -r..=r {
                    for dx in -r..=r {
                        if dx.abs().max(dy.abs()).max(dz.abs()) != r {
                            continue;
                        }
                        let v = [cur[0] + dx, cur[1] + dy, cur[2] + dz];
                        if self.grid.in_bounds(&v) && !self.grid.is_blocked(&v) {
                            let c = self.grid.voxel_center(&v);
                            if best.is_none() {
                                best = Some(c);
                            }
                        }
                    }
                }
            }
            if let Some(target) = best {
                let yaw = self.state.pose.yaw;
                self.fly_straight_to(&target, 0.3, yaw, deadline);
                return !self.grid.is_blocked_point(&self.state.pose.position);
            }
        }
        false
    }

    /// Moves to a spot at least `clearance` from every Occupied voxel (the
    /// safe hover of an infeasible termination).
    pub fn safe_hover(&mut self, clearance: f64, deadline: f64) {
        if !self
            .grid
            .has_occupied_within(&self.state.pose.position, clearance)
        {
            self.brake_to_rest();
            return;
        }
        let Some(cur) = self.grid.voxel_of(&self.state.pose.position) else {
            return;
        };
        for r in 1..=20i32 {
            for dz in -r..=r {
                for dy in -r..=r {
                    for dx in -r..=r {
                        if dx.abs().max(dy.abs()).max(dz.abs()) != r {
                            continue;
                        }
                        let v = [cur[0] + dx, cur[1] + dy, cur[2] + dz];
                        if !self.grid.in_bounds(&v) || self.grid.is_blocked(&v) {
                            continue;
                        }
                        let c = self.grid.voxel_center(&v);
                        if self.grid.has_occupied_within(&c, clearance) {
                            continue;
                        }
                        if let Ok(PlanOutcome::Planned(traj)) =
                            self.plan_to(&c, &SpeedPlan::cruise(0.5))
                        {
                            if safety_check(
                                &traj,
                                &self.registry,
                                self.params.nav.safety_step,
                                self.params.sim.robot_radius,
                                0.0,
                            )
                            .is_none()
                            {
                                self.fly_trajectory(&traj, false, deadline);
                                self.brake_to_rest();
                                return;
                            }
                        }
                    }
                }
            }
        }
    }

    /// Reaction to an unplanned bump: stop and back away along the incoming
    /// direction.
    pub fn backoff_from_contact(&mut self, deadline: f64) {
        let v = self.state.velocity;
        let dir = if v.norm() > 1e-6 {
            -v / v.norm()
        } else {
            -self.state.pose.forward()
        };
        self.brake_to_rest();
        let target = self.state.pose.position + dir * self.params.nav.backoff;
        let yaw = self.state.pose.yaw;
        self.fly_straight_to(&target, 0.4, yaw, deadline);
    }
}

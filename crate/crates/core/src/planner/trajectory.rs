use crate::geometry::Vec3;
use crate::sim::{wrap_angle, DynamicsLimits};
use serde::Serialize;

/// One time-parameterized trajectory sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajSample {
    pub t: f64,
    pub position: Vec3,
    pub yaw: f64,
}

/// Time-parameterized position+yaw trajectory sampled on the simulation
/// tick. Speed follows a forward-backward trapezoidal profile over the
/// waypoint polyline: rest-to-rest overall, slowed through corners in
/// proportion to the turn angle, with yaw pursuing the local heading under
/// the rate limit. Consecutive samples respect the dynamics limits.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajSample>,
    pub length: f64,
}

impl Trajectory {
    pub fn duration(&self) -> f64 {
        self.samples.last().map(|s| s.t).unwrap_or(0.0)
    }

    pub fn end_position(&self) -> Vec3 {
        self.samples.last().expect("non-empty trajectory").position
    }

    pub fn end_yaw(&self) -> f64 {
        self.samples.last().expect("non-empty trajectory").yaw
    }

    /// Sample at elapsed time `t` (clamped to the final state).
    pub fn at(&self, t: f64) -> TrajSample {
        if t <= 0.0 {
            return self.samples[0];
        }
        match self.samples.binary_search_by(|s| s.t.total_cmp(&t)) {
            Ok(i) => self.samples[i],
            Err(i) if i >= self.samples.len() => *self.samples.last().unwrap(),
            Err(i) => self.samples[i],
        }
    }
}

/// Caps applied while building a trajectory: the cruise speed (at or below
/// `v_m`) and an optional slow terminal section (distance, speed), used to
/// decelerate transits into a touch's ready pose.
#[derive(Debug, Clone, Copy)]
pub struct SpeedPlan {
    pub cruise: f64,
    pub terminal_slow: Option<(f64, f64)>,
}

impl SpeedPlan {
    pub fn cruise(v: f64) -> Self {
        Self {
            cruise: v,
            terminal_slow: None,
        }
    }
}

/// Speed carried through a corner of the given turn angle. Sharp turns
/// stop; gentle ones keep most of the pace. The tracker rounds the corner
/// within the acceleration limit, cutting at most a few centimeters inside.
fn corner_speed(turn: f64) -> f64 {
    if turn < 0.2 {
        f64::INFINITY
    } else if turn < 1.1 {
        0.45
    } else if turn < 2.0 {
        0.3
    } else {
        0.0
    }
}

const DS: f64 = 0.05; // arc-length grid of the speed profile

/// Builds the tick-sampled trajectory through the waypoints.
pub fn time_parameterize(
    waypoints: &[Vec3],
    start_yaw: f64,
    limits: &DynamicsLimits,
    plan: &SpeedPlan,
    dt: f64,
) -> Trajectory {
    assert!(waypoints.len() >= 2, "need at least start and goal");
    let cruise = plan.cruise.min(limits.v_m).max(0.05);

    // Condense near-duplicate waypoints.
    let mut pts: Vec<Vec3> = Vec::with_capacity(waypoints.len());
    for w in waypoints {
        if pts.last().map_or(true, |p: &Vec3| (w - p).norm() > 1e-9) {
            pts.push(*w);
        }
    }
    if pts.len() < 2 {
        pts.push(pts[0] + Vec3::new(0.0, 0.0, 1e-9));
    }

    // Cumulative arc length per waypoint.
    let mut cum = vec![0.0];
    for w in pts.windows(2) {
        cum.push(cum.last().unwrap() + (w[1] - w[0]).norm());
    }
    let total: f64 = *cum.last().unwrap();

    // Speed limit over the arc-length grid.
    let n = (total / DS).ceil().max(1.0) as usize;
    let mut v_lim = vec![cruise; n + 1];
    for (i, w) in pts.windows(3).enumerate() {
        let a = (w[1] - w[0]).normalize();
        let b = (w[2] - w[1]).normalize();
        let turn = a.dot(&b).clamp(-1.0, 1.0).acos();
        let vc = corner_speed(turn).min(cruise);
        let s_corner = cum[i + 1];
        let lo = ((s_corner - 0.2) / DS).floor().max(0.0) as usize;
        let hi = (((s_corner + 0.2) / DS).ceil() as usize).min(n);
        for cell in lo..=hi {
            v_lim[cell] = v_lim[cell].min(vc);
        }
    }
    if let Some((slow_dist, slow_speed)) = plan.terminal_slow {
        let lo = (((total - slow_dist) / DS).floor().max(0.0)) as usize;
        for cell in lo..=n {
            v_lim[cell] = v_lim[cell].min(slow_speed.max(0.05));
        }
    }
    v_lim[0] = 0.0;
    v_lim[n] = 0.0;

    // Forward-backward passes under the acceleration limit.
    let a_m = limits.a_m;
    let mut v = v_lim.clone();
    for i in 0..n {
        let reach = (v[i] * v[i] + 2.0 * a_m * DS).sqrt();
        v[i + 1] = v[i + 1].min(reach);
    }
    for i in (0..n).rev() {
        let reach = (v[i + 1] * v[i + 1] + 2.0 * a_m * DS).sqrt();
        v[i] = v[i].min(reach);
    }

    // Integrate time over the grid.
    let mut t_of_s = vec![0.0; n + 1];
    for i in 0..n {
        let avg = 0.5 * (v[i] + v[i + 1]);
        t_of_s[i + 1] = t_of_s[i] + DS / avg.max(1e-6);
    }
    let t_total = *t_of_s.last().unwrap();

    let pos_at = |s: f64| -> Vec3 {
        let s = s.clamp(0.0, total);
        let mut seg = 0;
        while seg + 2 < cum.len() && cum[seg + 1] < s {
            seg += 1;
        }
        let seg_len = (cum[seg + 1] - cum[seg]).max(1e-12);
        let f = (s - cum[seg]) / seg_len;
        pts[seg] + (pts[seg + 1] - pts[seg]) * f
    };
    let heading_at = |s: f64, fallback: f64| -> f64 {
        let s = s.clamp(0.0, total);
        let mut seg = 0;
        while seg + 2 < cum.len() && cum[seg + 1] < s {
            seg += 1;
        }
        let d = pts[seg + 1] - pts[seg];
        if d.x.hypot(d.y) > 1e-9 {
            d.y.atan2(d.x)
        } else {
            fallback
        }
    };

    let mut samples = vec![TrajSample {
        t: 0.0,
        position: pts[0],
        yaw: start_yaw,
    }];
    let mut yaw = start_yaw;
    let mut t0 = 0.0;

    // Hover turn before moving when the camera would otherwise fly blind.
    let first_heading = heading_at(1e-9, start_yaw);
    let initial_err = wrap_angle(first_heading - start_yaw);
    if initial_err.abs() > 1.0 {
        let ticks = ((initial_err.abs() / limits.yaw_rate_m) / dt).ceil() as usize;
        for k in 1..=ticks {
            let frac = (k as f64 / ticks as f64).min(1.0);
            samples.push(TrajSample {
                t: k as f64 * dt,
                position: pts[0],
                yaw: wrap_angle(start_yaw + initial_err * frac),
            });
        }
        t0 = ticks as f64 * dt;
        yaw = first_heading;
    }

    // Tick sampling: invert t(s) incrementally.
    let ticks = (t_total / dt).ceil() as usize;
    let mut grid_idx = 0;
    let max_yaw_step = limits.yaw_rate_m * dt;
    for k in 1..=ticks {
        let tk = (k as f64 * dt).min(t_total);
        while grid_idx + 1 < t_of_s.len() && t_of_s[grid_idx + 1] < tk {
            grid_idx += 1;
        }
        let (ta, tb) = (t_of_s[grid_idx], t_of_s[(grid_idx + 1).min(n)]);
        let f = if tb > ta { (tk - ta) / (tb - ta) } else { 1.0 };
        let s = (grid_idx as f64 + f.clamp(0.0, 1.0)) * DS;
        let target_heading = heading_at(s, yaw);
        let err = wrap_angle(target_heading - yaw);
        yaw = wrap_angle(yaw + err.clamp(-max_yaw_step, max_yaw_step));
        samples.push(TrajSample {
            t: t0 + k as f64 * dt,
            position: pos_at(s),
            yaw,
        });
    }
    if samples.len() == 1 {
        samples.push(TrajSample {
            t: dt,
            position: pts[pts.len() - 1],
            yaw,
        });
    }

    Trajectory {
        samples,
        length: total,
    }
}

use crate::geometry::Vec3;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

/// Agent pose: world position plus yaw wrapped to (-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec3,
    pub yaw: f64,
}

impl Pose {
    pub fn new(position: Vec3, yaw: f64) -> Self {
        Self {
            position,
            yaw: wrap_angle(yaw),
        }
    }

    /// Unit forward direction of the body (and camera optical axis).
    pub fn forward(&self) -> Vec3 {
        Vec3::new(self.yaw.cos(), self.yaw.sin(), 0.0)
    }

    /// Unit left direction of the body.
    pub fn left(&self) -> Vec3 {
        Vec3::new(-self.yaw.sin(), self.yaw.cos(), 0.0)
    }

    /// Camera-to-world transform of an optical-frame point
    /// (optical: x right, y down, z forward; camera at the body center).
    pub fn camera_to_world(&self, optical: &Vec3) -> Vec3 {
        self.position + self.forward() * optical.z - self.left() * optical.x
            - Vec3::new(0.0, 0.0, optical.y)
    }

    /// World-to-camera: inverse of `camera_to_world`.
    pub fn world_to_camera(&self, world: &Vec3) -> Vec3 {
        let d = world - self.position;
        Vec3::new(-d.dot(&self.left()), -d.z, d.dot(&self.forward()))
    }
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut a = a.rem_euclid(std::f64::consts::TAU);
    if a > std::f64::consts::PI {
        a -= std::f64::consts::TAU;
    }
    a
}

/// Axis-aligned box, used for the world bounds and opaque obstacles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn contains(&self, p: &Vec3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    /// Slab-method ray intersection: entry distance of `origin + t * dir`
    /// for t in `[0, t_max]`, or None.
    pub fn ray_entry(&self, origin: &Vec3, dir: &Vec3, t_max: f64) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for axis in 0..3 {
            let o = origin[axis];
            let d = dir[axis];
            let (lo, hi) = (self.min[axis], self.max[axis]);
            if d.abs() < 1e-12 {
                if o < lo || o > hi {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / d;
            let (mut ta, mut tb) = ((lo - o) * inv, (hi - o) * inv);
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }

    /// True if the segment `a -> b` passes through the box.
    pub fn intersects_segment(&self, a: &Vec3, b: &Vec3) -> bool {
        let d = b - a;
        let len = d.norm();
        if len < 1e-12 {
            return self.contains(a);
        }
        self.ray_entry(a, &(d / len), len).is_some()
    }
}

/// Whether a configured glass region is physically present or a false
/// positive of the (simulated) vision pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PanelKind {
    True,
    Phantom,
}

/// A rectangular glass region: center, unit normal, and in-plane extents.
/// The width axis is horizontal (up x normal), the height axis completes the
/// frame, so vertical panes have a vertical height axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlassPanel {
    pub center: Vec3,
    pub normal: Vec3,
    pub width: f64,
    pub height: f64,
    pub kind: PanelKind,
    pub seg_confidence: f64,
}

impl GlassPanel {
    pub fn axes(&self) -> (Vec3, Vec3) {
        let n = self.normal.normalize();
        let up_hint = if n.z.abs() > 0.95 {
            Vec3::new(1.0, 0.0, 0.0)
        } else {
            Vec3::new(0.0, 0.0, 1.0)
        };
        let w_axis = up_hint.cross(&n).normalize();
        let h_axis = n.cross(&w_axis);
        (w_axis, h_axis)
    }

    pub fn corners(&self) -> [Vec3; 4] {
        let (w_axis, h_axis) = self.axes();
        let hw = w_axis * (self.width * 0.5);
        let hh = h_axis * (self.height * 0.5);
        [
            self.center - hw - hh,
            self.center + hw - hh,
            self.center + hw + hh,
            self.center - hw + hh,
        ]
    }

    /// Crossing point of the segment `a -> b` with the panel rectangle.
    pub fn segment_crossing(&self, a: &Vec3, b: &Vec3) -> Option<Vec3> {
        let n = self.normal.normalize();
        let da = (a - self.center).dot(&n);
        let db = (b - self.center).dot(&n);
        if da == 0.0 && db == 0.0 {
            return None; // coplanar sweep, no crossing
        }
        if (da > 0.0 && db > 0.0) || (da < 0.0 && db < 0.0) {
            return None;
        }
        let t = da / (da - db);
        let q = a + (b - a) * t;
        let (w_axis, h_axis) = self.axes();
        let d = q - self.center;
        if d.dot(&w_axis).abs() <= self.width * 0.5 && d.dot(&h_axis).abs() <= self.height * 0.5 {
            Some(q)
        } else {
            None
        }
    }
}

/// Kinematic limits of the vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsLimits {
    pub v_m: f64,
    pub a_m: f64,
    pub yaw_rate_m: f64,
    pub yaw_acc_m: f64,
}

impl Default for DynamicsLimits {
    fn default() -> Self {
        Self {
            v_m: 1.0,
            a_m: 1.0,
            yaw_rate_m: 1.05,
            yaw_acc_m: 1.05,
        }
    }
}

/// Seeds for the per-run randomness (sensor noise).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioSeeds {
    pub depth_noise: u64,
}

/// Ground-truth world description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub bounds: Aabb,
    pub obstacles: Vec<Aabb>,
    pub glass_panels: Vec<GlassPanel>,
    pub start: Pose,
    pub goal: Vec3,
    pub limits: DynamicsLimits,
    pub seeds: ScenarioSeeds,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)?;
        let scenario: Scenario = serde_json::from_str(&text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let inv = |msg: &str| Err(ScenarioError::Invalid(msg.into()));
        if !(self.bounds.min.x < self.bounds.max.x
            && self.bounds.min.y < self.bounds.max.y
            && self.bounds.min.z < self.bounds.max.z)
        {
            return inv("bounds box is empty");
        }
        for p in [&self.start.position, &self.goal] {
            if !self.bounds.contains(p) {
                return inv("start/goal outside bounds");
            }
            if self.obstacles.iter().any(|b| b.contains(p)) {
                return inv("start/goal inside an obstacle");
            }
        }
        for panel in &self.glass_panels {
            if panel.normal.norm() < 1e-9 {
                return inv("panel normal has zero length");
            }
            if panel.width <= 0.0 || panel.height <= 0.0 {
                return inv("panel extents must be positive");
            }
            if !(0.0..=1.0).contains(&panel.seg_confidence) {
                return inv("panel seg_confidence outside [0, 1]");
            }
        }
        if self.limits.v_m <= 0.0
            || self.limits.a_m <= 0.0
            || self.limits.yaw_rate_m <= 0.0
            || self.limits.yaw_acc_m <= 0.0
        {
            return inv("dynamics limits must be positive");
        }
        Ok(())
    }
}

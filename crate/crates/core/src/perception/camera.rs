use crate::geometry::Vec3;
use serde::{Deserialize, Serialize};

/// Pinhole RGBD camera intrinsics plus the depth sensing range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub width: u32,
    pub height: u32,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub max_range: f64,
}

impl CameraModel {
    /// Back-projects a pixel at z-depth `d` into the optical frame
    /// (x right, y down, z forward).
    pub fn backproject(&self, u: f64, v: f64, d: f64) -> Vec3 {
        Vec3::new((u - self.cx) / self.fx * d, (v - self.cy) / self.fy * d, d)
    }

    /// Projects an optical-frame point to pixel coordinates; None behind
    /// the camera.
    pub fn project(&self, optical: &Vec3) -> Option<(f64, f64)> {
        if optical.z <= 1e-9 {
            return None;
        }
        Some((
            self.cx + self.fx * optical.x / optical.z,
            self.cy + self.fy * optical.y / optical.z,
        ))
    }

    pub fn pixel_count(&self) -> usize {
        (self.width * self.height) as usize
    }
}

impl Default for CameraModel {
    /// 90 degree horizontal field of view at a resolution low enough to
    /// keep per-tick mapping cheap.
    fn default() -> Self {
        Self {
            width: 120,
            height: 90,
            fx: 60.0,
            fy: 60.0,
            cx: 60.0,
            cy: 45.0,
            max_range: 6.0,
        }
    }
}

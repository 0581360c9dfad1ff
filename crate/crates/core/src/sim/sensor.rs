use super::scenario::{GlassPanel, PanelKind, Pose, Scenario};
use crate::geometry::{Vec2, Vec3};
use crate::perception::{CameraModel, DepthImage, SegMask};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

/// Geometry of the front-mounted contact sensing pair: forward reach from
/// the body center and the lateral half-spacing of the two modules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContactSensorGeometry {
    pub reach: f64,
    pub lateral_half_width: f64,
}

impl Default for ContactSensorGeometry {
    fn default() -> Self {
        Self {
            reach: 0.25,
            lateral_half_width: 0.10,
        }
    }
}

/// A registered physical touch on a true glass panel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContactEvent {
    pub time: f64,
    pub contact_position: Vec3,
    pub panel: usize,
}

/// Incidence (from the surface normal) beyond which a depth return is
/// invalid; stereo depth degenerates on grazing surfaces.
const GRAZING_COS: f64 = 0.05233595624294383; // cos(87 deg)

/// Renders a depth image by raycasting against opaque boxes only; rays pass
/// through every glass panel. Hits get zero-mean Gaussian noise; misses,
/// beyond-range returns and grazing-incidence returns are 0 (invalid).
/// Depth values are z-depths along the optical axis, matching the pinhole
/// back-projection.
pub fn render_depth(
    scenario: &Scenario,
    pose: &Pose,
    cam: &CameraModel,
    noise_sigma: f64,
    rng: &mut ChaCha8Rng,
) -> DepthImage {
    let mut img = DepthImage::new(cam.width, cam.height);
    let noise = Normal::new(0.0, noise_sigma.max(1e-12)).expect("valid sigma");
    // Boxes sorted by their nearest distance from the camera; a ray can stop
    // probing once the running hit is closer than the next box can be.
    let mut boxes: Vec<(f64, &crate::sim::Aabb)> = scenario
        .obstacles
        .iter()
        .map(|b| {
            let mut d2 = 0.0;
            for axis in 0..3 {
                let o = pose.position[axis];
                let gap = (b.min[axis] - o).max(0.0).max(o - b.max[axis]);
                d2 += gap * gap;
            }
            (d2.sqrt(), b)
        })
        .collect();
    boxes.sort_by(|a, b| a.0.total_cmp(&b.0));
    for v in 0..cam.height {
        for u in 0..cam.width {
            // Unnormalized ray direction scaled so t equals z-depth.
            let optical = Vec3::new(
                (u as f64 - cam.cx) / cam.fx,
                (v as f64 - cam.cy) / cam.fy,
                1.0,
            );
            let dir = pose.camera_to_world(&optical) - pose.position;
            let dir_norm = dir.norm();
            let mut best = f64::INFINITY;
            let mut best_cos = 1.0;
            for (min_dist, b) in &boxes {
                if best * dir_norm < *min_dist {
                    break;
                }
                if let Some((t, face_cos)) = ray_entry_with_face(b, &pose.position, &dir, cam.max_range) {
                    if t > 1e-6 && t < best {
                        best = t;
                        best_cos = face_cos;
                    }
                }
            }
            if best.is_finite() && best_cos >= GRAZING_COS {
                let d = if noise_sigma > 0.0 {
                    best + noise.sample(rng)
                } else {
                    best
                };
                if d > 0.0 && d <= cam.max_range {
                    img.set(u, v, d);
                }
            }
        }
    }
    img
}

/// Slab intersection that also reports |cos| of the ray against the entry
/// face normal.
fn ray_entry_with_face(
    b: &crate::sim::Aabb,
    origin: &Vec3,
    dir: &Vec3,
    t_max: f64,
) -> Option<(f64, f64)> {
    let mut t0 = 0.0f64;
    let mut t1 = t_max;
    let mut axis0 = 3usize;
    for axis in 0..3 {
        let o = origin[axis];
        let d = dir[axis];
        let (lo, hi) = (b.min[axis], b.max[axis]);
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
        if ta > t0 {
            t0 = ta;
            axis0 = axis;
        }
        t1 = t1.min(tb);
        if t0 > t1 {
            return None;
        }
    }
    let cos = if axis0 == 3 {
        1.0 // origin inside the box
    } else {
        dir[axis0].abs() / dir.norm()
    };
    Some((t0, cos))
}

/// Simulator-provided glass segmentation: one mask per panel (true or
/// phantom alike) whose rectangle projects into the image, is in front of
/// the camera and whose center ray is not occluded by an opaque box.
/// Confidence is the panel's configured score. Purely deterministic.
pub fn render_segmentation(scenario: &Scenario, pose: &Pose, cam: &CameraModel) -> Vec<SegMask> {
    let mut out = Vec::new();
    for panel in &scenario.glass_panels {
        let center_cam = pose.world_to_camera(&panel.center);
        if center_cam.z <= 0.05 {
            continue;
        }
        let dist = (panel.center - pose.position).norm();
        if dist > cam.max_range * 1.5 {
            continue;
        }
        // Vision cannot segment glass seen edge-on.
        let view = (panel.center - pose.position) / dist;
        if view.dot(&panel.normal.normalize()).abs() < 0.25 {
            continue;
        }
        // Center-ray occlusion against opaque geometry.
        let dir = (panel.center - pose.position) / dist;
        let occluded = scenario
            .obstacles
            .iter()
            .filter_map(|b| b.ray_entry(&pose.position, &dir, dist - 1e-6))
            .any(|t| t > 1e-6);
        if occluded {
            continue;
        }
        let corners_cam: Vec<Vec3> = panel
            .corners()
            .iter()
            .map(|c| pose.world_to_camera(c))
            .collect();
        let clipped = clip_near(&corners_cam, 0.05);
        if clipped.len() < 3 {
            continue;
        }
        let pixels: Vec<Vec2> = clipped
            .iter()
            .map(|p| {
                let (u, v) = cam.project(p).expect("clipped in front of camera");
                Vec2::new(u, v)
            })
            .collect();
        let mut mask = SegMask::empty(cam.width, cam.height, panel.seg_confidence);
        rasterize_convex(&pixels, &mut mask);
        if mask.any() {
            out.push(mask);
        }
    }
    out
}

/// Sutherland-Hodgman clip of a polygon against the optical plane z = near.
fn clip_near(poly: &[Vec3], near: f64) -> Vec<Vec3> {
    let mut out = Vec::new();
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let (ina, inb) = (a.z >= near, b.z >= near);
        if ina {
            out.push(a);
        }
        if ina != inb {
            let t = (near - a.z) / (b.z - a.z);
            out.push(a + (b - a) * t);
        }
    }
    out
}

/// Fills every pixel whose center lies inside the convex pixel-space
/// polygon.
fn rasterize_convex(pixels: &[Vec2], mask: &mut SegMask) {
    let n = pixels.len();
    let mut area = 0.0;
    for i in 0..n {
        area += pixels[i].perp(&pixels[(i + 1) % n]);
    }
    if area.abs() < 1e-9 {
        return;
    }
    let sign = area.signum();
    let (mut lo_u, mut lo_v) = (f64::INFINITY, f64::INFINITY);
    let (mut hi_u, mut hi_v) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pixels {
        lo_u = lo_u.min(p.x);
        lo_v = lo_v.min(p.y);
        hi_u = hi_u.max(p.x);
        hi_v = hi_v.max(p.y);
    }
    let u0 = lo_u.floor().max(0.0) as u32;
    let v0 = lo_v.floor().max(0.0) as u32;
    let u1 = (hi_u.ceil() as i64).clamp(0, mask.width as i64 - 1) as u32;
    let v1 = (hi_v.ceil() as i64).clamp(0, mask.height as i64 - 1) as u32;
    for v in v0..=v1 {
        for u in u0..=u1 {
            let p = Vec2::new(u as f64, v as f64);
            let inside = (0..n).all(|i| {
                let a = pixels[i];
                let b = pixels[(i + 1) % n];
                sign * (b - a).perp(&(p - a)) >= -1e-9
            });
            if inside {
                mask.set(u, v);
            }
        }
    }
}

/// Sweeps both sensor tips between two poses and reports the earliest
/// crossing of a true panel. Phantom panels never trigger.
pub fn check_contact(
    scenario: &Scenario,
    prev: &Pose,
    cur: &Pose,
    sensor: &ContactSensorGeometry,
    time: f64,
) -> Option<ContactEvent> {
    let mut best: Option<(f64, ContactEvent)> = None;
    for side in [-1.0, 1.0] {
        let tip = |p: &Pose| {
            p.position + p.forward() * sensor.reach + p.left() * (side * sensor.lateral_half_width)
        };
        let a = tip(prev);
        let b = tip(cur);
        for (idx, panel) in scenario.glass_panels.iter().enumerate() {
            if panel.kind != PanelKind::True {
                continue;
            }
            if let Some((t, q)) = crossing_param(panel, &a, &b) {
                let candidate = ContactEvent {
                    time,
                    contact_position: q,
                    panel: idx,
                };
                if best.as_ref().map_or(true, |(bt, _)| t < *bt) {
                    best = Some((t, candidate));
                }
            }
        }
    }
    best.map(|(_, e)| e)
}

/// Body-center crossing of a true panel between two positions: a crash.
pub fn crash_crossing(scenario: &Scenario, prev: &Vec3, cur: &Vec3) -> Option<usize> {
    for (idx, panel) in scenario.glass_panels.iter().enumerate() {
        if panel.kind != PanelKind::True {
            continue;
        }
        if crossing_param(panel, prev, cur).is_some() {
            return Some(idx);
        }
    }
    None
}

/// True when the body center sits inside an opaque obstacle.
pub fn body_in_obstacle(scenario: &Scenario, pos: &Vec3) -> bool {
    scenario.obstacles.iter().any(|b| b.contains(pos))
}

fn crossing_param(panel: &GlassPanel, a: &Vec3, b: &Vec3) -> Option<(f64, Vec3)> {
    let n = panel.normal.normalize();
    let da = (a - panel.center).dot(&n);
    let db = (b - panel.center).dot(&n);
    if da == 0.0 && db == 0.0 {
        return None;
    }
    if (da > 0.0 && db > 0.0) || (da < 0.0 && db < 0.0) {
        return None;
    }
    if da == db {
        return None;
    }
    let t = da / (da - db);
    let q = a + (b - a) * t;
    let (w_axis, h_axis) = panel.axes();
    let d = q - panel.center;
    if d.dot(&w_axis).abs() <= panel.width * 0.5 && d.dot(&h_axis).abs() <= panel.height * 0.5 {
        Some((t, q))
    } else {
        None
    }
}

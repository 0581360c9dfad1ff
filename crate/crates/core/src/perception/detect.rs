use super::mask::{extract_boundary, SegMask};
use super::registry::PerceptionParams;
use super::surface::{GlassSurface, SurfaceStatus};
use super::{CameraModel, PerceptionError};
use crate::geometry::{
    convex_hull_planar, fit_plane_ransac, sample_polygon_grid, vertex_centroid, Vec3,
};
use crate::sim::Pose;

/// Depth image in meters; 0 marks an invalid return.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    pub width: u32,
    pub height: u32,
    pub data: Vec<f64>,
}

impl DepthImage {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; (width * height) as usize],
        }
    }

    #[inline]
    pub fn get(&self, u: u32, v: u32) -> f64 {
        self.data[(v * self.width + u) as usize]
    }

    #[inline]
    pub fn set(&mut self, u: u32, v: u32, d: f64) {
        self.data[(v * self.width + u) as usize] = d;
    }
}

/// One synchronized sensor frame: depth, glass segmentation masks and the
/// capture pose.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameInput {
    pub depth: DepthImage,
    pub masks: Vec<SegMask>,
    pub pose: Pose,
}

/// Back-projects a pixel with a valid depth into the world frame.
pub fn pixel_to_world(
    pixel: (u32, u32),
    depth: f64,
    cam: &CameraModel,
    pose: &Pose,
) -> Result<Vec3, PerceptionError> {
    if depth <= 0.0 {
        return Err(PerceptionError::InvalidDepth(depth));
    }
    let optical = cam.backproject(pixel.0 as f64, pixel.1 as f64, depth);
    Ok(pose.camera_to_world(&optical))
}

/// Keeps only band pixels whose depth agrees with their band neighborhood:
/// the boundary is meant to land on an opaque frame with stable depth, so
/// grazing returns and depth discontinuities are rejected.
fn stable_band_pixels(
    band: &[(u32, u32)],
    depth: &DepthImage,
    max_spread: f64,
) -> Vec<(u32, u32)> {
    let mut in_band = vec![false; (depth.width * depth.height) as usize];
    for &(u, v) in band {
        in_band[(v * depth.width + u) as usize] = true;
    }
    let mut out = Vec::with_capacity(band.len());
    for &(u, v) in band {
        let d = depth.get(u, v);
        if d <= 0.0 {
            continue;
        }
        let mut ok = true;
        let mut neighbors = 0;
        for dv in -1..=1i64 {
            for du in -1..=1i64 {
                if du == 0 && dv == 0 {
                    continue;
                }
                let (nu, nv) = (u as i64 + du, v as i64 + dv);
                if nu < 0 || nv < 0 || nu >= depth.width as i64 || nv >= depth.height as i64 {
                    continue;
                }
                if !in_band[(nv * depth.width as i64 + nu) as usize] {
                    continue;
                }
                let nd = depth.get(nu as u32, nv as u32);
                if nd <= 0.0 {
                    continue;
                }
                neighbors += 1;
                if (nd - d).abs() > max_spread {
                    ok = false;
                }
            }
        }
        if ok && neighbors > 0 {
            out.push((u, v));
        }
    }
    out
}

/// Extracts potential glass surfaces from a single frame: confidence gate,
/// boundary band, depth back-projection, RANSAC plane, convex hull, interior
/// cloud. Masks that fail a stage are skipped silently; ids are assigned at
/// registry insertion.
pub fn detect_glass_frame(
    frame: &FrameInput,
    cam: &CameraModel,
    params: &PerceptionParams,
) -> Vec<GlassSurface> {
    let mut out = Vec::new();
    for mask in &frame.masks {
        if mask.confidence <= params.tau_s {
            continue;
        }
        let mask_pixels = mask.bits.iter().filter(|b| **b).count();
        if mask_pixels as f64 > params.max_mask_fraction * cam.pixel_count() as f64 {
            continue; // too close: no boundary in view
        }
        let Ok(band) = extract_boundary(mask, params.boundary_dilation) else {
            continue;
        };
        let stable = stable_band_pixels(&band, &frame.depth, params.depth_stability);
        let mut depths: Vec<f64> = stable.iter().map(|&(u, v)| frame.depth.get(u, v)).collect();
        if depths.len() < 3 {
            continue;
        }
        depths.sort_by(f64::total_cmp);
        let median = depths[depths.len() / 2];
        let mut points: Vec<Vec3> = Vec::with_capacity(stable.len());
        for (u, v) in stable {
            let d = frame.depth.get(u, v);
            if (d - median).abs() > params.depth_window {
                continue; // background leaking past the frame
            }
            if let Ok(p) = pixel_to_world((u, v), d, cam, &frame.pose) {
                points.push(p);
            }
        }
        if points.len() < 3 {
            continue;
        }
        let Ok((plane, inliers)) = fit_plane_ransac(
            &points,
            params.ransac_inlier_tol,
            params.ransac_iterations,
            params.ransac_seed,
        ) else {
            continue;
        };
        if (inliers.len() as f64) < params.min_inlier_fraction * points.len() as f64 {
            continue; // boundary depths disagree: no reliable frame behind this mask
        }
        let projected: Vec<Vec3> = inliers.iter().map(|&i| plane.project(&points[i])).collect();
        let Ok(polygon) = convex_hull_planar(&projected, &plane) else {
            continue;
        };
        let area = crate::geometry::polygon_area(&polygon).unwrap_or(0.0);
        if area < params.min_candidate_area {
            continue;
        }
        let verts = polygon.local_vertices();
        let perimeter: f64 = (0..verts.len())
            .map(|i| (verts[(i + 1) % verts.len()] - verts[i]).norm())
            .sum();
        if area / (0.5 * perimeter) < params.min_thickness {
            continue; // needle-shaped: a frame edge, not a pane
        }
        let centroid = vertex_centroid(&polygon);
        let to_surface = centroid - frame.pose.position;
        let dist = to_surface.norm();
        if dist > 1e-9
            && (to_surface / dist).dot(&plane.normal()).abs() < params.min_view_cos
        {
            continue; // too oblique a view for a credible plane estimate
        }
        let cloud = sample_polygon_grid(&polygon, params.cloud_spacing);
        out.push(GlassSurface {
            id: 0, // provisional until registry insertion
            centroid,
            normal: plane.normal(),
            polygon,
            cloud,
            status: SurfaceStatus::Potential,
            observation_count: 1,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn principal_pixel_maps_along_optical_axis() {
        let cam = CameraModel {
            width: 100,
            height: 100,
            fx: 100.0,
            fy: 100.0,
            cx: 50.0,
            cy: 50.0,
            max_range: 10.0,
        };
        let pose = Pose::new(Vec3::zeros(), 0.0);
        let p = pixel_to_world((50, 50), 2.0, &cam, &pose).unwrap();
        assert_relative_eq!(p, Vec3::new(2.0, 0.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn zero_depth_is_invalid() {
        let cam = CameraModel::default();
        let pose = Pose::new(Vec3::zeros(), 0.0);
        assert!(matches!(
            pixel_to_world((10, 10), 0.0, &cam, &pose),
            Err(PerceptionError::InvalidDepth(_))
        ));
    }

    /// Synthetic frame: a wall-mounted panel mask whose boundary band sees a
    /// coplanar frame at depth 3; the detector should recover the plane.
    #[test]
    fn detector_recovers_frontal_panel() {
        let cam = CameraModel::default();
        let pose = Pose::new(Vec3::zeros(), 0.0);
        let mut depth = DepthImage::new(cam.width, cam.height);
        for v in 0..cam.height {
            for u in 0..cam.width {
                depth.set(u, v, 3.0);
            }
        }
        let mut mask = SegMask::empty(cam.width, cam.height, 0.9);
        for v in 30..60 {
            for u in 40..80 {
                mask.set(u, v);
            }
        }
        let frame = FrameInput {
            depth,
            masks: vec![mask],
            pose,
        };
        let params = PerceptionParams::default();
        let found = detect_glass_frame(&frame, &cam, &params);
        assert_eq!(found.len(), 1);
        let s = &found[0];
        // Wall plane is x = 3 in the world, normal +-x.
        assert!(s.normal.x.abs() > 0.999, "normal {:?}", s.normal);
        assert_relative_eq!(s.centroid.x, 3.0, epsilon = 1e-6);
        assert_eq!(s.status, SurfaceStatus::Potential);
        assert!(!s.cloud.is_empty());
    }

    #[test]
    fn low_confidence_mask_is_skipped() {
        let cam = CameraModel::default();
        let mut depth = DepthImage::new(cam.width, cam.height);
        for v in 0..cam.height {
            for u in 0..cam.width {
                depth.set(u, v, 2.0);
            }
        }
        let mut mask = SegMask::empty(cam.width, cam.height, 0.5);
        for v in 30..60 {
            for u in 40..80 {
                mask.set(u, v);
            }
        }
        let frame = FrameInput {
            depth,
            masks: vec![mask],
            pose: Pose::new(Vec3::zeros(), 0.0),
        };
        assert!(detect_glass_frame(&frame, &cam, &PerceptionParams::default()).is_empty());
    }

    #[test]
    fn invalid_boundary_depths_skip_the_mask() {
        let cam = CameraModel::default();
        let depth = DepthImage::new(cam.width, cam.height); // all invalid
        let mut mask = SegMask::empty(cam.width, cam.height, 0.9);
        for v in 30..60 {
            for u in 40..80 {
                mask.set(u, v);
            }
        }
        let frame = FrameInput {
            depth,
            masks: vec![mask],
            pose: Pose::new(Vec3::zeros(), 0.0),
        };
        assert!(detect_glass_frame(&frame, &cam, &PerceptionParams::default()).is_empty());
    }
}

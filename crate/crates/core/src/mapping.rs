//! 3D occupancy grid: Unknown/Free/Occupied voxels built from depth rays,
//! with glass-surface fill on touch confirmation. Occupied is sticky and an
//! inflation mask at the robot radius is maintained incrementally for
//! planning queries.

use crate::geometry::Vec3;
use crate::perception::{CameraModel, FrameInput, GlassSurface, SurfaceStatus};
use crate::sim::Aabb;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CellState {
    Unknown,
    Free,
    Occupied,
}

const UNKNOWN: u8 = 0;
const FREE: u8 = 1;
const OCCUPIED: u8 = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MappingError {
    #[error("sensor pose is outside the grid")]
    PoseOutOfBounds,
    #[error("surface {0} is not confirmed")]
    NotConfirmed(u64),
}

#[derive(Debug, Clone)]
pub struct OccupancyGrid {
    origin: Vec3,
    resolution: f64,
    dims: [usize; 3],
    cells: Vec<u8>,
    inflated: Vec<bool>,
    inflation_offsets: Vec<(i32, i32, i32)>,
}

impl OccupancyGrid {
    pub fn new(origin: Vec3, resolution: f64, dims: [usize; 3], inflation_radius: f64) -> Self {
        let n = dims[0] * dims[1] * dims[2];
        let r_vox = (inflation_radius / resolution).ceil() as i32;
        let mut inflation_offsets = Vec::new();
        for dz in -r_vox..=r_vox {
            for dy in -r_vox..=r_vox {
                for dx in -r_vox..=r_vox {
                    let d = Vec3::new(dx as f64, dy as f64, dz as f64) * resolution;
                    if d.norm() <= inflation_radius + 1e-9 {
                        inflation_offsets.push((dx, dy, dz));
                    }
                }
            }
        }
        Self {
            origin,
            resolution,
            dims,
            cells: vec![UNKNOWN; n],
            inflated: vec![false; n],
            inflation_offsets,
        }
    }

    /// Grid spanning the scenario bounds at the given resolution.
    pub fn from_bounds(bounds: &Aabb, resolution: f64, inflation_radius: f64) -> Self {
        let span = bounds.max - bounds.min;
        let dims = [
            (span.x / resolution).ceil() as usize + 1,
            (span.y / resolution).ceil() as usize + 1,
            (span.z / resolution).ceil() as usize + 1,
        ];
        Self::new(bounds.min, resolution, dims, inflation_radius)
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn voxel_of(&self, p: &Vec3) -> Option<[i32; 3]> {
        let v = self.voxel_unchecked(p);
        if self.in_bounds(&v) {
            Some(v)
        } else {
            None
        }
    }

    fn voxel_unchecked(&self, p: &Vec3) -> [i32; 3] {
        [
            ((p.x - self.origin.x) / self.resolution).floor() as i32,
            ((p.y - self.origin.y) / self.resolution).floor() as i32,
            ((p.z - self.origin.z) / self.resolution).floor() as i32,
        ]
    }

    pub fn in_bounds(&self, v: &[i32; 3]) -> bool {
        (0..3).all(|i| v[i] >= 0 && (v[i] as usize) < self.dims[i])
    }

    #[inline]
    pub fn index(&self, v: &[i32; 3]) -> usize {
        v[0] as usize + self.dims[0] * (v[1] as usize + self.dims[1] * v[2] as usize)
    }

    pub fn voxel_center(&self, v: &[i32; 3]) -> Vec3 {
        self.origin
            + Vec3::new(
                (v[0] as f64 + 0.5) * self.resolution,
                (v[1] as f64 + 0.5) * self.resolution,
                (v[2] as f64 + 0.5) * self.resolution,
            )
    }

    pub fn state(&self, v: &[i32; 3]) -> CellState {
        match self.cells[self.index(v)] {
            FREE => CellState::Free,
            OCCUPIED => CellState::Occupied,
            _ => CellState::Unknown,
        }
    }

    fn mark_free(&mut self, v: &[i32; 3]) {
        let idx = self.index(v);
        if self.cells[idx] == UNKNOWN {
            self.cells[idx] = FREE;
        }
    }

    pub fn mark_occupied(&mut self, v: &[i32; 3]) {
        let idx = self.index(v);
        if self.cells[idx] != OCCUPIED {
            self.cells[idx] = OCCUPIED;
            self.stamp_inflation(v);
        }
    }

    fn stamp_inflation(&mut self, v: &[i32; 3]) {
        for k in 0..self.inflation_offsets.len() {
            let (dx, dy, dz) = self.inflation_offsets[k];
            let w = [v[0] + dx, v[1] + dy, v[2] + dz];
            if self.in_bounds(&w) {
                let idx = self.index(&w);
                self.inflated[idx] = true;
            }
        }
    }

    /// True when the voxel is within the robot radius of an Occupied voxel.
    #[inline]
    pub fn is_blocked(&self, v: &[i32; 3]) -> bool {
        self.inflated[self.index(v)]
    }

    pub fn is_blocked_point(&self, p: &Vec3) -> bool {
        match self.voxel_of(p) {
            Some(v) => self.is_blocked(&v),
            None => true,
        }
    }

    /// True if any Occupied voxel center lies within `radius` of `p`.
    pub fn has_occupied_within(&self, p: &Vec3, radius: f64) -> bool {
        let r_vox = (radius / self.resolution).ceil() as i32 + 1;
        let c = self.voxel_unchecked(p);
        for dz in -r_vox..=r_vox {
            for dy in -r_vox..=r_vox {
                for dx in -r_vox..=r_vox {
                    let v = [c[0] + dx, c[1] + dy, c[2] + dz];
                    if !self.in_bounds(&v) {
                        continue;
                    }
                    if self.cells[self.index(&v)] == OCCUPIED
                        && (self.voxel_center(&v) - p).norm() <= radius
                    {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Integrates one depth frame: for every valid pixel the traversed
    /// voxels become Free and the hit voxel Occupied. The sensor's own voxel
    /// is left untouched; rays are clipped at the grid boundary.
    pub fn integrate_depth(
        &mut self,
        frame: &FrameInput,
        cam: &CameraModel,
    ) -> Result<(), MappingError> {
        let pose = frame.pose;
        if self.voxel_of(&pose.position).is_none() {
            return Err(MappingError::PoseOutOfBounds);
        }
        for v in 0..frame.depth.height {
            for u in 0..frame.depth.width {
                let d = frame.depth.get(u, v);
                if d <= 0.0 {
                    continue;
                }
                let optical = cam.backproject(u as f64, v as f64, d);
                let end = pose.camera_to_world(&optical);
                self.trace_ray(&pose.position, &end);
            }
        }
        Ok(())
    }

    /// Light integration: marks only the hit voxels Occupied without
    /// tracing free space. The navigation loop interleaves this with full
    /// `integrate_depth` passes; Free-vs-Unknown affects no planning
    /// decision (both are traversable), so the occupied set evolves
    /// identically.
    pub fn integrate_hits(
        &mut self,
        frame: &FrameInput,
        cam: &CameraModel,
    ) -> Result<(), MappingError> {
        let pose = frame.pose;
        if self.voxel_of(&pose.position).is_none() {
            return Err(MappingError::PoseOutOfBounds);
        }
        for v in 0..frame.depth.height {
            for u in 0..frame.depth.width {
                let d = frame.depth.get(u, v);
                if d <= 0.0 {
                    continue;
                }
                let optical = cam.backproject(u as f64, v as f64, d);
                let end = pose.camera_to_world(&optical);
                if let Some(vox) = self.voxel_of(&end) {
                    self.mark_occupied(&vox);
                }
            }
        }
        Ok(())
    }

    /// Amanatides-Woo voxel traversal from `start` (exclusive) to `end`
    /// (inclusive, marked Occupied).
    fn trace_ray(&mut self, start: &Vec3, end: &Vec3) {
        let delta = end - start;
        let start_vox = self.voxel_unchecked(start);
        let end_vox = self.voxel_unchecked(end);
        let mut v = start_vox;

        let mut t_max = [f64::INFINITY; 3];
        let mut t_delta = [f64::INFINITY; 3];
        let mut step = [0i32; 3];
        for axis in 0..3 {
            let d = delta[axis];
            if d.abs() < 1e-15 {
                continue;
            }
            step[axis] = if d > 0.0 { 1 } else { -1 };
            t_delta[axis] = self.resolution / d.abs();
            let voxel_border = self.origin[axis]
                + (v[axis] + if d > 0.0 { 1 } else { 0 }) as f64 * self.resolution;
            t_max[axis] = (voxel_border - start[axis]) / d;
        }

        let max_steps = self.dims[0] + self.dims[1] + self.dims[2] + 3;
        for _ in 0..max_steps {
            if v == end_vox {
                break;
            }
            let axis = if t_max[0] <= t_max[1] && t_max[0] <= t_max[2] {
                0
            } else if t_max[1] <= t_max[2] {
                1
            } else {
                2
            };
            if t_max[axis] > 1.0 {
                break;
            }
            v[axis] += step[axis];
            t_max[axis] += t_delta[axis];
            if !self.in_bounds(&v) {
                return; // left the grid; the hit voxel is unreachable
            }
            if v != end_vox {
                self.mark_free(&v);
            }
        }
        if self.in_bounds(&end_vox) {
            self.mark_occupied(&end_vox);
        }
    }

    /// Stamps a confirmed glass surface into the grid. The cloud is offset
    /// along the surface normal so the physical contact position lies on the
    /// stamped plane.
    pub fn fill_glass(
        &mut self,
        surface: &GlassSurface,
        contact_position: &Vec3,
    ) -> Result<(), MappingError> {
        if surface.status != SurfaceStatus::Confirmed {
            return Err(MappingError::NotConfirmed(surface.id));
        }
        let offset = surface.normal * surface.normal.dot(&(contact_position - surface.centroid));
        for p in &surface.cloud {
            if let Some(v) = self.voxel_of(&(p + offset)) {
                self.mark_occupied(&v);
            }
        }
        if let Some(v) = self.voxel_of(contact_position) {
            self.mark_occupied(&v);
        }
        Ok(())
    }

    /// Marks arbitrary world points Occupied (used by the baseline
    /// navigators for untouched fills and contact discs).
    pub fn mark_occupied_points(&mut self, points: &[Vec3]) {
        for p in points {
            if let Some(v) = self.voxel_of(p) {
                self.mark_occupied(&v);
            }
        }
    }

    pub fn occupied_voxels(&self) -> Vec<[i32; 3]> {
        let mut out = Vec::new();
        for iz in 0..self.dims[2] {
            for iy in 0..self.dims[1] {
                for ix in 0..self.dims[0] {
                    let v = [ix as i32, iy as i32, iz as i32];
                    if self.cells[self.index(&v)] == OCCUPIED {
                        out.push(v);
                    }
                }
            }
        }
        out
    }

    /// JSON header of the export format.
    pub fn export_meta(&self) -> String {
        #[derive(Serialize)]
        struct Meta {
            origin: Vec3,
            resolution: f64,
            dims: [usize; 3],
        }
        serde_json::to_string(&Meta {
            origin: self.origin,
            resolution: self.resolution,
            dims: self.dims,
        })
        .expect("grid meta serializes")
    }

    /// Textual voxel list: `index state` per non-Unknown voxel.
    pub fn export_voxels(&self) -> String {
        let mut out = String::new();
        for (idx, &c) in self.cells.iter().enumerate() {
            match c {
                FREE => out.push_str(&format!("{idx} free\n")),
                OCCUPIED => out.push_str(&format!("{idx} occupied\n")),
                _ => {}
            }
        }
        out
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        let mut unknown = 0;
        let mut free = 0;
        let mut occupied = 0;
        for &c in &self.cells {
            match c {
                FREE => free += 1,
                OCCUPIED => occupied += 1,
                _ => unknown += 1,
            }
        }
        (unknown, free, occupied)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perception::{DepthImage, SegMask};
    use crate::sim::Pose;

    fn small_cam() -> CameraModel {
        CameraModel {
            width: 1,
            height: 1,
            fx: 1.0,
            fy: 1.0,
            cx: 0.0,
            cy: 0.0,
            max_range: 10.0,
        }
    }

    fn frame_with_single_ray(depth: f64) -> FrameInput {
        let mut img = DepthImage::new(1, 1);
        img.set(0, 0, depth);
        FrameInput {
            depth: img,
            masks: Vec::<SegMask>::new(),
            pose: Pose::new(Vec3::new(0.05, 0.05, 0.05), 0.0),
        }
    }

    /// Oracle: voxels crossed by a segment, found by dense sampling.
    fn enumerate_ray_voxels(grid: &OccupancyGrid, a: &Vec3, b: &Vec3) -> Vec<[i32; 3]> {
        let mut seen = Vec::new();
        let n = 20_000;
        for i in 0..=n {
            let t = i as f64 / n as f64;
            let p = a + (b - a) * t;
            if let Some(v) = grid.voxel_of(&p) {
                if seen.last() != Some(&v) && !seen.contains(&v) {
                    seen.push(v);
                }
            }
        }
        seen
    }

    #[test]
    fn single_ray_marks_free_run_and_hit() {
        let bounds = Aabb {
            min: Vec3::new(0.0, 0.0, 0.0),
            max: Vec3::new(5.0, 1.0, 1.0),
        };
        let mut grid = OccupancyGrid::from_bounds(&bounds, 0.1, 0.0);
        // Principal pixel looks along +x from (0.05, 0.05, 0.05); the wall
        // return at 3.04 m lands in voxel ix = 30.
        let frame = frame_with_single_ray(3.04);
        grid.integrate_depth(&frame, &small_cam()).unwrap();

        let start = frame.pose.position;
        let end = Vec3::new(3.09, 0.05, 0.05);
        let oracle = enumerate_ray_voxels(&grid, &start, &end);
        // Oracle crossing list: camera voxel excluded, last voxel occupied.
        let expected_free = &oracle[1..oracle.len() - 1];
        assert_eq!(expected_free.len(), 29);
        for v in expected_free {
            assert_eq!(grid.state(v), CellState::Free, "voxel {v:?}");
        }
        assert_eq!(grid.state(oracle.last().unwrap()), CellState::Occupied);
        assert_eq!(grid.state(&oracle[0]), CellState::Unknown, "camera voxel untouched");

        let (_, free, occ) = grid.counts();
        assert_eq!((free, occ), (29, 1));
    }

    #[test]
    fn invalid_depth_changes_nothing() {
        let bounds = Aabb {
            min: Vec3::new(0.0, 0.0, 0.0),
            max: Vec3::new(5.0, 1.0, 1.0),
        };
        let mut grid = OccupancyGrid::from_bounds(&bounds, 0.1, 0.0);
        let frame = frame_with_single_ray(0.0);
        grid.integrate_depth(&frame, &small_cam()).unwrap();
        let (_, free, occ) = grid.counts();
        assert_eq!((free, occ), (0, 0));
    }

    #[test]
    fn pose_outside_grid_is_an_error() {
        let bounds = Aabb {
            min: Vec3::new(0.0, 0.0, 0.0),
            max: Vec3::new(1.0, 1.0, 1.0),
        };
        let mut grid = OccupancyGrid::from_bounds(&bounds, 0.1, 0.0);
        let mut frame = frame_with_single_ray(0.5);
        frame.pose = Pose::new(Vec3::new(9.0, 9.0, 9.0), 0.0);
        assert!(matches!(
            grid.integrate_depth(&frame, &small_cam()),
            Err(MappingError::PoseOutOfBounds)
        ));
    }

    #[test]
    fn occupied_is_sticky_against_later_rays() {
        let bounds = Aabb {
            min: Vec3::new(0.0, 0.0, 0.0),
            max: Vec3::new(5.0, 1.0, 1.0),
        };
        let mut grid = OccupancyGrid::from_bounds(&bounds, 0.1, 0.0);
        // First a near hit, then a far hit along the same ray: the near
        // voxel must stay Occupied.
        grid.integrate_depth(&frame_with_single_ray(1.04), &small_cam())
            .unwrap();
        let near = grid.voxel_of(&Vec3::new(1.05, 0.05, 0.05)).unwrap();
        assert_eq!(grid.state(&near), CellState::Occupied);
        grid.integrate_depth(&frame_with_single_ray(3.04), &small_cam())
            .unwrap();
        assert_eq!(grid.state(&near), CellState::Occupied);
    }

    fn confirmed_surface() -> GlassSurface {
        use crate::geometry::{Plane, PlanarPolygon, Vec2};
        let plane = Plane::new(Vec3::new(1.0, 0.0, 0.0), 2.0).unwrap();
        let basis = plane.basis();
        let corners = [
            Vec3::new(2.0, 0.2, 0.2),
            Vec3::new(2.0, 1.8, 0.2),
            Vec3::new(2.0, 1.8, 1.8),
            Vec3::new(2.0, 0.2, 1.8),
        ];
        let local: Vec<Vec2> = corners.iter().map(|p| basis.to_local(p)).collect();
        let polygon = PlanarPolygon::from_local(plane, local).unwrap();
        let centroid = crate::geometry::vertex_centroid(&polygon);
        let cloud = crate::geometry::sample_polygon_grid(&polygon, 0.1);
        GlassSurface {
            id: 3,
            centroid,
            normal: plane.normal(),
            polygon,
            cloud,
            status: SurfaceStatus::Confirmed,
            observation_count: 2,
        }
    }

    #[test]
    fn fill_glass_in_place_when_contact_on_plane() {
        let bounds = Aabb {
            min: Vec3::new(0.0, 0.0, 0.0),
            max: Vec3::new(4.0, 2.0, 2.0),
        };
        let mut grid = OccupancyGrid::from_bounds(&bounds, 0.1, 0.0);
        let s = confirmed_surface();
        let contact = Vec3::new(2.0, 1.0, 1.0);
        grid.fill_glass(&s, &contact).unwrap();
        assert_eq!(grid.state(&grid.voxel_of(&contact).unwrap()), CellState::Occupied);
        for p in &s.cloud {
            assert_eq!(grid.state(&grid.voxel_of(p).unwrap()), CellState::Occupied);
        }
    }

    #[test]
    fn fill_glass_offsets_cloud_to_contact() {
        let bounds = Aabb {
            min: Vec3::new(0.0, 0.0, 0.0),
            max: Vec3::new(4.0, 2.0, 2.0),
        };
        let mut grid = OccupancyGrid::from_bounds(&bounds, 0.1, 0.0);
        let s = confirmed_surface();
        // Contact 0.1 m on the -x side of the estimated plane.
        let contact = Vec3::new(1.9, 1.0, 1.0);
        grid.fill_glass(&s, &contact).unwrap();
        for p in &s.cloud {
            let shifted = p + Vec3::new(-0.1, 0.0, 0.0);
            assert_eq!(
                grid.state(&grid.voxel_of(&shifted).unwrap()),
                CellState::Occupied
            );
        }
    }

    #[test]
    fn fill_glass_requires_confirmation() {
        let bounds = Aabb {
            min: Vec3::new(0.0, 0.0, 0.0),
            max: Vec3::new(4.0, 2.0, 2.0),
        };
        let mut grid = OccupancyGrid::from_bounds(&bounds, 0.1, 0.0);
        let mut s = confirmed_surface();
        s.status = SurfaceStatus::Potential;
        assert!(matches!(
            grid.fill_glass(&s, &Vec3::new(2.0, 1.0, 1.0)),
            Err(MappingError::NotConfirmed(3))
        ));
    }

    #[test]
    fn inflation_blocks_neighbors_within_radius() {
        let bounds = Aabb {
            min: Vec3::new(0.0, 0.0, 0.0),
            max: Vec3::new(2.0, 2.0, 2.0),
        };
        let mut grid = OccupancyGrid::from_bounds(&bounds, 0.1, 0.3);
        grid.mark_occupied_points(&[Vec3::new(1.0, 1.0, 1.0)]);
        assert!(grid.is_blocked_point(&Vec3::new(1.0, 1.0, 1.0)));
        assert!(grid.is_blocked_point(&Vec3::new(1.25, 1.0, 1.0)));
        assert!(!grid.is_blocked_point(&Vec3::new(1.6, 1.0, 1.0)));
        assert!(grid.has_occupied_within(&Vec3::new(1.3, 1.0, 1.0), 0.5));
        assert!(!grid.has_occupied_within(&Vec3::new(1.0, 1.0, 1.9), 0.5));
    }
}

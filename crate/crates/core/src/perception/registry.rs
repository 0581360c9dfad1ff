use super::surface::{GlassSurface, SurfaceStatus};
use crate::geometry::{
    fit_plane_ransac, polygon_area, polygon_intersection_area, polygon_iou, polygon_union,
    sample_polygon_grid, unoriented_angle, vertex_centroid, GeometryError, Vec3,
};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Thresholds and sampling parameters of the glass perception pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerceptionParams {
    /// Segmentation confidence gate (masks must exceed it).
    pub tau_s: f64,
    /// Normal difference gate in radians.
    pub tau_n: f64,
    /// Centroid distance gate in meters.
    pub tau_c: f64,
    /// IoU association threshold.
    pub tau_i: f64,
    /// Outward dilation of mask boundaries in pixels.
    pub boundary_dilation: u32,
    /// Grid pitch of sampled surface clouds in meters.
    pub cloud_spacing: f64,
    pub ransac_iterations: usize,
    pub ransac_inlier_tol: f64,
    pub ransac_seed: u64,
    /// Minimum fraction of boundary points the fitted plane must explain;
    /// below it the boundary has no coherent frame and the mask is dropped.
    pub min_inlier_fraction: f64,
    /// Maximum depth spread (m) tolerated between a boundary pixel and its
    /// band neighbors. Grazing or discontinuous returns are not the stable
    /// frame measurements the boundary is meant to capture.
    pub depth_stability: f64,
    /// Band points farther than this from the band's median depth are
    /// background leaking past the frame, not frame returns.
    pub depth_window: f64,
    /// Masks covering more than this fraction of the image have no usable
    /// boundary in view and are skipped.
    pub max_mask_fraction: f64,
    /// Candidates below this polygon area (m^2) are sliver artifacts of
    /// partial views, not glass hypotheses.
    pub min_candidate_area: f64,
    /// A candidate mostly contained in an existing surface (by this overlap
    /// fraction of its own area) is absorbed even when the symmetric IoU is
    /// under tau_i.
    pub containment_absorb: f64,
    /// Minimum |cos| between the viewing ray and the fitted plane normal;
    /// steeper fits are unreliable corner slices.
    pub min_view_cos: f64,
    /// Minimum area over half-perimeter (roughly the minor dimension): a
    /// needle landing on a jamb or frame edge is not a pane.
    pub min_thickness: f64,
}

impl Default for PerceptionParams {
    fn default() -> Self {
        Self {
            tau_s: 0.75,
            tau_n: 0.65,
            tau_c: 1.0,
            tau_i: 0.1,
            boundary_dilation: 2,
            cloud_spacing: 0.1,
            ransac_iterations: 100,
            ransac_inlier_tol: 0.05,
            ransac_seed: 7,
            min_inlier_fraction: 0.6,
            depth_stability: 0.1,
            depth_window: 0.8,
            max_mask_fraction: 0.5,
            min_candidate_area: 0.15,
            containment_absorb: 0.8,
            min_view_cos: 0.35,
            min_thickness: 0.25,
        }
    }
}

/// Result of associating one new detection against the registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Association {
    Matched(usize),
    New,
}

/// The fused list of known glass surfaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRegistry {
    pub surfaces: Vec<GlassSurface>,
    pub params: PerceptionParams,
    next_id: u64,
    /// Merges dropped because the combined refit degenerated.
    pub degenerate_merges: u64,
}

impl SurfaceRegistry {
    pub fn new(params: PerceptionParams) -> Self {
        Self {
            surfaces: Vec::new(),
            params,
            next_id: 1,
            degenerate_merges: 0,
        }
    }

    pub fn get(&self, id: u64) -> Option<&GlassSurface> {
        self.surfaces.iter().find(|s| s.id == id)
    }

    pub fn get_mut(&mut self, id: u64) -> Option<&mut GlassSurface> {
        self.surfaces.iter_mut().find(|s| s.id == id)
    }

    /// Data association per the normal/centroid gates and the best-IoU rule.
    /// Confirmed and Invalidated surfaces still participate so late
    /// re-detections are absorbed instead of spawning duplicates.
    pub fn associate(&self, candidate: &GlassSurface) -> Association {
        let mut best: Option<(f64, usize)> = None;
        let mut best_contained: Option<(f64, usize)> = None;
        for (idx, existing) in self.surfaces.iter().enumerate() {
            let Ok(angle) = unoriented_angle(&candidate.normal, &existing.normal) else {
                continue;
            };
            if angle > self.params.tau_n {
                continue;
            }
            if (candidate.centroid - existing.centroid).norm() > self.params.tau_c {
                continue;
            }
            let Ok(projected) = candidate.polygon.project_onto(existing.polygon.plane()) else {
                continue;
            };
            let Ok(iou) = polygon_iou(&projected, &existing.polygon) else {
                continue;
            };
            // Strictly-greater keeps the lowest index on ties.
            if best.map_or(true, |(b, _)| iou > b) {
                best = Some((iou, idx));
            }
            if let Ok(cand_area) = polygon_area(&projected) {
                let contained = polygon_intersection_area(&projected, &existing.polygon)
                    / cand_area.max(1e-12);
                if best_contained.map_or(true, |(b, _)| contained > b) {
                    best_contained = Some((contained, idx));
                }
            }
        }
        match best {
            Some((iou, idx)) if iou >= self.params.tau_i => Association::Matched(idx),
            _ => match best_contained {
                // A partial view buried inside an established surface never
                // clears the symmetric IoU bar; absorb it by containment.
                Some((c, idx)) if c >= self.params.containment_absorb => {
                    Association::Matched(idx)
                }
                _ => Association::New,
            },
        }
    }

    /// Fuses a matched detection into an existing surface: refit the plane on
    /// the combined polygon vertices, project both polygons onto it, take the
    /// spatial union, recompute centroid and cloud.
    pub fn merge(
        existing: &GlassSurface,
        candidate: &GlassSurface,
        params: &PerceptionParams,
    ) -> Result<GlassSurface, GeometryError> {
        let mut combined = existing.polygon.world_vertices();
        combined.extend(candidate.polygon.world_vertices());
        let (plane, _) = fit_plane_ransac(
            &combined,
            params.ransac_inlier_tol,
            params.ransac_iterations,
            params.ransac_seed,
        )?;
        let onto_existing = existing.polygon.project_onto(&plane)?;
        let onto_candidate = candidate.polygon.project_onto(&plane)?;
        let polygon = polygon_union(&onto_existing, &onto_candidate)?;
        let centroid = vertex_centroid(&polygon);
        let cloud = sample_polygon_grid(&polygon, params.cloud_spacing);
        Ok(GlassSurface {
            id: existing.id,
            centroid,
            normal: plane.normal(),
            polygon,
            cloud,
            status: existing.status,
            observation_count: existing.observation_count + 1,
        })
    }

    /// Ingests one frame's detections in order: merge into the association
    /// target or append as a new Potential surface. Afterwards the registry
    /// is consolidated so no two surfaces jointly satisfy all three gates.
    pub fn ingest_frame(&mut self, candidates: Vec<GlassSurface>) {
        for candidate in candidates {
            match self.associate(&candidate) {
                Association::Matched(idx) => {
                    match Self::merge(&self.surfaces[idx], &candidate, &self.params) {
                        Ok(merged) => self.surfaces[idx] = merged,
                        Err(_) => self.degenerate_merges += 1,
                    }
                }
                Association::New => {
                    let mut c = candidate;
                    c.id = self.next_id;
                    self.next_id += 1;
                    c.status = SurfaceStatus::Potential;
                    self.surfaces.push(c);
                }
            }
        }
        self.consolidate();
    }

    /// Merges registry surfaces pairwise until no pair passes all three
    /// gates. Keeps the older id; Confirmed dominates Invalidated dominates
    /// Potential so touched surfaces never revert.
    fn consolidate(&mut self) {
        loop {
            let Some((i, j)) = self.first_gated_pair() else {
                return;
            };
            let (a, b) = (self.surfaces[i].clone(), self.surfaces[j].clone());
            match Self::merge(&a, &b, &self.params) {
                Ok(mut merged) => {
                    merged.status = dominant_status(a.status, b.status);
                    self.surfaces[i] = merged;
                    self.surfaces.remove(j);
                }
                Err(_) => {
                    self.degenerate_merges += 1;
                    return; // cannot resolve further without losing data
                }
            }
        }
    }

    fn first_gated_pair(&self) -> Option<(usize, usize)> {
        for i in 0..self.surfaces.len() {
            for j in (i + 1)..self.surfaces.len() {
                if self.pair_passes_gates(&self.surfaces[i], &self.surfaces[j]) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub(crate) fn pair_passes_gates(&self, a: &GlassSurface, b: &GlassSurface) -> bool {
        let Ok(angle) = unoriented_angle(&a.normal, &b.normal) else {
            return false;
        };
        if angle > self.params.tau_n || (a.centroid - b.centroid).norm() > self.params.tau_c {
            return false;
        }
        let Ok(projected) = a.polygon.project_onto(b.polygon.plane()) else {
            return false;
        };
        matches!(polygon_iou(&projected, &b.polygon), Ok(iou) if iou >= self.params.tau_i)
    }

    /// Surfaces currently awaiting physical verification.
    pub fn potentials(&self) -> impl Iterator<Item = &GlassSurface> {
        self.surfaces.iter().filter(|s| s.is_potential())
    }

    /// Newline-delimited JSON dump, one record per surface.
    pub fn dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for s in &self.surfaces {
            let record = DumpRecord {
                id: s.id,
                status: s.status,
                centroid: s.centroid,
                normal: s.normal,
                polygon_vertices_3d: s.polygon.world_vertices(),
                observation_count: s.observation_count,
            };
            serde_json::to_writer(&mut w, &record)?;
            writeln!(w)?;
        }
        Ok(())
    }
}

fn dominant_status(a: SurfaceStatus, b: SurfaceStatus) -> SurfaceStatus {
    use SurfaceStatus::*;
    match (a, b) {
        (Confirmed, _) | (_, Confirmed) => Confirmed,
        (Invalidated, _) | (_, Invalidated) => Invalidated,
        _ => Potential,
    }
}

#[derive(Serialize)]
struct DumpRecord {
    id: u64,
    status: SurfaceStatus,
    centroid: Vec3,
    normal: Vec3,
    polygon_vertices_3d: Vec<Vec3>,
    observation_count: u32,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{polygon_area, Plane, PlanarPolygon, Vec2};
    use approx::assert_relative_eq;

    fn surface_on_x_plane(x: f64, y0: f64, z0: f64, w: f64, h: f64) -> GlassSurface {
        let plane = Plane::new(Vec3::new(1.0, 0.0, 0.0), x).unwrap();
        let basis = plane.basis();
        let corners = [
            Vec3::new(x, y0, z0),
            Vec3::new(x, y0 + w, z0),
            Vec3::new(x, y0 + w, z0 + h),
            Vec3::new(x, y0, z0 + h),
        ];
        let local: Vec<Vec2> = corners.iter().map(|p| basis.to_local(p)).collect();
        let polygon = PlanarPolygon::from_local(plane, local).unwrap();
        let centroid = vertex_centroid(&polygon);
        let cloud = sample_polygon_grid(&polygon, 0.1);
        GlassSurface {
            id: 0,
            centroid,
            normal: plane.normal(),
            polygon,
            cloud,
            status: SurfaceStatus::Potential,
            observation_count: 1,
        }
    }

    #[test]
    fn identical_candidate_matches() {
        let mut reg = SurfaceRegistry::new(PerceptionParams::default());
        reg.ingest_frame(vec![surface_on_x_plane(2.0, 0.0, 0.0, 1.0, 1.0)]);
        let cand = surface_on_x_plane(2.0, 0.0, 0.0, 1.0, 1.0);
        assert_eq!(reg.associate(&cand), Association::Matched(0));
    }

    #[test]
    fn distant_centroid_is_new() {
        let mut reg = SurfaceRegistry::new(PerceptionParams::default());
        reg.ingest_frame(vec![surface_on_x_plane(2.0, 0.0, 0.0, 1.0, 1.0)]);
        // 2 m away along y with tau_c = 1 m.
        let cand = surface_on_x_plane(2.0, 2.0, 0.0, 1.0, 1.0);
        assert_eq!(reg.associate(&cand), Association::New);
    }

    #[test]
    fn low_iou_coplanar_neighbor_is_new() {
        let mut reg = SurfaceRegistry::new(PerceptionParams::default());
        reg.ingest_frame(vec![surface_on_x_plane(2.0, 0.0, 0.0, 1.0, 1.0)]);
        // Shifted by 0.95: overlap 0.05, union 1.95, IoU ~ 0.026 < 0.1,
        // centroid distance 0.95 < tau_c.
        let cand = surface_on_x_plane(2.0, 0.95, 0.0, 1.0, 1.0);
        assert_eq!(reg.associate(&cand), Association::New);
    }

    #[test]
    fn merge_is_idempotent_on_identical_surfaces() {
        let s = surface_on_x_plane(2.0, 0.0, 1.0, 2.0, 1.0);
        let merged = SurfaceRegistry::merge(&s, &s, &PerceptionParams::default()).unwrap();
        assert_relative_eq!(
            polygon_area(&merged.polygon).unwrap(),
            polygon_area(&s.polygon).unwrap(),
            epsilon = 1e-6
        );
        assert_relative_eq!(merged.centroid, s.centroid, epsilon = 1e-6);
        assert_eq!(merged.observation_count, 2);
    }

    #[test]
    fn merge_of_overlapping_halves_covers_panel() {
        // Left and right halves of a 2x1 panel overlapping by 0.2 m.
        let left = surface_on_x_plane(3.0, 0.0, 0.0, 1.1, 1.0);
        let right = surface_on_x_plane(3.0, 0.9, 0.0, 1.1, 1.0);
        let merged = SurfaceRegistry::merge(&left, &right, &PerceptionParams::default()).unwrap();
        let area = polygon_area(&merged.polygon).unwrap();
        assert!((area - 2.0).abs() / 2.0 < 0.05, "area {area}");
    }

    #[test]
    fn merged_normal_lies_between_tilted_inputs() {
        let a = surface_on_x_plane(3.0, 0.0, 0.0, 2.0, 1.0);
        let mut b = surface_on_x_plane(3.0, 0.0, 0.0, 2.0, 1.0);
        // Tilt b around z through its centroid, small enough that every
        // combined vertex stays within the RANSAC inlier tolerance, so the
        // refit equals least squares over the union of vertices.
        let ang: f64 = 2.0_f64.to_radians();
        let rot = nalgebra::Rotation3::from_axis_angle(&Vec3::z_axis(), ang);
        let centroid = b.centroid;
        let world: Vec<Vec3> = b
            .polygon
            .world_vertices()
            .iter()
            .map(|p| centroid + rot * (p - centroid))
            .collect();
        let (plane, _) = fit_plane_ransac(&world, 0.05, 100, 7).unwrap();
        let basis = plane.basis();
        let local: Vec<Vec2> = world.iter().map(|p| basis.to_local(&plane.project(p))).collect();
        b.polygon = PlanarPolygon::from_local(plane, local).unwrap();
        b.normal = plane.normal();
        b.centroid = vertex_centroid(&b.polygon);

        let merged = SurfaceRegistry::merge(&a, &b, &PerceptionParams::default()).unwrap();
        let to_a = unoriented_angle(&merged.normal, &a.normal).unwrap();
        let to_b = unoriented_angle(&merged.normal, &b.normal).unwrap();
        assert!(
            to_a <= ang + 1e-9 && to_b <= ang + 1e-9,
            "merged normal outside the fan: {to_a} / {to_b}"
        );

        // Oracle: total least squares over the combined vertex set.
        let mut combined = a.polygon.world_vertices();
        combined.extend(b.polygon.world_vertices());
        let all: Vec<usize> = (0..combined.len()).collect();
        let oracle = crate::geometry::least_squares_plane(&combined, &all).unwrap();
        let dev = unoriented_angle(&merged.normal, &oracle.normal()).unwrap();
        assert!(dev < 1e-6, "merged normal deviates from LS oracle by {dev}");
    }

    #[test]
    fn ingest_appends_and_merges() {
        let mut reg = SurfaceRegistry::new(PerceptionParams::default());
        reg.ingest_frame(vec![
            surface_on_x_plane(2.0, 0.0, 0.0, 1.0, 1.0),
            surface_on_x_plane(5.0, 4.0, 0.0, 1.0, 1.0),
        ]);
        assert_eq!(reg.surfaces.len(), 2);
        assert_eq!(reg.surfaces[0].id, 1);
        assert_eq!(reg.surfaces[1].id, 2);

        // Re-observing the first panel merges instead of appending.
        reg.ingest_frame(vec![surface_on_x_plane(2.0, 0.2, 0.0, 1.0, 1.0)]);
        assert_eq!(reg.surfaces.len(), 2);
        assert_eq!(reg.surfaces[0].observation_count, 2);
    }

    #[test]
    fn ingest_is_idempotent_for_identical_frames() {
        let mut reg = SurfaceRegistry::new(PerceptionParams::default());
        let frame = vec![surface_on_x_plane(2.0, 0.0, 0.0, 2.0, 1.5)];
        reg.ingest_frame(frame.clone());
        let area1 = polygon_area(&reg.surfaces[0].polygon).unwrap();
        reg.ingest_frame(frame);
        assert_eq!(reg.surfaces.len(), 1);
        let area2 = polygon_area(&reg.surfaces[0].polygon).unwrap();
        assert!((area1 - area2).abs() < 1e-6);
    }

    #[test]
    fn invalidated_surfaces_absorb_matches_without_resurrecting() {
        let mut reg = SurfaceRegistry::new(PerceptionParams::default());
        reg.ingest_frame(vec![surface_on_x_plane(2.0, 0.0, 0.0, 1.0, 1.0)]);
        reg.surfaces[0].status = SurfaceStatus::Invalidated;
        reg.ingest_frame(vec![surface_on_x_plane(2.0, 0.1, 0.0, 1.0, 1.0)]);
        assert_eq!(reg.surfaces.len(), 1);
        assert_eq!(reg.surfaces[0].status, SurfaceStatus::Invalidated);
        assert_eq!(reg.surfaces[0].observation_count, 2);
    }

    #[test]
    fn gate_soundness_holds_after_ingest() {
        let mut reg = SurfaceRegistry::new(PerceptionParams::default());
        // Overlapping fragments of the same pane arriving as separate frames.
        reg.ingest_frame(vec![surface_on_x_plane(2.0, 0.0, 0.0, 1.2, 1.0)]);
        reg.ingest_frame(vec![surface_on_x_plane(2.0, 0.8, 0.0, 1.2, 1.0)]);
        reg.ingest_frame(vec![surface_on_x_plane(2.0, 0.4, 0.0, 1.2, 1.0)]);
        for i in 0..reg.surfaces.len() {
            for j in (i + 1)..reg.surfaces.len() {
                assert!(
                    !reg.pair_passes_gates(&reg.surfaces[i], &reg.surfaces[j]),
                    "surfaces {i} and {j} should have been merged"
                );
            }
        }
    }

    #[test]
    fn dump_is_newline_delimited_json() {
        let mut reg = SurfaceRegistry::new(PerceptionParams::default());
        reg.ingest_frame(vec![
            surface_on_x_plane(2.0, 0.0, 0.0, 1.0, 1.0),
            surface_on_x_plane(6.0, 4.0, 0.0, 1.0, 1.0),
        ]);
        let mut buf = Vec::new();
        reg.dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.trim_end().lines().collect();
        assert_eq!(lines.len(), 2);
        for line in lines {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(v.get("id").is_some());
            assert!(v.get("polygon_vertices_3d").is_some());
            assert_eq!(v.get("status").unwrap(), "Potential");
        }
    }
}

use crate::geometry::{PlanarPolygon, Vec3};
use serde::{Deserialize, Serialize};

/// Lifecycle of a glass surface estimate. Transitions only away from
/// `Potential`; touched surfaces never revert.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SurfaceStatus {
    Potential,
    Confirmed,
    Invalidated,
}

/// Fused estimate of one planar glass surface: centroid, unit plane normal,
/// boundary polygon and a sampled interior cloud for map filling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlassSurface {
    pub id: u64,
    pub centroid: Vec3,
    pub normal: Vec3,
    pub polygon: PlanarPolygon,
    pub cloud: Vec<Vec3>,
    pub status: SurfaceStatus,
    pub observation_count: u32,
}

impl GlassSurface {
    pub fn is_potential(&self) -> bool {
        self.status == SurfaceStatus::Potential
    }
}

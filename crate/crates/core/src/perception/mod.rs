//! Incremental glass surface perception: per-frame extraction from
//! (segmentation, depth, pose) and cross-frame fusion into a registry.

mod camera;
mod detect;
mod mask;
mod registry;
mod surface;

pub use camera::CameraModel;
pub use detect::{detect_glass_frame, pixel_to_world, DepthImage, FrameInput};
pub use mask::{extract_boundary, SegMask};
pub use registry::{Association, PerceptionParams, SurfaceRegistry};
pub use surface::{GlassSurface, SurfaceStatus};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerceptionError {
    #[error("segmentation mask is empty")]
    EmptyMask,
    #[error("depth {0} is not a valid measurement")]
    InvalidDepth(f64),
}

//! Compiler, codec and CPU renderer for sliced Gaussian-splat volumes.
//!
//! A sequence of baked Gaussian clouds, one per precomputed slicing-plane
//! offset, is consolidated into a [`compiler::LayeredAsset`]: a global SH
//! table, a base layer shared by every state and one small delta layer per
//! state. The renderer picks the state closest to an arbitrary plane and
//! slices it either by hard centroid truncation or by fading opacity with
//! penetration depth.

pub mod camera;
pub mod compiler;
pub mod error;
pub mod image;
pub mod ingest;
pub mod metrics;
pub mod plane;
pub mod primitive;
pub mod render;
pub mod sh;
pub mod synth;

pub use camera::CameraPose;
pub use compiler::LayeredAsset;
pub use image::FrameImage;
pub use plane::SlicingPlane;
pub use primitive::{GaussianPrimitive, ShCoefficients, DEFAULT_K_SIGMA};
pub use render::{render, RenderMode, RenderOptions};

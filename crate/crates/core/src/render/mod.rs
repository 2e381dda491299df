//! CPU splat renderer for sliced layered assets.

mod composite;
mod project;
mod select;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::camera::CameraPose;
use crate::compiler::LayeredAsset;
use crate::error::RenderError;
use crate::image::{FrameImage, LinearImage};
use crate::plane::SlicingPlane;
use crate::primitive::{GaussianPrimitive, DEFAULT_K_SIGMA};

pub use composite::{composite, MAX_SPLAT_ALPHA, TRANSMITTANCE_CUTOFF};
pub use project::{project_gaussian, ProjectedSplat, FOOTPRINT_SIGMAS, SCREEN_DILATION};
pub use select::select_state;

/// Primitives whose sliced opacity falls below this are dropped.
pub const MIN_OPACITY: f64 = 1.0 / 255.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RenderMode {
    Unsliced,
    Hard,
    #[default]
    Modulated,
}

impl RenderMode {
    pub const ALL: [RenderMode; 3] = [RenderMode::Unsliced, RenderMode::Hard, RenderMode::Modulated];

    pub fn as_str(self) -> &'static str {
        match self {
            RenderMode::Unsliced => "unsliced",
            RenderMode::Hard => "hard",
            RenderMode::Modulated => "modulated",
        }
    }
}

impl fmt::Display for RenderMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RenderMode {
    type Err = RenderError;

    /// Case-insensitive.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RenderMode::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                RenderError::InvalidArgument(format!(
                    "unknown render mode {s:?} (expected unsliced, hard or modulated)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    pub mode: RenderMode,
    pub k_sigma: f64,
    /// Linear RGB, composited as fully opaque.
    pub background: [f64; 3],
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            mode: RenderMode::Modulated,
            k_sigma: DEFAULT_K_SIGMA,
            background: [0.0; 3],
        }
    }
}

impl RenderOptions {
    pub fn with_mode(mode: RenderMode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }
}

/// Base layer followed by the delta layer of state `k`.
pub fn active_set(
    asset: &LayeredAsset,
    k: usize,
) -> Result<impl Iterator<Item = &GaussianPrimitive> + Clone + '_, RenderError> {
    let delta = asset.delta_layer(k)?;
    Ok(asset.base_layer().iter().chain(delta))
}

/// Opacity of `prim` after slicing by `plane`, or `None` when it is dropped.
pub fn sliced_opacity(
    prim: &GaussianPrimitive,
    plane: &SlicingPlane,
    mode: RenderMode,
    k_sigma: f64,
) -> Option<f64> {
    let alpha = prim.opacity as f64;
    let mu = prim.mean();
    let a = match mode {
        RenderMode::Unsliced => alpha,
        RenderMode::Hard => {
            if plane.is_visible(&mu) {
                alpha
            } else {
                0.0
            }
        }
        RenderMode::Modulated => {
            let s_n = prim.projected_radius(plane.normal(), k_sigma);
            match plane.modulated_opacity(alpha, &mu, s_n) {
                Ok(a) => a,
                // flat along the normal: the fade collapses to a step
                Err(_) if plane.is_visible(&mu) => alpha,
                Err(_) => 0.0,
            }
        }
    };
    (a >= MIN_OPACITY).then_some(a)
}

/// Sliced, projected and depth-sorted splats of the state selected for
/// `plane`, plus that state's index.
pub fn prepare_splats(
    asset: &LayeredAsset,
    plane: &SlicingPlane,
    camera: &CameraPose,
    options: &RenderOptions,
) -> Result<(Vec<ProjectedSplat>, usize), RenderError> {
    if camera.width == 0 || camera.height == 0 {
        return Err(RenderError::InvalidArgument(format!(
            "viewport must be non-empty, got {}x{}",
            camera.width, camera.height
        )));
    }
    camera
        .validate()
        .map_err(|e| RenderError::InvalidArgument(e.to_string()))?;
    if !(options.k_sigma > 0.0 && options.k_sigma.is_finite()) {
        return Err(RenderError::InvalidArgument(format!(
            "k_sigma must be positive and finite, got {}",
            options.k_sigma
        )));
    }
    if options.background.iter().any(|v| !v.is_finite()) {
        return Err(RenderError::InvalidArgument("background must be finite".into()));
    }
    if asset.state_count() == 0 {
        return Ok((Vec::new(), 0));
    }

    let k = select_state(asset, plane);
    let active: Vec<&GaussianPrimitive> = active_set(asset, k)?.collect();
    let mut splats: Vec<ProjectedSplat> = active
        .par_iter()
        .filter_map(|prim| {
            let alpha = sliced_opacity(prim, plane, options.mode, options.k_sigma)?;
            let mut splat = project_gaussian(prim, asset.sh(prim), camera)?;
            splat.opacity = alpha;
            Some(splat)
        })
        .collect();
    splats.sort_by(|a, b| a.depth.total_cmp(&b.depth));
    Ok((splats, k))
}

/// Renders to a linear-light buffer and reports the selected state.
pub fn render_linear(
    asset: &LayeredAsset,
    plane: &SlicingPlane,
    camera: &CameraPose,
    options: &RenderOptions,
) -> Result<(LinearImage, usize), RenderError> {
    let (splats, k) = prepare_splats(asset, plane, camera, options)?;
    let image = composite(&splats, camera.width, camera.height, options.background)?;
    Ok((image, k))
}

/// Renders an sRGB-encoded RGBA8 frame.
pub fn render(
    asset: &LayeredAsset,
    plane: &SlicingPlane,
    camera: &CameraPose,
    options: &RenderOptions,
) -> Result<FrameImage, RenderError> {
    Ok(render_linear(asset, plane, camera, options)?.0.to_frame())
}

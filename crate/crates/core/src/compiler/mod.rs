//! Consolidation of a state sequence into a layered asset, and the binary
//! asset codec.
//!
//! A layered asset stores one global SH table, a base layer with every
//! primitive present in all `K` states, and one delta layer per state with
//! that state's remaining primitives. State `k` is `base ∪ delta[k]`.

mod codec;
mod dedup;
mod key;
mod layers;
pub mod quant;

pub use codec::{decode_asset, encode_asset, EMPTY_ASSET_LEN, MAGIC, RECORD_LEN, VERSION};
pub use dedup::{dedup_sh, SharedShSequence};
pub use key::IdentityKey;
pub use layers::{consolidate, reconstruct_state};

use crate::error::CompileError;
use crate::ingest::StateSequence;
use crate::primitive::{GaussianPrimitive, ShCoefficients};

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: [f32; 3],
    pub max: [f32; 3],
}

impl Aabb {
    /// Bounds of `points`; the degenerate box at the origin when empty.
    pub fn enclosing<'a>(points: impl IntoIterator<Item = &'a [f32; 3]>) -> Self {
        let mut min = [f32::INFINITY; 3];
        let mut max = [f32::NEG_INFINITY; 3];
        let mut any = false;
        for p in points {
            any = true;
            for i in 0..3 {
                min[i] = min[i].min(p[i]);
                max[i] = max[i].max(p[i]);
            }
        }
        if any {
            Self { min, max }
        } else {
            Self {
                min: [0.0; 3],
                max: [0.0; 3],
            }
        }
    }

    pub fn center(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| 0.5 * (self.min[i] as f64 + self.max[i] as f64))
    }

    pub fn corners(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        (0..8).map(move |c| {
            [0, 1, 2].map(|i| {
                if c & (1 << i) == 0 {
                    self.min[i] as f64
                } else {
                    self.max[i] as f64
                }
            })
        })
    }
}

/// Compiled asset. Header quantities are held at storage precision.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredAsset {
    axis: [f32; 3],
    offsets: Vec<f32>,
    sh_degree: u8,
    sh_table: Vec<ShCoefficients>,
    base_layer: Vec<GaussianPrimitive>,
    delta_layers: Vec<Vec<GaussianPrimitive>>,
    bounds: Aabb,
}

impl LayeredAsset {
    /// Assembles an asset from its parts, checking the structural
    /// invariants. Bounds are recomputed from the layers.
    pub fn from_parts(
        axis: [f32; 3],
        offsets: Vec<f32>,
        sh_degree: u8,
        sh_table: Vec<ShCoefficients>,
        base_layer: Vec<GaussianPrimitive>,
        delta_layers: Vec<Vec<GaussianPrimitive>>,
    ) -> Result<Self, CompileError> {
        let bounds = Aabb::enclosing(
            base_layer
                .iter()
                .chain(delta_layers.iter().flatten())
                .map(|p| &p.position),
        );
        let asset = Self {
            axis,
            offsets,
            sh_degree,
            sh_table,
            base_layer,
            delta_layers,
            bounds,
        };
        asset.check()?;
        Ok(asset)
    }

    /// Single-state asset holding `primitives` in the base layer.
    pub fn single_state(
        primitives: Vec<GaussianPrimitive>,
        sh_degree: u8,
        sh_table: Vec<ShCoefficients>,
    ) -> Result<Self, CompileError> {
        Self::from_parts([0.0, 0.0, 1.0], vec![0.0], sh_degree, sh_table, primitives, vec![vec![]])
    }

    pub(crate) fn from_decoded(
        axis: [f32; 3],
        offsets: Vec<f32>,
        bounds: Aabb,
        sh_degree: u8,
        sh_table: Vec<ShCoefficients>,
        base_layer: Vec<GaussianPrimitive>,
        delta_layers: Vec<Vec<GaussianPrimitive>>,
    ) -> Result<Self, CompileError> {
        let asset = Self {
            axis,
            offsets,
            sh_degree,
            sh_table,
            base_layer,
            delta_layers,
            bounds,
        };
        asset.check()?;
        Ok(asset)
    }

    fn check(&self) -> Result<(), CompileError> {
        let invalid = |m: String| Err(CompileError::InvalidSequence(m));
        if self.offsets.is_empty() {
            return invalid("asset needs at least one state".into());
        }
        if self.offsets.len() != self.delta_layers.len() {
            return invalid(format!(
                "{} offsets but {} delta layers",
                self.offsets.len(),
                self.delta_layers.len()
            ));
        }
        if let Some(i) = self.offsets.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(CompileError::OffsetCollision(i + 1));
        }
        let axis_len = self.axis.iter().map(|v| (*v as f64).powi(2)).sum::<f64>().sqrt();
        if !((axis_len - 1.0).abs() < 1e-5) {
            return invalid(format!("axis length {axis_len} is not 1"));
        }
        if self.sh_degree > 3 {
            return invalid(format!("sh degree {} > 3", self.sh_degree));
        }
        if let Some(sh) = self.sh_table.iter().find(|s| s.degree() != self.sh_degree) {
            return Err(CompileError::MixedShDegree(self.sh_degree, sh.degree()));
        }
        let count = self.sh_table.len();
        for p in self.base_layer.iter().chain(self.delta_layers.iter().flatten()) {
            if let Some(idx) = p.sh_index {
                if idx as usize >= count || idx == u32::MAX {
                    return invalid(format!("dangling sh_index {idx} (table has {count})"));
                }
            }
        }
        Ok(())
    }

    pub fn state_count(&self) -> usize {
        self.offsets.len()
    }

    pub fn axis(&self) -> [f32; 3] {
        self.axis
    }

    pub fn offsets(&self) -> &[f32] {
        &self.offsets
    }

    pub fn sh_degree(&self) -> u8 {
        self.sh_degree
    }

    pub fn sh_table(&self) -> &[ShCoefficients] {
        &self.sh_table
    }

    pub fn sh(&self, p: &GaussianPrimitive) -> Option<&ShCoefficients> {
        p.sh_index.and_then(|i| self.sh_table.get(i as usize))
    }

    pub fn base_layer(&self) -> &[GaussianPrimitive] {
        &self.base_layer
    }

    pub fn delta_layers(&self) -> &[Vec<GaussianPrimitive>] {
        &self.delta_layers
    }

    pub fn delta_layer(&self, k: usize) -> Result<&[GaussianPrimitive], CompileError> {
        self.delta_layers
            .get(k)
            .map(Vec::as_slice)
            .ok_or(CompileError::StateIndex {
                index: k,
                count: self.state_count(),
            })
    }

    pub fn bounds(&self) -> &Aabb {
        &self.bounds
    }

    /// Number of primitives in state `k` (`|base| + |delta[k]|`).
    pub fn state_len(&self, k: usize) -> Result<usize, CompileError> {
        Ok(self.base_layer.len() + self.delta_layer(k)?.len())
    }
}

/// Runs SH deduplication and consolidation in one step.
pub fn compile(seq: &StateSequence) -> Result<LayeredAsset, CompileError> {
    consolidate(&dedup_sh(seq)?)
}

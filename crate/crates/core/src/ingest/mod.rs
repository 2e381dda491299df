//! Loading per-state Gaussian clouds and assembling offset-tagged sequences.

mod manifest;
pub mod ply;

use std::fmt;

use nalgebra::Vector3;

pub use manifest::{load_state_sequence, Manifest, ManifestEntry};

use crate::primitive::{GaussianPrimitive, ShCoefficients};

/// One baked slicing state.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GaussianCloud {
    pub primitives: Vec<GaussianPrimitive>,
    /// Local SH table referenced by `GaussianPrimitive::sh_index`.
    pub sh_table: Vec<ShCoefficients>,
    pub source_name: String,
}

/// `K` baked states with their precompute-plane offsets along `axis`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSequence {
    states: Vec<GaussianCloud>,
    offsets: Vec<f64>,
    axis: Vector3<f64>,
}

impl StateSequence {
    /// Pairs states with offsets, sorting by offset. Rejects empty input,
    /// duplicate or non-finite offsets and a degenerate axis.
    pub fn new(
        states: Vec<(f64, GaussianCloud)>,
        axis: Vector3<f64>,
    ) -> Result<Self, String> {
        if states.is_empty() {
            return Err("sequence needs at least one state".into());
        }
        let len = axis.norm();
        if !len.is_finite() || len == 0.0 {
            return Err("axis must be a non-zero finite vector".into());
        }
        let mut states = states;
        if let Some((c, _)) = states.iter().find(|(c, _)| !c.is_finite()) {
            return Err(format!("offset {c} is not finite"));
        }
        states.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = states.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(format!("duplicate offset {}", w[0].0));
        }
        let (offsets, states) = states.into_iter().unzip();
        Ok(Self {
            states,
            offsets,
            axis: axis / len,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[GaussianCloud] {
        &self.states
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn axis(&self) -> &Vector3<f64> {
        &self.axis
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Position,
    Scale,
    Rotation,
    Opacity,
    DcColor,
    ShIndex,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Field::Position => "position",
            Field::Scale => "scale",
            Field::Rotation => "rotation",
            Field::Opacity => "opacity",
            Field::DcColor => "dc_color",
            Field::ShIndex => "sh_index",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub index: usize,
    pub field: Field,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "primitive {} {}: {}", self.index, self.field, self.message)
    }
}

/// Lists every primitive-level invariant violation in `cloud`.
pub fn validate_cloud(cloud: &GaussianCloud) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |index, field, message: String| out.push(Violation { index, field, message });
    for (i, p) in cloud.primitives.iter().enumerate() {
        if !p.position.iter().all(|v| v.is_finite()) {
            push(i, Field::Position, format!("non-finite {:?}", p.position));
        }
        if !p.scale.iter().all(|v| *v > 0.0 && v.is_finite()) {
            push(i, Field::Scale, format!("components must be > 0, got {:?}", p.scale));
        }
        let qn = p.rotation.iter().map(|v| (*v as f64).powi(2)).sum::<f64>().sqrt();
        if !((qn - 1.0).abs() <= 1e-6) {
            push(i, Field::Rotation, format!("|q| = {qn}, expected 1"));
        }
        if !(0.0..=1.0).contains(&p.opacity) {
            push(i, Field::Opacity, format!("{} outside [0, 1]", p.opacity));
        }
        if !p.dc_color.iter().all(|v| v.is_finite()) {
            push(i, Field::DcColor, format!("non-finite {:?}", p.dc_color));
        }
        if let Some(idx) = p.sh_index {
            if idx as usize >= cloud.sh_table.len() {
                push(
                    i,
                    Field::ShIndex,
                    format!("dangling reference {idx} (table has {})", cloud.sh_table.len()),
                );
            }
        }
    }
    out
}

use rayon::prelude::*;

use crate::compiler::dedup::SharedShSequence;
use crate::compiler::key::IdentityKey;
use crate::compiler::{Aabb, LayeredAsset};
use crate::error::CompileError;
use crate::ingest::GaussianCloud;
use crate::primitive::GaussianPrimitive;

/// Keys of one state in ascending order, with the primitive index they
/// came from. Fails on a repeated key.
fn sorted_keys(
    state: usize,
    prims: &[GaussianPrimitive],
) -> Result<Vec<(IdentityKey, usize)>, CompileError> {
    let mut keys: Vec<(IdentityKey, usize)> = prims
        .iter()
        .enumerate()
        .map(|(i, p)| (IdentityKey::of(p), i))
        .collect();
    keys.sort_unstable();
    if let Some(w) = keys.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(CompileError::DuplicatePrimitive {
            state,
            key: w[0].0.to_string(),
        });
    }
    Ok(keys)
}

/// Splits the sequence into a base layer (primitives present in every
/// state) and per-state delta layers. Layers are sorted by identity key.
pub fn consolidate(seq: &SharedShSequence) -> Result<LayeredAsset, CompileError> {
    if seq.states.is_empty() || seq.states.len() != seq.offsets.len() {
        return Err(CompileError::InvalidSequence(format!(
            "{} states with {} offsets",
            seq.states.len(),
            seq.offsets.len()
        )));
    }
    let first = sorted_keys(0, &seq.states[0])?;
    let candidates: Vec<IdentityKey> = first.iter().map(|(k, _)| *k).collect();

    // count, per candidate, how many states contain it
    let hits = seq
        .states
        .par_iter()
        .enumerate()
        .skip(1)
        .map(|(k, prims)| {
            let keys = sorted_keys(k, prims)?;
            Ok(keys
                .iter()
                .filter_map(|(key, _)| candidates.binary_search(key).ok())
                .collect::<Vec<usize>>())
        })
        .collect::<Result<Vec<_>, CompileError>>()?;
    let mut counts = vec![1usize; candidates.len()];
    for state_hits in &hits {
        for &i in state_hits {
            counts[i] += 1;
        }
    }
    drop(hits);

    let k_total = seq.states.len();
    let mut base_keys = Vec::new();
    let mut base_layer = Vec::new();
    for ((key, idx), count) in first.iter().zip(&counts) {
        if *count == k_total {
            base_keys.push(*key);
            base_layer.push(seq.states[0][*idx]);
        }
    }

    let delta_layers: Vec<Vec<GaussianPrimitive>> = seq
        .states
        .par_iter()
        .enumerate()
        .map(|(k, prims)| {
            Ok(sorted_keys(k, prims)?
                .into_iter()
                .filter(|(key, _)| base_keys.binary_search(key).is_err())
                .map(|(_, i)| prims[i])
                .collect())
        })
        .collect::<Result<_, CompileError>>()?;

    let offsets: Vec<f32> = seq.offsets.iter().map(|c| *c as f32).collect();
    if let Some(i) = offsets.windows(2).position(|w| !(w[0] < w[1])) {
        return Err(CompileError::OffsetCollision(i + 1));
    }
    let axis = seq.axis.map(|v| v as f32);
    let bounds = Aabb::enclosing(seq.states.iter().flatten().map(|p| &p.position));
    let asset = LayeredAsset::from_parts(
        axis,
        offsets,
        seq.sh_degree,
        seq.sh_table.clone(),
        base_layer,
        delta_layers,
    )?;
    debug_assert_eq!(*asset.bounds(), bounds);
    Ok(asset)
}

/// Rebuilds state `k` as `base ∪ delta[k]`, referencing the global SH table.
pub fn reconstruct_state(asset: &LayeredAsset, k: usize) -> Result<GaussianCloud, CompileError> {
    let delta = asset.delta_layer(k)?;
    Ok(GaussianCloud {
        primitives: asset.base_layer().iter().chain(delta).copied().collect(),
        sh_table: asset.sh_table().to_vec(),
        source_name: format!("state {k}"),
    })
}

use std::collections::HashMap;

use crate::compiler::quant::{from_f16_bits, to_f16_bits};
use crate::error::CompileError;
use crate::ingest::StateSequence;
use crate::primitive::{GaussianPrimitive, ShCoefficients};

/// A state sequence whose primitives all reference one global SH table.
#[derive(Debug, Clone, PartialEq)]
pub struct SharedShSequence {
    pub axis: [f64; 3],
    pub offsets: Vec<f64>,
    /// Highest SH order in the table, 0 when no primitive has SH.
    pub sh_degree: u8,
    /// Distinct payloads at storage (f16) precision, sorted by their f16
    /// bit patterns.
    pub sh_table: Vec<ShCoefficients>,
    pub states: Vec<Vec<GaussianPrimitive>>,
}

/// Storage-precision byte identity of an SH payload.
pub(crate) fn payload_bits(sh: &ShCoefficients) -> Box<[u16]> {
    sh.coeffs()
        .iter()
        .flat_map(|c| c.map(to_f16_bits))
        .collect()
}

fn payload_from_bits(degree: u8, bits: &[u16]) -> ShCoefficients {
    let coeffs = bits
        .chunks_exact(3)
        .map(|c| [from_f16_bits(c[0]), from_f16_bits(c[1]), from_f16_bits(c[2])])
        .collect();
    ShCoefficients::new(degree, coeffs).expect("payload length matches degree")
}

/// Replaces every state's local SH table with one global table holding each
/// distinct payload once. Unreferenced local entries are dropped.
pub fn dedup_sh(seq: &StateSequence) -> Result<SharedShSequence, CompileError> {
    let mut degree = 0u8;
    for state in seq.states() {
        for p in &state.primitives {
            let Some(idx) = p.sh_index else { continue };
            let sh = state.sh_table.get(idx as usize).ok_or_else(|| {
                CompileError::InvalidSequence(format!(
                    "{}: dangling sh_index {idx}",
                    state.source_name
                ))
            })?;
            if degree == 0 {
                degree = sh.degree();
            } else if sh.degree() != degree {
                return Err(CompileError::MixedShDegree(degree, sh.degree()));
            }
        }
    }

    // provisional ids in first-seen order, renumbered by sorted payload below
    let mut ids: HashMap<Box<[u16]>, u32> = HashMap::new();
    let mut local_to_provisional: Vec<Vec<Option<u32>>> = Vec::with_capacity(seq.len());
    for state in seq.states() {
        let mut used = vec![false; state.sh_table.len()];
        for p in &state.primitives {
            if let Some(idx) = p.sh_index {
                used[idx as usize] = true;
            }
        }
        let map = state
            .sh_table
            .iter()
            .zip(used)
            .map(|(sh, used)| {
                used.then(|| {
                    let next = ids.len() as u32;
                    *ids.entry(payload_bits(sh)).or_insert(next)
                })
            })
            .collect();
        local_to_provisional.push(map);
    }

    let mut payloads: Vec<(Box<[u16]>, u32)> = ids.into_iter().collect();
    payloads.sort_unstable();
    let mut provisional_to_final = vec![0u32; payloads.len()];
    for (rank, (_, provisional)) in payloads.iter().enumerate() {
        provisional_to_final[*provisional as usize] = rank as u32;
    }
    let sh_table = payloads
        .iter()
        .map(|(bits, _)| payload_from_bits(degree, bits))
        .collect();

    let states = seq
        .states()
        .iter()
        .zip(&local_to_provisional)
        .map(|(state, map)| {
            state
                .primitives
                .iter()
                .map(|p| GaussianPrimitive {
                    sh_index: p.sh_index.map(|i| {
                        provisional_to_final[map[i as usize].expect("marked used") as usize]
                    }),
                    ..*p
                })
                .collect()
        })
        .collect();

    Ok(SharedShSequence {
        axis: [seq.axis().x, seq.axis().y, seq.axis().z],
        offsets: seq.offsets().to_vec(),
        sh_degree: degree,
        sh_table,
        states,
    })
}

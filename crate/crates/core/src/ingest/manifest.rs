use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::IngestError;
use crate::ingest::{ply, StateSequence};

/// On-disk description of a state sequence. Relative paths resolve
/// against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub axis: [f64; 3],
    pub states: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub path: String,
    pub offset: f64,
}

impl Manifest {
    pub fn from_json(text: &str) -> Result<Self, IngestError> {
        serde_json::from_str(text).map_err(|e| IngestError::Manifest(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}

/// Reads a manifest and every PLY it lists, returning the states ordered
/// by offset.
pub fn load_state_sequence(manifest_path: &Path) -> Result<StateSequence, IngestError> {
    let manifest = Manifest::read(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    if manifest.states.is_empty() {
        return Err(IngestError::Manifest("manifest lists no states".into()));
    }
    let mut offsets: Vec<f64> = manifest.states.iter().map(|s| s.offset).collect();
    offsets.sort_by(f64::total_cmp);
    if let Some(w) = offsets.windows(2).find(|w| w[0] == w[1]) {
        return Err(IngestError::Manifest(format!("duplicate offset {}", w[0])));
    }

    let states = manifest
        .states
        .par_iter()
        .map(|entry| {
            let path: PathBuf = base.join(&entry.path);
            let bytes = std::fs::read(&path).map_err(|source| IngestError::Io {
                path: path.clone(),
                source,
            })?;
            let cloud = ply::parse_ply(&bytes, &entry.path)
                .map_err(|source| IngestError::Ply { path, source })?;
            Ok((entry.offset, cloud))
        })
        .collect::<Result<Vec<_>, IngestError>>()?;

    StateSequence::new(states, Vector3::from(manifest.axis)).map_err(IngestError::Manifest)
}

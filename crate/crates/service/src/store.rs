//! Directory of compiled assets, decoded lazily and cached per case.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;
use splatslice_core::compiler::decode_asset;
use splatslice_core::LayeredAsset;

pub const ASSET_EXTENSION: &str = "cgsa";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseDescriptor {
    pub case_id: String,
    pub display_name: String,
    pub state_count: usize,
    pub base_primitives: usize,
    pub delta_primitives: usize,
    /// Primitive count of the largest reconstructed state.
    pub max_state_primitives: usize,
    pub bounds: Bounds,
    pub offset_range: [f32; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bounds {
    pub min: [f32; 3],
    pub max: [f32; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseWarning {
    pub file: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseListing {
    pub cases: Vec<CaseDescriptor>,
    pub warnings: Vec<CaseWarning>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoadError {
    NotFound(String),
    Corrupt { case_id: String, message: String },
}

impl std::fmt::Display for LoadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LoadError::NotFound(id) => write!(f, "unknown case {id:?}"),
            LoadError::Corrupt { case_id, message } => write!(f, "case {case_id:?} is unreadable: {message}"),
        }
    }
}

impl std::error::Error for LoadError {}

type Slot = Arc<OnceLock<Result<Arc<LayeredAsset>, String>>>;

#[derive(Debug)]
pub struct CaseStore {
    dir: PathBuf,
    cache: Mutex<HashMap<String, Slot>>,
}

fn display_name(case_id: &str) -> String {
    case_id
        .split(['_', '-'])
        .filter(|w| !w.is_empty())
        .map(|w| {
            let mut c = w.chars();
            c.next().map(|f| f.to_uppercase().chain(c).collect::<String>()).unwrap_or_default()
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn describe(case_id: &str, asset: &LayeredAsset) -> CaseDescriptor {
    let bounds = asset.bounds();
    let offsets = asset.offsets();
    CaseDescriptor {
        case_id: case_id.to_string(),
        display_name: display_name(case_id),
        state_count: asset.state_count(),
        base_primitives: asset.base_layer().len(),
        delta_primitives: asset.delta_layers().iter().map(Vec::len).sum(),
        max_state_primitives: asset.base_layer().len()
            + asset.delta_layers().iter().map(Vec::len).max().unwrap_or(0),
        bounds: Bounds {
            min: bounds.min,
            max: bounds.max,
        },
        offset_range: [
            offsets.first().copied().unwrap_or(0.0),
            offsets.last().copied().unwrap_or(0.0),
        ],
    }
}

impl CaseStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: dir.into(),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, case_id: &str) -> Option<PathBuf> {
        let plain = !case_id.is_empty()
            && !case_id.starts_with('.')
            && !case_id.contains(['/', '\\']);
        plain.then(|| self.dir.join(format!("{case_id}.{ASSET_EXTENSION}")))
    }

    /// Decodes the case on first use; later calls share the cached result.
    /// Concurrent loads of different cases do not wait on each other.
    pub fn load(&self, case_id: &str) -> Result<Arc<LayeredAsset>, LoadError> {
        let path = self
            .path_for(case_id)
            .filter(|p| p.is_file())
            .ok_or_else(|| LoadError::NotFound(case_id.to_string()))?;
        let slot = {
            let mut cache = self.cache.lock().expect("cache lock poisoned");
            cache.entry(case_id.to_string()).or_default().clone()
        };
        slot.get_or_init(|| {
            let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
            decode_asset(&bytes).map(Arc::new).map_err(|e| e.to_string())
        })
        .clone()
        .map_err(|message| LoadError::Corrupt {
            case_id: case_id.to_string(),
            message,
        })
    }

    /// One descriptor per decodable asset, sorted by id; undecodable files
    /// show up as warnings.
    pub fn list(&self) -> CaseListing {
        let mut listing = CaseListing {
            cases: Vec::new(),
            warnings: Vec::new(),
        };
        let entries = match std::fs::read_dir(&self.dir) {
            Ok(entries) => entries,
            Err(e) => {
                listing.warnings.push(CaseWarning {
                    file: self.dir.display().to_string(),
                    message: e.to_string(),
                });
                return listing;
            }
        };
        let mut ids: Vec<(String, String)> = entries
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == ASSET_EXTENSION))
            .filter_map(|p| {
                let id = p.file_stem()?.to_str()?.to_string();
                let file = p.file_name()?.to_string_lossy().into_owned();
                Some((id, file))
            })
            .collect();
        ids.sort();
        for (id, file) in ids {
            match self.load(&id) {
                Ok(asset) => listing.cases.push(describe(&id, &asset)),
                Err(e) => listing.warnings.push(CaseWarning {
                    file,
                    message: e.to_string(),
                }),
            }
        }
        listing
    }
}

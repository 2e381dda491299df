//! Seeded synthetic state sequences with a controlled sharing structure.
//!
//! Every state of a case holds `⌈f·N⌉` primitives that are identical across
//! all states, plus `N − ⌈f·N⌉` per-state primitives lying in a thin slab
//! around that state's plane `z = c_k`. Per-state slot `i` keeps its xy
//! footprint, color and (unless `unique_sh`) SH payload from state to state,
//! so only its depth changes, which mimics content re-baked near a moving cut.

use std::path::{Path, PathBuf};

use nalgebra::{UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::SynthError;
use crate::ingest::ply::write_ply;
use crate::ingest::{GaussianCloud, Manifest, ManifestEntry, StateSequence};
use crate::primitive::{GaussianPrimitive, ShCoefficients};

pub const MANIFEST_NAME: &str = "manifest.json";
/// Half-thickness of the slab holding per-state primitives.
const SLAB: f32 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub states: usize,
    pub primitives: usize,
    pub shared_fraction: f64,
    pub seed: u64,
    pub sh_degree: u8,
    /// Give every per-state primitive its own SH payload instead of
    /// sharing one per slot across states.
    pub unique_sh: bool,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            states: 8,
            primitives: 1000,
            shared_fraction: 0.95,
            seed: 0,
            sh_degree: 1,
            unique_sh: false,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.states == 0 {
            return Err(SynthError::InvalidParams("states must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.shared_fraction) {
            return Err(SynthError::InvalidParams(format!(
                "shared fraction must lie in [0, 1], got {}",
                self.shared_fraction
            )));
        }
        if self.sh_degree > 3 {
            return Err(SynthError::InvalidParams(format!(
                "sh degree must be at most 3, got {}",
                self.sh_degree
            )));
        }
        Ok(())
    }

    /// `⌈f·N⌉`, robust to `f·N` landing a hair above an integer.
    pub fn shared_count(&self) -> usize {
        let exact = self.shared_fraction * self.primitives as f64;
        let n = (exact - 1e-9 * exact.max(1.0)).ceil().max(0.0) as usize;
        n.min(self.primitives)
    }

    /// Plane offset of state `k`: cell centers of `[-1, 1]` split `K` ways.
    pub fn offset(&self, k: usize) -> f64 {
        -1.0 + 2.0 * (k as f64 + 0.5) / self.states as f64
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn random_sh(rng: &mut ChaCha8Rng, degree: u8) -> ShCoefficients {
    let n = ShCoefficients::basis_count(degree);
    let coeffs = (0..n)
        .map(|_| [0; 3].map(|_: i32| rng.random_range(-0.2f32..0.2)))
        .collect();
    ShCoefficients::new(degree, coeffs).expect("basis count matches degree")
}

fn random_rotation(rng: &mut ChaCha8Rng) -> [f32; 4] {
    let q = UnitQuaternion::from_euler_angles(
        rng.random_range(-3.1f64..3.1),
        rng.random_range(-1.5f64..1.5),
        rng.random_range(-3.1f64..3.1),
    );
    [q.w as f32, q.i as f32, q.j as f32, q.k as f32]
}

fn random_color(rng: &mut ChaCha8Rng) -> [f32; 3] {
    [0; 3].map(|_: i32| rng.random_range(-1.5f32..1.5))
}

struct Slot {
    xy: [f32; 2],
    dz: f32,
    scale: [f32; 3],
    rotation: [f32; 4],
    opacity: f32,
    dc_color: [f32; 3],
    sh: Option<ShCoefficients>,
}

/// Builds the `K` clouds in offset order, each paired with its offset.
pub fn generate(params: &SynthParams) -> Result<Vec<(f64, GaussianCloud)>, SynthError> {
    params.validate()?;
    let degree = params.sh_degree;
    let shared_n = params.shared_count();
    let own_n = params.primitives - shared_n;

    let mut rng = stream(params.seed, 0);
    let mut shared = Vec::with_capacity(shared_n);
    let mut shared_sh = Vec::new();
    for _ in 0..shared_n {
        let sh_index = (degree > 0).then(|| {
            shared_sh.push(random_sh(&mut rng, degree));
            (shared_sh.len() - 1) as u32
        });
        shared.push(GaussianPrimitive {
            position: [0; 3].map(|_: i32| rng.random_range(-1.0f32..1.0)),
            scale: [0; 3].map(|_: i32| rng.random_range(0.02f32..0.08)),
            rotation: random_rotation(&mut rng),
            opacity: rng.random_range(0.2f32..0.95),
            dc_color: random_color(&mut rng),
            sh_index,
        });
    }

    let mut rng = stream(params.seed, 1);
    let slots: Vec<Slot> = (0..own_n)
        .map(|_| Slot {
            xy: [rng.random_range(-1.0f32..1.0), rng.random_range(-1.0f32..1.0)],
            dz: rng.random_range(-SLAB..SLAB),
            scale: [
                rng.random_range(0.03f32..0.08),
                rng.random_range(0.03f32..0.08),
                rng.random_range(0.005f32..0.015),
            ],
            rotation: random_rotation(&mut rng),
            opacity: rng.random_range(0.3f32..0.95),
            dc_color: random_color(&mut rng),
            sh: (degree > 0).then(|| random_sh(&mut rng, degree)),
        })
        .collect();

    let states = (0..params.states)
        .into_par_iter()
        .map(|k| {
            let c = params.offset(k);
            let mut rng = stream(params.seed, 2 + k as u64);
            let mut primitives = shared.clone();
            let mut sh_table = shared_sh.clone();
            for slot in &slots {
                // jitter keeps same-slot primitives distinct across states
                // even when two offsets round to the same f32
                let jitter = rng.random_range(-1e-3f32..1e-3);
                let sh_index = slot.sh.as_ref().map(|sh| {
                    let payload = if params.unique_sh {
                        random_sh(&mut rng, degree)
                    } else {
                        sh.clone()
                    };
                    sh_table.push(payload);
                    (sh_table.len() - 1) as u32
                });
                primitives.push(GaussianPrimitive {
                    position: [slot.xy[0], slot.xy[1], c as f32 + slot.dz + jitter],
                    scale: slot.scale,
                    rotation: slot.rotation,
                    opacity: slot.opacity,
                    dc_color: slot.dc_color,
                    sh_index,
                });
            }
            let cloud = GaussianCloud {
                primitives,
                sh_table,
                source_name: state_file_name(k),
            };
            (c, cloud)
        })
        .collect();
    Ok(states)
}

pub fn state_file_name(k: usize) -> String {
    format!("state_{k:04}.ply")
}

/// Generated case as an in-memory sequence along +z.
pub fn generate_sequence(params: &SynthParams) -> Result<StateSequence, SynthError> {
    StateSequence::new(generate(params)?, Vector3::z()).map_err(SynthError::InvalidParams)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WrittenCase {
    pub manifest_path: PathBuf,
    pub manifest: Manifest,
    /// Summed size of all PLY files.
    pub ply_bytes: u64,
}

/// Writes one PLY per state plus `manifest.json` into `dir`, creating it if
/// needed.
pub fn write_case(params: &SynthParams, dir: &Path) -> Result<WrittenCase, SynthError> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| SynthError::Io { path, source }
    };
    let states = generate(params)?;
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let sizes = states
        .par_iter()
        .map(|(_, cloud)| {
            let bytes = write_ply(cloud)?;
            let path = dir.join(&cloud.source_name);
            std::fs::write(&path, &bytes).map_err(io_err(&path))?;
            Ok(bytes.len() as u64)
        })
        .collect::<Result<Vec<u64>, SynthError>>()?;

    let manifest = Manifest {
        axis: [0.0, 0.0, 1.0],
        states: states
            .iter()
            .map(|(c, cloud)| ManifestEntry {
                path: cloud.source_name.clone(),
                offset: *c,
            })
            .collect(),
    };
    let manifest_path = dir.join(MANIFEST_NAME);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&manifest_path, json + "\n").map_err(io_err(&manifest_path))?;
    Ok(WrittenCase {
        manifest_path,
        manifest,
        ply_bytes: sizes.iter().sum(),
    })
}

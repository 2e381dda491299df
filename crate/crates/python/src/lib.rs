//! Python bindings: planes, cameras, compiled assets, rendering, metrics and
//! synthetic case generation.

use std::path::PathBuf;
use std::sync::Arc;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

use splatslice_core::compiler::{compile, decode_asset, encode_asset};
use splatslice_core::ingest::load_state_sequence;
use splatslice_core::render::{self as core_render, select_state, RenderMode, RenderOptions};
use splatslice_core::synth::{write_case, SynthParams};
use splatslice_core::{metrics, CameraPose, FrameImage, LayeredAsset, SlicingPlane};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn vec3(v: [f64; 3]) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

/// Oriented plane; the half-space `p·n > offset` is kept.
#[pyclass(name = "Plane", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPlane(SlicingPlane);

#[pymethods]
impl PyPlane {
    #[new]
    fn new(normal: [f64; 3], offset: f64) -> PyResult<Self> {
        SlicingPlane::new(vec3(normal), offset).map(Self).map_err(value_err)
    }

    #[getter]
    fn normal(&self) -> [f64; 3] {
        let n = self.0.normal();
        [n.x, n.y, n.z]
    }

    #[getter]
    fn offset(&self) -> f64 {
        self.0.offset()
    }

    fn flipped(&self) -> Self {
        Self(self.0.flipped())
    }

    fn signed_distance(&self, point: [f64; 3]) -> f64 {
        self.0.signed_distance(&vec3(point))
    }

    fn is_visible(&self, point: [f64; 3]) -> bool {
        self.0.is_visible(&vec3(point))
    }

    fn fade(&self, point: [f64; 3], s_n: f64) -> PyResult<f64> {
        self.0.fade(&vec3(point), s_n).map_err(value_err)
    }

    fn modulated_opacity(&self, alpha: f64, point: [f64; 3], s_n: f64) -> PyResult<f64> {
        self.0.modulated_opacity(alpha, &vec3(point), s_n).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        let n = self.normal();
        format!("Plane(normal=[{}, {}, {}], offset={})", n[0], n[1], n[2], self.offset())
    }
}

/// Pinhole camera; `orientation` is a camera-to-world quaternion `(w, x, y, z)`.
#[pyclass(name = "Camera", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCamera(CameraPose);

#[pymethods]
impl PyCamera {
    #[new]
    fn new(position: [f64; 3], orientation: [f64; 4], vertical_fov: f64, width: u32, height: u32) -> PyResult<Self> {
        let [w, x, y, z] = orientation;
        let q = Quaternion::new(w, x, y, z);
        if !(q.norm() > 0.0) {
            return Err(PyValueError::new_err("orientation must be a non-zero quaternion"));
        }
        CameraPose::new(vec3(position), UnitQuaternion::from_quaternion(q), vertical_fov, width, height)
            .map(Self)
            .map_err(value_err)
    }

    #[staticmethod]
    #[pyo3(signature = (eye, target, up=[0.0, 0.0, 1.0], vertical_fov=0.8, width=256, height=256))]
    fn look_at(eye: [f64; 3], target: [f64; 3], up: [f64; 3], vertical_fov: f64, width: u32, height: u32) -> PyResult<Self> {
        CameraPose::look_at(vec3(eye), vec3(target), vec3(up), vertical_fov, width, height)
            .map(Self)
            .map_err(value_err)
    }

    #[getter]
    fn position(&self) -> [f64; 3] {
        let p = self.0.position;
        [p.x, p.y, p.z]
    }

    #[getter]
    fn orientation(&self) -> [f64; 4] {
        let q = self.0.orientation;
        [q.w, q.i, q.j, q.k]
    }

    #[getter]
    fn width(&self) -> u32 {
        self.0.width
    }

    #[getter]
    fn height(&self) -> u32 {
        self.0.height
    }
}

/// An 8-bit sRGB RGBA frame.
#[pyclass(name = "Frame", frozen)]
struct PyFrame(FrameImage);

#[pymethods]
impl PyFrame {
    #[staticmethod]
    fn from_png(data: &[u8]) -> PyResult<Self> {
        FrameImage::from_png(data).map(Self).map_err(value_err)
    }

    #[getter]
    fn width(&self) -> u32 {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> u32 {
        self.0.height()
    }

    /// Row-major RGBA8 bytes.
    fn pixels<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, self.0.pixels())
    }

    fn pixel(&self, x: u32, y: u32) -> PyResult<[u8; 4]> {
        if x >= self.0.width() || y >= self.0.height() {
            return Err(PyValueError::new_err("pixel out of range"));
        }
        Ok(self.0.pixel(x, y))
    }

    fn to_png<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyBytes>> {
        let bytes = self.0.to_png().map_err(value_err)?;
        Ok(PyBytes::new(py, &bytes))
    }

    fn save_png(&self, path: PathBuf) -> PyResult<()> {
        let bytes = self.0.to_png().map_err(value_err)?;
        std::fs::write(&path, bytes).map_err(|e| PyOSError::new_err(format!("{}: {e}", path.display())))
    }
}

/// A compiled layered asset.
#[pyclass(name = "Asset", frozen)]
struct PyAsset(Arc<LayeredAsset>);

#[pymethods]
impl PyAsset {
    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        decode_asset(data).map(|a| Self(Arc::new(a))).map_err(value_err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let bytes = std::fs::read(&path).map_err(|e| PyOSError::new_err(format!("{}: {e}", path.display())))?;
        Self::from_bytes(&bytes)
    }

    /// Ingests a manifest and its PLY states and compiles them.
    #[staticmethod]
    fn compile_manifest(py: Python<'_>, manifest: PathBuf) -> PyResult<Self> {
        py.detach(|| {
            let seq = load_state_sequence(&manifest).map_err(|e| e.to_string())?;
            compile(&seq).map_err(|e| e.to_string())
        })
        .map(|a| Self(Arc::new(a)))
        .map_err(PyValueError::new_err)
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &encode_asset(&self.0))
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        std::fs::write(&path, encode_asset(&self.0)).map_err(|e| PyOSError::new_err(format!("{}: {e}", path.display())))
    }

    #[getter]
    fn state_count(&self) -> usize {
        self.0.state_count()
    }

    #[getter]
    fn base_primitives(&self) -> usize {
        self.0.base_layer().len()
    }

    #[getter]
    fn delta_primitives(&self) -> usize {
        self.0.delta_layers().iter().map(Vec::len).sum()
    }

    #[getter]
    fn sh_entries(&self) -> usize {
        self.0.sh_table().len()
    }

    #[getter]
    fn axis(&self) -> [f32; 3] {
        self.0.axis()
    }

    #[getter]
    fn offsets(&self) -> Vec<f32> {
        self.0.offsets().to_vec()
    }

    fn state_len(&self, k: usize) -> PyResult<usize> {
        self.0.state_len(k).map_err(value_err)
    }

    fn select_state(&self, plane: &PyPlane) -> usize {
        select_state(&self.0, &plane.0)
    }

    /// Renders a frame; returns `(frame, state_index)`.
    #[pyo3(signature = (plane, camera, mode="modulated", k_sigma=splatslice_core::DEFAULT_K_SIGMA, background=[0.0, 0.0, 0.0]))]
    fn render(
        &self,
        py: Python<'_>,
        plane: &PyPlane,
        camera: &PyCamera,
        mode: &str,
        k_sigma: f64,
        background: [f64; 3],
    ) -> PyResult<(PyFrame, usize)> {
        let mode: RenderMode = mode.parse().map_err(value_err)?;
        let options = RenderOptions { mode, k_sigma, background };
        let (plane, camera, asset) = (plane.0, camera.0, self.0.clone());
        let (image, k) = py
            .detach(|| core_render::render_linear(&asset, &plane, &camera, &options))
            .map_err(value_err)?;
        Ok((PyFrame(image.to_frame()), k))
    }
}

#[pyfunction]
fn psnr(a: &PyFrame, b: &PyFrame) -> PyResult<f64> {
    metrics::psnr(&a.0, &b.0).map_err(value_err)
}

#[pyfunction]
fn ssim(a: &PyFrame, b: &PyFrame) -> PyResult<f64> {
    metrics::ssim(&a.0, &b.0).map_err(value_err)
}

#[pyfunction]
fn render_modes() -> Vec<&'static str> {
    RenderMode::ALL.iter().map(|m| m.as_str()).collect()
}

/// Writes a synthetic case (manifest plus per-state PLYs) into `out_dir`
/// and returns the manifest path.
#[pyfunction]
#[pyo3(signature = (out_dir, states=8, primitives=1000, shared=0.95, seed=0, sh_degree=1, unique_sh=false))]
#[allow(clippy::too_many_arguments)]
fn synth(
    py: Python<'_>,
    out_dir: PathBuf,
    states: usize,
    primitives: usize,
    shared: f64,
    seed: u64,
    sh_degree: u8,
    unique_sh: bool,
) -> PyResult<PathBuf> {
    let params = SynthParams {
        states,
        primitives,
        shared_fraction: shared,
        seed,
        sh_degree,
        unique_sh,
    };
    py.detach(|| write_case(&params, &out_dir))
        .map(|w| w.manifest_path)
        .map_err(value_err)
}

#[pyfunction]
fn version<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("package", env!("CARGO_PKG_VERSION"))?;
    d.set_item("format", splatslice_core::compiler::VERSION)?;
    Ok(d)
}

#[pymodule]
pub fn splatslice(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPlane>()?;
    m.add_class::<PyCamera>()?;
    m.add_class::<PyFrame>()?;
    m.add_class::<PyAsset>()?;
    m.add_function(wrap_pyfunction!(psnr, m)?)?;
    m.add_function(wrap_pyfunction!(ssim, m)?)?;
    m.add_function(wrap_pyfunction!(render_modes, m)?)?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    m.add_function(wrap_pyfunction!(version, m)?)?;
    m.add("DEFAULT_K_SIGMA", splatslice_core::DEFAULT_K_SIGMA)?;
    Ok(())
}

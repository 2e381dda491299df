use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the slicing math and renderer argument checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SliceError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Error)]
pub enum PlyError {
    #[error("PLY header error at line {line}: {message}")]
    Header { line: usize, message: String },
    #[error("PLY schema error: missing required vertex property `{0}`")]
    MissingProperty(String),
    #[error("PLY schema error: {0}")]
    Schema(String),
    #[error("PLY data error at vertex {vertex}: {message}")]
    Data { vertex: usize, message: String },
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("I/O error reading {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("{}: {source}", path.display())]
    Ply {
        path: PathBuf,
        #[source]
        source: PlyError,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompileError {
    #[error("state {state} contains the same primitive twice (key {key})")]
    DuplicatePrimitive { state: usize, key: String },
    #[error("mixed SH degrees across the sequence: {0} and {1}")]
    MixedShDegree(u8, u8),
    #[error("offsets are not strictly increasing at storage precision (index {0})")]
    OffsetCollision(usize),
    #[error("state index {index} out of range (K = {count})")]
    StateIndex { index: usize, count: usize },
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodecError {
    #[error("format error: {0}")]
    Format(String),
    #[error("length error: expected {expected} bytes, got {actual}")]
    Length { expected: usize, actual: usize },
    #[error("integrity error: stored crc32 {stored:#010x}, computed {computed:#010x}")]
    Integrity { stored: u32, computed: u32 },
    #[error("cannot encode asset: {0}")]
    Unencodable(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenderError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error(transparent)]
    Compile(#[from] CompileError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("png decode: {0}")]
    Decode(#[from] png::DecodingError),
    #[error("png encode: {0}")]
    Encode(#[from] png::EncodingError),
    #[error("unsupported png layout: {0}")]
    Unsupported(String),
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthesis parameters: {0}")]
    InvalidParams(String),
    #[error("I/O error writing {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Ply(#[from] PlyError),
}

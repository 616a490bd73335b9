//! Scalar-field container, map text format, PDB-subset parsing, residue
//! centroids and synthetic map generation.

mod backbone;
mod centroids;
mod format;
mod map;
mod pdb;
mod synth;

pub use backbone::{build_backbone, ideal_pdb, BackboneResidue, SegmentSpec};
pub use centroids::{residue_centroids, CentroidChain, CentroidPoint, CentroidSet, MAX_BOND_DISTANCE};
pub use format::{parse_density_map, write_density_map};
pub use map::DensityMap;
pub use pdb::{parse_pdb_subset, Atom, SsAnnotation, Structure};
pub use synth::{atom_points, synthesize_map, SynthParams};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("map format error at line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("value count mismatch: header declares {expected} values, found {found}")]
    ValueCount { expected: usize, found: usize },
    #[error("negative density {value} at line {line}")]
    NegativeValue { line: usize, value: f64 },
    #[error("invalid map: {0}")]
    Invalid(String),
    #[error("position {0:?} lies outside an aperiodic map")]
    OutOfBounds([f64; 3]),
    #[error("grid spacing {spacing} exceeds resolution/3 = {limit} (undersampled map)")]
    Undersampled { spacing: f64, limit: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("PDB parse error at line {line}: {msg}")]
pub struct PdbError {
    pub line: usize,
    pub msg: String,
}

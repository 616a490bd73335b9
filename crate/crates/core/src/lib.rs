//! Critical-point segmentation of 3D density maps into peak/pass graphs,
//! backbone tracing, and secondary-structure motif classification of the
//! resulting peak chains.

pub mod cpgraph;
pub mod geom;
pub mod mapio;
pub mod ssclass;
pub mod topo;
pub mod trace;
pub mod vec3;

pub use geom::{FeatureVector11, FeatureVector3};
pub use mapio::{DensityMap, Structure};
pub use ssclass::MotifClass;
pub use topo::{CpType, CriticalPoint};

//! Critical points of the density field: candidate search, local model
//! fitting, Newton refinement and Hessian classification.

mod candidates;
mod extract;
mod model;

pub use candidates::{find_candidates, find_cell_candidates};
pub use extract::{extract_critical_points, points_to_json, Extraction, ExtractConfig, RejectionCounts, Seeding};
pub use model::{eval_cubic, fit_cubic, Derivatives, LocalModel, DENSITY_FLOOR, GRADIENT_TOL, MAX_NEWTON_ITERATIONS, TRUST_RADIUS};

use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vec3::Vec3;

/// Relative eigenvalue magnitude below which a critical point is degenerate.
pub const DEGENERACY_RATIO: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopoError {
    #[error("map dimensions {0:?} are below the 5-node fitting window")]
    TooSmall([usize; 3]),
    #[error("fitting window around {0:?} leaves the map")]
    WindowOutside([usize; 3]),
    #[error("centre density {0} below the model floor")]
    LowDensity(f64),
    #[error("Newton refinement did not converge")]
    Diverged,
    #[error("Newton refinement left the trust region")]
    LeftTrustRegion,
    #[error("singular Hessian during refinement")]
    Singular,
    #[error("degenerate critical point, eigenvalues {0:?}")]
    Degenerate([f64; 3]),
}

/// Critical point type by the number of negative Hessian eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CpType {
    Peak,
    Pass,
    Pale,
    Pit,
}

impl CpType {
    pub fn from_negative_count(n: usize) -> Self {
        match n {
            3 => CpType::Peak,
            2 => CpType::Pass,
            1 => CpType::Pale,
            _ => CpType::Pit,
        }
    }

    pub fn negative_count(self) -> usize {
        match self {
            CpType::Peak => 3,
            CpType::Pass => 2,
            CpType::Pale => 1,
            CpType::Pit => 0,
        }
    }
}

impl std::fmt::Display for CpType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CpType::Peak => "peak",
            CpType::Pass => "pass",
            CpType::Pale => "pale",
            CpType::Pit => "pit",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    /// Å.
    pub position: Vec3,
    pub density: f64,
    /// Ascending; Å⁻² density units.
    pub eigenvalues: [f64; 3],
    /// Unit eigenvectors, `eigenvectors[k]` belongs to `eigenvalues[k]`.
    pub eigenvectors: [Vec3; 3],
    #[serde(rename = "type")]
    pub cp_type: CpType,
    pub n_negative: usize,
}

impl CriticalPoint {
    /// Eigenvector of the single positive eigenvalue of a pass.
    pub fn ascent_axis(&self) -> Option<Vec3> {
        (self.cp_type == CpType::Pass).then_some(self.eigenvectors[2])
    }
}

/// Types eigenvalues by sign; rejects any |lambda| < 1e-6 max|lambda|.
pub fn classify_eigenvalues(eigenvalues: [f64; 3]) -> Result<(CpType, usize), TopoError> {
    let scale = eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let eps = DEGENERACY_RATIO * scale;
    if scale == 0.0 || eigenvalues.iter().any(|l| l.abs() < eps || !l.is_finite()) {
        return Err(TopoError::Degenerate(eigenvalues));
    }
    let n = eigenvalues.iter().filter(|&&l| l < -eps).count();
    Ok((CpType::from_negative_count(n), n))
}

/// Eigen-decomposes a symmetric Hessian and classifies the point.
pub fn classify_hessian(position: Vec3, density: f64, hessian: [[f64; 3]; 3]) -> Result<CriticalPoint, TopoError> {
    let m = Matrix3::from_fn(|r, c| hessian[r][c]);
    let eig = SymmetricEigen::new(m);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = [eig.eigenvalues[order[0]], eig.eigenvalues[order[1]], eig.eigenvalues[order[2]]];
    let mut eigenvectors = [[0.0; 3]; 3];
    for (k, &o) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(o);
        eigenvectors[k] = [v[0], v[1], v[2]];
    }
    let (cp_type, n_negative) = classify_eigenvalues(eigenvalues)?;
    Ok(CriticalPoint { position, density, eigenvalues, eigenvectors, cp_type, n_negative })
}

/// Classifies the model's critical point at grid offset `offset`.
pub fn classify_critical_point(
    map: &crate::mapio::DensityMap,
    model: &LocalModel,
    offset: Vec3,
) -> Result<CriticalPoint, TopoError> {
    let d = model.derivatives(offset);
    let s = map.spacing();
    let mut h = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            h[r][c] = model.value_scale * d.hessian[r][c] / (s[r] * s[c]);
        }
    }
    let mut u = [0.0; 3];
    for a in 0..3 {
        u[a] = model.center[a] as f64 + offset[a];
    }
    let position = map.wrap_position(map.grid_to_position(u));
    classify_hessian(position, model.value_scale * d.value, h)
}

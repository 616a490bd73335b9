use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DensityMap, MapError, Structure};
use crate::vec3::Vec3;

/// Parameters of the Gaussian-atom map model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    /// Nominal resolution in Å.
    pub resolution: f64,
    /// Grid step in Å; must not exceed `resolution / 3`.
    pub spacing: f64,
    /// Margin added around the point cloud, in Å.
    pub padding: f64,
    pub periodic: bool,
    /// Gaussian width as a fraction of the resolution.
    pub sigma_factor: f64,
}

impl SynthParams {
    pub fn new(resolution: f64) -> Self {
        Self {
            resolution,
            spacing: resolution / 3.0,
            padding: 2.0 * resolution,
            periodic: false,
            sigma_factor: 1.0 / 3.0,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.resolution * self.sigma_factor
    }
}

/// Atom positions weighted by atomic number (unknown elements count as carbon).
pub fn atom_points(structure: &Structure) -> Vec<(Vec3, f64)> {
    structure
        .atoms
        .iter()
        .map(|a| {
            let z = match a.element.to_ascii_uppercase().as_str() {
                "H" => 1.0,
                "N" => 7.0,
                "O" => 8.0,
                "S" => 16.0,
                "P" => 15.0,
                _ => 6.0,
            };
            (a.position, z)
        })
        .collect()
}

/// Samples `sum_j w_j exp(-|r - r_j|^2 / (2 sigma^2))` on a grid enclosing the points.
///
/// Periodic maps take the padded bounding box as the cell and add the 27
/// nearest images of every point.
pub fn synthesize_map(points: &[(Vec3, f64)], params: &SynthParams) -> Result<DensityMap, MapError> {
    if !(params.resolution > 0.0 && params.resolution.is_finite()) {
        return Err(MapError::Invalid(format!("resolution must be positive, got {}", params.resolution)));
    }
    let limit = params.resolution / 3.0;
    if !(params.spacing > 0.0) {
        return Err(MapError::Invalid(format!("spacing must be positive, got {}", params.spacing)));
    }
    if params.spacing > limit * (1.0 + 1e-12) {
        return Err(MapError::Undersampled { spacing: params.spacing, limit });
    }
    if !(params.sigma_factor > 0.0) || !(params.padding >= 0.0) {
        return Err(MapError::Invalid("sigma factor must be positive and padding non-negative".into()));
    }
    if points.is_empty() {
        return Err(MapError::Invalid("at least one point is required".into()));
    }
    for (p, w) in points {
        if !(w.is_finite() && *w > 0.0) || p.iter().any(|c| !c.is_finite()) {
            return Err(MapError::Invalid(format!("bad point {p:?} with weight {w}")));
        }
    }

    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for (p, _) in points {
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let h = params.spacing;
    let mut dims = [0usize; 3];
    let mut origin = [0.0; 3];
    for a in 0..3 {
        origin[a] = lo[a] - params.padding;
        let extent = hi[a] - lo[a] + 2.0 * params.padding;
        let cells = (extent / h - 1e-9).ceil().max(0.0) as usize;
        dims[a] = if params.periodic { cells.max(5) } else { (cells + 1).max(5) };
    }
    let lattice = params.periodic.then(|| [dims[0] as f64 * h, dims[1] as f64 * h, dims[2] as f64 * h]);

    let sigma = params.sigma();
    let inv = 1.0 / (2.0 * sigma * sigma);
    let shifts: Vec<Vec3> = match lattice {
        Some(l) => {
            let mut s = Vec::with_capacity(27);
            for i in -1..=1 {
                for j in -1..=1 {
                    for k in -1..=1 {
                        s.push([i as f64 * l[0], j as f64 * l[1], k as f64 * l[2]]);
                    }
                }
            }
            s
        }
        None => vec![[0.0; 3]],
    };

    let [nx, ny, nz] = dims;
    let values: Vec<f64> = (0..nz)
        .into_par_iter()
        .flat_map_iter(|k| {
            let shifts = &shifts;
            (0..ny).flat_map(move |j| {
                (0..nx).map(move |i| {
                    let r = [origin[0] + i as f64 * h, origin[1] + j as f64 * h, origin[2] + k as f64 * h];
                    let mut acc = 0.0;
                    for (p, w) in points {
                        let mut d = [r[0] - p[0], r[1] - p[1], r[2] - p[2]];
                        if let Some(l) = lattice {
                            for a in 0..3 {
                                d[a] -= l[a] * (d[a] / l[a]).round();
                            }
                        }
                        for s in shifts {
                            let e = [d[0] + s[0], d[1] + s[1], d[2] + s[2]];
                            acc += w * (-(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]) * inv).exp();
                        }
                    }
                    acc
                })
            })
        })
        .collect();
    DensityMap::new(dims, [h; 3], origin, params.periodic, values)
}

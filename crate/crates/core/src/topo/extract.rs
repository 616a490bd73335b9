use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{classify_critical_point, find_candidates, find_cell_candidates, CpType, CriticalPoint, LocalModel, TopoError, TRUST_RADIUS};
use crate::mapio::DensityMap;
use crate::vec3::{self, Vec3};

/// Re-fits allowed when a refined point lands nearer another node.
const MAX_RECENTER: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Seeding {
    /// Per-axis extremum nodes only.
    AxisExtrema,
    /// Per-axis extrema plus cells bracketing a gradient zero.
    AxisAndCells,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractConfig {
    /// Retained points need density >= mean + k * stddev of the map.
    pub density_floor_k: f64,
    /// Keep all four types with no density floor.
    pub include_all_types: bool,
    pub seeding: Seeding,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self { density_floor_k: 1.0, include_all_types: false, seeding: Seeding::AxisAndCells }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionCounts {
    pub low_density: usize,
    pub diverged: usize,
    pub left_trust_region: usize,
    pub singular: usize,
    pub degenerate: usize,
}

impl RejectionCounts {
    fn record(&mut self, e: &TopoError) {
        match e {
            TopoError::LowDensity(_) => self.low_density += 1,
            TopoError::Diverged => self.diverged += 1,
            TopoError::LeftTrustRegion | TopoError::WindowOutside(_) => self.left_trust_region += 1,
            TopoError::Singular => self.singular += 1,
            TopoError::Degenerate(_) => self.degenerate += 1,
            TopoError::TooSmall(_) => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    /// Ordered by density (descending), then x, y, z.
    pub points: Vec<CriticalPoint>,
    pub seeds: usize,
    pub rejections: RejectionCounts,
    /// Density floor applied (0 when all types are kept).
    pub density_floor: f64,
}

impl Extraction {
    pub fn count(&self, t: CpType) -> usize {
        self.points.iter().filter(|p| p.cp_type == t).count()
    }
}

fn wrap_node(map: &DensityMap, idx: [isize; 3]) -> [usize; 3] {
    let dims = map.dims();
    let mut out = [0usize; 3];
    for a in 0..3 {
        let n = dims[a] as isize;
        out[a] = if map.periodic() { idx[a].rem_euclid(n) } else { idx[a].clamp(0, n - 1) } as usize;
    }
    out
}

/// Carries a window offset from the window at `from` into the one at `to`.
fn shifted(map: &DensityMap, x: Vec3, from: [usize; 3], to: [usize; 3]) -> Vec3 {
    let mut moved = [0.0; 3];
    for a in 0..3 {
        let mut d = to[a] as f64 - from[a] as f64;
        if map.periodic() {
            let n = map.dims()[a] as f64;
            d -= n * (d / n).round();
        }
        moved[a] = x[a] - d;
    }
    moved
}

fn refine_seed(map: &DensityMap, node: [usize; 3], start: Vec3) -> Result<CriticalPoint, TopoError> {
    let mut center = LocalModel::window_center(map, node)?;
    let mut x = [
        node[0] as f64 - center[0] as f64 + start[0],
        node[1] as f64 - center[1] as f64 + start[1],
        node[2] as f64 - center[2] as f64 + start[2],
    ];
    for _ in 0..=MAX_RECENTER {
        let model = LocalModel::fit(map, center)?;
        // an iterate pinned to the trust boundary moves the window after it
        let xr = match model.newton(x) {
            Ok(xr) => xr,
            Err((TopoError::LeftTrustRegion, last)) => {
                if last.iter().all(|v| v.abs() < TRUST_RADIUS - 0.5) {
                    return Err(TopoError::LeftTrustRegion);
                }
                x = last;
                let shift = [last[0].round() as isize, last[1].round() as isize, last[2].round() as isize];
                let target = wrap_node(
                    map,
                    [center[0] as isize + shift[0], center[1] as isize + shift[1], center[2] as isize + shift[2]],
                );
                let next = LocalModel::window_center(map, target)?;
                if next == center {
                    return Err(TopoError::LeftTrustRegion);
                }
                x = shifted(map, x, center, next);
                center = next;
                continue;
            }
            Err((e, _)) => return Err(e),
        };
        let shift = [xr[0].round() as isize, xr[1].round() as isize, xr[2].round() as isize];
        let target = wrap_node(
            map,
            [center[0] as isize + shift[0], center[1] as isize + shift[1], center[2] as isize + shift[2]],
        );
        let next = LocalModel::window_center(map, target)?;
        if next == center || xr.iter().all(|v| v.abs() <= 1.0) {
            return classify_critical_point(map, &model, xr);
        }
        x = shifted(map, xr, center, next);
        center = next;
    }
    // never settled in a window of its own
    Err(TopoError::Diverged)
}

fn order(a: &CriticalPoint, b: &CriticalPoint) -> Ordering {
    b.density
        .total_cmp(&a.density)
        .then(a.position[0].total_cmp(&b.position[0]))
        .then(a.position[1].total_cmp(&b.position[1]))
        .then(a.position[2].total_cmp(&b.position[2]))
}

/// Candidates -> local fit -> Newton refinement -> classification, then
/// de-duplication (half a grid step, one step for same-type points) and
/// type/density filtering.
pub fn extract_critical_points(map: &DensityMap, config: &ExtractConfig) -> Extraction {
    let half = [0.5; 3];
    let mut seeds: Vec<([usize; 3], Vec3)> = find_candidates(map, config.include_all_types)
        .into_iter()
        .map(|n| (n, [0.0; 3]))
        .collect();
    if config.seeding == Seeding::AxisAndCells {
        seeds.extend(find_cell_candidates(map).into_iter().map(|n| (n, half)));
    }
    let results: Vec<Result<CriticalPoint, TopoError>> =
        seeds.par_iter().map(|&(node, start)| refine_seed(map, node, start)).collect();

    let mut rejections = RejectionCounts::default();
    let mut found = Vec::new();
    for r in results {
        match r {
            Ok(cp) => found.push(cp),
            Err(e) => rejections.record(&e),
        }
    }
    found.sort_by(order);

    let lattice = map.lattice();
    let radius = 0.5 * map.min_spacing();
    // the same root reached from neighbouring windows can land a little further apart
    let same_type_radius = map.min_spacing();
    let mut kept: Vec<CriticalPoint> = Vec::new();
    for cp in found {
        let dup = kept.iter().any(|k| {
            let d = vec3::norm(vec3::min_image(k.position, cp.position, lattice));
            d < radius || (k.cp_type == cp.cp_type && d < same_type_radius)
        });
        if !dup {
            kept.push(cp);
        }
    }

    let density_floor = if config.include_all_types {
        0.0
    } else {
        map.mean() + config.density_floor_k * map.std_dev()
    };
    if !config.include_all_types {
        kept.retain(|p| matches!(p.cp_type, CpType::Peak | CpType::Pass) && p.density >= density_floor);
    }
    if kept.is_empty() {
        log::warn!("no critical points survived extraction ({} seeds)", seeds.len());
    }
    Extraction { points: kept, seeds: seeds.len(), rejections, density_floor }
}

/// JSON array of `{position, density, eigenvalues, eigenvectors, type, n_negative}`.
pub fn points_to_json(points: &[CriticalPoint]) -> String {
    serde_json::to_string_pretty(points).expect("finite values serialize")
}

use serde::{Deserialize, Serialize};
use thiserror::Error;

use std::collections::HashMap;

use crate::mapio::DensityMap;
use crate::topo::LocalModel;
use crate::vec3::{self, Vec3};

/// Ascent step as a fraction of the grid spacing.
pub const ASCENT_STEP: f64 = 0.25;
/// A path ends on a known peak once it comes this close (fraction of spacing).
pub const PEAK_SNAP: f64 = 0.5;
/// Wider snap radius used when the ascent stalls on the interpolated field.
pub const STALL_SNAP: f64 = 1.0;
pub const MAX_ASCENT_STEPS: usize = 10_000;
pub const STATIONARY_GRADIENT: f64 = 1e-8;

const MIN_STEP_RATIO: f64 = 1e-4;
const CYCLE_MEMORY: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("ascent direction has zero length")]
    ZeroDirection,
    #[error("gradient ascent did not terminate within {0} steps")]
    Diverged(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathEnd {
    /// Reached the peak with this index in the supplied peak list.
    Peak(usize),
    /// Stopped on a flat spot away from every known peak.
    Stationary,
    /// Left an aperiodic map.
    Boundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientPath {
    /// Unwrapped polyline; on periodic maps it may run outside the primary cell.
    pub points: Vec<Vec3>,
    pub end: PathEnd,
}

impl GradientPath {
    pub fn peak(&self) -> Option<usize> {
        match self.end {
            PathEnd::Peak(k) => Some(k),
            _ => None,
        }
    }

    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| vec3::dist(w[0], w[1])).sum()
    }
}

/// Density field seen by the ascent: the local cubic models that place the
/// critical points, blended across neighbouring windows with smoothstep
/// weights so the field and its gradient have no seams. Falls back to cubic convolution where
/// a model cannot be fitted.
struct AscentField<'a> {
    map: &'a DensityMap,
    models: HashMap<[usize; 3], Option<LocalModel>>,
}

impl<'a> AscentField<'a> {
    fn new(map: &'a DensityMap) -> Self {
        AscentField { map, models: HashMap::new() }
    }

    fn model(&mut self, node: [isize; 3]) -> Option<&LocalModel> {
        let dims = self.map.dims();
        let mut idx = [0usize; 3];
        for a in 0..3 {
            let n = dims[a] as isize;
            idx[a] = if self.map.periodic() { node[a].rem_euclid(n) as usize } else { node[a].clamp(0, n - 1) as usize };
        }
        let center = LocalModel::window_center(self.map, idx).ok()?;
        let map = self.map;
        self.models.entry(center).or_insert_with(|| LocalModel::fit(map, center).ok()).as_ref()
    }

    /// Density and Cartesian gradient at `x`.
    fn eval(&mut self, x: Vec3) -> Option<(f64, Vec3)> {
        if !self.map.contains(x) {
            return None;
        }
        let u = self.map.grid_coords(x);
        let dims = self.map.dims();
        let periodic = self.map.periodic();
        let spacing = self.map.spacing();
        let base = [u[0].floor(), u[1].floor(), u[2].floor()];
        let t = [u[0] - base[0], u[1] - base[1], u[2] - base[2]];
        let mut value = 0.0;
        let mut grad = [0.0; 3];
        for corner in 0..8 {
            let bit = [corner & 1, (corner >> 1) & 1, (corner >> 2) & 1];
            let mut w = [0.0; 3];
            let mut dw = [0.0; 3];
            let mut node = [0isize; 3];
            for a in 0..3 {
                node[a] = base[a] as isize + bit[a] as isize;
                let ta = t[a];
                let up = ta * ta * (3.0 - 2.0 * ta);
                let dup = 6.0 * ta * (1.0 - ta);
                w[a] = if bit[a] == 1 { up } else { 1.0 - up };
                dw[a] = if bit[a] == 1 { dup } else { -dup };
            }
            let weight = w[0] * w[1] * w[2];
            let Some(model) = self.model(node) else {
                return self.map.sample_cubic(x).ok();
            };
            let mut off = [0.0; 3];
            for a in 0..3 {
                off[a] = u[a] - model.center[a] as f64;
                if periodic {
                    let n = dims[a] as f64;
                    off[a] -= n * (off[a] / n).round();
                }
            }
            let d = model.derivatives(off);
            let scale = model.value_scale;
            value += weight * scale * d.value;
            for a in 0..3 {
                let mut dweight = dw[a];
                for b in 0..3 {
                    if b != a {
                        dweight *= w[b];
                    }
                }
                grad[a] += (weight * d.gradient[a] + dweight * d.value) * scale;
            }
        }
        for a in 0..3 {
            grad[a] /= spacing[a];
        }
        Some((value, grad))
    }
}

/// Nearest peak to `x` as (index, distance, image of the peak next to `x`).
fn nearest_peak(x: Vec3, peaks: &[Vec3], lattice: Option<Vec3>) -> Option<(usize, f64, Vec3)> {
    let mut best: Option<(usize, f64, Vec3)> = None;
    for (k, &p) in peaks.iter().enumerate() {
        let d = vec3::min_image(p, x, lattice);
        let n = vec3::norm(d);
        if best.is_none_or(|b| n < b.1) {
            best = Some((k, n, vec3::add(x, d)));
        }
    }
    best
}

/// Steepest ascent on the local density models from `start`, first stepping along
/// `direction`. Ends on the closest of `peaks` once within snapping range.
pub fn trace_gradient_path(
    map: &DensityMap,
    start: Vec3,
    direction: Vec3,
    peaks: &[Vec3],
) -> Result<GradientPath, PathError> {
    trace_with_offset(map, start, direction, peaks, 1.0)
}

/// As [`trace_gradient_path`], with the first step scaled by `offset`.
pub fn trace_with_offset(
    map: &DensityMap,
    start: Vec3,
    direction: Vec3,
    peaks: &[Vec3],
    offset: f64,
) -> Result<GradientPath, PathError> {
    let h = ASCENT_STEP * map.min_spacing();
    let snap = PEAK_SNAP * map.min_spacing();
    let stall_snap = STALL_SNAP * map.min_spacing();
    let lattice = map.lattice();

    let mut points = vec![start];
    let finish = |mut points: Vec<Vec3>, k: usize, image: Vec3| {
        if vec3::dist(*points.last().expect("non-empty"), image) > 0.0 {
            points.push(image);
        }
        Ok(GradientPath { points, end: PathEnd::Peak(k) })
    };

    if let Some((k, d, image)) = nearest_peak(start, peaks, lattice) {
        if d < 1e-12 {
            return finish(points, k, image);
        }
    }
    let dir = vec3::normalize(direction).ok_or(PathError::ZeroDirection)?;
    let mut x = vec3::add(start, vec3::scale(dir, h * offset));
    if !map.contains(x) {
        return Ok(GradientPath { points, end: PathEnd::Boundary });
    }
    let mut field = AscentField::new(map);
    points.push(x);

    let mut step = h;
    let mut prev_unit: Option<Vec3> = None;
    for _ in 0..MAX_ASCENT_STEPS {
        if let Some((k, d, image)) = nearest_peak(x, peaks, lattice) {
            if d < snap {
                return finish(points, k, image);
            }
        }
        let Some((rho, grad)) = field.eval(x) else {
            return Ok(GradientPath { points, end: PathEnd::Boundary });
        };
        let g = vec3::norm(grad);
        let mut advanced = false;
        if g >= STATIONARY_GRADIENT {
            let unit = vec3::scale(grad, 1.0 / g);
            // a reversing gradient means the last step crossed a crest
            let turn = prev_unit.map_or(1.0, |p| vec3::dot(p, unit));
            if turn < 0.0 {
                step *= 0.5;
            }
            prev_unit = Some(unit);
            while step >= h * MIN_STEP_RATIO {
                let next = vec3::add(x, vec3::scale(unit, step));
                let Some((r, _)) = field.eval(next) else {
                    return Ok(GradientPath { points, end: PathEnd::Boundary });
                };
                // neighbouring windows can disagree on a flat ridge top and
                // bounce the iterate between them
                let recent = &points[points.len().saturating_sub(CYCLE_MEMORY)..points.len() - 1];
                let revisit = recent.iter().any(|&q| vec3::dist(q, next) < 1e-6 * h);
                if revisit {
                    break;
                }
                if r > rho {
                    x = next;
                    points.push(x);
                    advanced = true;
                    if turn > 0.9 {
                        step = (2.0 * step).min(h);
                    }
                    break;
                }
                step *= 0.5;
            }
        }
        if !advanced {
            if let Some((k, d, image)) = nearest_peak(x, peaks, lattice) {
                if d < stall_snap {
                    return finish(points, k, image);
                }
            }
            return Ok(GradientPath { points, end: PathEnd::Stationary });
        }
    }
    Err(PathError::Diverged(MAX_ASCENT_STEPS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapio::{synthesize_map, SynthParams};

    fn blob_map(centers: &[Vec3], periodic: bool) -> DensityMap {
        let mut p = SynthParams::new(3.0);
        p.spacing = 0.5;
        p.padding = 6.0;
        p.periodic = periodic;
        let pts: Vec<(Vec3, f64)> = centers.iter().map(|c| (*c, 1.0)).collect();
        synthesize_map(&pts, &p).unwrap()
    }

    #[test]
    fn start_on_peak_is_zero_length() {
        let m = blob_map(&[[0.0; 3]], false);
        let path = trace_gradient_path(&m, [0.0; 3], [1.0, 0.0, 0.0], &[[0.0; 3]]).unwrap();
        assert_eq!(path.end, PathEnd::Peak(0));
        assert_eq!(path.length(), 0.0);
    }

    #[test]
    fn ascends_to_single_peak_from_any_direction() {
        let m = blob_map(&[[0.0; 3]], false);
        let sigma = 1.0;
        for dir in [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [1.0, 1.0, 1.0], [-1.0, 0.2, 0.5]] {
            let start = [2.0 * sigma, 0.3, -0.4];
            let path = trace_gradient_path(&m, start, dir, &[[0.0; 3]]).unwrap();
            assert_eq!(path.end, PathEnd::Peak(0));
            assert_eq!(*path.points.last().unwrap(), [0.0; 3]);
            // the first step is forced along `dir`; ascent starts after it
            for w in path.points[1..path.points.len() - 1].windows(2) {
                assert!(m.sample_cubic(w[1]).unwrap().0 >= m.sample_cubic(w[0]).unwrap().0 - 1e-9);
            }
        }
    }

    #[test]
    fn leaves_aperiodic_map_at_boundary() {
        let m = blob_map(&[[0.0; 3]], false);
        let u = m.grid_to_position([0.1, 0.1, 0.1]);
        // the first step already leaves the grid
        let path = trace_gradient_path(&m, u, [-1.0, -1.0, -1.0], &[]).unwrap();
        assert_eq!(path.end, PathEnd::Boundary);
        let inward = trace_gradient_path(&m, u, [1.0, 1.0, 1.0], &[]).unwrap();
        assert_eq!(inward.end, PathEnd::Stationary);
    }

    #[test]
    fn periodic_path_uses_nearest_image() {
        let m = blob_map(&[[0.0; 3]], true);
        let cell = m.lattice().unwrap();
        let far = vec3::add([0.0; 3], [cell[0], 0.0, 0.0]);
        let path = trace_gradient_path(&m, [1.5, 0.2, 0.0], [1.0, 0.0, 0.0], &[far]).unwrap();
        assert_eq!(path.end, PathEnd::Peak(0));
        assert!(vec3::norm(*path.points.last().unwrap()) < 1e-12);
    }

    #[test]
    fn zero_direction_is_an_error() {
        let m = blob_map(&[[0.0; 3]], false);
        assert_eq!(trace_gradient_path(&m, [1.0, 0.0, 0.0], [0.0; 3], &[]), Err(PathError::ZeroDirection));
    }
}

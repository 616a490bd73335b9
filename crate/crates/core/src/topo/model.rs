//! Local tricubic model of the density around a grid node.
//!
//! The 5x5x5 window is fitted by least squares in the tensor-product space
//! of 1D cubics. Because the design matrix is a Kronecker product, the fit
//! is the 1D cubic least-squares operator applied along x, then y, then z.
//! Coordinates are offsets from the window centre in grid steps; the model
//! describes `rho / rho0` with `rho0` the density at the centre node.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::TopoError;
use crate::mapio::DensityMap;
use crate::vec3::Vec3;

/// Centre values below this are treated as empty space.
pub const DENSITY_FLOOR: f64 = 1e-12;
/// Newton convergence threshold on |grad| in model units.
pub const GRADIENT_TOL: f64 = 1e-8;
/// Newton iterates must stay within this many grid steps (per axis) of the centre.
pub const TRUST_RADIUS: f64 = 1.5;
pub const MAX_NEWTON_ITERATIONS: usize = 25;

/// Cubic least-squares weights on samples at t = -2..=2; row k gives the t^k coefficient.
const LSQ: [[f64; 5]; 4] = [
    [-6.0 / 70.0, 24.0 / 70.0, 34.0 / 70.0, 24.0 / 70.0, -6.0 / 70.0],
    [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0],
    [2.0 / 14.0, -1.0 / 14.0, -2.0 / 14.0, -1.0 / 14.0, 2.0 / 14.0],
    [-1.0 / 12.0, 2.0 / 12.0, 0.0, -2.0 / 12.0, 1.0 / 12.0],
];

/// Least-squares cubic through five equally spaced samples at t = -2..=2.
pub fn fit_cubic(samples: [f64; 5]) -> [f64; 4] {
    let mut c = [0.0; 4];
    for (k, row) in LSQ.iter().enumerate() {
        c[k] = row.iter().zip(samples.iter()).map(|(w, v)| w * v).sum();
    }
    c
}

pub fn eval_cubic(c: &[f64; 4], t: f64) -> f64 {
    ((c[3] * t + c[2]) * t + c[1]) * t + c[0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalModel {
    /// Window centre node.
    pub center: [usize; 3],
    /// On-axis cubic fits through the centre (raw density units), one per axis.
    pub axis_polynomials: [[f64; 4]; 3],
    /// Density at the centre node.
    pub value_scale: f64,
    /// `coeffs[a][b][c]` multiplies x^a y^b z^c.
    coeffs: [[[f64; 4]; 4]; 4],
}

/// Value, gradient and Hessian of the model at one offset.
#[derive(Debug, Clone, Copy)]
pub struct Derivatives {
    pub value: f64,
    pub gradient: Vec3,
    pub hessian: [[f64; 3]; 3],
}

fn powers(t: f64) -> ([f64; 4], [f64; 4], [f64; 4]) {
    let p = [1.0, t, t * t, t * t * t];
    let d = [0.0, 1.0, 2.0 * t, 3.0 * t * t];
    let dd = [0.0, 0.0, 2.0, 6.0 * t];
    (p, d, dd)
}

impl LocalModel {
    /// Window centre for node `idx`: the node itself on periodic maps, or
    /// shifted inward so the window fits an aperiodic grid.
    pub fn window_center(map: &DensityMap, idx: [usize; 3]) -> Result<[usize; 3], TopoError> {
        let dims = map.dims();
        let mut c = idx;
        for a in 0..3 {
            if dims[a] < 5 {
                return Err(TopoError::TooSmall(dims));
            }
            if !map.periodic() {
                c[a] = idx[a].clamp(2, dims[a] - 3);
            }
        }
        Ok(c)
    }

    /// Fits the model on the 5x5x5 window centred at `center` (see [`Self::window_center`]).
    pub fn fit(map: &DensityMap, center: [usize; 3]) -> Result<Self, TopoError> {
        let dims = map.dims();
        if dims.iter().any(|&d| d < 5) {
            return Err(TopoError::TooSmall(dims));
        }
        let c = [center[0] as isize, center[1] as isize, center[2] as isize];
        let at = |i: isize, j: isize, k: isize| -> Result<f64, TopoError> {
            map.get_signed([c[0] + i, c[1] + j, c[2] + k]).ok_or(TopoError::WindowOutside(center))
        };
        let rho0 = at(0, 0, 0)?;
        if rho0 <= DENSITY_FLOOR {
            return Err(TopoError::LowDensity(rho0));
        }
        let mut window = [[[0.0; 5]; 5]; 5];
        for (k, plane) in window.iter_mut().enumerate() {
            for (j, row) in plane.iter_mut().enumerate() {
                for (i, v) in row.iter_mut().enumerate() {
                    *v = at(i as isize - 2, j as isize - 2, k as isize - 2)? / rho0;
                }
            }
        }
        let mut axis_polynomials = [[0.0; 4]; 3];
        for (a, poly) in axis_polynomials.iter_mut().enumerate() {
            let mut s = [0.0; 5];
            for (t, v) in s.iter_mut().enumerate() {
                let mut off = [0isize; 3];
                off[a] = t as isize - 2;
                *v = at(off[0], off[1], off[2])?;
            }
            *poly = fit_cubic(s);
        }
        // x pass: [k][j][i] -> [k][j][a]
        let mut sx = [[[0.0; 4]; 5]; 5];
        for k in 0..5 {
            for j in 0..5 {
                sx[k][j] = fit_cubic(window[k][j]);
            }
        }
        // y pass: -> [k][b][a]
        let mut sy = [[[0.0; 4]; 4]; 5];
        for k in 0..5 {
            for a in 0..4 {
                let col = fit_cubic([sx[k][0][a], sx[k][1][a], sx[k][2][a], sx[k][3][a], sx[k][4][a]]);
                for b in 0..4 {
                    sy[k][b][a] = col[b];
                }
            }
        }
        // z pass: -> coeffs[a][b][c]
        let mut coeffs = [[[0.0; 4]; 4]; 4];
        for b in 0..4 {
            for a in 0..4 {
                let col = fit_cubic([sy[0][b][a], sy[1][b][a], sy[2][b][a], sy[3][b][a], sy[4][b][a]]);
                for cc in 0..4 {
                    coeffs[a][b][cc] = col[cc];
                }
            }
        }
        Ok(Self { center, axis_polynomials, value_scale: rho0, coeffs })
    }

    /// Model value, gradient and Hessian at offset `x` (grid steps), in model units.
    pub fn derivatives(&self, x: Vec3) -> Derivatives {
        let (px, dx, ddx) = powers(x[0]);
        let (py, dy, ddy) = powers(x[1]);
        let (pz, dz, ddz) = powers(x[2]);
        let mut v = 0.0;
        let mut g = [0.0; 3];
        let mut h = [[0.0; 3]; 3];
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    let k = self.coeffs[a][b][c];
                    if k == 0.0 {
                        continue;
                    }
                    v += k * px[a] * py[b] * pz[c];
                    g[0] += k * dx[a] * py[b] * pz[c];
                    g[1] += k * px[a] * dy[b] * pz[c];
                    g[2] += k * px[a] * py[b] * dz[c];
                    h[0][0] += k * ddx[a] * py[b] * pz[c];
                    h[1][1] += k * px[a] * ddy[b] * pz[c];
                    h[2][2] += k * px[a] * py[b] * ddz[c];
                    h[0][1] += k * dx[a] * dy[b] * pz[c];
                    h[0][2] += k * dx[a] * py[b] * dz[c];
                    h[1][2] += k * px[a] * dy[b] * dz[c];
                }
            }
        }
        h[1][0] = h[0][1];
        h[2][0] = h[0][2];
        h[2][1] = h[1][2];
        Derivatives { value: v, gradient: g, hessian: h }
    }

    /// Density (raw units) predicted at offset `x`.
    pub fn density(&self, x: Vec3) -> f64 {
        self.value_scale * self.derivatives(x).value
    }

    /// Newton iteration on grad = 0 from `start`.
    ///
    /// Steps that would leave the trust region are halved until the iterate
    /// stays inside; a point that cannot converge inside it is rejected.
    pub fn refine(&self, start: Vec3) -> Result<Vec3, TopoError> {
        self.newton(start).map_err(|(e, _)| e)
    }

    /// Newton iteration as in [`refine`](Self::refine); failures also carry
    /// the last iterate.
    pub fn newton(&self, start: Vec3) -> Result<Vec3, (TopoError, Vec3)> {
        let inside = |p: &Vec3| p.iter().all(|c| c.abs() <= TRUST_RADIUS);
        if !inside(&start) {
            return Err((TopoError::LeftTrustRegion, start));
        }
        let mut x = start;
        let mut pinned = false;
        for _ in 0..=MAX_NEWTON_ITERATIONS {
            let d = self.derivatives(x);
            let g = Vector3::from(d.gradient);
            if g.norm() < GRADIENT_TOL {
                return Ok(x);
            }
            let h = Matrix3::from_fn(|r, c| d.hessian[r][c]);
            let step = h.lu().solve(&g).ok_or((TopoError::Singular, x))?;
            if !step.iter().all(|s| s.is_finite()) {
                return Err((TopoError::Singular, x));
            }
            let mut scale = 1.0;
            pinned = false;
            let mut next = [x[0] - step[0], x[1] - step[1], x[2] - step[2]];
            while !inside(&next) {
                scale *= 0.5;
                pinned = true;
                if scale < 1e-6 {
                    return Err((TopoError::LeftTrustRegion, x));
                }
                next = [x[0] - scale * step[0], x[1] - scale * step[1], x[2] - scale * step[2]];
            }
            x = next;
        }
        Err((if pinned { TopoError::LeftTrustRegion } else { TopoError::Diverged }, x))
    }
}

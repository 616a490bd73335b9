use super::MapError;
use crate::vec3::Vec3;

/// Dense 3D grid of non-negative densities, indexed x-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMap {
    dims: [usize; 3],
    spacing: Vec3,
    origin: Vec3,
    periodic: bool,
    values: Vec<f64>,
}

impl DensityMap {
    pub fn new(
        dims: [usize; 3],
        spacing: Vec3,
        origin: Vec3,
        periodic: bool,
        values: Vec<f64>,
    ) -> Result<Self, MapError> {
        if dims.contains(&0) {
            return Err(MapError::Invalid(format!("dimensions must be positive, got {dims:?}")));
        }
        if spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(MapError::Invalid(format!("spacing must be positive, got {spacing:?}")));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(MapError::Invalid(format!("origin must be finite, got {origin:?}")));
        }
        let expected = dims[0] * dims[1] * dims[2];
        if values.len() != expected {
            return Err(MapError::ValueCount { expected, found: values.len() });
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(MapError::Invalid(format!("density values must be finite and non-negative, found {v}")));
        }
        Ok(Self { dims, spacing, origin, periodic, values })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> Vec3 {
        self.spacing
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Smallest grid step over the three axes.
    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Cell edge lengths for periodic maps.
    pub fn lattice(&self) -> Option<Vec3> {
        self.periodic.then(|| {
            [
                self.dims[0] as f64 * self.spacing[0],
                self.dims[1] as f64 * self.spacing[1],
                self.dims[2] as f64 * self.spacing[2],
            ]
        })
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.index(i, j, k)]
    }

    /// Value at a possibly out-of-range index; wraps on periodic maps and
    /// returns `None` outside an aperiodic one.
    pub fn get_signed(&self, idx: [isize; 3]) -> Option<f64> {
        let mut w = [0usize; 3];
        for a in 0..3 {
            let n = self.dims[a] as isize;
            let v = if self.periodic {
                idx[a].rem_euclid(n)
            } else if (0..n).contains(&idx[a]) {
                idx[a]
            } else {
                return None;
            };
            w[a] = v as usize;
        }
        Some(self.get(w[0], w[1], w[2]))
    }

    pub fn node_position(&self, idx: [usize; 3]) -> Vec3 {
        [
            self.origin[0] + idx[0] as f64 * self.spacing[0],
            self.origin[1] + idx[1] as f64 * self.spacing[1],
            self.origin[2] + idx[2] as f64 * self.spacing[2],
        ]
    }

    /// Continuous grid coordinates of a Cartesian position. Coordinates
    /// within 1e-9 of a node are snapped onto it.
    pub fn grid_coords(&self, p: Vec3) -> Vec3 {
        let mut u = [0.0; 3];
        for a in 0..3 {
            u[a] = (p[a] - self.origin[a]) / self.spacing[a];
            let r = u[a].round();
            if (u[a] - r).abs() < 1e-9 {
                u[a] = r;
            }
        }
        u
    }

    pub fn grid_to_position(&self, u: Vec3) -> Vec3 {
        [
            self.origin[0] + u[0] * self.spacing[0],
            self.origin[1] + u[1] * self.spacing[1],
            self.origin[2] + u[2] * self.spacing[2],
        ]
    }

    /// Maps a position back into the primary cell of a periodic map.
    pub fn wrap_position(&self, p: Vec3) -> Vec3 {
        match self.lattice() {
            Some(l) => {
                let mut q = p;
                for a in 0..3 {
                    q[a] = self.origin[a] + (p[a] - self.origin[a]).rem_euclid(l[a]);
                }
                q
            }
            None => p,
        }
    }

    pub fn contains(&self, p: Vec3) -> bool {
        if self.periodic {
            return p.iter().all(|c| c.is_finite());
        }
        let u = self.grid_coords(p);
        (0..3).all(|a| u[a] >= -1e-9 && u[a] <= (self.dims[a] - 1) as f64 + 1e-9)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Population standard deviation of the grid values.
    pub fn std_dev(&self) -> f64 {
        let m = self.mean();
        let var = self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / self.values.len() as f64;
        var.sqrt()
    }

    fn interpolate_grid(&self, u: Vec3) -> f64 {
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        let mut t = [0.0; 3];
        for a in 0..3 {
            let n = self.dims[a];
            if self.periodic {
                let w = u[a].rem_euclid(n as f64);
                let f = w.floor();
                lo[a] = (f as usize) % n;
                hi[a] = (lo[a] + 1) % n;
                t[a] = w - f;
            } else if n == 1 {
                lo[a] = 0;
                hi[a] = 0;
                t[a] = 0.0;
            } else {
                let c = u[a].clamp(0.0, (n - 1) as f64);
                let f = c.floor().min((n - 2) as f64);
                lo[a] = f as usize;
                hi[a] = lo[a] + 1;
                t[a] = c - f;
            }
        }
        let mut acc = 0.0;
        for (dk, wk) in [(lo[2], 1.0 - t[2]), (hi[2], t[2])] {
            for (dj, wj) in [(lo[1], 1.0 - t[1]), (hi[1], t[1])] {
                for (di, wi) in [(lo[0], 1.0 - t[0]), (hi[0], t[0])] {
                    let w = wi * wj * wk;
                    if w != 0.0 {
                        acc += w * self.get(di, dj, dk);
                    }
                }
            }
        }
        acc
    }

    /// Trilinear value at `p`; no bounds check.
    pub fn value_at(&self, p: Vec3) -> f64 {
        self.interpolate_grid(self.grid_coords(p))
    }

    /// Cubic-convolution (Catmull-Rom) density and its analytic gradient at
    /// `p`. Unlike the trilinear field this is C1, so ascent does not stall on
    /// cell faces. Aperiodic edges repeat the border node.
    pub fn sample_cubic(&self, p: Vec3) -> Result<(f64, Vec3), MapError> {
        if !self.contains(p) {
            return Err(MapError::OutOfBounds(p));
        }
        let u = self.grid_coords(p);
        let mut idx = [[0usize; 4]; 3];
        let mut w = [[0.0; 4]; 3];
        let mut dw = [[0.0; 4]; 3];
        for a in 0..3 {
            let n = self.dims[a] as isize;
            let f = u[a].floor();
            let t = u[a] - f;
            let base = f as isize;
            for k in 0..4 {
                let i = base - 1 + k as isize;
                idx[a][k] = if self.periodic { i.rem_euclid(n) as usize } else { i.clamp(0, n - 1) as usize };
            }
            let (t2, t3) = (t * t, t * t * t);
            w[a] = [
                0.5 * (-t3 + 2.0 * t2 - t),
                0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
                0.5 * (-3.0 * t3 + 4.0 * t2 + t),
                0.5 * (t3 - t2),
            ];
            dw[a] = [
                0.5 * (-3.0 * t2 + 4.0 * t - 1.0),
                0.5 * (9.0 * t2 - 10.0 * t),
                0.5 * (-9.0 * t2 + 8.0 * t + 1.0),
                0.5 * (3.0 * t2 - 2.0 * t),
            ];
        }
        let mut value = 0.0;
        let mut grad = [0.0; 3];
        for (kz, &iz) in idx[2].iter().enumerate() {
            for (ky, &iy) in idx[1].iter().enumerate() {
                for (kx, &ix) in idx[0].iter().enumerate() {
                    let v = self.get(ix, iy, iz);
                    value += w[0][kx] * w[1][ky] * w[2][kz] * v;
                    grad[0] += dw[0][kx] * w[1][ky] * w[2][kz] * v;
                    grad[1] += w[0][kx] * dw[1][ky] * w[2][kz] * v;
                    grad[2] += w[0][kx] * w[1][ky] * dw[2][kz] * v;
                }
            }
        }
        for a in 0..3 {
            grad[a] /= self.spacing[a];
        }
        Ok((value, grad))
    }

    /// Trilinear density and its central-difference gradient (step = spacing/4) at `p`.
    ///
    /// Near the faces of an aperiodic map the difference stencil is clamped
    /// to the grid, giving a one-sided estimate.
    pub fn sample(&self, p: Vec3) -> Result<(f64, Vec3), MapError> {
        if !self.contains(p) {
            return Err(MapError::OutOfBounds(p));
        }
        let u = self.grid_coords(p);
        let value = self.interpolate_grid(u);
        let mut grad = [0.0; 3];
        for a in 0..3 {
            let mut up = u;
            let mut dn = u;
            up[a] += 0.25;
            dn[a] -= 0.25;
            if !self.periodic {
                let top = (self.dims[a] - 1) as f64;
                up[a] = up[a].clamp(0.0, top);
                dn[a] = dn[a].clamp(0.0, top);
            }
            let du = up[a] - dn[a];
            if du > 0.0 {
                grad[a] = (self.interpolate_grid(up) - self.interpolate_grid(dn)) / (du * self.spacing[a]);
            }
        }
        Ok((value, grad))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_sample_interpolates_nodes_and_ramps() {
        let m = ramp(6, 0.5, false);
        let (v, g) = m.sample_cubic([1.0, 0.5, 2.0]).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        assert!((g[0] - 2.0).abs() < 1e-12 && g[1].abs() < 1e-12);
        let (v, g) = m.sample_cubic([1.3, 0.7, 0.2]).unwrap();
        assert!((v - 2.6).abs() < 1e-12);
        assert!((g[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cubic_gradient_matches_finite_difference() {
        let mut v = Vec::new();
        for k in 0..6 {
            for j in 0..6 {
                for i in 0..6 {
                    v.push(((i * 7 + j * 3 + k * 5) % 11) as f64);
                }
            }
        }
        let m = DensityMap::new([6; 3], [0.7; 3], [0.0; 3], true, v).unwrap();
        let p = [1.234, 2.71, 0.4];
        let (_, g) = m.sample_cubic(p).unwrap();
        for a in 0..3 {
            let mut up = p;
            let mut dn = p;
            up[a] += 1e-6;
            dn[a] -= 1e-6;
            let fd = (m.sample_cubic(up).unwrap().0 - m.sample_cubic(dn).unwrap().0) / 2e-6;
            assert!((fd - g[a]).abs() < 1e-5);
        }
    }

    fn ramp(n: usize, spacing: f64, periodic: bool) -> DensityMap {
        let mut v = Vec::new();
        for _k in 0..n {
            for _j in 0..n {
                for i in 0..n {
                    v.push(i as f64);
                }
            }
        }
        DensityMap::new([n; 3], [spacing; 3], [0.0; 3], periodic, v).unwrap()
    }

    #[test]
    fn node_values_are_reproduced() {
        let m = ramp(5, 0.7, false);
        let (v, _) = m.sample(m.node_position([3, 1, 2])).unwrap();
        assert_eq!(v, 3.0);
    }

    #[test]
    fn midpoint_is_average() {
        let m = ramp(5, 1.0, false);
        let (v, _) = m.sample([1.5, 2.0, 2.0]).unwrap();
        assert!((v - 1.5).abs() < 1e-15);
    }

    #[test]
    fn ramp_gradient_at_center() {
        let m = ramp(5, 0.5, false);
        let (_, g) = m.sample(m.node_position([2, 2, 2])).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-9);
        assert!(g[1].abs() < 1e-9 && g[2].abs() < 1e-9);
    }

    #[test]
    fn outside_aperiodic_is_error() {
        let m = ramp(5, 1.0, false);
        assert!(matches!(m.sample([5.0, 1.0, 1.0]), Err(MapError::OutOfBounds(_))));
        assert!(m.sample([4.0, 4.0, 4.0]).is_ok());
    }

    #[test]
    fn periodic_sampling_wraps() {
        let m = ramp(6, 1.0, true);
        let a = m.sample([0.3, 1.2, 2.9]).unwrap();
        let b = m.sample([6.3, -4.8, 8.9]).unwrap();
        assert!((a.0 - b.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_negative_values() {
        let r = DensityMap::new([1, 1, 2], [1.0; 3], [0.0; 3], false, vec![0.0, -1.0]);
        assert!(r.is_err());
    }
}

use crate::mapio::DensityMap;

fn axis_extremum(prev: f64, v: f64, next: f64) -> Option<bool> {
    if v > prev && v > next {
        Some(true)
    } else if v < prev && v < next {
        Some(false)
    } else {
        None
    }
}

fn neighbours_along(map: &DensityMap, idx: [usize; 3], axis: usize) -> Option<(f64, f64)> {
    let mut lo = [idx[0] as isize, idx[1] as isize, idx[2] as isize];
    let mut hi = lo;
    lo[axis] -= 1;
    hi[axis] += 1;
    Some((map.get_signed(lo)?, map.get_signed(hi)?))
}

/// Nodes that are a strict maximum or minimum along each grid axis
/// (independently per axis). Nodes that are minima along all three axes are
/// dropped unless `include_minima` is set. Aperiodic maps test interior nodes only.
pub fn find_candidates(map: &DensityMap, include_minima: bool) -> Vec<[usize; 3]> {
    let [nx, ny, nz] = map.dims();
    let mut out = Vec::new();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let idx = [i, j, k];
                let v = map.get(i, j, k);
                let mut maxima = 0;
                let mut ok = true;
                for axis in 0..3 {
                    match neighbours_along(map, idx, axis).and_then(|(a, b)| axis_extremum(a, v, b)) {
                        Some(true) => maxima += 1,
                        Some(false) => {}
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok && (include_minima || maxima > 0) {
                    out.push(idx);
                }
            }
        }
    }
    out
}

/// Lower corners of grid cells in which every component of the
/// central-difference gradient changes sign strictly between corners.
///
/// Such a cell brackets a zero of the gradient whatever the orientation of
/// the Hessian, which the per-axis extremum test can miss.
pub fn find_cell_candidates(map: &DensityMap) -> Vec<[usize; 3]> {
    let dims = map.dims();
    let [nx, ny, nz] = dims;
    let n = nx * ny * nz;
    // sign bits per node: bit 2a set for positive, bit 2a+1 for negative component a
    let mut signs = vec![0u8; n];
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let idx = [i as isize, j as isize, k as isize];
                let mut bits = 0u8;
                for a in 0..3 {
                    let mut lo = idx;
                    let mut hi = idx;
                    lo[a] -= 1;
                    hi[a] += 1;
                    let g = match (map.get_signed(lo), map.get_signed(hi)) {
                        (Some(l), Some(h)) => h - l,
                        _ => 0.0,
                    };
                    if g > 0.0 {
                        bits |= 1 << (2 * a);
                    } else if g < 0.0 {
                        bits |= 1 << (2 * a + 1);
                    }
                }
                signs[map.index(i, j, k)] = bits;
            }
        }
    }
    let periodic = map.periodic();
    let cells = |d: usize| if periodic { d } else { d.saturating_sub(1) };
    let mut out = Vec::new();
    for k in 0..cells(nz) {
        for j in 0..cells(ny) {
            for i in 0..cells(nx) {
                let mut acc = 0u8;
                for dk in 0..2 {
                    for dj in 0..2 {
                        for di in 0..2 {
                            acc |= signs[map.index((i + di) % nx, (j + dj) % ny, (k + dk) % nz)];
                        }
                    }
                }
                if acc == 0b11_1111 {
                    out.push([i, j, k]);
                }
            }
        }
    }
    out
}

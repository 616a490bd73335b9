//! Peak-chain geometry: p(i)..p(i+3) distances, planar angles, torsions and
//! the 11-attribute window around a point.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vec3::{self, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("torsion undefined: three consecutive points are collinear")]
    Collinear,
    #[error("planar angle undefined: coincident points")]
    Coincident,
    #[error("point {index} of a {len}-point chain has no full 11-attribute window")]
    NotApplicable { index: usize, len: usize },
}

const COLLINEAR_EPS: f64 = 1e-9;

/// Signed dihedral angle in degrees, in (-180, 180].
///
/// `atan2((n1 x n2) . b2/|b2|, n1 . n2)` with `b_k` the bond vectors and
/// `n1 = b1 x b2`, `n2 = b2 x b3`; a right-handed alpha helix is positive.
pub fn dihedral(p1: Vec3, p2: Vec3, p3: Vec3, p4: Vec3) -> Result<f64, GeomError> {
    let b1 = vec3::sub(p2, p1);
    let b2 = vec3::sub(p3, p2);
    let b3 = vec3::sub(p4, p3);
    let n1 = vec3::cross(b1, b2);
    let n2 = vec3::cross(b2, b3);
    if vec3::norm(n1) < COLLINEAR_EPS || vec3::norm(n2) < COLLINEAR_EPS {
        return Err(GeomError::Collinear);
    }
    let b2u = vec3::scale(b2, 1.0 / vec3::norm(b2));
    let y = vec3::dot(vec3::cross(n1, n2), b2u);
    let x = vec3::dot(n1, n2);
    let mut t = y.atan2(x).to_degrees();
    if t <= -180.0 {
        t += 360.0;
    }
    Ok(t)
}

/// Angle at `vertex` between the arms to `a` and `b`, degrees in [0, 180].
pub fn planar_angle(a: Vec3, vertex: Vec3, b: Vec3) -> Result<f64, GeomError> {
    let u = vec3::sub(a, vertex);
    let v = vec3::sub(b, vertex);
    let (nu, nv) = (vec3::norm(u), vec3::norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(GeomError::Coincident);
    }
    let c = (vec3::dot(u, v) / (nu * nv)).clamp(-1.0, 1.0);
    Ok(c.acos().to_degrees())
}

/// Geometry of one four-point window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector3 {
    /// |p4 - p1|, Å.
    pub distance: f64,
    /// Angle at p2, degrees.
    pub planar_angle: f64,
    /// Dihedral p1-p2-p3-p4, degrees.
    pub torsion: f64,
}

/// The 11 attributes centred on one chain point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector11 {
    pub torsions: [f64; 4],
    pub distances: [f64; 4],
    pub planar_angles: [f64; 3],
}

/// How an attribute is modelled by the Bayesian classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeKind {
    Distance,
    PlanarAngle,
    Torsion,
}

impl FeatureVector11 {
    pub const KINDS: [AttributeKind; 11] = [
        AttributeKind::Torsion,
        AttributeKind::Torsion,
        AttributeKind::Torsion,
        AttributeKind::Torsion,
        AttributeKind::Distance,
        AttributeKind::Distance,
        AttributeKind::Distance,
        AttributeKind::Distance,
        AttributeKind::PlanarAngle,
        AttributeKind::PlanarAngle,
        AttributeKind::PlanarAngle,
    ];

    /// Flattened as t1..t4, d1..d4, a1..a3.
    pub fn to_array(&self) -> [f64; 11] {
        let mut out = [0.0; 11];
        out[..4].copy_from_slice(&self.torsions);
        out[4..8].copy_from_slice(&self.distances);
        out[8..].copy_from_slice(&self.planar_angles);
        out
    }
}

impl FeatureVector3 {
    pub const KINDS: [AttributeKind; 3] = [AttributeKind::Distance, AttributeKind::PlanarAngle, AttributeKind::Torsion];

    pub fn to_array(&self) -> [f64; 3] {
        [self.distance, self.planar_angle, self.torsion]
    }
}

pub fn window_geometry(p1: Vec3, p2: Vec3, p3: Vec3, p4: Vec3) -> Result<FeatureVector3, GeomError> {
    Ok(FeatureVector3 {
        distance: vec3::dist(p1, p4),
        planar_angle: planar_angle(p1, p2, p3)?,
        torsion: dihedral(p1, p2, p3, p4)?,
    })
}

pub fn feature_vector11(chain: &[Vec3], i: usize) -> Result<FeatureVector11, GeomError> {
    let n = chain.len();
    if n < 7 || i < 3 || i + 4 > n {
        return Err(GeomError::NotApplicable { index: i, len: n });
    }
    let mut torsions = [0.0; 4];
    let mut distances = [0.0; 4];
    for (k, j) in (i - 3..=i).enumerate() {
        torsions[k] = dihedral(chain[j], chain[j + 1], chain[j + 2], chain[j + 3])?;
        distances[k] = vec3::dist(chain[j], chain[j + 3]);
    }
    let mut planar_angles = [0.0; 3];
    for (k, v) in (i - 1..=i + 1).enumerate() {
        planar_angles[k] = planar_angle(chain[v - 1], chain[v], chain[v + 1])?;
    }
    Ok(FeatureVector11 { torsions, distances, planar_angles })
}

/// Which chain point a four-point window's geometry is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribution {
    /// Window p(i)..p(i+3) describes point i.
    #[default]
    Start,
    /// Window p(i-1)..p(i+2) describes point i.
    Center,
}

impl Attribution {
    /// First index of the window attributed to point `i`, if any.
    pub fn window_start(self, i: usize, len: usize) -> Option<usize> {
        let start = match self {
            Attribution::Start => i,
            Attribution::Center => i.checked_sub(1)?,
        };
        (start + 4 <= len).then_some(start)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub chain_id: String,
    /// Chain point the row describes.
    pub index: usize,
    pub fv3: FeatureVector3,
    pub fv11: Option<FeatureVector11>,
}

/// One row per chain point that owns a four-point window; rows also carry
/// the 11-attribute vector where it exists. Degenerate (collinear) windows
/// are skipped.
pub fn chain_feature_table(chain_id: &str, chain: &[Vec3], attribution: Attribution) -> Vec<FeatureRow> {
    let n = chain.len();
    if n < 4 {
        log::warn!("chain {chain_id:?} has {n} points; no four-point windows");
        return Vec::new();
    }
    let mut rows = Vec::new();
    for i in 0..n {
        let Some(s) = attribution.window_start(i, n) else { continue };
        let fv3 = match window_geometry(chain[s], chain[s + 1], chain[s + 2], chain[s + 3]) {
            Ok(f) => f,
            Err(e) => {
                log::warn!("chain {chain_id:?} window at {s}: {e}");
                continue;
            }
        };
        let fv11 = feature_vector11(chain, i).ok();
        rows.push(FeatureRow { chain_id: chain_id.to_string(), index: i, fv3, fv11 });
    }
    rows
}

/// CSV export with header `chain_id,i,t1..t4,d1..d4,a1..a3,d_c,a_c,t_c`.
pub fn feature_table_csv(rows: &[FeatureRow]) -> String {
    let mut out = String::from("chain_id,i,t1,t2,t3,t4,d1,d2,d3,d4,a1,a2,a3,d_c,a_c,t_c\n");
    for r in rows {
        out.push_str(&r.chain_id);
        out.push(',');
        out.push_str(&r.index.to_string());
        match &r.fv11 {
            Some(f) => {
                for v in f.to_array() {
                    out.push_str(&format!(",{v:?}"));
                }
            }
            None => out.push_str(&",".repeat(11)),
        }
        for v in r.fv3.to_array() {
            out.push_str(&format!(",{v:?}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Closed-form centroid helix: radius r, rise h, turn per residue in degrees.
    fn helix(n: usize, r: f64, rise: f64, turn: f64) -> Vec<Vec3> {
        (0..n)
            .map(|k| {
                let a = (turn * k as f64).to_radians();
                [r * a.cos(), r * a.sin(), rise * k as f64]
            })
            .collect()
    }

    #[test]
    fn orthogonal_frame_is_plus_ninety() {
        let t = dihedral([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [1.0, 1.0, 1.0]).unwrap();
        assert!((t - 90.0).abs() < 1e-12);
    }

    #[test]
    fn distance_is_end_to_end() {
        let f = window_geometry([0.0; 3], [1.0, 1.0, 0.0], [2.0, 0.5, 0.3], [3.0, 4.0, 0.0]).unwrap();
        assert!((f.distance - 5.0).abs() < 1e-12);
    }

    #[test]
    fn planar_zigzag_is_180() {
        let t = dihedral([0.0, 0.0, 0.0], [1.0, 1.0, 0.0], [2.0, 0.0, 0.0], [3.0, 1.0, 0.0]).unwrap();
        assert_eq!(t.abs(), 180.0);
        assert!(t > 0.0);
    }

    #[test]
    fn collinear_is_error() {
        let r = window_geometry([0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [2.0, 1.0, 0.0]);
        assert_eq!(r, Err(GeomError::Collinear));
    }

    #[test]
    fn eleven_vector_margins() {
        let c = helix(7, 2.3, 1.5, 100.0);
        assert!(feature_vector11(&c, 3).is_ok());
        assert_eq!(feature_vector11(&c, 0), Err(GeomError::NotApplicable { index: 0, len: 7 }));
        assert!(feature_vector11(&c, 4).is_err());
        assert!(feature_vector11(&c[..6], 3).is_err());
    }

    #[test]
    fn ideal_alpha_helix_features() {
        let c = helix(12, 2.3, 1.5, 100.0);
        // closed form: chord over 300 degrees and 4.5 A of rise
        let d = ((2.0 * 2.3 * 150f64.to_radians().sin()).powi(2) + 4.5f64.powi(2)).sqrt();
        assert!((d - 5.054).abs() < 1e-3);
        let f = feature_vector11(&c, 5).unwrap();
        for k in 0..4 {
            assert!((f.distances[k] - d).abs() < 1e-9);
            assert!(f.torsions[k] > 50.0 && f.torsions[k] < 60.0, "{}", f.torsions[k]);
        }
        // every window of a uniform helix is congruent
        for k in 1..4 {
            assert!((f.torsions[k] - f.torsions[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn table_row_counts() {
        let c4 = helix(4, 2.3, 1.5, 100.0);
        let t = chain_feature_table("A", &c4, Attribution::Start);
        assert_eq!(t.len(), 1);
        assert!(t[0].fv11.is_none());

        let c7 = helix(7, 2.3, 1.5, 100.0);
        let t = chain_feature_table("A", &c7, Attribution::Start);
        assert_eq!(t.iter().map(|r| r.index).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
        assert_eq!(t.iter().filter(|r| r.fv11.is_some()).count(), 1);
        assert!(t[3].fv11.is_some());

        let t = chain_feature_table("A", &c7, Attribution::Center);
        assert_eq!(t.iter().map(|r| r.index).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
        assert!(chain_feature_table("A", &c4[..3], Attribution::Start).is_empty());
    }

    #[test]
    fn extended_zigzag_distances() {
        // 3.5 A links: 3.3 A along the axis and 1.17 A sideways
        let c: Vec<Vec3> = (0..10)
            .map(|k| [3.3 * k as f64, if k % 2 == 0 { 0.0 } else { 1.17 }, 0.02 * (k * k) as f64])
            .collect();
        for r in chain_feature_table("B", &c, Attribution::Start) {
            assert!(r.fv3.distance >= 9.5 && r.fv3.distance <= 10.8, "{}", r.fv3.distance);
        }
    }

    #[test]
    fn csv_has_header_and_blank_fv11() {
        let c = helix(7, 2.3, 1.5, 100.0);
        let csv = feature_table_csv(&chain_feature_table("A", &c, Attribution::Start));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "chain_id,i,t1,t2,t3,t4,d1,d2,d3,d4,a1,a2,a3,d_c,a_c,t_c");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("A,0,,,,,,,,,,,"));
        assert_eq!(lines[4].split(',').count(), 16);
    }

    fn rotation(axis: Vec3, angle: f64) -> [[f64; 3]; 3] {
        let u = vec3::normalize(axis).unwrap();
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        [
            [c + u[0] * u[0] * t, u[0] * u[1] * t - u[2] * s, u[0] * u[2] * t + u[1] * s],
            [u[1] * u[0] * t + u[2] * s, c + u[1] * u[1] * t, u[1] * u[2] * t - u[0] * s],
            [u[2] * u[0] * t - u[1] * s, u[2] * u[1] * t + u[0] * s, c + u[2] * u[2] * t],
        ]
    }

    fn apply(m: &[[f64; 3]; 3], p: Vec3, shift: Vec3) -> Vec3 {
        [
            m[0][0] * p[0] + m[0][1] * p[1] + m[0][2] * p[2] + shift[0],
            m[1][0] * p[0] + m[1][1] * p[1] + m[1][2] * p[2] + shift[1],
            m[2][0] * p[0] + m[2][1] * p[1] + m[2][2] * p[2] + shift[2],
        ]
    }

    fn point() -> impl Strategy<Value = Vec3> {
        prop::array::uniform3(-10.0..10.0f64)
    }

    proptest! {
        #[test]
        fn rigid_motion_invariance(pts in prop::array::uniform4(point()),
                                   axis in point(), angle in -3.0..3.0f64, shift in point()) {
            prop_assume!(vec3::norm(axis) > 1e-3);
            let Ok(f) = window_geometry(pts[0], pts[1], pts[2], pts[3]) else { return Ok(()); };
            prop_assume!(f.torsion.abs() < 179.0);
            let m = rotation(axis, angle);
            let q: Vec<Vec3> = pts.iter().map(|p| apply(&m, *p, shift)).collect();
            let g = window_geometry(q[0], q[1], q[2], q[3]).unwrap();
            prop_assert!((f.torsion - g.torsion).abs() < 1e-9);
            prop_assert!((f.planar_angle - g.planar_angle).abs() < 1e-9);
            prop_assert!((f.distance - g.distance).abs() < 1e-9);
        }

        #[test]
        fn mirror_flips_torsion(pts in prop::array::uniform4(point())) {
            let Ok(f) = window_geometry(pts[0], pts[1], pts[2], pts[3]) else { return Ok(()); };
            prop_assume!(f.torsion.abs() < 179.0);
            let m: Vec<Vec3> = pts.iter().map(|p| [-p[0], p[1], p[2]]).collect();
            let g = window_geometry(m[0], m[1], m[2], m[3]).unwrap();
            prop_assert!((f.torsion + g.torsion).abs() < 1e-9);
            prop_assert!((f.planar_angle - g.planar_angle).abs() < 1e-9);
            prop_assert!((f.distance - g.distance).abs() < 1e-9);
        }

        #[test]
        fn end_to_end_bounded_by_links(pts in prop::array::uniform4(point())) {
            let Ok(f) = window_geometry(pts[0], pts[1], pts[2], pts[3]) else { return Ok(()); };
            let links: f64 = pts.windows(2).map(|w| vec3::dist(w[0], w[1])).sum();
            prop_assert!(f.distance <= links + 1e-12);
        }

        #[test]
        fn eleven_matches_windows(pts in prop::collection::vec(point(), 7..12), pick in 0usize..100) {
            let n = pts.len();
            let i = 3 + pick % (n - 6);
            let Ok(f) = feature_vector11(&pts, i) else { return Ok(()); };
            for (k, j) in (i - 3..=i).enumerate() {
                let w = window_geometry(pts[j], pts[j + 1], pts[j + 2], pts[j + 3]).unwrap();
                prop_assert_eq!(w.torsion, f.torsions[k]);
                prop_assert_eq!(w.distance, f.distances[k]);
            }
            for (k, v) in (i - 1..=i + 1).enumerate() {
                let w = window_geometry(pts[v - 1], pts[v], pts[v + 1], pts[(v + 2).min(n - 1)]);
                if let Ok(w) = w {
                    prop_assert_eq!(w.planar_angle, f.planar_angles[k]);
                }
            }
        }
    }
}

//! Ideal backbone construction from (phi, psi) torsions with standard
//! peptide geometry, and PDB text emission for the result. Used to make
//! synthetic structures with known secondary-structure annotations.

use std::fmt::Write as _;

use crate::ssclass::MotifClass;
use crate::vec3::{self, Vec3};

const N_CA: f64 = 1.458;
const CA_C: f64 = 1.525;
const C_N: f64 = 1.329;
const C_O: f64 = 1.231;
const ANGLE_N_CA_C: f64 = 111.2;
const ANGLE_CA_C_N: f64 = 116.2;
const ANGLE_C_N_CA: f64 = 121.7;
const ANGLE_CA_C_O: f64 = 120.5;
const OMEGA: f64 = 180.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackboneResidue {
    pub n: Vec3,
    pub ca: Vec3,
    pub c: Vec3,
    pub o: Vec3,
}

/// A run of residues sharing one annotation.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSpec {
    pub class: MotifClass,
    /// (phi, psi) per residue, degrees.
    pub torsions: Vec<(f64, f64)>,
}

impl SegmentSpec {
    pub fn uniform(class: MotifClass, len: usize, phi: f64, psi: f64) -> Self {
        Self { class, torsions: vec![(phi, psi); len] }
    }

    pub fn helix(len: usize) -> Self {
        Self::uniform(MotifClass::Helix, len, -57.8, -47.0)
    }

    pub fn strand(len: usize) -> Self {
        Self::uniform(MotifClass::Strand, len, -120.0, 130.0)
    }

    /// Four-residue type I beta turn.
    pub fn turn() -> Self {
        Self {
            class: MotifClass::Turn,
            torsions: vec![(-80.0, 150.0), (-60.0, -30.0), (-90.0, 0.0), (-80.0, 160.0)],
        }
    }

    pub fn coil(torsions: Vec<(f64, f64)>) -> Self {
        Self { class: MotifClass::Other, torsions }
    }
}

/// Places atom D from A, B, C given |CD|, angle BCD and dihedral ABCD (degrees).
fn place(a: Vec3, b: Vec3, c: Vec3, bond: f64, angle: f64, torsion: f64) -> Vec3 {
    let bc = vec3::normalize(vec3::sub(c, b)).expect("coincident atoms");
    let n = vec3::normalize(vec3::cross(vec3::sub(b, a), bc)).expect("collinear atoms");
    let m = vec3::cross(n, bc);
    let (th, ph) = (angle.to_radians(), torsion.to_radians());
    let d = [-bond * th.cos(), bond * th.sin() * ph.cos(), bond * th.sin() * ph.sin()];
    vec3::add(c, vec3::add(vec3::scale(bc, d[0]), vec3::add(vec3::scale(m, d[1]), vec3::scale(n, d[2]))))
}

/// Builds N, CA, C, O for each residue; trans peptides throughout.
pub fn build_backbone(torsions: &[(f64, f64)]) -> Vec<BackboneResidue> {
    let mut out = Vec::with_capacity(torsions.len());
    if torsions.is_empty() {
        return out;
    }
    let th = ANGLE_N_CA_C.to_radians();
    let mut n = [0.0, 0.0, 0.0];
    let mut ca = [N_CA, 0.0, 0.0];
    let mut c = [N_CA - CA_C * th.cos(), CA_C * th.sin(), 0.0];
    for (i, &(_, psi)) in torsions.iter().enumerate() {
        let o = place(n, ca, c, C_O, ANGLE_CA_C_O, psi + 180.0);
        out.push(BackboneResidue { n, ca, c, o });
        if let Some(&(phi_next, _)) = torsions.get(i + 1) {
            let n2 = place(n, ca, c, C_N, ANGLE_CA_C_N, psi);
            let ca2 = place(ca, c, n2, N_CA, ANGLE_C_N_CA, OMEGA);
            let c2 = place(c, n2, ca2, CA_C, ANGLE_N_CA_C, phi_next);
            n = n2;
            ca = ca2;
            c = c2;
        }
    }
    out
}

/// PDB text (ATOM plus HELIX/SHEET/TURN records) for one chain built from `segments`.
/// Residues are numbered from 1.
pub fn ideal_pdb(chain: char, segments: &[SegmentSpec]) -> String {
    let torsions: Vec<(f64, f64)> = segments.iter().flat_map(|s| s.torsions.iter().cloned()).collect();
    let residues = build_backbone(&torsions);
    let mut out = String::new();
    let (mut nh, mut ns, mut nt) = (0, 0, 0);
    let mut start = 1;
    for seg in segments {
        let end = start + seg.torsions.len() as i32 - 1;
        if seg.torsions.is_empty() {
            continue;
        }
        match seg.class {
            MotifClass::Helix => {
                nh += 1;
                let _ = writeln!(
                    out,
                    "HELIX  {nh:>3} {nh:>3} ALA {chain} {start:>4}  ALA {chain} {end:>4}  1{:>37}",
                    end - start + 1
                );
            }
            MotifClass::Strand => {
                ns += 1;
                let _ = writeln!(out, "SHEET  {ns:>3}   A 1 ALA {chain}{start:>4}  ALA {chain}{end:>4}  0");
            }
            MotifClass::Turn => {
                nt += 1;
                let _ = writeln!(out, "TURN   {nt:>3} T{nt:<2} ALA {chain}{start:>4}  ALA {chain}{end:>4}");
            }
            MotifClass::Other => {}
        }
        start = end + 1;
    }
    let mut serial = 1;
    for (i, r) in residues.iter().enumerate() {
        for (name, p, el) in [("N", r.n, "N"), ("CA", r.ca, "C"), ("C", r.c, "C"), ("O", r.o, "O")] {
            let _ = writeln!(
                out,
                "ATOM  {serial:>5}  {name:<3} ALA {chain}{:>4}    {:>8.3}{:>8.3}{:>8.3}  1.00  0.00          {el:>2}",
                i + 1,
                p[0],
                p[1],
                p[2]
            );
            serial += 1;
        }
    }
    out.push_str("END\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::dihedral;
    use crate::mapio::{parse_pdb_subset, residue_centroids};

    #[test]
    fn built_torsions_match_request() {
        let tors = vec![(-57.8, -47.0), (-120.0, 130.0), (-60.0, -30.0), (75.0, 20.0), (-90.0, 0.0)];
        let bb = build_backbone(&tors);
        for i in 1..tors.len() - 1 {
            let phi = dihedral(bb[i - 1].c, bb[i].n, bb[i].ca, bb[i].c).unwrap();
            let psi = dihedral(bb[i].n, bb[i].ca, bb[i].c, bb[i + 1].n).unwrap();
            assert!((phi - tors[i].0).abs() < 1e-6, "phi {phi} vs {}", tors[i].0);
            assert!((psi - tors[i].1).abs() < 1e-6, "psi {psi} vs {}", tors[i].1);
        }
        for i in 0..tors.len() - 1 {
            assert!((vec3::dist(bb[i].ca, bb[i + 1].ca) - 3.8).abs() < 0.05);
        }
    }

    #[test]
    fn helix_ca_spacings() {
        let bb = build_backbone(&vec![(-57.8, -47.0); 20]);
        for i in 2..14 {
            let d3 = vec3::dist(bb[i].ca, bb[i + 3].ca);
            let d4 = vec3::dist(bb[i].ca, bb[i + 4].ca);
            assert!((4.8..5.6).contains(&d3), "{d3}");
            assert!((5.8..6.6).contains(&d4), "{d4}");
        }
    }

    #[test]
    fn pdb_text_round_trips_through_parser() {
        let segs = vec![
            SegmentSpec::coil(vec![(-75.0, 145.0); 2]),
            SegmentSpec::helix(8),
            SegmentSpec::turn(),
            SegmentSpec::strand(6),
        ];
        let text = ideal_pdb('A', &segs);
        let s = parse_pdb_subset(&text).unwrap();
        assert_eq!(s.atoms.len(), 20 * 4);
        assert_eq!(s.annotations.len(), 3);
        assert_eq!((s.annotations[0].first, s.annotations[0].last), (3, 10));
        assert_eq!((s.annotations[1].first, s.annotations[1].last), (11, 14));
        assert_eq!((s.annotations[2].first, s.annotations[2].last), (15, 20));
        let set = residue_centroids(&s);
        assert_eq!(set.chains[0].points.len(), 20);
        assert_eq!(set.chains[0].points[4].label, MotifClass::Helix);
        assert_eq!(set.chains[0].points[12].label, MotifClass::Turn);
        assert_eq!(set.chains[0].points[16].label, MotifClass::Strand);
        assert!(set.chains[0].breaks.is_empty());
    }
}

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Structure;
use crate::ssclass::MotifClass;
use crate::vec3::{self, Vec3};

/// Consecutive centroids farther apart than this mark a chain break.
pub const MAX_BOND_DISTANCE: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidPoint {
    pub residue: i32,
    pub position: Vec3,
    pub label: MotifClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidChain {
    pub chain_id: String,
    pub points: Vec<CentroidPoint>,
    /// Link indices `k` (between points `k` and `k+1`) that exceed [`MAX_BOND_DISTANCE`].
    pub breaks: Vec<usize>,
}

impl CentroidChain {
    pub fn positions(&self) -> Vec<Vec3> {
        self.points.iter().map(|p| p.position).collect()
    }

    pub fn labels(&self) -> Vec<MotifClass> {
        self.points.iter().map(|p| p.label).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CentroidSet {
    pub chains: Vec<CentroidChain>,
    /// Residues lacking one of CA, C or O.
    pub skipped: Vec<(String, i32)>,
    /// Chains with fewer than four usable residues.
    pub excluded_chains: Vec<String>,
}

#[derive(Default)]
struct Backbone {
    ca: Option<Vec3>,
    c: Option<Vec3>,
    o: Option<Vec3>,
}

/// One point per residue at the unweighted mean of its CA, C and O atoms.
pub fn residue_centroids(structure: &Structure) -> CentroidSet {
    let mut order: Vec<String> = Vec::new();
    let mut per_chain: BTreeMap<String, BTreeMap<i32, Backbone>> = BTreeMap::new();
    for atom in &structure.atoms {
        if !per_chain.contains_key(&atom.chain) {
            order.push(atom.chain.clone());
        }
        let bb = per_chain.entry(atom.chain.clone()).or_default().entry(atom.residue).or_default();
        let slot = match atom.name.as_str() {
            "CA" => &mut bb.ca,
            "C" => &mut bb.c,
            "O" => &mut bb.o,
            _ => continue,
        };
        if slot.is_none() {
            *slot = Some(atom.position);
        }
    }

    let mut out = CentroidSet::default();
    for chain_id in order {
        let residues = &per_chain[&chain_id];
        let mut points = Vec::new();
        for (&residue, bb) in residues {
            match (bb.ca, bb.c, bb.o) {
                (Some(ca), Some(c), Some(o)) => points.push(CentroidPoint {
                    residue,
                    position: vec3::centroid(&[ca, c, o]),
                    label: structure.label_of(&chain_id, residue),
                }),
                _ => {
                    log::warn!("residue {chain_id}:{residue} lacks CA/C/O, skipped");
                    out.skipped.push((chain_id.clone(), residue));
                }
            }
        }
        if points.len() < 4 {
            log::warn!("chain {chain_id:?} has {} usable residues, excluded", points.len());
            out.excluded_chains.push(chain_id);
            continue;
        }
        let breaks = points
            .windows(2)
            .enumerate()
            .filter(|(_, w)| vec3::dist(w[0].position, w[1].position) >= MAX_BOND_DISTANCE)
            .map(|(k, _)| k)
            .collect();
        out.chains.push(CentroidChain { chain_id, points, breaks });
    }
    out
}

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::MotifClass;
use crate::geom::dihedral;
use crate::vec3::{self, Vec3};

/// A run of at least two points sharing a motif class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub chain_id: String,
    pub start: usize,
    /// Inclusive.
    pub end: usize,
    pub class: MotifClass,
    /// Mean per-point score of the class, when scores were supplied.
    pub score: Option<f64>,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn overlaps(&self, other: &Segment) -> bool {
        self.chain_id == other.chain_id && self.start <= other.end && other.start <= self.end
    }
}

/// Maximal runs of one label with length ≥ 2. `other` runs, singletons and
/// unclassified points produce no segment.
pub fn extract_segments(chain_id: &str, labels: &[Option<MotifClass>], scores: Option<&[f64]>) -> Vec<Segment> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < labels.len() {
        let mut j = i;
        while j + 1 < labels.len() && labels[j + 1] == labels[i] {
            j += 1;
        }
        if let Some(class) = labels[i] {
            if class != MotifClass::Other && j > i {
                let score = scores.map(|s| s[i..=j].iter().sum::<f64>() / (j - i + 1) as f64);
                out.push(Segment { chain_id: chain_id.to_string(), start: i, end: j, class, score });
            }
        }
        i = j + 1;
    }
    out
}

/// Per-point labels implied by segments of one chain; uncovered points are `other`.
pub fn segment_labels(len: usize, segments: &[Segment]) -> Vec<MotifClass> {
    let mut labels = vec![MotifClass::Other; len];
    for s in segments {
        for l in &mut labels[s.start..=s.end.min(len.saturating_sub(1))] {
            *l = s.class;
        }
    }
    labels
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostprocessConfig {
    /// Strand axes within this many degrees of parallel or antiparallel pair up.
    pub strand_angle: f64,
    /// Largest centroid separation of paired strands, Å.
    pub strand_distance: f64,
}

impl Default for PostprocessConfig {
    fn default() -> Self {
        PostprocessConfig { strand_angle: 30.0, strand_distance: 6.5 }
    }
}

fn window_torsions(chain: &[Vec3], s: &Segment) -> Vec<f64> {
    let n = chain.len();
    if n < 4 {
        return Vec::new();
    }
    let last = n - 4;
    let own: Vec<usize> = (s.start..=s.end.min(last)).collect();
    let starts = if own.is_empty() { (s.start.saturating_sub(3)..=s.end.min(last)).collect() } else { own };
    starts.into_iter().filter_map(|k| dihedral(chain[k], chain[k + 1], chain[k + 2], chain[k + 3]).ok()).collect()
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    Some(if xs.len() % 2 == 1 { xs[m] } else { 0.5 * (xs[m - 1] + xs[m]) })
}

/// Drops helices whose median window torsion is negative and strands with
/// no partner strand. Segments on chains without geometry are kept.
pub fn postprocess_segments(
    segments: &[Segment],
    chains: &BTreeMap<String, Vec<Vec3>>,
    config: &PostprocessConfig,
) -> Vec<Segment> {
    let strand_axes: Vec<(usize, Vec3, Vec3)> = segments
        .iter()
        .enumerate()
        .filter(|(_, s)| s.class == MotifClass::Strand)
        .filter_map(|(k, s)| {
            let chain = chains.get(&s.chain_id)?;
            let pts = chain.get(s.start..=s.end)?;
            let axis = vec3::sub(pts[pts.len() - 1], pts[0]);
            Some((k, axis, vec3::centroid(pts)))
        })
        .collect();
    let cos_limit = config.strand_angle.to_radians().cos();
    segments
        .iter()
        .enumerate()
        .filter(|&(k, s)| {
            let Some(chain) = chains.get(&s.chain_id) else {
                log::warn!("no geometry for chain {:?}; segment kept", s.chain_id);
                return true;
            };
            match s.class {
                MotifClass::Helix => match median(window_torsions(chain, s)) {
                    Some(t) if t < 0.0 => {
                        log::debug!("helix {}:{}-{} removed, median torsion {t:.1}", s.chain_id, s.start, s.end);
                        false
                    }
                    _ => true,
                },
                MotifClass::Strand => {
                    let Some(&(_, axis, centre)) = strand_axes.iter().find(|a| a.0 == k) else { return true };
                    let paired = strand_axes.iter().any(|&(j, other, c)| {
                        if j == k {
                            return false;
                        }
                        let (na, nb) = (vec3::norm(axis), vec3::norm(other));
                        if na == 0.0 || nb == 0.0 {
                            return false;
                        }
                        let cos = vec3::dot(axis, other) / (na * nb);
                        cos.abs() > cos_limit && vec3::dist(centre, c) < config.strand_distance
                    });
                    if !paired {
                        log::debug!("strand {}:{}-{} removed, no partner", s.chain_id, s.start, s.end);
                    }
                    paired
                }
                _ => true,
            }
        })
        .map(|(_, s)| s.clone())
        .collect()
}

use serde::{Deserialize, Serialize};

use super::MotifClass;
use crate::geom::{chain_feature_table, Attribution, FeatureVector11, FeatureVector3};
use crate::mapio::{CentroidChain, CentroidSet};
use crate::vec3::{self, Vec3};

/// A feature row joined with the label of the point it describes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledRow {
    pub chain_id: String,
    pub index: usize,
    pub label: MotifClass,
    pub fv3: FeatureVector3,
    pub fv11: Option<FeatureVector11>,
}

/// Feature rows for every chain, computed separately on each unbroken run
/// so that no window spans a chain break. Indices refer to the full chain.
pub fn label_training_chains(chains: &[CentroidChain], attribution: Attribution) -> Vec<LabeledRow> {
    let mut rows = Vec::new();
    for chain in chains {
        let positions = chain.positions();
        let mut cuts: Vec<usize> = chain.breaks.iter().map(|&k| k + 1).collect();
        cuts.sort_unstable();
        cuts.dedup();
        let mut start = 0;
        for end in cuts.into_iter().chain(std::iter::once(positions.len())) {
            if end <= start {
                continue;
            }
            for r in chain_feature_table(&chain.chain_id, &positions[start..end], attribution) {
                let index = start + r.index;
                rows.push(LabeledRow {
                    chain_id: r.chain_id,
                    index,
                    label: chain.points[index].label,
                    fv3: r.fv3,
                    fv11: r.fv11,
                });
            }
            start = end;
        }
    }
    rows
}

/// Reference label of the nearest residue centroid within `radius`, else `other`.
pub fn transfer_labels(points: &[Vec3], reference: &CentroidSet, radius: f64) -> Vec<MotifClass> {
    points
        .iter()
        .map(|&p| {
            reference
                .chains
                .iter()
                .flat_map(|c| &c.points)
                .map(|r| (vec3::dist(p, r.position), r.label))
                .filter(|&(d, _)| d < radius)
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .map_or(MotifClass::Other, |(_, l)| l)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapio::CentroidPoint;
    use crate::vec3::Vec3;

    fn zigzag(n: usize, labels: impl Fn(usize) -> MotifClass) -> CentroidChain {
        let points = (0..n)
            .map(|i| {
                let t = i as f64;
                let position: Vec3 = [3.8 * t, (t * 1.7).sin() * 1.5, (t * 0.9).cos() * 1.2];
                CentroidPoint { residue: i as i32 + 1, position, label: labels(i) }
            })
            .collect();
        CentroidChain { chain_id: "A".into(), points, breaks: Vec::new() }
    }

    #[test]
    fn rows_take_the_label_of_their_point() {
        let c = zigzag(10, |i| if (2..6).contains(&i) { MotifClass::Helix } else { MotifClass::Other });
        let rows = label_training_chains(&[c], Attribution::Start);
        assert_eq!(rows.len(), 7);
        for r in &rows {
            let want = if (2..6).contains(&r.index) { MotifClass::Helix } else { MotifClass::Other };
            assert_eq!(r.label, want);
        }
    }

    #[test]
    fn transferred_labels_come_from_the_nearest_centroid() {
        let c = zigzag(6, |i| if i < 3 { MotifClass::Strand } else { MotifClass::Turn });
        let set = CentroidSet { chains: vec![c.clone()], ..Default::default() };
        let probe = [vec3::add(c.points[1].position, [0.3, 0.0, 0.0]), c.points[4].position, [0.0, 50.0, 0.0]];
        assert_eq!(transfer_labels(&probe, &set, 2.0), vec![MotifClass::Strand, MotifClass::Turn, MotifClass::Other]);
    }

    #[test]
    fn windows_do_not_cross_breaks() {
        let mut c = zigzag(12, |_| MotifClass::Other);
        c.breaks = vec![5];
        let rows = label_training_chains(&[c], Attribution::Start);
        // runs of 6 and 6 points give 3 windows each
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.index <= 2 || (6..=8).contains(&r.index)));
    }
}

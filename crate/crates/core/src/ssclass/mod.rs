//! Secondary-structure classification of peak chains.

use serde::{Deserialize, Serialize};
use thiserror::Error;

mod bayes;
mod eval;
mod labels;
mod mycin;
mod segments;
mod stats;

pub use bayes::{classify_bayes, train_bayes, BayesConfig, BayesModel, ClassModel, Mixture, MixtureComponent};
pub use eval::{evaluate, point_accuracy, ClassMetrics, Metrics};
pub use labels::{label_training_chains, transfer_labels, LabeledRow};
pub use mycin::{
    belief_measures, certainty_factor, classify_mycin, combine_evidence, train_mycin, Bins, BeliefReading, Evidence,
    FeatureHistogram, HistogramModel, MycinConfig,
};
pub use segments::{extract_segments, postprocess_segments, segment_labels, PostprocessConfig, Segment};

#[derive(Debug, Error, PartialEq)]
pub enum SsError {
    #[error("training table has no usable rows")]
    EmptyTable,
    #[error("value {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("chain {chain:?}: {expected} labels expected, found {found}")]
    LengthMismatch { chain: String, expected: usize, found: usize },
    #[error("no reference labels for chain {0:?}")]
    UnknownChain(String),
    #[error("model JSON: {0}")]
    Json(String),
}

/// Motif classes, declared in tie-breaking priority order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MotifClass {
    Helix,
    Strand,
    Turn,
    Other,
}

impl MotifClass {
    pub const ALL: [MotifClass; 4] = [MotifClass::Helix, MotifClass::Strand, MotifClass::Turn, MotifClass::Other];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MotifClass::Helix => "helix",
            MotifClass::Strand => "strand",
            MotifClass::Turn => "turn",
            MotifClass::Other => "other",
        }
    }
}

impl std::fmt::Display for MotifClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MotifClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MotifClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown motif class {s:?}"))
    }
}

/// Label and per-class scores (CF or posterior) for one chain point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointCall {
    pub label: MotifClass,
    pub scores: [f64; 4],
}

/// Per-point output of a classifier; `None` marks points it cannot reach.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainClassification {
    pub chain_id: String,
    pub points: Vec<Option<PointCall>>,
}

impl ChainClassification {
    pub fn unclassified(chain_id: &str, len: usize) -> Self {
        ChainClassification { chain_id: chain_id.to_string(), points: vec![None; len] }
    }

    pub fn labels(&self) -> Vec<Option<MotifClass>> {
        self.points.iter().map(|p| p.map(|c| c.label)).collect()
    }

    /// Segments of the raw labels, scored by the winning class's score.
    pub fn segments(&self) -> Vec<Segment> {
        let scores: Vec<f64> = self.points.iter().map(|p| p.map_or(0.0, |c| c.scores[c.label.index()])).collect();
        extract_segments(&self.chain_id, &self.labels(), Some(&scores))
    }
}

/// Highest score wins; ties go to the class declared first.
pub fn select_class(scores: &[f64; 4]) -> MotifClass {
    let mut best = 0;
    for k in 1..4 {
        if scores[k] > scores[best] {
            best = k;
        }
    }
    MotifClass::ALL[best]
}

/// CSV with header `chain,i,CF_helix,CF_strand,CF_turn,CF_other,label`;
/// unclassified points are omitted.
pub fn cf_trace_csv(chains: &[ChainClassification]) -> String {
    score_trace_csv(chains, "CF")
}

/// As [`cf_trace_csv`] with `P_` score columns, for posteriors.
pub fn posterior_trace_csv(chains: &[ChainClassification]) -> String {
    score_trace_csv(chains, "P")
}

fn score_trace_csv(chains: &[ChainClassification], prefix: &str) -> String {
    let mut out = format!("chain,i,{0}_helix,{0}_strand,{0}_turn,{0}_other,label\n", prefix);
    for c in chains {
        for (i, p) in c.points.iter().enumerate() {
            if let Some(p) = p {
                let s = p.scores;
                out.push_str(&format!("{},{},{},{},{},{},{}\n", c.chain_id, i, s[0], s[1], s[2], s[3], p.label));
            }
        }
    }
    out
}

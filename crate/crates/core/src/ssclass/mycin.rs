use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{select_class, ChainClassification, LabeledRow, MotifClass, PointCall, SsError};
use crate::geom::{chain_feature_table, AttributeKind, Attribution, FeatureVector11, FeatureVector3};
use crate::vec3::Vec3;

/// Uniform bins over `(lo, lo + count·width]`; a value on an edge belongs to
/// the lower bin and the first bin also takes `lo` itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bins {
    pub lo: f64,
    pub width: f64,
    pub count: usize,
    /// Values are angles on a circle of period `count·width`.
    pub circular: bool,
}

impl Bins {
    pub fn for_kind(kind: AttributeKind) -> Bins {
        match kind {
            AttributeKind::Distance => Bins { lo: 2.0, width: 0.5, count: 24, circular: false },
            AttributeKind::PlanarAngle => Bins { lo: 0.0, width: 10.0, count: 18, circular: false },
            AttributeKind::Torsion => Bins { lo: -180.0, width: 15.0, count: 24, circular: true },
        }
    }

    pub fn hi(&self) -> f64 {
        self.lo + self.width * self.count as f64
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.count).map(|k| self.lo + self.width * k as f64).collect()
    }

    pub fn index(&self, x: f64) -> usize {
        let mut x = x;
        if self.circular {
            let period = self.hi() - self.lo;
            x = self.lo + (x - self.lo).rem_euclid(period);
            if x == self.lo {
                x = self.hi();
            }
        } else if x < self.lo || x > self.hi() {
            log::debug!("value {x} outside [{}, {}]; clamped to an edge bin", self.lo, self.hi());
        }
        let k = ((x - self.lo) / self.width).ceil() - 1.0;
        k.clamp(0.0, (self.count - 1) as f64) as usize
    }
}

/// How a histogram bin is turned into belief and disbelief.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeliefReading {
    /// MB = P(class | bin), MD = 1 − MB.
    #[default]
    Posterior,
    /// MB = P(bin | class) and MD = P(bin | not class), each scaled by its
    /// largest bin.
    Likelihood,
}

/// Which attributes count as evidence for a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    /// Distance, planar angle and torsion of the point's window.
    #[default]
    Window,
    /// All 11 attributes around the point.
    Full,
}

impl Evidence {
    pub fn kinds(self) -> &'static [AttributeKind] {
        match self {
            Evidence::Window => &FeatureVector3::KINDS,
            Evidence::Full => &FeatureVector11::KINDS,
        }
    }

    fn values(self, fv3: &FeatureVector3, fv11: Option<&FeatureVector11>) -> Option<Vec<f64>> {
        match self {
            Evidence::Window => Some(fv3.to_array().to_vec()),
            Evidence::Full => fv11.map(|f| f.to_array().to_vec()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MycinConfig {
    /// Additive smoothing per class and bin; must be positive.
    pub alpha: f64,
    pub reading: BeliefReading,
    pub evidence: Evidence,
    pub attribution: Attribution,
}

impl Default for MycinConfig {
    fn default() -> Self {
        MycinConfig { alpha: 1.0, reading: BeliefReading::Posterior, evidence: Evidence::Window, attribution: Attribution::Start }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureHistogram {
    pub kind: AttributeKind,
    pub bins: Bins,
    /// Per bin, counts in class order.
    pub counts: Vec<[u64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramModel {
    pub config: MycinConfig,
    pub features: Vec<FeatureHistogram>,
    pub class_totals: [u64; 4],
}

pub fn train_mycin(rows: &[LabeledRow], config: MycinConfig) -> Result<HistogramModel, SsError> {
    if !(config.alpha > 0.0 && config.alpha.is_finite()) {
        return Err(SsError::Config(format!("smoothing must be positive, got {}", config.alpha)));
    }
    let kinds = config.evidence.kinds();
    let empty = || {
        let features: Vec<FeatureHistogram> = kinds
            .iter()
            .map(|&kind| {
                let bins = Bins::for_kind(kind);
                FeatureHistogram { kind, bins, counts: vec![[0; 4]; bins.count] }
            })
            .collect();
        (features, [0u64; 4])
    };
    let (features, class_totals) = rows
        .par_iter()
        .fold(empty, |(mut features, mut totals), r| {
            if let Some(values) = config.evidence.values(&r.fv3, r.fv11.as_ref()) {
                let c = r.label.index();
                totals[c] += 1;
                for (h, x) in features.iter_mut().zip(values) {
                    let b = h.bins.index(x);
                    h.counts[b][c] += 1;
                }
            }
            (features, totals)
        })
        .reduce(empty, |(mut fa, mut ta), (fb, tb)| {
            for (a, b) in fa.iter_mut().zip(fb) {
                for (ca, cb) in a.counts.iter_mut().zip(b.counts) {
                    for k in 0..4 {
                        ca[k] += cb[k];
                    }
                }
            }
            for k in 0..4 {
                ta[k] += tb[k];
            }
            (fa, ta)
        });
    if class_totals.iter().sum::<u64>() == 0 {
        return Err(SsError::EmptyTable);
    }
    for c in MotifClass::ALL {
        if class_totals[c.index()] == 0 {
            log::warn!("no training rows labelled {c}; its beliefs come from smoothing alone");
        }
    }
    Ok(HistogramModel { config, features, class_totals })
}

impl HistogramModel {
    /// (MB, MD) of `class` for bin `bin` of feature `f`.
    pub fn belief(&self, class: MotifClass, f: usize, bin: usize) -> (f64, f64) {
        let a = self.config.alpha;
        let h = &self.features[f];
        let c = class.index();
        match self.config.reading {
            BeliefReading::Posterior => {
                let counts = h.counts[bin];
                let total: u64 = counts.iter().sum();
                let mb = (counts[c] as f64 + a) / (total as f64 + 4.0 * a);
                (mb, 1.0 - mb)
            }
            BeliefReading::Likelihood => {
                let n = h.bins.count as f64;
                let all: u64 = self.class_totals.iter().sum();
                let pos = |b: usize| (h.counts[b][c] as f64 + a) / (self.class_totals[c] as f64 + n * a);
                let neg = |b: usize| {
                    let rest: u64 = h.counts[b].iter().sum::<u64>() - h.counts[b][c];
                    (rest as f64 + a) / ((all - self.class_totals[c]) as f64 + n * a)
                };
                let max_pos = (0..h.bins.count).map(pos).fold(0.0, f64::max);
                let max_neg = (0..h.bins.count).map(neg).fold(0.0, f64::max);
                (pos(bin) / max_pos, neg(bin) / max_neg)
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("histogram model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, SsError> {
        serde_json::from_str(s).map_err(|e| SsError::Json(e.to_string()))
    }
}

/// One (MB, MD) pair per evidence feature. `features` must match the
/// model's evidence set in length and order.
pub fn belief_measures(model: &HistogramModel, class: MotifClass, features: &[f64]) -> Vec<(f64, f64)> {
    assert_eq!(features.len(), model.features.len(), "evidence length does not match the model");
    features
        .iter()
        .enumerate()
        .map(|(f, &x)| model.belief(class, f, model.features[f].bins.index(x)))
        .collect()
}

/// Left fold of `x₁ + x₂(1 − x₁)` over MB and MD separately.
pub fn combine_evidence(pairs: &[(f64, f64)]) -> Result<(f64, f64), SsError> {
    let mut acc = (0.0, 0.0);
    for &(mb, md) in pairs {
        for v in [mb, md] {
            if !(0.0..=1.0).contains(&v) {
                return Err(SsError::OutOfRange(v));
            }
        }
        acc = (acc.0 + mb * (1.0 - acc.0), acc.1 + md * (1.0 - acc.1));
    }
    Ok(acc)
}

pub fn certainty_factor(mb: f64, md: f64) -> f64 {
    mb - md
}

/// Per-point certainty factors for every class. Chains shorter than four
/// points come back unclassified.
pub fn classify_mycin(chain_id: &str, chain: &[Vec3], model: &HistogramModel) -> ChainClassification {
    let mut out = ChainClassification::unclassified(chain_id, chain.len());
    if chain.len() < 4 {
        log::warn!("chain {chain_id:?} has {} points; at least 4 are needed", chain.len());
        return out;
    }
    let rows = chain_feature_table(chain_id, chain, model.config.attribution);
    let calls: Vec<(usize, Option<PointCall>)> = rows
        .par_iter()
        .map(|r| {
            let call = model.config.evidence.values(&r.fv3, r.fv11.as_ref()).map(|values| {
                let mut scores = [0.0; 4];
                for c in MotifClass::ALL {
                    let (mb, md) = combine_evidence(&belief_measures(model, c, &values)).expect("beliefs lie in [0, 1]");
                    scores[c.index()] = certainty_factor(mb, md);
                }
                PointCall { label: select_class(&scores), scores }
            });
            (r.index, call)
        })
        .collect();
    for (i, call) in calls {
        out.points[i] = call;
    }
    out
}

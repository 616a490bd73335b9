use std::collections::BTreeMap;

use serde::{Deserialize, Serialize, Serializer};

use super::{extract_segments, MotifClass, Segment, SsError};

fn dash_if_none<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_f64(*x),
        None => s.serialize_str("—"),
    }
}

/// Segment and point tallies for one motif class. Fractions are in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: MotifClass,
    /// Predicted segments.
    pub assigned: usize,
    /// Predicted segments overlapping a true segment of the class.
    pub correct: usize,
    /// True segments.
    pub actual: usize,
    /// True segments overlapped by a correct prediction.
    pub recognized: usize,
    pub assigned_points: usize,
    pub correct_points: usize,
    #[serde(serialize_with = "dash_if_none", deserialize_with = "dash_or_number")]
    pub motifs_recognized: Option<f64>,
    #[serde(serialize_with = "dash_if_none", deserialize_with = "dash_or_number")]
    pub peaks_correct: Option<f64>,
}

fn dash_or_number<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum V {
        N(f64),
        S(serde::de::IgnoredAny),
    }
    Ok(match V::deserialize(d)? {
        V::N(x) => Some(x),
        V::S(_) => None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub classes: Vec<ClassMetrics>,
}

impl Metrics {
    pub fn class(&self, c: MotifClass) -> Option<&ClassMetrics> {
        self.classes.iter().find(|m| m.class == c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize")
    }

    /// Plain-text table with percentages; undefined entries print as "—".
    pub fn table(&self) -> String {
        let pct = |v: Option<f64>| v.map_or_else(|| "—".to_string(), |x| format!("{:.0}", 100.0 * x));
        let mut out = String::from("class   assigned  correct  actual  %motifs  %peaks\n");
        for m in &self.classes {
            out.push_str(&format!(
                "{:<7} {:>8} {:>8} {:>7} {:>8} {:>7}\n",
                m.class.as_str(),
                m.assigned,
                m.correct,
                m.actual,
                pct(m.motifs_recognized),
                pct(m.peaks_correct)
            ));
        }
        out
    }
}

/// Scores predicted segments against per-point reference labels. A
/// prediction counts as correct when it shares at least one point with a
/// true segment of its class.
pub fn evaluate(predicted: &[Segment], truth: &BTreeMap<String, Vec<MotifClass>>) -> Result<Metrics, SsError> {
    for s in predicted {
        let labels = truth.get(&s.chain_id).ok_or_else(|| SsError::UnknownChain(s.chain_id.clone()))?;
        if s.end >= labels.len() || s.start > s.end {
            return Err(SsError::LengthMismatch { chain: s.chain_id.clone(), expected: s.end + 1, found: labels.len() });
        }
    }
    let actual: Vec<Segment> = truth
        .iter()
        .flat_map(|(id, labels)| extract_segments(id, &labels.iter().copied().map(Some).collect::<Vec<_>>(), None))
        .collect();
    let classes = [MotifClass::Helix, MotifClass::Strand, MotifClass::Turn]
        .into_iter()
        .map(|c| {
            let pred: Vec<&Segment> = predicted.iter().filter(|s| s.class == c).collect();
            let act: Vec<&Segment> = actual.iter().filter(|s| s.class == c).collect();
            let good: Vec<&Segment> = pred.iter().copied().filter(|p| act.iter().any(|a| a.overlaps(p))).collect();
            let recognized = act.iter().filter(|a| good.iter().any(|p| p.overlaps(a))).count();
            let assigned_points: usize = pred.iter().map(|s| s.len()).sum();
            let correct_points = pred
                .iter()
                .map(|s| truth[&s.chain_id][s.start..=s.end].iter().filter(|&&l| l == c).count())
                .sum();
            let frac = |a: usize, b: usize| (b > 0).then(|| a as f64 / b as f64);
            ClassMetrics {
                class: c,
                assigned: pred.len(),
                correct: good.len(),
                actual: act.len(),
                recognized,
                assigned_points,
                correct_points,
                motifs_recognized: frac(recognized, act.len()),
                peaks_correct: frac(correct_points, assigned_points),
            }
        })
        .collect();
    Ok(Metrics { classes })
}

/// Per true class, the fraction of its classified points given that label.
pub fn point_accuracy(predicted: &[Option<MotifClass>], truth: &[MotifClass]) -> Result<[Option<f64>; 4], SsError> {
    if predicted.len() != truth.len() {
        return Err(SsError::LengthMismatch { chain: String::new(), expected: truth.len(), found: predicted.len() });
    }
    let mut hit = [0usize; 4];
    let mut seen = [0usize; 4];
    for (p, &t) in predicted.iter().zip(truth) {
        if let Some(p) = p {
            seen[t.index()] += 1;
            hit[t.index()] += usize::from(*p == t);
        }
    }
    Ok(std::array::from_fn(|k| (seen[k] > 0).then(|| hit[k] as f64 / seen[k] as f64)))
}

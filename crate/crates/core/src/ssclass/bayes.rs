use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{gaussian_log_pdf, inverse_mean_resultant, log_sum_exp, von_mises_log_pdf};
use super::{select_class, ChainClassification, LabeledRow, MotifClass, PointCall, SsError};
use crate::geom::{feature_vector11, AttributeKind, FeatureVector11};
use crate::vec3::Vec3;

/// Narrowest Gaussian component, Å.
pub const SIGMA_FLOOR: f64 = 0.1;
/// Tightest von Mises component (about 4° angular spread).
pub const KAPPA_CAP: f64 = 200.0;
/// Below this many rows a class attribute gets a single component.
pub const MIN_MIXTURE_ROWS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BayesConfig {
    pub max_components: usize,
    pub em_restarts: usize,
    pub seed: u64,
    pub max_iterations: usize,
}

impl Default for BayesConfig {
    fn default() -> Self {
        BayesConfig { max_components: 2, em_restarts: 5, seed: 0, max_iterations: 500 }
    }
}

/// One mixture component; angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MixtureComponent {
    Gaussian { weight: f64, mu: f64, sigma: f64 },
    VonMises { weight: f64, mu: f64, kappa: f64 },
}

impl MixtureComponent {
    pub fn weight(&self) -> f64 {
        match *self {
            MixtureComponent::Gaussian { weight, .. } | MixtureComponent::VonMises { weight, .. } => weight,
        }
    }

    pub fn mu(&self) -> f64 {
        match *self {
            MixtureComponent::Gaussian { mu, .. } | MixtureComponent::VonMises { mu, .. } => mu,
        }
    }

    fn log_pdf(&self, x: f64) -> f64 {
        match *self {
            MixtureComponent::Gaussian { mu, sigma, .. } => gaussian_log_pdf(x, mu, sigma),
            MixtureComponent::VonMises { mu, kappa, .. } => von_mises_log_pdf(x, mu, kappa),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mixture {
    pub kind: AttributeKind,
    pub components: Vec<MixtureComponent>,
}

impl Mixture {
    pub fn log_pdf(&self, x: f64) -> f64 {
        let terms: Vec<f64> = self.components.iter().map(|c| c.weight().ln() + c.log_pdf(x)).collect();
        log_sum_exp(&terms)
    }

    fn log_likelihood(&self, xs: &[f64]) -> f64 {
        xs.iter().map(|&x| self.log_pdf(x)).sum()
    }

    /// Fits 1..=`max_components` components by EM and keeps the count with
    /// the lowest BIC. `stream` separates random streams under one seed.
    pub fn fit(kind: AttributeKind, xs: &[f64], config: &BayesConfig, stream: u64) -> Mixture {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(stream);
        let max_k = if xs.len() < MIN_MIXTURE_ROWS { 1 } else { config.max_components.max(1).min(xs.len()) };
        let n = xs.len() as f64;
        let mut best: Option<(f64, Mixture)> = None;
        for k in 1..=max_k {
            let m = fit_k(kind, xs, k, config, &mut rng);
            let bic = -2.0 * m.log_likelihood(xs) + (3 * k - 1) as f64 * n.ln();
            if best.as_ref().is_none_or(|(b, _)| bic < *b) {
                best = Some((bic, m));
            }
        }
        best.expect("at least one component count").1
    }
}

fn component(kind: AttributeKind, weight: f64, xs: &[f64], resp: &[f64]) -> MixtureComponent {
    let nk: f64 = resp.iter().sum();
    match kind {
        AttributeKind::Distance => {
            let mu = xs.iter().zip(resp).map(|(x, r)| x * r).sum::<f64>() / nk;
            let var = xs.iter().zip(resp).map(|(x, r)| r * (x - mu).powi(2)).sum::<f64>() / nk;
            MixtureComponent::Gaussian { weight, mu, sigma: var.sqrt().max(SIGMA_FLOOR) }
        }
        AttributeKind::PlanarAngle | AttributeKind::Torsion => {
            let (mut c, mut s) = (0.0, 0.0);
            for (x, r) in xs.iter().zip(resp) {
                let t = x.to_radians();
                c += r * t.cos();
                s += r * t.sin();
            }
            let mu = s.atan2(c).to_degrees();
            let rbar = (c.hypot(s) / nk).min(1.0);
            MixtureComponent::VonMises { weight, mu, kappa: inverse_mean_resultant(rbar).min(KAPPA_CAP) }
        }
    }
}

fn fit_k(kind: AttributeKind, xs: &[f64], k: usize, config: &BayesConfig, rng: &mut ChaCha8Rng) -> Mixture {
    let ones = vec![1.0; xs.len()];
    let pooled = component(kind, 1.0, xs, &ones);
    if k == 1 {
        return Mixture { kind, components: vec![pooled] };
    }
    let mut best: Option<(f64, Mixture)> = None;
    for _ in 0..config.em_restarts.max(1) {
        let components = sample(rng, xs.len(), k)
            .into_iter()
            .map(|i| match pooled {
                MixtureComponent::Gaussian { sigma, .. } => {
                    MixtureComponent::Gaussian { weight: 1.0 / k as f64, mu: xs[i], sigma }
                }
                MixtureComponent::VonMises { kappa, .. } => {
                    MixtureComponent::VonMises { weight: 1.0 / k as f64, mu: xs[i], kappa: kappa.max(1.0) }
                }
            })
            .collect();
        let (m, ll) = em(Mixture { kind, components }, xs, config.max_iterations);
        if best.as_ref().is_none_or(|(b, _)| ll > *b) {
            best = Some((ll, m));
        }
    }
    best.expect("at least one restart").1
}

fn em(mut m: Mixture, xs: &[f64], max_iterations: usize) -> (Mixture, f64) {
    let k = m.components.len();
    let mut resp = vec![vec![0.0; xs.len()]; k];
    let mut prev = f64::NEG_INFINITY;
    for _ in 0..max_iterations {
        let mut ll = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let terms: Vec<f64> = m.components.iter().map(|c| c.weight().ln() + c.log_pdf(x)).collect();
            let total = log_sum_exp(&terms);
            ll += total;
            for j in 0..k {
                resp[j][i] = (terms[j] - total).exp();
            }
        }
        if (ll - prev).abs() <= 1e-10 * (1.0 + ll.abs()) {
            return (m, ll);
        }
        prev = ll;
        let mut next = Vec::with_capacity(k);
        for (j, c) in m.components.iter().enumerate() {
            let nk: f64 = resp[j].iter().sum();
            if nk < 1e-9 {
                next.push(*c);
                continue;
            }
            next.push(component(m.kind, nk / xs.len() as f64, xs, &resp[j]));
        }
        let wsum: f64 = next.iter().map(MixtureComponent::weight).sum();
        for c in &mut next {
            match c {
                MixtureComponent::Gaussian { weight, .. } | MixtureComponent::VonMises { weight, .. } => *weight /= wsum,
            }
        }
        m.components = next;
    }
    log::warn!("EM did not converge in {max_iterations} iterations; keeping the last estimate");
    let ll = m.log_likelihood(xs);
    (m, ll)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassModel {
    pub class: MotifClass,
    pub prior: f64,
    /// Training rows seen for this class.
    pub rows: usize,
    /// One mixture per attribute, in t1..t4, d1..d4, a1..a3 order.
    pub attributes: Vec<Mixture>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesModel {
    pub config: BayesConfig,
    pub classes: Vec<ClassModel>,
}

/// Fits an independent mixture per class and attribute on rows that carry
/// the 11-attribute vector. Priors are add-one smoothed class frequencies;
/// a class with no rows borrows single-component fits on all rows.
pub fn train_bayes(rows: &[LabeledRow], config: BayesConfig) -> Result<BayesModel, SsError> {
    if config.max_components == 0 || config.em_restarts == 0 || config.max_iterations == 0 {
        return Err(SsError::Config("component count, restarts and iterations must be positive".into()));
    }
    let usable: Vec<(MotifClass, [f64; 11])> =
        rows.iter().filter_map(|r| r.fv11.map(|f| (r.label, f.to_array()))).collect();
    if usable.is_empty() {
        return Err(SsError::EmptyTable);
    }
    let total = usable.len() as f64;
    let tasks: Vec<(usize, usize)> = (0..4).flat_map(|c| (0..11).map(move |a| (c, a))).collect();
    let fits: Vec<Mixture> = tasks
        .par_iter()
        .map(|&(c, a)| {
            let class = MotifClass::ALL[c];
            let own: Vec<f64> = usable.iter().filter(|(l, _)| *l == class).map(|(_, f)| f[a]).collect();
            let kind = FeatureVector11::KINDS[a];
            if own.is_empty() {
                let all: Vec<f64> = usable.iter().map(|(_, f)| f[a]).collect();
                let single = BayesConfig { max_components: 1, ..config };
                Mixture::fit(kind, &all, &single, (c * 11 + a) as u64)
            } else {
                Mixture::fit(kind, &own, &config, (c * 11 + a) as u64)
            }
        })
        .collect();
    let mut fits = fits.into_iter();
    let classes = MotifClass::ALL
        .iter()
        .map(|&class| {
            let n = usable.iter().filter(|(l, _)| *l == class).count();
            if n == 0 {
                log::warn!("no training rows labelled {class}; using pooled attribute fits");
            }
            ClassModel {
                class,
                prior: (n as f64 + 1.0) / (total + 4.0),
                rows: n,
                attributes: fits.by_ref().take(11).collect(),
            }
        })
        .collect();
    Ok(BayesModel { config, classes })
}

impl BayesModel {
    /// Class posteriors for one 11-attribute vector, computed in log space.
    pub fn posterior(&self, features: &[f64; 11]) -> [f64; 4] {
        let mut logp = [0.0; 4];
        for (k, cm) in self.classes.iter().enumerate() {
            logp[k] = cm.prior.ln() + cm.attributes.iter().zip(features).map(|(m, &x)| m.log_pdf(x)).sum::<f64>();
        }
        let z = log_sum_exp(&logp);
        logp.map(|l| (l - z).exp())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bayes model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, SsError> {
        serde_json::from_str(s).map_err(|e| SsError::Json(e.to_string()))
    }
}

/// Posterior per class for every point with three neighbours on each side.
/// Chains shorter than seven points come back unclassified.
pub fn classify_bayes(chain_id: &str, chain: &[Vec3], model: &BayesModel) -> ChainClassification {
    let n = chain.len();
    let mut out = ChainClassification::unclassified(chain_id, n);
    if n < 7 {
        log::warn!("chain {chain_id:?} has {n} points; at least 7 are needed");
        return out;
    }
    let calls: Vec<(usize, Option<PointCall>)> = (3..n - 3)
        .into_par_iter()
        .map(|i| {
            let call = feature_vector11(chain, i).ok().map(|f| {
                let scores = model.posterior(&f.to_array());
                PointCall { label: select_class(&scores), scores }
            });
            (i, call)
        })
        .collect();
    for (i, call) in calls {
        out.points[i] = call;
    }
    out
}

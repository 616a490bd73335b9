//! Backbone tracing: peak chains from the critical-point forest, close-peak
//! merging, link/side-chain pruning, cross-resolution matching.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpgraph::CpGraph;
use crate::topo::CpType;
use crate::vec3::{self, Vec3};

pub const MERGE_DISTANCE: f64 = 1.95;
pub const LINK_DISTANCE: f64 = 5.0;
pub const SIDE_CHAIN_DISTANCE: f64 = 4.0;
pub const HIERARCHY_DISTANCE: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("empty chain or reference")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainPoint {
    pub position: Vec3,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideChain {
    /// Index of the backbone peak the branch hangs from.
    pub anchor: usize,
    pub peaks: Vec<ChainPoint>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PeakChain {
    pub peaks: Vec<ChainPoint>,
    /// One slot per link between consecutive peaks.
    pub passes: Vec<Option<ChainPoint>>,
    /// Link indices flagged as jumps.
    pub jumps: Vec<usize>,
    pub side_chains: Vec<SideChain>,
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<Vec3>,
}

impl PeakChain {
    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.peaks.iter().map(|p| p.position).collect()
    }

    pub fn is_jump(&self, link: usize) -> bool {
        self.jumps.contains(&link)
    }

    /// Minimum-image distance between peaks `a` and `b`.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        vec3::norm(vec3::min_image(self.peaks[a].position, self.peaks[b].position, self.lattice))
    }

    /// Peak positions with periodic images chosen so consecutive peaks are
    /// adjacent in space.
    pub fn unwrapped_positions(&self) -> Vec<Vec3> {
        let mut out: Vec<Vec3> = Vec::with_capacity(self.peaks.len());
        for p in &self.peaks {
            match out.last() {
                Some(&prev) => out.push(vec3::add(prev, vec3::min_image(p.position, prev, self.lattice))),
                None => out.push(p.position),
            }
        }
        out
    }

    /// Removes peak `k`, folding its two links into one with no pass.
    fn remove_peak(&mut self, k: usize) -> ChainPoint {
        let removed = self.peaks.remove(k);
        let n_links = self.passes.len();
        if n_links > 0 {
            let link = if k == 0 { 0 } else { k - 1 };
            self.passes.remove(link);
            if k > 0 && k < n_links {
                self.passes[link] = None;
            }
            self.jumps = self
                .jumps
                .iter()
                .filter_map(|&j| match j.cmp(&link) {
                    std::cmp::Ordering::Less => Some(j),
                    std::cmp::Ordering::Equal => None,
                    std::cmp::Ordering::Greater => Some(j - 1),
                })
                .collect();
        }
        for s in &mut self.side_chains {
            if s.anchor > k || (s.anchor == k && k > 0) {
                s.anchor -= 1;
            }
        }
        removed
    }
}

/// Longest simple path in the tree containing `start`, restricted to `alive`
/// nodes; ties go to the lower end index.
fn longest_path(adj: &[Vec<usize>], alive: &[bool], start: usize) -> Vec<usize> {
    let bfs = |from: usize| -> (usize, Vec<usize>) {
        let mut dist = vec![usize::MAX; adj.len()];
        let mut prev = vec![usize::MAX; adj.len()];
        let mut q = VecDeque::from([from]);
        dist[from] = 0;
        let mut far = from;
        while let Some(u) = q.pop_front() {
            if dist[u] > dist[far] || (dist[u] == dist[far] && u < far) {
                far = u;
            }
            for &v in &adj[u] {
                if alive[v] && dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    prev[v] = u;
                    q.push_back(v);
                }
            }
        }
        (far, prev)
    };
    let (a, _) = bfs(start);
    let (b, prev) = bfs(a);
    let mut path = vec![b];
    let mut u = b;
    while u != a {
        u = prev[u];
        path.push(u);
    }
    if path.first() > path.last() {
        path.reverse();
    }
    path
}

/// Decomposes a pruned forest into peak chains. Peaks are linked through
/// passes joined to both; leaf peaks hanging off a branch point become side
/// chains, and the remaining trees are split into longest paths.
pub fn extract_peak_chains(graph: &CpGraph, source: &str) -> Vec<PeakChain> {
    let n = graph.nodes.len();
    let point = |k: usize| ChainPoint { position: graph.nodes[k].position, density: graph.nodes[k].density };
    let is_peak: Vec<bool> = graph.nodes.iter().map(|p| p.cp_type == CpType::Peak).collect();

    // peak-peak adjacency with the pass that joins them
    let node_adj = graph.adjacency();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut via: std::collections::HashMap<(usize, usize), usize> = Default::default();
    for s in 0..n {
        if graph.nodes[s].cp_type != CpType::Pass {
            continue;
        }
        let peaks: Vec<usize> = node_adj[s].iter().map(|&(v, _)| v).filter(|&v| is_peak[v]).collect();
        for a in 0..peaks.len() {
            for b in a + 1..peaks.len() {
                let (u, v) = (peaks[a], peaks[b]);
                adj[u].push(v);
                adj[v].push(u);
                via.insert((u.min(v), u.max(v)), s);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }

    let mut alive = is_peak.clone();
    let mut side: Vec<(usize, usize)> = Vec::new();
    for b in 0..n {
        if !is_peak[b] || adj[b].len() < 3 {
            continue;
        }
        let mut leaves: Vec<usize> = adj[b].iter().copied().filter(|&v| adj[v].len() == 1).collect();
        let inner = adj[b].len() - leaves.len();
        // keep enough leaves to let the chain run through the branch point
        let keep = 2usize.saturating_sub(inner);
        leaves.sort_by(|&x, &y| graph.separation(b, y).total_cmp(&graph.separation(b, x)).then(x.cmp(&y)));
        for &leaf in leaves.iter().skip(keep) {
            alive[leaf] = false;
            side.push((b, leaf));
        }
    }

    let mut chains = Vec::new();
    let mut order: Vec<usize> = (0..n).filter(|&k| alive[k]).collect();
    while let Some(&start) = order.first() {
        let path = longest_path(&adj, &alive, start);
        for &v in &path {
            alive[v] = false;
        }
        order.retain(|&k| alive[k]);
        let mut chain = PeakChain {
            peaks: path.iter().map(|&k| point(k)).collect(),
            passes: path.windows(2).map(|w| via.get(&(w[0].min(w[1]), w[0].max(w[1]))).map(|&s| point(s))).collect(),
            jumps: Vec::new(),
            side_chains: Vec::new(),
            source: source.to_string(),
            lattice: graph.lattice,
        };
        chain.jumps = (0..chain.passes.len()).filter(|&l| chain.distance(l, l + 1) > LINK_DISTANCE).collect();
        for &(b, leaf) in &side {
            if let Some(anchor) = path.iter().position(|&v| v == b) {
                chain.side_chains.push(SideChain { anchor, peaks: vec![point(leaf)] });
            }
        }
        chains.push(chain);
    }
    chains
}

/// Repeatedly merges the closest adjacent pair below `threshold` into its
/// midpoint, keeping the larger density.
pub fn merge_close_peaks(chain: &PeakChain, threshold: f64) -> PeakChain {
    let mut c = chain.clone();
    loop {
        let closest = (0..c.peaks.len().saturating_sub(1))
            .map(|k| (k, c.distance(k, k + 1)))
            .filter(|&(_, d)| d < threshold)
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let Some((k, _)) = closest else { break };
        let a = c.peaks[k];
        let b = c.peaks[k + 1];
        let half = vec3::scale(vec3::min_image(b.position, a.position, c.lattice), 0.5);
        c.peaks[k] = ChainPoint { position: vec3::add(a.position, half), density: a.density.max(b.density) };
        // merging folds link k away; the link after it keeps its pass
        let after = c.passes.get(k + 1).copied().flatten();
        c.remove_peak(k + 1);
        if k + 1 < c.peaks.len() {
            c.passes[k] = after;
        }
    }
    c
}

/// Drops middle peaks of linked triples whose ends are closer than
/// `side_threshold` (closest first, recorded as side chains), then splits
/// the chain at links longer than `link_threshold`. Runs of a single peak
/// are discarded.
pub fn link_and_prune_backbone(chain: &PeakChain, link_threshold: f64, side_threshold: f64) -> Vec<PeakChain> {
    let mut c = chain.clone();
    loop {
        let worst = (1..c.peaks.len().saturating_sub(1))
            .filter(|&b| c.distance(b - 1, b) <= link_threshold && c.distance(b, b + 1) <= link_threshold)
            .map(|b| (b, c.distance(b - 1, b + 1)))
            .filter(|&(_, d)| d < side_threshold)
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let Some((b, _)) = worst else { break };
        let removed = c.remove_peak(b);
        c.side_chains.push(SideChain { anchor: b - 1, peaks: vec![removed] });
    }

    let mut runs = Vec::new();
    let mut start = 0;
    for k in 0..=c.peaks.len() {
        let split = k == c.peaks.len() || (k + 1 < c.peaks.len() && c.distance(k, k + 1) > link_threshold);
        if !split {
            continue;
        }
        let end = (k + 1).min(c.peaks.len());
        if end - start >= 2 {
            runs.push(PeakChain {
                peaks: c.peaks[start..end].to_vec(),
                passes: c.passes[start..end - 1].to_vec(),
                jumps: Vec::new(),
                side_chains: c
                    .side_chains
                    .iter()
                    .filter(|s| s.anchor >= start && s.anchor < end)
                    .map(|s| SideChain { anchor: s.anchor - start, peaks: s.peaks.clone() })
                    .collect(),
                source: c.source.clone(),
                lattice: c.lattice,
            });
        }
        start = end;
    }
    runs
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig {
    pub merge_distance: f64,
    pub link_distance: f64,
    pub side_chain_distance: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig {
            merge_distance: MERGE_DISTANCE,
            link_distance: LINK_DISTANCE,
            side_chain_distance: SIDE_CHAIN_DISTANCE,
        }
    }
}

/// Chains, merge, link and prune in sequence; chains ordered longest first.
pub fn trace_backbone(graph: &CpGraph, source: &str, config: &TraceConfig) -> Vec<PeakChain> {
    let mut out: Vec<PeakChain> = extract_peak_chains(graph, source)
        .iter()
        .map(|c| merge_close_peaks(c, config.merge_distance))
        .flat_map(|c| link_and_prune_backbone(&c, config.link_distance, config.side_chain_distance))
        .collect();
    out.sort_by(|a, b| b.len().cmp(&a.len()));
    out
}

pub fn chains_to_json(chains: &[PeakChain]) -> String {
    serde_json::to_string_pretty(chains).expect("finite values serialize")
}

/// For each low-resolution point, the medium-resolution points assigned to
/// it: every medium point goes to its nearest low point closer than
/// `threshold`.
pub fn match_hierarchy(low: &[Vec3], medium: &[Vec3], threshold: f64, lattice: Option<Vec3>) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); low.len()];
    for (m, &q) in medium.iter().enumerate() {
        let nearest = low
            .iter()
            .enumerate()
            .map(|(l, &p)| (l, vec3::norm(vec3::min_image(q, p, lattice))))
            .filter(|&(_, d)| d < threshold)
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        if let Some((l, _)) = nearest {
            out[l].push(m);
        }
    }
    out
}

/// Mean and population standard deviation of each point's distance to the
/// reference polyline.
pub fn chain_to_axis_distance(points: &[Vec3], reference: &[Vec3]) -> Result<(f64, f64), TraceError> {
    if points.is_empty() || reference.is_empty() {
        return Err(TraceError::Empty);
    }
    let d: Vec<f64> = points
        .iter()
        .map(|&p| {
            if reference.len() == 1 {
                return vec3::dist(p, reference[0]);
            }
            reference
                .windows(2)
                .map(|s| vec3::point_segment_distance(p, s[0], s[1]))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}

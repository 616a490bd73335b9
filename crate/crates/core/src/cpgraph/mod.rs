//! Peak/pass connectivity: separatrix tracing from each pass, edge
//! weighting, and reduction to a minimum spanning forest.

mod forest;
mod path;

pub use forest::{component_count, minimum_spanning_forest, UnionFind};
pub use path::{
    trace_gradient_path, trace_with_offset, GradientPath, PathEnd, PathError, ASCENT_STEP, MAX_ASCENT_STEPS, PEAK_SNAP, STALL_SNAP,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mapio::DensityMap;
use crate::topo::{CpType, CriticalPoint};
use crate::vec3::{self, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightRule {
    /// Map maximum over the density at the pass.
    #[default]
    PassDensity,
    /// Map maximum over the lowest density met along the path.
    PathMinimum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    /// Pass node.
    pub i: usize,
    /// Peak node.
    pub j: usize,
    pub w: f64,
    /// From the pass to the peak.
    pub path: Vec<Vec3>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CpGraph {
    pub nodes: Vec<CriticalPoint>,
    pub edges: Vec<GraphEdge>,
    /// Cell lengths of a periodic map, used for minimum-image distances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<Vec3>,
}

impl CpGraph {
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (k, e) in self.edges.iter().enumerate() {
            adj[e.i].push((e.j, k));
            adj[e.j].push((e.i, k));
        }
        adj
    }

    pub fn degree(&self, n: usize) -> usize {
        self.edges.iter().filter(|e| e.i == n || e.j == n).count()
    }

    pub fn components(&self) -> usize {
        component_count(self.nodes.len(), self.edges.iter().map(|e| (e.i, e.j)))
    }

    pub fn peak_indices(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&k| self.nodes[k].cp_type == CpType::Peak).collect()
    }

    /// Minimum-image separation of two nodes.
    pub fn separation(&self, a: usize, b: usize) -> f64 {
        vec3::norm(vec3::min_image(self.nodes[a].position, self.nodes[b].position, self.lattice))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("finite values serialize")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Connections {
    pub edges: Vec<GraphEdge>,
    /// Passes for which neither trace reached a peak.
    pub isolated_passes: Vec<usize>,
    pub boundary_traces: usize,
    pub stalled_traces: usize,
    pub failed_traces: usize,
}

const SPLIT_RETRY_OFFSETS: [f64; 3] = [2.0, 4.0, 8.0];

enum TraceOutcome {
    Edge(GraphEdge),
    Boundary,
    Stalled,
    Failed,
}

/// Traces both ascending separatrices of every pass in `points` and joins the
/// pass to each peak reached. Indices refer to `points`.
pub fn connect_passes(map: &DensityMap, points: &[CriticalPoint], rule: WeightRule) -> Connections {
    let peak_nodes: Vec<usize> = (0..points.len()).filter(|&k| points[k].cp_type == CpType::Peak).collect();
    let peaks: Vec<Vec3> = peak_nodes.iter().map(|&k| points[k].position).collect();
    let rho_max = map.max_value();
    let passes: Vec<usize> = (0..points.len()).filter(|&k| points[k].cp_type == CpType::Pass).collect();

    let traced: Vec<(usize, [TraceOutcome; 2])> = passes
        .par_iter()
        .map(|&p| {
            let cp = &points[p];
            let axis = cp.ascent_axis().expect("pass has an ascent axis");
            let run = |sign: f64, offset: f64| -> TraceOutcome {
                let dir = vec3::scale(axis, sign);
                match trace_with_offset(map, cp.position, dir, &peaks, offset) {
                    Ok(path) => match path.end {
                        PathEnd::Peak(k) => {
                            let w = match rule {
                                WeightRule::PassDensity => rho_max / cp.density,
                                WeightRule::PathMinimum => {
                                    let low = path
                                        .points
                                        .iter()
                                        .filter_map(|&x| map.sample_cubic(x).ok().map(|s| s.0))
                                        .fold(cp.density, f64::min);
                                    rho_max / low
                                }
                            };
                            if w.is_finite() && w > 0.0 {
                                TraceOutcome::Edge(GraphEdge { i: p, j: peak_nodes[k], w, path: path.points })
                            } else {
                                TraceOutcome::Failed
                            }
                        }
                        PathEnd::Boundary => TraceOutcome::Boundary,
                        PathEnd::Stationary => TraceOutcome::Stalled,
                    },
                    Err(_) => TraceOutcome::Failed,
                }
            };
            let mut pair = [run(1.0, 1.0), run(-1.0, 1.0)];
            // a saddle displaced along its flat axis sends both traces the same
            // way; push further off before giving up on the second peak
            for offset in SPLIT_RETRY_OFFSETS {
                match &pair {
                    [TraceOutcome::Edge(a), TraceOutcome::Edge(b)] if a.j == b.j => {
                        pair = [run(1.0, offset), run(-1.0, offset)];
                    }
                    _ => break,
                }
            }
            (p, pair)
        })
        .collect();

    let mut out = Connections::default();
    for (p, outcomes) in traced {
        let mut found: Vec<GraphEdge> = Vec::new();
        for o in outcomes {
            match o {
                TraceOutcome::Edge(e) => match found.iter_mut().find(|f| f.j == e.j) {
                    // both separatrices reached the same peak: keep the shorter
                    Some(f) => {
                        if path_length(&e.path) < path_length(&f.path) {
                            *f = e;
                        }
                    }
                    None => found.push(e),
                },
                TraceOutcome::Boundary => out.boundary_traces += 1,
                TraceOutcome::Stalled => out.stalled_traces += 1,
                TraceOutcome::Failed => out.failed_traces += 1,
            }
        }
        if found.is_empty() {
            log::warn!("pass {p} has no separatrix reaching a peak");
            out.isolated_passes.push(p);
        }
        out.edges.extend(found);
    }
    out
}

fn path_length(p: &[Vec3]) -> f64 {
    p.windows(2).map(|w| vec3::dist(w[0], w[1])).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphBuild {
    /// Minimum spanning forest over the peaks and passes.
    pub graph: CpGraph,
    /// Every pass-peak connection found before the forest reduction.
    pub candidate_edges: usize,
    pub isolated_passes: usize,
}

/// Keeps the peaks and passes of `points`, connects them, and reduces the
/// connections to a minimum spanning forest.
pub fn build_graph(map: &DensityMap, points: &[CriticalPoint], rule: WeightRule) -> GraphBuild {
    let nodes: Vec<CriticalPoint> = points
        .iter()
        .filter(|p| matches!(p.cp_type, CpType::Peak | CpType::Pass))
        .cloned()
        .collect();
    let conn = connect_passes(map, &nodes, rule);
    let weighted: Vec<(usize, usize, f64)> = conn.edges.iter().map(|e| (e.i, e.j, e.w)).collect();
    let mut keep = minimum_spanning_forest(nodes.len(), &weighted);
    keep.sort_unstable();
    let edges = keep.into_iter().map(|k| conn.edges[k].clone()).collect();
    GraphBuild {
        graph: CpGraph { nodes, edges, lattice: map.lattice() },
        candidate_edges: conn.edges.len(),
        isolated_passes: conn.isolated_passes.len(),
    }
}

/// Drops nodes below `density_floor` with their edges, then any pass left
/// without edges. Node indices are compacted in the original order.
pub fn prune_graph(graph: &CpGraph, density_floor: f64) -> CpGraph {
    let keep: Vec<bool> = graph.nodes.iter().map(|n| n.density >= density_floor).collect();
    let edges: Vec<&GraphEdge> = graph.edges.iter().filter(|e| keep[e.i] && keep[e.j]).collect();
    let mut has_edge = vec![false; graph.nodes.len()];
    for e in &edges {
        has_edge[e.i] = true;
        has_edge[e.j] = true;
    }
    let mut remap = vec![usize::MAX; graph.nodes.len()];
    let mut nodes = Vec::new();
    for (k, n) in graph.nodes.iter().enumerate() {
        if keep[k] && (n.cp_type != CpType::Pass || has_edge[k]) {
            remap[k] = nodes.len();
            nodes.push(n.clone());
        }
    }
    let edges = edges
        .into_iter()
        .map(|e| GraphEdge { i: remap[e.i], j: remap[e.j], w: e.w, path: e.path.clone() })
        .collect();
    CpGraph { nodes, edges, lattice: graph.lattice }
}

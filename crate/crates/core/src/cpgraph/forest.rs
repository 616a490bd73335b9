use std::cmp::Ordering;

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

fn edge_order(a: &(usize, usize, f64), b: &(usize, usize, f64)) -> Ordering {
    let key = |e: &(usize, usize, f64)| (e.0.min(e.1), e.0.max(e.1));
    a.2.total_cmp(&b.2).then(key(a).cmp(&key(b)))
}

/// Kruskal's minimum spanning forest over `n` nodes. Returns indices into
/// `edges` in the order they were accepted; equal weights are taken in
/// lexicographic (low node, high node) order.
pub fn minimum_spanning_forest(n: usize, edges: &[(usize, usize, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by(|&a, &b| edge_order(&edges[a], &edges[b]).then(a.cmp(&b)));
    let mut uf = UnionFind::new(n);
    let mut kept = Vec::new();
    for k in order {
        let (i, j, _) = edges[k];
        if uf.union(i, j) {
            kept.push(k);
        }
    }
    kept
}

/// Number of connected components over `n` nodes.
pub fn component_count(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> usize {
    let mut uf = UnionFind::new(n);
    let mut c = n;
    for (i, j) in edges {
        if uf.union(i, j) {
            c -= 1;
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_keeps_two_lightest() {
        let e = [(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)];
        assert_eq!(minimum_spanning_forest(3, &e), vec![0, 1]);
    }

    #[test]
    fn disjoint_components_give_two_trees() {
        let e = [(0, 1, 1.0), (2, 3, 1.0), (3, 4, 5.0)];
        let f = minimum_spanning_forest(5, &e);
        assert_eq!(f.len(), 3);
        assert_eq!(component_count(5, f.iter().map(|&k| (e[k].0, e[k].1))), 2);
    }

    #[test]
    fn ties_follow_node_order() {
        let e = [(2, 0, 1.0), (1, 0, 1.0), (1, 2, 1.0)];
        // (0,1) then (0,2); (1,2) closes the cycle
        assert_eq!(minimum_spanning_forest(3, &e), vec![1, 0]);
    }

    #[test]
    fn self_loops_and_parallel_edges_are_dropped() {
        let e = [(0, 0, 0.5), (0, 1, 2.0), (1, 0, 1.0)];
        assert_eq!(minimum_spanning_forest(2, &e), vec![2]);
    }
}

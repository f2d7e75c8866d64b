//! Immutable undirected graphs in CSR form, label vectors, homophily and
//! h-hop ego-subgraph extraction.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Undirected simple graph stored as a symmetric CSR adjacency.
///
/// Every undirected edge `{u, v}` appears twice, once in each endpoint's
/// neighbour list. Neighbour lists are strictly increasing and contain no
/// self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
}

impl Graph {
    /// Builds a canonical graph from an arbitrary edge list.
    ///
    /// Edges are symmetrized and deduplicated and self-loops are dropped, so
    /// `[(0, 1), (1, 0), (1, 1)]` yields the single edge `{0, 1}`.
    pub fn from_edges(edges: &[(usize, usize)], num_nodes: usize) -> Result<Self> {
        for &(src, dst) in edges {
            if src >= num_nodes || dst >= num_nodes {
                return Err(Error::EdgeOutOfRange {
                    src,
                    dst,
                    num_nodes,
                });
            }
        }
        let mut counts = vec![0usize; num_nodes + 1];
        for &(u, v) in edges {
            if u != v {
                counts[u + 1] += 1;
                counts[v + 1] += 1;
            }
        }
        for i in 0..num_nodes {
            counts[i + 1] += counts[i];
        }
        let mut cursor = counts.clone();
        let mut cols = vec![0usize; counts[num_nodes]];
        for &(u, v) in edges {
            if u != v {
                cols[cursor[u]] = v;
                cursor[u] += 1;
                cols[cursor[v]] = u;
                cursor[v] += 1;
            }
        }
        // sort + dedup each row, then compact
        let mut row_offsets = Vec::with_capacity(num_nodes + 1);
        let mut col_indices = Vec::with_capacity(cols.len());
        row_offsets.push(0);
        for v in 0..num_nodes {
            let row = &mut cols[counts[v]..counts[v + 1]];
            row.sort_unstable();
            let start = col_indices.len();
            for &u in row.iter() {
                if col_indices.len() == start || *col_indices.last().unwrap() != u {
                    col_indices.push(u);
                }
            }
            row_offsets.push(col_indices.len());
        }
        let graph = Graph {
            row_offsets,
            col_indices,
        };
        debug_assert!(graph.check_invariants().is_ok());
        Ok(graph)
    }

    /// Wraps pre-built CSR arrays after validating every structural invariant.
    pub fn from_csr(row_offsets: Vec<usize>, col_indices: Vec<usize>) -> Result<Self> {
        let graph = Graph {
            row_offsets,
            col_indices,
        };
        graph.check_invariants()?;
        Ok(graph)
    }

    fn check_invariants(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::Config(format!("invalid CSR graph: {reason}")));
        if self.row_offsets.is_empty() || self.row_offsets[0] != 0 {
            return bad("row offsets must start at 0".into());
        }
        if *self.row_offsets.last().unwrap() != self.col_indices.len() {
            return bad("last row offset must equal the number of entries".into());
        }
        let n = self.num_nodes();
        for v in 0..n {
            if self.row_offsets[v] > self.row_offsets[v + 1] {
                return bad(format!("row offsets decrease at node {v}"));
            }
            let nbrs = self.neighbors(v);
            for (i, &u) in nbrs.iter().enumerate() {
                if u >= n {
                    return bad(format!("neighbour {u} of node {v} out of range"));
                }
                if u == v {
                    return bad(format!("self-loop at node {v}"));
                }
                if i > 0 && nbrs[i - 1] >= u {
                    return bad(format!("neighbour list of node {v} not strictly ascending"));
                }
                if self.neighbors(u).binary_search(&v).is_err() {
                    return bad(format!("edge ({v}, {u}) has no reverse entry"));
                }
            }
        }
        Ok(())
    }

    pub fn num_nodes(&self) -> usize {
        self.row_offsets.len() - 1
    }

    /// Number of undirected edges, each counted once.
    pub fn num_edges(&self) -> usize {
        self.col_indices.len() / 2
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.row_offsets[v + 1] - self.row_offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.num_nodes()).map(|v| self.degree(v)).collect()
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.col_indices[self.row_offsets[v]..self.row_offsets[v + 1]]
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.num_nodes() && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Subgraph induced on nodes `0..k`, keeping their numbering.
    pub fn induced_prefix(&self, k: usize) -> Graph {
        let k = k.min(self.num_nodes());
        let mut row_offsets = Vec::with_capacity(k + 1);
        let mut col_indices = Vec::new();
        row_offsets.push(0);
        for v in 0..k {
            let nbrs = self.neighbors(v);
            col_indices.extend_from_slice(&nbrs[..nbrs.partition_point(|&u| u < k)]);
            row_offsets.push(col_indices.len());
        }
        Graph {
            row_offsets,
            col_indices,
        }
    }

    /// Undirected edges `(u, v)` with `u < v`, in CSR order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_nodes()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }
}

/// Class labels for every node of a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<usize>,
    num_classes: usize,
}

impl LabelVector {
    /// Requires every label below `num_classes` and every class to occur.
    pub fn new(labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        let mut seen = vec![false; num_classes];
        for &label in &labels {
            if label >= num_classes {
                return Err(Error::LabelOutOfRange { label, num_classes });
            }
            seen[label] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Config(format!(
                "class {missing} never occurs among {} labels",
                labels.len()
            )));
        }
        Ok(LabelVector {
            labels,
            num_classes,
        })
    }

    /// Infers `num_classes` as `max(label) + 1`.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        let num_classes = labels.iter().max().map_or(0, |m| m + 1);
        Self::new(labels, num_classes)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, v: usize) -> usize {
        self.labels[v]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Node ids grouped by class, ascending within each class.
    pub fn class_members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.num_classes];
        for (v, &label) in self.labels.iter().enumerate() {
            members[label].push(v);
        }
        members
    }
}

/// Fraction of undirected edges whose endpoints share a label.
pub fn homophily_ratio(graph: &Graph, labels: &LabelVector) -> Result<f64> {
    if labels.len() != graph.num_nodes() {
        return Err(Error::LengthMismatch {
            what: "labels",
            expected: graph.num_nodes(),
            actual: labels.len(),
        });
    }
    let total = graph.num_edges();
    if total == 0 {
        return Err(Error::NoEdges);
    }
    let same = graph
        .edges()
        .filter(|&(u, v)| labels.get(u) == labels.get(v))
        .count();
    Ok(same as f64 / total as f64)
}

/// Hop distances from `source`; `None` marks unreachable nodes.
pub fn bfs_distances(graph: &Graph, source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; graph.num_nodes()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let next = dist[v].unwrap() + 1;
        for &u in graph.neighbors(v) {
            if dist[u].is_none() {
                dist[u] = Some(next);
                queue.push_back(u);
            }
        }
    }
    dist
}

/// Induced subgraph on the nodes within a hop radius of a target.
///
/// Local nodes are numbered in BFS discovery order, so the target is always
/// local node 0 and `distances` is non-decreasing. Every prefix of the local
/// numbering that ends on a distance boundary is itself a ball around the
/// target.
#[derive(Debug, Clone, PartialEq)]
pub struct Subgraph {
    pub graph: Graph,
    pub node_map: Vec<usize>,
    pub target_local: usize,
    pub distances: Vec<usize>,
}

impl Subgraph {
    pub fn num_nodes(&self) -> usize {
        self.node_map.len()
    }

    pub fn target(&self) -> usize {
        self.node_map[self.target_local]
    }

    /// Number of local nodes at distance `<= radius` from the target.
    pub fn ball_size(&self, radius: usize) -> usize {
        self.distances.partition_point(|&d| d <= radius)
    }
}

pub fn extract_ego_subgraph(graph: &Graph, target: usize, hops: usize) -> Result<Subgraph> {
    let n = graph.num_nodes();
    if target >= n {
        return Err(Error::NodeOutOfRange {
            node: target,
            num_nodes: n,
        });
    }
    if hops == 0 {
        return Err(Error::Config("ego-subgraph hops must be at least 1".into()));
    }
    let mut local_of = std::collections::HashMap::new();
    let mut node_map = vec![target];
    let mut distances = vec![0usize];
    local_of.insert(target, 0usize);
    let mut head = 0;
    while head < node_map.len() {
        let v = node_map[head];
        let d = distances[head];
        head += 1;
        if d == hops {
            continue;
        }
        for &u in graph.neighbors(v) {
            if !local_of.contains_key(&u) {
                local_of.insert(u, node_map.len());
                node_map.push(u);
                distances.push(d + 1);
            }
        }
    }

    let mut row_offsets = Vec::with_capacity(node_map.len() + 1);
    let mut col_indices = Vec::new();
    row_offsets.push(0);
    for &v in &node_map {
        let start = col_indices.len();
        col_indices.extend(graph.neighbors(v).iter().filter_map(|u| local_of.get(u).copied()));
        col_indices[start..].sort_unstable();
        row_offsets.push(col_indices.len());
    }
    Ok(Subgraph {
        graph: Graph {
            row_offsets,
            col_indices,
        },
        node_map,
        target_local: 0,
        distances,
    })
}

/// Relabels nodes so that old node `v` becomes `perm[v]`.
pub fn permute_nodes(graph: &Graph, perm: &[usize]) -> Result<Graph> {
    let n = graph.num_nodes();
    check_permutation(perm, n)?;
    let edges: Vec<(usize, usize)> = graph.edges().map(|(u, v)| (perm[u], perm[v])).collect();
    Graph::from_edges(&edges, n)
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::NotABijection {
            num_nodes: n,
            reason: format!("length {} != {n}", perm.len()),
        });
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n {
            return Err(Error::NotABijection {
                num_nodes: n,
                reason: format!("image {p} out of range"),
            });
        }
        if std::mem::replace(&mut seen[p], true) {
            return Err(Error::NotABijection {
                num_nodes: n,
                reason: format!("image {p} hit twice"),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        Graph::from_edges(&edges, n).unwrap()
    }

    fn triangle() -> Graph {
        Graph::from_edges(&[(0, 1), (1, 2), (2, 0)], 3).unwrap()
    }

    #[test]
    fn dedup_and_self_loops() {
        let g = Graph::from_edges(&[(0, 1), (1, 0), (1, 1)], 2).unwrap();
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.degrees(), vec![1, 1]);
        assert_eq!(g.neighbors(1), &[0]);
    }

    #[test]
    fn empty_graph() {
        let g = Graph::from_edges(&[], 3).unwrap();
        assert_eq!(g.degrees(), vec![0, 0, 0]);
        assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn triangle_is_symmetrized() {
        let g = triangle();
        assert_eq!(g.degrees(), vec![2, 2, 2]);
        assert_eq!(g.num_edges(), 3);
        assert!(g.has_edge(0, 2) && g.has_edge(2, 0));
    }

    #[test]
    fn out_of_range_edge_is_named() {
        let err = Graph::from_edges(&[(0, 1), (2, 5)], 3).unwrap_err();
        match err {
            Error::EdgeOutOfRange { src, dst, .. } => assert_eq!((src, dst), (2, 5)),
            other => panic!("unexpected error {other}"),
        }
        assert!(err_msg(Graph::from_edges(&[(3, 0)], 3)).contains("(3, 0)"));
    }

    fn err_msg<T: std::fmt::Debug>(r: Result<T>) -> String {
        r.unwrap_err().to_string()
    }

    #[test]
    fn from_csr_rejects_asymmetry() {
        assert!(Graph::from_csr(vec![0, 1, 1], vec![1]).is_err());
        assert!(Graph::from_csr(vec![0, 1, 2], vec![1, 0]).is_ok());
    }

    #[test]
    fn homophily_examples() {
        let labels = LabelVector::new(vec![0, 0, 0], 1).unwrap();
        assert_eq!(homophily_ratio(&triangle(), &labels).unwrap(), 1.0);
        let labels = LabelVector::new(vec![0, 1, 0], 2).unwrap();
        assert_eq!(homophily_ratio(&path(3), &labels).unwrap(), 0.0);
        let empty = Graph::from_edges(&[], 2).unwrap();
        let labels = LabelVector::new(vec![0, 1], 2).unwrap();
        assert!(matches!(homophily_ratio(&empty, &labels), Err(Error::NoEdges)));
    }

    #[test]
    fn label_vector_validation() {
        assert!(LabelVector::new(vec![0, 2], 2).is_err());
        assert!(LabelVector::new(vec![0, 0], 2).is_err());
        assert_eq!(LabelVector::from_labels(vec![1, 0, 2]).unwrap().num_classes(), 3);
    }

    #[test]
    fn ego_subgraph_on_path() {
        let sub = extract_ego_subgraph(&path(4), 0, 2).unwrap();
        assert_eq!(sub.node_map, vec![0, 1, 2]);
        assert_eq!(sub.graph.num_edges(), 2);
        assert!(sub.graph.has_edge(0, 1) && sub.graph.has_edge(1, 2));
        assert_eq!(sub.distances, vec![0, 1, 2]);
        assert_eq!(sub.ball_size(1), 2);
    }

    #[test]
    fn ego_subgraph_of_isolated_node() {
        let g = Graph::from_edges(&[(0, 1)], 3).unwrap();
        let sub = extract_ego_subgraph(&g, 2, 3).unwrap();
        assert_eq!(sub.node_map, vec![2]);
        assert_eq!(sub.graph.num_edges(), 0);
        assert_eq!(sub.target(), 2);
    }

    #[test]
    fn ego_subgraph_keeps_induced_edges() {
        let sub = extract_ego_subgraph(&triangle(), 0, 1).unwrap();
        assert_eq!(sub.num_nodes(), 3);
        assert_eq!(sub.graph.num_edges(), 3);
    }

    #[test]
    fn ego_subgraph_rejects_bad_args() {
        assert!(extract_ego_subgraph(&triangle(), 3, 1).is_err());
        assert!(extract_ego_subgraph(&triangle(), 0, 0).is_err());
    }

    #[test]
    fn permutation_examples() {
        let g = path(3);
        assert_eq!(permute_nodes(&g, &[0, 1, 2]).unwrap(), g);
        let t = triangle();
        assert_eq!(permute_nodes(&t, &[2, 0, 1]).unwrap(), t);
        let swapped = permute_nodes(&g, &[2, 1, 0]).unwrap();
        let mut degs = swapped.degrees();
        degs.sort_unstable();
        assert_eq!(degs, vec![1, 1, 2]);
        assert!(permute_nodes(&g, &[0, 0, 1]).is_err());
        assert!(permute_nodes(&g, &[0, 1]).is_err());
        assert!(permute_nodes(&g, &[0, 1, 3]).is_err());
    }
}

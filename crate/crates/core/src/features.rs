//! Distance-encoding (DE) and degree features relative to a target node.
//!
//! Two encodings are provided. The random-walk encoding stores the landing
//! probabilities `(W^m)_{v,target}` for `m = 1..=k`, with `W = A D^{-1}`. The
//! shortest-path encoding is a one-hot over the hop distances `0..=k` plus a
//! final bucket for nodes that are farther away or unreachable.

use std::fmt;
use std::str::FromStr;

use ndarray::{s, Array2};

use crate::error::{Error, Result};
use crate::graph::{bfs_distances, Graph, Subgraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeVariant {
    Spd,
    Rw,
}

impl fmt::Display for DeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeVariant::Spd => "SPD",
            DeVariant::Rw => "RW",
        })
    }
}

impl FromStr for DeVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spd" => Ok(DeVariant::Spd),
            "rw" => Ok(DeVariant::Rw),
            other => Err(Error::Config(format!("unknown DE variant {other:?} (expected spd|rw)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DeConfig {
    pub variant: DeVariant,
    pub k: usize,
}

impl DeConfig {
    pub const DEFAULT_K: usize = 3;

    pub fn new(variant: DeVariant, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("DE length k must be at least 1".into()));
        }
        Ok(DeConfig { variant, k })
    }

    /// Columns produced by this encoding: `k` for RW, `k + 2` for SPD.
    pub fn width(&self) -> usize {
        match self.variant {
            DeVariant::Rw => self.k,
            DeVariant::Spd => self.k + 2,
        }
    }

    pub fn compute(&self, graph: &Graph, target: usize) -> Result<Array2<f64>> {
        match self.variant {
            DeVariant::Rw => rw_landing_probabilities(graph, target, self.k),
            DeVariant::Spd => spd_onehot(graph, target, self.k),
        }
    }
}

fn check_target(graph: &Graph, target: usize, k: usize) -> Result<()> {
    if target >= graph.num_nodes() {
        return Err(Error::NodeOutOfRange {
            node: target,
            num_nodes: graph.num_nodes(),
        });
    }
    if k == 0 {
        return Err(Error::Config("DE length k must be at least 1".into()));
    }
    Ok(())
}

/// Landing probabilities of `1..=k`-step random walks started at `target`.
///
/// Row `v` holds `[(W)_{v,t}, (W^2)_{v,t}, ..., (W^k)_{v,t}]`, computed with
/// `k` sparse products `p <- W p` from the indicator of `t`. A degree-0 node
/// has an all-zero column in `W`, so probability mass that lands on it is
/// absorbed.
pub fn rw_landing_probabilities(graph: &Graph, target: usize, k: usize) -> Result<Array2<f64>> {
    check_target(graph, target, k)?;
    let n = graph.num_nodes();
    let mut out = Array2::zeros((n, k));
    let mut current = vec![0.0f64; n];
    current[target] = 1.0;
    let mut scaled = vec![0.0f64; n];
    let mut terms = Vec::new();
    for step in 0..k {
        for (u, s) in scaled.iter_mut().enumerate() {
            let deg = graph.degree(u);
            *s = if deg == 0 { 0.0 } else { current[u] / deg as f64 };
        }
        for v in 0..n {
            terms.clear();
            terms.extend(
                graph
                    .neighbors(v)
                    .iter()
                    .map(|&u| scaled[u])
                    .filter(|&x| x != 0.0),
            );
            // summands sorted so the result does not depend on node labelling
            terms.sort_unstable_by(f64::total_cmp);
            current[v] = terms.iter().fold(0.0, |acc, x| acc + x);
        }
        out.column_mut(step)
            .iter_mut()
            .zip(&current)
            .for_each(|(o, &c)| *o = c);
    }
    Ok(out)
}

/// One-hot shortest-path distance buckets `0, 1, ..., k, beyond`.
pub fn spd_onehot(graph: &Graph, target: usize, k: usize) -> Result<Array2<f64>> {
    check_target(graph, target, k)?;
    let dist = bfs_distances(graph, target);
    let mut out = Array2::zeros((graph.num_nodes(), k + 2));
    for (v, d) in dist.iter().enumerate() {
        let bucket = match d {
            Some(d) if *d <= k => *d,
            _ => k + 1,
        };
        out[[v, bucket]] = 1.0;
    }
    Ok(out)
}

/// `ln(1 + deg(v))` for every node.
pub fn degree_feature(graph: &Graph) -> Vec<f64> {
    (0..graph.num_nodes())
        .map(|v| (1.0 + graph.degree(v) as f64).ln())
        .collect()
}

/// Width of the structural block produced by [`assemble_structural_features`].
pub fn structural_width(de: Option<DeConfig>, use_degree: bool) -> usize {
    de.map_or(0, |c| c.width()) + usize::from(use_degree)
}

/// Structural feature rows `[DE | degree]` for every node of an ego-subgraph.
///
/// DE is computed on the subgraph's own adjacency relative to its target.
/// Degrees are read from `parent`, the graph the subgraph was cut from, so
/// that boundary nodes report their true degree.
pub fn assemble_structural_features(
    sub: &Subgraph,
    de: Option<DeConfig>,
    use_degree: bool,
    parent: &Graph,
) -> Result<Array2<f64>> {
    let width = structural_width(de, use_degree);
    if width == 0 {
        return Err(Error::EmptyFeatures);
    }
    let n = sub.num_nodes();
    let mut out = Array2::zeros((n, width));
    let mut col = 0;
    if let Some(cfg) = de {
        let block = cfg.compute(&sub.graph, sub.target_local)?;
        out.slice_mut(s![.., 0..cfg.width()]).assign(&block);
        col = cfg.width();
    }
    if use_degree {
        for (local, &global) in sub.node_map.iter().enumerate() {
            if global >= parent.num_nodes() {
                return Err(Error::NodeOutOfRange {
                    node: global,
                    num_nodes: parent.num_nodes(),
                });
            }
            out[[local, col]] = (1.0 + parent.degree(global) as f64).ln();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::extract_ego_subgraph;

    fn cycle(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edges(&edges, n).unwrap()
    }

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        Graph::from_edges(&edges, n).unwrap()
    }

    #[test]
    fn rw_on_short_path() {
        let de = rw_landing_probabilities(&path(3), 0, 2).unwrap();
        assert_eq!(de.row(0).to_vec(), vec![0.0, 0.5]);
        assert_eq!(de.row(1).to_vec(), vec![1.0, 0.0]);
        assert_eq!(de.row(2).to_vec(), vec![0.0, 0.5]);
    }

    #[test]
    fn rw_return_probabilities_on_cycles() {
        let c3 = rw_landing_probabilities(&cycle(3), 0, 3).unwrap();
        assert_eq!(c3.row(0).to_vec(), vec![0.0, 0.5, 0.25]);
        let c6 = rw_landing_probabilities(&cycle(6), 0, 3).unwrap();
        assert_eq!(c6.row(0).to_vec(), vec![0.0, 0.5, 0.0]);
    }

    #[test]
    fn rw_isolated_target_absorbs() {
        let g = Graph::from_edges(&[(0, 1)], 3).unwrap();
        let de = rw_landing_probabilities(&g, 2, 3).unwrap();
        assert!(de.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn spd_buckets() {
        let de = spd_onehot(&path(4), 0, 2).unwrap();
        let buckets: Vec<usize> = de
            .rows()
            .into_iter()
            .map(|r| r.iter().position(|&x| x == 1.0).unwrap())
            .collect();
        assert_eq!(buckets, vec![0, 1, 2, 3]);
        for row in de.rows() {
            assert_eq!(row.sum(), 1.0);
        }
    }

    #[test]
    fn spd_unreachable_goes_to_last_bucket() {
        let g = Graph::from_edges(&[(0, 1)], 3).unwrap();
        let de = spd_onehot(&g, 0, 3).unwrap();
        assert_eq!(de[[0, 0]], 1.0);
        assert_eq!(de[[2, 4]], 1.0);
    }

    #[test]
    fn degree_examples() {
        let g = Graph::from_edges(&[(0, 1), (1, 2), (2, 0)], 4).unwrap();
        let d = degree_feature(&g);
        assert_eq!(d[3], 0.0);
        assert_eq!(d[0], 3f64.ln());
        let star: Vec<_> = (1..8).map(|i| (0, i)).collect();
        let star = Graph::from_edges(&star, 8).unwrap();
        assert_eq!(degree_feature(&star)[0], 8f64.ln());
    }

    #[test]
    fn assembled_widths() {
        let tri = Graph::from_edges(&[(0, 1), (1, 2), (2, 0)], 3).unwrap();
        let sub = extract_ego_subgraph(&tri, 0, 1).unwrap();
        let spd = DeConfig::new(DeVariant::Spd, 2).unwrap();
        let rw = DeConfig::new(DeVariant::Rw, 3).unwrap();
        let x = assemble_structural_features(&sub, Some(spd), true, &tri).unwrap();
        assert_eq!(x.ncols(), 5);
        assert_eq!(x[[1, 4]], 3f64.ln());
        assert_eq!(assemble_structural_features(&sub, None, true, &tri).unwrap().ncols(), 1);
        assert_eq!(assemble_structural_features(&sub, Some(rw), false, &tri).unwrap().ncols(), 3);
        assert!(matches!(
            assemble_structural_features(&sub, None, false, &tri),
            Err(Error::EmptyFeatures)
        ));
    }

    #[test]
    fn degree_comes_from_parent_graph() {
        let g = path(4);
        let sub = extract_ego_subgraph(&g, 0, 1).unwrap();
        let x = assemble_structural_features(&sub, None, true, &g).unwrap();
        // node 1 has degree 1 inside the subgraph but 2 in the parent
        assert_eq!(x[[1, 0]], 3f64.ln());
    }

    #[test]
    fn bad_arguments() {
        assert!(rw_landing_probabilities(&path(3), 5, 2).is_err());
        assert!(spd_onehot(&path(3), 0, 0).is_err());
        assert!(DeConfig::new(DeVariant::Rw, 0).is_err());
        assert_eq!("Rw".parse::<DeVariant>().unwrap(), DeVariant::Rw);
        assert!("xyz".parse::<DeVariant>().is_err());
    }
}

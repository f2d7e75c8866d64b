//! Slow reference implementations that share no code with the library.

use ndarray::Array2;

use crate::graph::Graph;

/// Landing probabilities by enumerating every walk of length `1..=k` that
/// starts at `target`. A walk that reaches a node without neighbours stops
/// there and its mass is lost, matching a zero column of `A D^{-1}`.
pub fn rw_by_walk_enumeration(graph: &Graph, target: usize, k: usize) -> Array2<f64> {
    let mut out = Array2::zeros((graph.num_nodes(), k));
    fn walk(g: &Graph, v: usize, depth: usize, prob: f64, k: usize, out: &mut Array2<f64>) {
        if depth > 0 {
            out[[v, depth - 1]] += prob;
        }
        if depth == k {
            return;
        }
        let nbrs = g.neighbors(v);
        if nbrs.is_empty() {
            return;
        }
        let step = prob / nbrs.len() as f64;
        for &u in nbrs {
            walk(g, u, depth + 1, step, k, out);
        }
    }
    walk(graph, target, 0, 1.0, k, &mut out);
    out
}

/// All-pairs hop distances by Floyd-Warshall on a dense matrix; `None`
/// when unreachable.
pub fn all_pairs_hops(graph: &Graph) -> Vec<Vec<Option<usize>>> {
    let n = graph.num_nodes();
    const INF: usize = usize::MAX / 4;
    let mut d = vec![vec![INF; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        row[u] = 0;
        for &v in graph.neighbors(u) {
            row[v] = 1;
        }
    }
    for m in 0..n {
        for i in 0..n {
            if d[i][m] == INF {
                continue;
            }
            for j in 0..n {
                let via = d[i][m] + d[m][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d.into_iter()
        .map(|row| row.into_iter().map(|x| (x < INF).then_some(x)).collect())
        .collect()
}

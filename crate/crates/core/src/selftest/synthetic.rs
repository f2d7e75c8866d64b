use rand::seq::SliceRandom;
use rand::Rng;

use crate::data::{Dataset, FeatureTable};
use crate::graph::{Graph, LabelVector};

/// Erdos-Renyi graph with edge probability `p`.
pub fn random_graph(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(&edges, n).expect("generated edges are in range")
}

/// Connected graph: a random spanning tree plus each remaining pair with
/// probability `p`.
pub fn random_connected_graph(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 1..n {
        let parent = order[rng.random_range(0..i)];
        edges.push((order[i], parent));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(&edges, n).expect("generated edges are in range")
}

/// A uniformly random permutation `perm[old] = new`.
pub fn random_permutation(n: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

/// Random graph on the same nodes with about the same edge density.
pub fn rewire(graph: &Graph, rng: &mut impl Rng) -> Graph {
    let n = graph.num_nodes();
    let p = if n > 1 {
        2.0 * graph.num_edges() as f64 / (n * (n - 1)) as f64
    } else {
        0.0
    };
    random_graph(n, p.max(0.1), rng)
}

/// Non-negative features with roughly `density` non-zeros per entry.
pub fn random_features(n: usize, dim: usize, density: f64, rng: &mut impl Rng) -> FeatureTable {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..dim)
                .map(|_| if rng.random::<f64>() < density { rng.random_range(0.1..1.0) } else { 0.0 })
                .collect()
        })
        .collect();
    FeatureTable::from_rows(&rows).expect("finite features")
}

/// Labels for `n` nodes with every one of `classes` classes present.
pub fn random_labels(n: usize, classes: usize, rng: &mut impl Rng) -> LabelVector {
    assert!(n >= classes && classes > 0);
    let mut labels: Vec<usize> = (0..n).map(|i| if i < classes { i } else { rng.random_range(0..classes) }).collect();
    labels.shuffle(rng);
    LabelVector::new(labels, classes).expect("every class present")
}

pub fn random_dataset(n: usize, p: f64, dim: usize, classes: usize, rng: &mut impl Rng) -> Dataset {
    let graph = random_graph(n, p, rng);
    let features = random_features(n, dim, 0.3, rng);
    let labels = random_labels(n, classes, rng);
    Dataset::new("random".into(), graph, features, labels).expect("consistent parts")
}

/// Disjoint stars of three sizes: hubs of degree 3, 6 or 9
/// are the only nodes with those degrees, leaves have degree 1 or 2.
/// Labels: 0 for leaves, then one class per hub size. Degree alone
/// determines the label, and raw features carry no signal.
pub fn degree_labeled_dataset(copies: usize, rng: &mut impl Rng) -> Dataset {
    let sizes = [3usize, 6, 9];
    let mut edges = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..copies {
        for (class, &size) in sizes.iter().enumerate() {
            let hub = labels.len();
            labels.push(class + 1);
            for _ in 0..size {
                let leaf = labels.len();
                labels.push(0);
                edges.push((hub, leaf));
            }
        }
    }
    // pair up consecutive leaves so leaves have degree 1 or 2; hub degrees are untouched
    let leaves: Vec<usize> = (0..labels.len()).filter(|&v| labels[v] == 0).collect();
    for w in leaves.windows(2).step_by(2) {
        edges.push((w[0], w[1]));
    }
    let n = labels.len();
    let graph = Graph::from_edges(&edges, n).expect("edges in range");
    let features = random_features(n, 4, 0.5, rng);
    Dataset::new(
        "degree-labeled".into(),
        graph,
        features,
        LabelVector::new(labels, sizes.len() + 1).expect("all classes present"),
    )
    .expect("consistent parts")
}

/// Two-community graph whose labels are the communities and whose raw
/// features are noisy class indicators.
pub fn planted_partition_dataset(n: usize, p_in: f64, p_out: f64, rng: &mut impl Rng) -> Dataset {
    let labels: Vec<usize> = (0..n).map(|v| v % 2).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if labels[u] == labels[v] { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let rows: Vec<Vec<f64>> = labels
        .iter()
        .map(|&y| {
            (0..8)
                .map(|j| {
                    let signal = if j % 2 == y && rng.random::<f64>() < 0.6 { 1.0 } else { 0.0 };
                    let noise = if rng.random::<f64>() < 0.15 { 1.0 } else { 0.0 };
                    f64::max(signal, noise)
                })
                .collect()
        })
        .collect();
    Dataset::new(
        "planted".into(),
        Graph::from_edges(&edges, n).expect("edges in range"),
        FeatureTable::from_rows(&rows).expect("finite"),
        LabelVector::new(labels, 2).expect("both classes present"),
    )
    .expect("consistent parts")
}

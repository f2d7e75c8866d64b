use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use ndarray::{s, Array2};
use rayon::prelude::*;

use super::config::ModelConfig;
use crate::error::Result;
use crate::features::{assemble_structural_features, DeConfig};
use crate::graph::{extract_ego_subgraph, Graph};

/// Everything the network needs about one target node, independent of the
/// trainable parameters.
///
/// Structural features are computed on the full `hops`-hop ego-subgraph,
/// then only the ball that can reach the target within the layer budget is
/// kept. Local numbering is BFS order, so the target is local node 0 and
/// `ball_sizes[r]` is the number of local nodes within distance `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSample {
    pub target: usize,
    pub nodes: Vec<usize>,
    pub adjacency: Graph,
    pub ball_sizes: Vec<usize>,
    pub structural: Array2<f64>,
}

impl TargetSample {
    pub fn build(graph: &Graph, target: usize, config: &ModelConfig) -> Result<Self> {
        let radius = config.receptive_radius();
        if radius == 0 {
            // only the target's own raw features are used
            return Ok(TargetSample {
                target,
                nodes: vec![target],
                adjacency: Graph::from_edges(&[], 1)?,
                ball_sizes: vec![1],
                structural: Array2::zeros((1, config.structural_width())),
            });
        }
        let sub = extract_ego_subgraph(graph, target, config.hops())?;
        let structural = if config.structural_width() > 0 {
            assemble_structural_features(&sub, config.de, config.use_degree, graph)?
        } else {
            Array2::zeros((sub.num_nodes(), 0))
        };
        let ball_sizes: Vec<usize> = (0..=radius).map(|r| sub.ball_size(r)).collect();
        let keep = ball_sizes[radius];
        Ok(TargetSample {
            target,
            nodes: sub.node_map[..keep].to_vec(),
            adjacency: sub.graph.induced_prefix(keep),
            ball_sizes,
            structural: structural.slice(s![0..keep, ..]).to_owned(),
        })
    }

    pub fn radius(&self) -> usize {
        self.ball_sizes.len() - 1
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Local nodes within distance `r` of the target (clamped to the kept ball).
    pub fn rows_within(&self, r: usize) -> usize {
        self.ball_sizes[r.min(self.radius())]
    }
}

pub fn build_samples(graph: &Graph, config: &ModelConfig) -> Result<Vec<TargetSample>> {
    (0..graph.num_nodes())
        .into_par_iter()
        .map(|v| TargetSample::build(graph, v, config))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct SampleKey {
    de: Option<DeConfig>,
    use_degree: bool,
    hops: usize,
    radius: usize,
}

impl SampleKey {
    fn of(config: &ModelConfig) -> Self {
        SampleKey {
            de: config.de,
            use_degree: config.use_degree,
            hops: config.hops(),
            radius: config.receptive_radius(),
        }
    }
}

/// Per-graph memo of sample sets keyed by the options that shape them.
///
/// Caching can be switched off, in which case every call rebuilds.
#[derive(Debug, Default)]
pub struct SampleCache {
    enabled: bool,
    map: Mutex<HashMap<SampleKey, Arc<Vec<TargetSample>>>>,
}

impl SampleCache {
    pub fn new(enabled: bool) -> Self {
        SampleCache {
            enabled,
            map: Mutex::default(),
        }
    }

    pub fn get(&self, graph: &Graph, config: &ModelConfig) -> Result<Arc<Vec<TargetSample>>> {
        if !self.enabled {
            return Ok(Arc::new(build_samples(graph, config)?));
        }
        let key = SampleKey::of(config);
        if let Some(hit) = self.map.lock().expect("sample cache poisoned").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let built = Arc::new(build_samples(graph, config)?);
        self.map
            .lock()
            .expect("sample cache poisoned")
            .entry(key)
            .or_insert_with(|| Arc::clone(&built));
        Ok(built)
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("sample cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::DeVariant;
    use crate::model::Preset;

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_edges(&edges, n).unwrap()
    }

    #[test]
    fn pruned_to_layer_radius() {
        let g = path(8);
        let mut cfg = ModelConfig::preset(Preset::M3, Some(DeVariant::Rw)).unwrap();
        cfg.num_layers = 2;
        let s = TargetSample::build(&g, 4, &cfg).unwrap();
        // hops = 3 for DE, but only the 2-ball can reach the target
        assert_eq!(s.ball_sizes, vec![1, 3, 5]);
        assert_eq!(s.nodes, vec![4, 3, 5, 2, 6]);
        assert_eq!(s.adjacency.num_edges(), 4);
        assert_eq!(s.structural.dim(), (5, 4));
    }

    #[test]
    fn mlp_sample_is_the_target() {
        let g = path(3);
        let cfg = ModelConfig::preset(Preset::M6, None).unwrap();
        let s = TargetSample::build(&g, 1, &cfg).unwrap();
        assert_eq!(s.nodes, vec![1]);
        assert_eq!(s.radius(), 0);
    }

    #[test]
    fn cache_reuses_and_can_be_disabled() {
        let g = path(5);
        let a = ModelConfig::preset(Preset::M1, Some(DeVariant::Spd)).unwrap();
        let b = ModelConfig::preset(Preset::M2, Some(DeVariant::Spd)).unwrap();
        let cache = SampleCache::new(true);
        let x = cache.get(&g, &a).unwrap();
        let y = cache.get(&g, &b).unwrap();
        assert!(Arc::ptr_eq(&x, &y));
        let off = SampleCache::new(false);
        let z = off.get(&g, &a).unwrap();
        assert_eq!(*z, *x);
        assert!(off.is_empty());
    }
}

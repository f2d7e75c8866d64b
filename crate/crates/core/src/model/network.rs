use std::collections::BTreeMap;

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{ModelConfig, RawInjection};
use super::sample::TargetSample;
use crate::data::FeatureTable;
use crate::error::{Error, Result};
use crate::graph::Subgraph;
use crate::nn::layers::{DenseCache, SageCache};
use crate::nn::{
    dropout_forward, glorot_limit, mean_aggregate, mean_aggregate_backward, Activation, DenseLayer, Grads, ParamId,
    Params, SageLayer,
};

/// Trainable tensors that multiply raw node features.
///
/// Raw features are projected once per pass (`X W`) and the per-node rows
/// are looked up by the samples that need them. Gradients flow back as rows
/// of `d(X W)` and are turned into weight gradients with `X^T d(X W)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RawSlot {
    FirstSelf,
    FirstNeigh,
    Head,
}

impl RawSlot {
    const ALL: [RawSlot; 3] = [RawSlot::FirstSelf, RawSlot::FirstNeigh, RawSlot::Head];

    fn index(self) -> usize {
        self as usize
    }
}

/// `X W` for every raw slot the network uses.
#[derive(Debug, Clone, Default)]
pub struct Projections {
    slots: [Option<Array2<f64>>; 3],
}

impl Projections {
    pub fn get(&self, slot: RawSlot) -> Option<&Array2<f64>> {
        self.slots[slot.index()].as_ref()
    }

    fn need(&self, slot: RawSlot) -> &Array2<f64> {
        self.get(slot).expect("projection computed for every allocated slot")
    }
}

/// Sparse rows of `d(X W)` per slot, keyed by global node id.
#[derive(Debug, Clone, Default)]
pub struct RawGrads {
    rows: [BTreeMap<usize, Array1<f64>>; 3],
}

impl RawGrads {
    fn add(&mut self, slot: RawSlot, node: usize, row: ndarray::ArrayView1<f64>) {
        self.rows[slot.index()]
            .entry(node)
            .and_modify(|r| *r += &row)
            .or_insert_with(|| row.to_owned());
    }

    pub fn merge(&mut self, other: RawGrads) {
        for (mine, theirs) in self.rows.iter_mut().zip(other.rows) {
            for (node, row) in theirs {
                match mine.get_mut(&node) {
                    Some(r) => *r += &row,
                    None => {
                        mine.insert(node, row);
                    }
                }
            }
        }
    }
}

/// Gradient buffers filled by one worker.
#[derive(Debug, Clone)]
pub struct SampleGrads {
    pub params: Grads,
    pub raw: RawGrads,
}

impl SampleGrads {
    pub fn new(params: &Params) -> Self {
        SampleGrads {
            params: Grads::for_params(params),
            raw: RawGrads::default(),
        }
    }

    pub fn merge(&mut self, other: SampleGrads) {
        self.params.merge(other.params);
        self.raw.merge(other.raw);
    }
}

/// Stack of SAGE-mean layers over an ego-subgraph followed by a head that
/// reads the target's final representation.
///
/// * raw features `First`: the first layer sees `[structural | raw]` for
///   every node; the raw half is handled through projections.
/// * raw features `Last`: the head is `dense([h_target | x_target]) -> ReLU
///   -> dropout -> dense`.
/// * otherwise the head is a single dense map to class logits.
///
/// With no structural features and raw features only at the end there is no
/// propagation at all and the model is a two-layer MLP on the target's raw
/// features.
#[derive(Debug, Clone)]
pub struct Network {
    pub config: ModelConfig,
    pub feature_dim: usize,
    pub num_classes: usize,
    pub layers: Vec<SageLayer>,
    raw: [Option<ParamId>; 3],
    pub head_hidden: Option<DenseLayer>,
    pub output: DenseLayer,
}

struct Trace {
    /// Input of every SAGE layer (after the previous layer's dropout).
    inputs: Vec<Array2<f64>>,
    caches: Vec<SageCache>,
    masks: Vec<Option<Array2<f64>>>,
    /// Final target representation, `1 x hidden` (or `1 x 0` for the MLP).
    z: Array2<f64>,
    head: Option<(DenseCache, Option<Array2<f64>>)>,
    head_out: Array2<f64>,
    out_cache: DenseCache,
}

fn gather(p: &Array2<f64>, nodes: &[usize]) -> Array2<f64> {
    p.select(Axis(0), nodes)
}

fn apply_mask(d: &mut Array2<f64>, mask: &Option<Array2<f64>>) {
    if let Some(mask) = mask {
        *d *= mask;
    }
}

impl Network {
    /// Allocates all tensors with Glorot-uniform weights (drawn from a
    /// generator seeded with `seed`) and zero biases.
    pub fn new(config: ModelConfig, feature_dim: usize, num_classes: usize, seed: u64) -> Result<(Self, Params)> {
        config.validate()?;
        if num_classes == 0 {
            return Err(Error::Config("need at least one class".into()));
        }
        if config.raw_injection != RawInjection::None && feature_dim == 0 {
            return Err(Error::Config("raw features requested but the dataset has none".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Params::new();
        let hidden = config.hidden_dim;
        let s = config.structural_width();
        let mut raw = [None; 3];

        let mut layers = Vec::new();
        if !config.is_mlp() {
            let d_first = if config.raw_injection == RawInjection::First {
                feature_dim
            } else {
                0
            };
            for i in 0..config.num_layers {
                let (in_dim, fan_in) = if i == 0 {
                    (s, 2 * (s + d_first))
                } else {
                    (hidden, 2 * hidden)
                };
                let name = format!("sage{i}");
                layers.push(SageLayer::new(&mut params, &name, in_dim, hidden, fan_in, Activation::Relu, &mut rng));
                if i == 0 && d_first > 0 {
                    let limit = glorot_limit(fan_in, hidden);
                    raw[RawSlot::FirstSelf.index()] =
                        Some(params.add_uniform("sage0.w_self_raw", feature_dim, hidden, limit, &mut rng));
                    raw[RawSlot::FirstNeigh.index()] =
                        Some(params.add_uniform("sage0.w_neigh_raw", feature_dim, hidden, limit, &mut rng));
                }
            }
        }

        let head_hidden = if config.raw_injection == RawInjection::Last {
            let h_part = if config.is_mlp() { 0 } else { hidden };
            let fan_in = h_part + feature_dim;
            let layer = DenseLayer::new(&mut params, "head.hidden", h_part, hidden, fan_in, Activation::Relu, &mut rng);
            raw[RawSlot::Head.index()] = Some(params.add_uniform(
                "head.w_raw",
                feature_dim,
                hidden,
                glorot_limit(fan_in, hidden),
                &mut rng,
            ));
            Some(layer)
        } else {
            None
        };
        let output = DenseLayer::new(&mut params, "head.out", hidden, num_classes, hidden, Activation::Identity, &mut rng);
        Ok((
            Network {
                config,
                feature_dim,
                num_classes,
                layers,
                raw,
                head_hidden,
                output,
            },
            params,
        ))
    }

    pub fn raw_param(&self, slot: RawSlot) -> Option<ParamId> {
        self.raw[slot.index()]
    }

    /// Projects raw features through every raw slot in use.
    pub fn project_all(&self, params: &Params, features: &FeatureTable) -> Result<Projections> {
        if features.dim() != self.feature_dim && self.raw.iter().any(Option::is_some) {
            return Err(Error::DimensionMismatch {
                context: "raw feature width",
                expected: self.feature_dim,
                actual: features.dim(),
            });
        }
        let mut proj = Projections::default();
        for slot in RawSlot::ALL {
            if let Some(id) = self.raw_param(slot) {
                proj.slots[slot.index()] = Some(features.project(params.value(id).view()));
            }
        }
        Ok(proj)
    }

    /// Adds `X^T d(X W)` for every slot into the weight gradients.
    pub fn accumulate_raw_grads(&self, params: &mut Params, features: &FeatureTable, raw: &RawGrads) {
        for slot in RawSlot::ALL {
            let Some(id) = self.raw_param(slot) else { continue };
            let grad = params.grad_mut(id);
            for (&v, d_row) in &raw.rows[slot.index()] {
                for (c, x) in features.nonzeros(v) {
                    grad.row_mut(c).scaled_add(x, d_row);
                }
            }
        }
    }

    /// Pre-activation contribution of raw features to the first layer for
    /// the first `out_rows` local nodes.
    fn first_raw_term(
        &self,
        proj: &Projections,
        adj: &crate::graph::Graph,
        nodes: &[usize],
        out_rows: usize,
    ) -> Result<Option<Array2<f64>>> {
        if self.raw_param(RawSlot::FirstSelf).is_none() {
            return Ok(None);
        }
        let own = gather(proj.need(RawSlot::FirstSelf), &nodes[..out_rows]);
        let neigh = gather(proj.need(RawSlot::FirstNeigh), nodes);
        Ok(Some(own + mean_aggregate(adj, neigh.view(), out_rows)?))
    }

    fn forward(
        &self,
        params: &Params,
        proj: &Projections,
        sample: &TargetSample,
        dropout: Option<(f64, &mut ChaCha8Rng)>,
    ) -> Result<(Array1<f64>, Trace)> {
        let (p, mut rng) = match dropout {
            Some((p, rng)) => (p, Some(rng)),
            None => (0.0, None),
        };
        let training = rng.is_some();
        let mut drop = |x: &Array2<f64>| match rng.as_deref_mut() {
            Some(r) => dropout_forward(x, p, r, training),
            None => (x.clone(), None),
        };

        let num_layers = self.layers.len();
        let mut inputs = Vec::with_capacity(num_layers);
        let mut caches = Vec::with_capacity(num_layers);
        let mut masks = Vec::with_capacity(num_layers);
        let mut h = sample.structural.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let out_rows = sample.rows_within(num_layers - i - 1);
            let extra = if i == 0 {
                self.first_raw_term(proj, &sample.adjacency, &sample.nodes, out_rows)?
            } else {
                None
            };
            let (out, cache) = layer.forward(params, &sample.adjacency, h.view(), out_rows, extra.as_ref().map(|e| e.view()))?;
            let (dropped, mask) = drop(&out);
            inputs.push(h);
            caches.push(cache);
            masks.push(mask);
            h = dropped;
        }
        let z = if self.layers.is_empty() {
            Array2::zeros((1, 0))
        } else {
            h.slice(s![0..1, ..]).to_owned()
        };

        let (head, head_out) = match &self.head_hidden {
            Some(layer) => {
                let extra = proj.need(RawSlot::Head).slice(s![sample.target..sample.target + 1, ..]).to_owned();
                let (a, cache) = layer.forward(params, z.view(), Some(extra.view()))?;
                let (dropped, mask) = drop(&a);
                (Some((cache, mask)), dropped)
            }
            None => (None, z.clone()),
        };
        let (logits, out_cache) = self.output.forward(params, head_out.view(), None)?;
        Ok((
            logits.row(0).to_owned(),
            Trace {
                inputs,
                caches,
                masks,
                z,
                head,
                head_out,
                out_cache,
            },
        ))
    }

    fn backward(
        &self,
        params: &Params,
        sample: &TargetSample,
        trace: &Trace,
        d_logits: ArrayView2<f64>,
        grads: &mut SampleGrads,
    ) {
        let want_z = !self.layers.is_empty();
        let (_, d_head_out) = self.output.backward(
            params,
            &mut grads.params,
            trace.head_out.view(),
            &trace.out_cache,
            d_logits,
            want_z || self.head_hidden.is_some(),
        );
        let mut d_z = d_head_out;
        if let (Some(layer), Some((cache, mask))) = (&self.head_hidden, &trace.head) {
            let mut d_a = d_z.expect("head output gradient requested");
            apply_mask(&mut d_a, mask);
            let (d_pre, d_in) = layer.backward(params, &mut grads.params, trace.z.view(), cache, d_a.view(), want_z);
            grads.raw.add(RawSlot::Head, sample.target, d_pre.row(0));
            d_z = d_in;
        }
        if !want_z {
            return;
        }
        let mut d_h = d_z.expect("target representation gradient requested");
        for i in (0..self.layers.len()).rev() {
            apply_mask(&mut d_h, &trace.masks[i]);
            let input = &trace.inputs[i];
            let (d_pre, d_in) = self.layers[i].backward(
                params,
                &mut grads.params,
                &sample.adjacency,
                input.view(),
                &trace.caches[i],
                d_h.view(),
                i > 0,
            );
            if i == 0 && self.raw_param(RawSlot::FirstSelf).is_some() {
                for (v, row) in d_pre.rows().into_iter().enumerate() {
                    grads.raw.add(RawSlot::FirstSelf, sample.nodes[v], row);
                }
                let d_neigh = mean_aggregate_backward(&sample.adjacency, d_pre.view(), input.nrows());
                for (u, row) in d_neigh.rows().into_iter().enumerate() {
                    if row.iter().any(|&x| x != 0.0) {
                        grads.raw.add(RawSlot::FirstNeigh, sample.nodes[u], row);
                    }
                }
            }
            if let Some(d_in) = d_in {
                d_h = d_in;
            }
        }
    }

    /// Eval-mode class logits for one target.
    pub fn logits(&self, params: &Params, proj: &Projections, sample: &TargetSample) -> Result<Array1<f64>> {
        Ok(self.forward(params, proj, sample, None)?.0)
    }

    /// Forward and backward pass for one target. The logit gradient is
    /// `d_logits = scale * dL/dlogits`; returns the unscaled sample loss.
    pub fn sample_gradient(
        &self,
        params: &Params,
        proj: &Projections,
        sample: &TargetSample,
        label: usize,
        scale: f64,
        dropout: Option<(f64, &mut ChaCha8Rng)>,
        grads: &mut SampleGrads,
    ) -> Result<f64> {
        let (logits, trace) = self.forward(params, proj, sample, dropout)?;
        let (loss, d) = crate::nn::softmax_cross_entropy_row(logits.view(), label)?;
        let d = (d * scale).insert_axis(Axis(0));
        self.backward(params, sample, &trace, d.view(), grads);
        Ok(loss)
    }

    /// Sample loss under a given dropout draw, without gradients.
    pub fn sample_loss(
        &self,
        params: &Params,
        proj: &Projections,
        sample: &TargetSample,
        label: usize,
        dropout: Option<(f64, &mut ChaCha8Rng)>,
    ) -> Result<f64> {
        let (logits, _) = self.forward(params, proj, sample, dropout)?;
        Ok(crate::nn::softmax_cross_entropy_row(logits.view(), label)?.0)
    }

    /// Eval-mode logits computed by running every layer over every node of
    /// an ego-subgraph, with no pruning. `structural` holds one row per
    /// subgraph node.
    pub fn forward_subgraph(
        &self,
        params: &Params,
        proj: &Projections,
        sub: &Subgraph,
        structural: &Array2<f64>,
    ) -> Result<Array1<f64>> {
        let n = sub.num_nodes();
        let mut h = structural.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let extra = if i == 0 {
                self.first_raw_term(proj, &sub.graph, &sub.node_map, n)?
            } else {
                None
            };
            h = layer.forward(params, &sub.graph, h.view(), n, extra.as_ref().map(|e| e.view()))?.0;
        }
        let z = if self.layers.is_empty() {
            Array2::zeros((1, 0))
        } else {
            h.slice(s![sub.target_local..sub.target_local + 1, ..]).to_owned()
        };
        let head_out = match &self.head_hidden {
            Some(layer) => {
                let t = sub.target();
                let extra = proj.need(RawSlot::Head).slice(s![t..t + 1, ..]).to_owned();
                layer.forward(params, z.view(), Some(extra.view()))?.0
            }
            None => z,
        };
        Ok(self.output.forward(params, head_out.view(), None)?.0.row(0).to_owned())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::DeVariant;
    use crate::graph::Graph;
    use crate::model::{ModelConfig, Preset};

    #[test]
    fn shapes_per_preset() {
        for p in Preset::ALL {
            let cfg = ModelConfig::preset(p, p.uses_de().then_some(DeVariant::Spd)).unwrap();
            let (net, params) = Network::new(cfg, 7, 3, 0).unwrap();
            assert_eq!(net.layers.is_empty(), p == Preset::M6, "{p}");
            assert_eq!(net.head_hidden.is_some(), cfg.raw_injection == RawInjection::Last, "{p}");
            assert_eq!(params.value(net.output.bias).dim(), (1, 3));
            assert!(params.ids().all(|id| params.value(id).iter().all(|x| x.is_finite())));
        }
    }

    #[test]
    fn biases_start_at_zero_and_seed_fixes_weights() {
        let cfg = ModelConfig::preset(Preset::M1, Some(DeVariant::Rw)).unwrap();
        let (_, a) = Network::new(cfg, 4, 2, 11).unwrap();
        let (_, b) = Network::new(cfg, 4, 2, 11).unwrap();
        let (_, c) = Network::new(cfg, 4, 2, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        for t in a.tensors() {
            if t.name.ends_with("bias") {
                assert!(t.value.iter().all(|&x| x == 0.0));
            }
        }
    }

    #[test]
    fn isolated_target_gives_finite_logits() {
        let g = Graph::from_edges(&[(1, 2)], 3).unwrap();
        let feats = FeatureTable::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        for p in Preset::ALL {
            let mut cfg = ModelConfig::preset(p, p.uses_de().then_some(DeVariant::Rw)).unwrap();
            cfg.num_layers = 2;
            let (net, params) = Network::new(cfg, 2, 2, 3).unwrap();
            let proj = net.project_all(&params, &feats).unwrap();
            let sample = TargetSample::build(&g, 0, &cfg).unwrap();
            let logits = net.logits(&params, &proj, &sample).unwrap();
            assert!(logits.iter().all(|x| x.is_finite()), "{p}");
        }
    }
}

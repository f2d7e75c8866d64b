use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::network::{Network, SampleGrads};
use super::sample::TargetSample;
use crate::data::FeatureTable;
use crate::error::{Error, Result};
use crate::graph::LabelVector;
use crate::nn::{argmax, Objective, Params};

/// Targets per work unit. Chunk results are summed in chunk order, so the
/// gradient does not depend on the number of threads.
const CHUNK: usize = 64;

/// Node classification over precomputed per-target samples.
pub struct NodeClassification<'a> {
    pub network: &'a Network,
    pub features: &'a FeatureTable,
    pub labels: &'a LabelVector,
    /// One sample per node, indexed by node id.
    pub samples: &'a [TargetSample],
    pub dropout: f64,
}

/// Dropout generator for one (seed, epoch, node) triple.
pub fn dropout_rng(seed: u64, epoch: usize, node: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((epoch as u64) << 32) ^ node as u64);
    rng
}

impl<'a> NodeClassification<'a> {
    pub fn new(
        network: &'a Network,
        features: &'a FeatureTable,
        labels: &'a LabelVector,
        samples: &'a [TargetSample],
        dropout: f64,
    ) -> Result<Self> {
        if samples.len() != labels.len() {
            return Err(Error::LengthMismatch {
                what: "target samples",
                expected: labels.len(),
                actual: samples.len(),
            });
        }
        if labels.num_classes() > network.num_classes {
            return Err(Error::LabelOutOfRange {
                label: labels.num_classes() - 1,
                num_classes: network.num_classes,
            });
        }
        Ok(NodeClassification {
            network,
            features,
            labels,
            samples,
            dropout,
        })
    }

    fn sample(&self, v: usize) -> Result<&TargetSample> {
        self.samples.get(v).ok_or(Error::NodeOutOfRange {
            node: v,
            num_nodes: self.samples.len(),
        })
    }

    /// Mean training-mode loss over `nodes` with the dropout draws of
    /// `(epoch, seed)`, without touching gradients.
    pub fn loss(&self, params: &Params, nodes: &[usize], epoch: usize, seed: u64) -> Result<f64> {
        let proj = self.network.project_all(params, self.features)?;
        let losses = nodes
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut total = 0.0;
                for &v in chunk {
                    let mut rng = dropout_rng(seed, epoch, v);
                    total += self.network.sample_loss(
                        params,
                        &proj,
                        self.sample(v)?,
                        self.labels.get(v),
                        Some((self.dropout, &mut rng)),
                    )?;
                }
                Ok(total)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(losses.iter().sum::<f64>() / nodes.len().max(1) as f64)
    }

    /// Eval-mode logits, one row per node.
    pub fn logits(&self, params: &Params, nodes: &[usize]) -> Result<Vec<ndarray::Array1<f64>>> {
        let proj = self.network.project_all(params, self.features)?;
        nodes
            .par_iter()
            .map(|&v| self.network.logits(params, &proj, self.sample(v)?))
            .collect()
    }
}

impl Objective for NodeClassification<'_> {
    fn accumulate_gradients(&self, params: &mut Params, nodes: &[usize], epoch: usize, seed: u64) -> Result<f64> {
        let scale = 1.0 / nodes.len().max(1) as f64;
        let proj = self.network.project_all(params, self.features)?;
        let frozen: &Params = params;
        let parts = nodes
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut grads = SampleGrads::new(frozen);
                let mut total = 0.0;
                for &v in chunk {
                    let mut rng = dropout_rng(seed, epoch, v);
                    total += self.network.sample_gradient(
                        frozen,
                        &proj,
                        self.sample(v)?,
                        self.labels.get(v),
                        scale,
                        Some((self.dropout, &mut rng)),
                        &mut grads,
                    )?;
                }
                Ok((total, grads))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut loss = 0.0;
        let mut acc = SampleGrads::new(params);
        for (l, g) in parts {
            loss += l;
            acc.merge(g);
        }
        params.add_grads(&acc.params);
        self.network.accumulate_raw_grads(params, self.features, &acc.raw);
        Ok(loss * scale)
    }

    fn predict(&self, params: &Params, nodes: &[usize]) -> Result<Vec<usize>> {
        Ok(self.logits(params, nodes)?.iter().map(|l| argmax(l.view())).collect())
    }

    fn label(&self, node: usize) -> usize {
        self.labels.get(node)
    }
}

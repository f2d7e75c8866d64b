//! Small dense neural-network engine with hand-written reverse-mode
//! gradients: SAGE-mean and dense layers, dropout, softmax cross-entropy,
//! Adam with decoupled weight decay and an early-stopping training loop.
//!
//! All arithmetic is `f64`. Reductions run in a fixed order so identical
//! inputs give bitwise-identical results.

pub mod checkpoint;
pub mod layers;
pub mod loss;
pub mod params;
pub mod train;

pub use layers::{
    dense_forward, dropout_forward, mean_aggregate, mean_aggregate_backward, sage_forward, Activation, DenseLayer,
    LayerKind, LayerSpec, SageLayer,
};
pub use loss::{argmax, softmax, softmax_cross_entropy, softmax_cross_entropy_row};
pub use params::{adam_step, glorot_limit, AdamConfig, Grads, Param, ParamId, Params};
pub use train::{train, EpochRecord, Objective, TrainConfig, TrainOutcome};

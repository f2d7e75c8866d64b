//! Model zoo: the eight feature configurations, per-target samples, the
//! SAGE network with its heads, and the node-classification objective.

mod config;
mod network;
mod objective;
mod sample;

pub use config::{ModelConfig, Preset, RawInjection};
pub use network::{Network, Projections, RawGrads, RawSlot, SampleGrads};
pub use objective::{dropout_rng, NodeClassification};
pub use sample::{build_samples, SampleCache, TargetSample};

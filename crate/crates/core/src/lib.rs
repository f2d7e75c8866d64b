//! Node classification with distance-encoding features and GraphSAGE over
//! per-target ego-subgraphs.
//!
//! * [`graph`]: CSR graphs, labels, homophily, ego-subgraphs.
//! * [`features`]: shortest-path and random-walk distance encodings, degree.
//! * [`nn`]: layers, loss, Adam and the training loop.
//! * [`model`]: the eight feature configurations and the network.
//! * [`data`]: dataset files, splits and statistics.
//! * [`bench`]: multi-seed experiment runner and reports.

pub mod bench;
pub mod data;
pub mod error;
pub mod features;
pub mod graph;
pub mod model;
pub mod nn;
pub mod selftest;

pub use error::{Error, Result};

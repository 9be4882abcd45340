//! Multimodal speaker change detection at desk scale.
//!
//! The pipeline: synthesize seeded conversations with word timings and
//! speaker turns, align sliding-window speaker embeddings to tokens by
//! nearest midpoint, fuse speaker and text embeddings into a transformer
//! encoder-decoder, train it with teacher forcing followed by
//! autoregressive epochs, decode greedily or with beam search, and score
//! token-level precision/recall/F1 and EER with no forgiveness collar.

pub mod alignment;
pub mod attention;
pub mod checkpoint;
pub mod config;
pub mod corpus;
pub mod decode;
pub mod error;
pub mod fusion;
pub mod gradcheck;
pub mod graph;
pub mod kernels;
pub mod metrics;
pub mod model;
pub mod params;
pub mod tensor;
pub mod trainer;

pub use error::{Error, Result};

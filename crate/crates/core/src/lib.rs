//! Label-free discovery of coherent subpopulations in embedding datasets.
//!
//! Seeds come from connected components of a cosine-similarity graph
//! ([`init`]); each seed is grown by latent feature alignment ([`lfa`]),
//! compared against size-matched k-means and nearest-neighbor groups
//! ([`baselines`]), and evaluated for attribute coherence and verification
//! bias ([`metrics`]).

// `!(x > min)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod annotation;
pub mod baselines;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod group;
pub mod init;
pub mod lfa;
pub mod metrics;
pub mod synth;
pub mod traversal;

pub use dataset::EmbeddingDataset;
pub use error::{Error, Result};
pub use group::{Group, LatentDirection, SeedProvenance};

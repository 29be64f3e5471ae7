//! Design-space exploration toolkit for systolic-array GEMM accelerators.
//!
//! The pipeline has three stages:
//!
//! 1. **Cost models and oracles** ([`cost`], [`mem`], [`sched`], [`oracle`]):
//!    closed-form runtime/stall models and exhaustive searches that label
//!    the optimal configuration for a query.
//! 2. **Datasets and analysis** ([`labels`], [`data`], [`stats`]): quantized
//!    label spaces, seeded dataset generation, class histograms and PCA.
//! 3. **Learned recommendation** ([`model`], [`metrics`]): a per-feature
//!    embedding + MLP classifier that predicts the optimal label id in
//!    constant time, evaluated by accuracy and geometric-mean normalized
//!    performance.

pub mod cli;
pub mod cost;
pub mod data;
pub mod error;
pub mod labels;
pub mod mem;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod sched;
pub mod stats;
pub mod types;

pub use error::{Error, Result};

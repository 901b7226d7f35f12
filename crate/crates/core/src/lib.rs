//! Prototype-based clustering driven by associative-memory attractor dynamics.
//!
//! A set of learnable memories defines an energy landscape; data points evolve
//! under a softmax-weighted attractor recursion and settle into basins around
//! the memories, which act as cluster centers. Training runs masked
//! pattern-completion reconstruction with backpropagation through the
//! recursion; inference assigns each point to the memory nearest its settled
//! state. The crate also ships a Lloyd's k-means baseline, cluster-quality
//! metrics (silhouette, NMI, ARI), a 2-D basin-of-attraction rasterizer, and
//! CSV/JSON plumbing for the companion CLI.

// Indexed loops mirror the k×d kernel math; `!(x > 0.0)` validations reject
// NaN along with nonpositives.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod autograd;
pub mod baselines;
pub mod basins;
pub mod data;
pub mod dynamics;
pub mod error;
pub mod infer;
pub mod matrix;
pub mod metrics;
pub mod model;
pub mod model_file;
pub mod synth;
pub mod trainer;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use model::{Dataset, DynamicsConfig, FeatureStats, Metric, ParticleState, PrototypeSet};

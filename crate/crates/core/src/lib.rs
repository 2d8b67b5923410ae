//! Joint transceiver design for collaborative edge inference over Cloud-RAN.
//!
//! Devices observe a common target, project their noisy observations onto a
//! shared PCA basis and upload the feature vectors over the air to multi-antenna
//! remote radio heads (RRHs). The RRHs quantize the superimposed signals and
//! forward them over capacity-limited fronthaul links to a central processor,
//! which applies receive beamforming and classifies the aggregate.
//!
//! This crate holds the allocation-only algorithmic core:
//!
//! * [`model`]: shared domain types and configuration checks,
//! * [`scenario`]: geometries, channels and Gaussian-mixture statistics,
//! * [`metrics`]: discriminant gain, post-aggregation statistics, fronthaul rate,
//! * [`solver`]: a log-barrier interior-point method for the convex subproblems,
//! * [`sca`]: the alternating successive convex approximation optimizer,
//! * [`baselines`]: the three comparison schemes,
//! * [`simulate`]: Monte-Carlo forward simulation and feasibility audits,
//! * [`inference`]: classifiers and accuracy estimation.
//!
//! File formats, the experiment runner and the CLI live in the `crane` crate.
#![no_std]
// `num_traits::Float` supplies the libm-backed float methods; when another crate
// in the graph links std its inherent methods shadow them and the import looks unused.
#![allow(unused_imports)]

extern crate alloc;

pub mod baselines;
pub mod error;
pub mod inference;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod sca;
pub mod scenario;
pub mod simulate;
pub mod solver;

pub use error::{Error, Result};
pub use model::{
    AggregateStatistics, ChannelSet, DesignSolution, FeatureStatistics, SystemConfig,
};

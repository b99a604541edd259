//! Stirling-gamma priors for the Dirichlet process precision: the distribution
//! and its samplers, the induced random partitions, conjugate updates, and
//! collapsed Gibbs samplers for Gaussian mixtures and stochastic block models.

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::suspicious_arithmetic_impl
)]

pub mod closed_form;
pub mod conjugacy;
pub mod diagnostics;
pub mod distribution;
pub mod dpm;
pub mod error;
pub mod partition;
pub mod quadrature;
pub mod sampler;
pub mod sbm;
pub mod special;

mod dd;

pub use distribution::{GammaParams, Moment, StirlingGamma, StirlingGammaParams};
pub use error::{Error, Result};
pub use partition::Partition;
pub use sampler::{SamplerKind, StirlingGammaSampler};

//! Two-node tandem distributed detection.
//!
//! Node 1 observes `X₁`, computes its likelihood ratio and sends a k-level
//! quantized symbol `U` to node 2. Node 2 fuses `U` with its own
//! observation `X₂` through the Bayes-optimal likelihood ratio test.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`models`] | class-conditional densities, CDFs, sampling, likelihood ratios |
//! | [`quantize`] | threshold quantizers, induced symbol PMFs, nested refinement, threshold search |
//! | [`divergence`] | Chernoff information, KL divergence, posynomial geometric-convexity gap |
//! | [`fusion`] | the tandem system, exact and Monte Carlo Bayes error, iid error exponents, sweeps |
//!
//! All divergences are in nats.

pub mod divergence;
pub mod error;
pub mod fusion;
pub mod models;
pub mod numeric;
pub mod quantize;

pub use divergence::{
    chernoff_continuous, chernoff_discrete, geometric_convexity_gap, kl_continuous, kl_discrete,
    system_chernoff, ChernoffResult, KlDirection, Posynomial,
};
pub use error::{Error, Result};
pub use fusion::{ErrorReport, TandemSystem};
pub use models::{ConditionalModel, Family, LabeledSample};
pub use quantize::{DiscreteCondPmf, QuantizerSpec, StatisticDomain};

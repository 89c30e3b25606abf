//! Counterfactual inference for discrete structural causal models.
//!
//! - [`scm`]: models, interventions, exact enumeration and sampling.
//! - [`twin`]: twin networks, exact / Monte Carlo / abduction-action-prediction
//!   counterfactuals and a timing bench.
//! - [`ordering`]: monotonicity, counterfactual ordering and stability checks,
//!   and treatment-order inference from interventional trends.
//! - [`learn`]: deep twin networks trained with an optional monotonicity
//!   penalty.
//! - [`causation`]: probabilities of necessity and sufficiency and
//!   counterfactual tables.
//! - [`datagen`]: synthetic and semi-synthetic generators with ground truth.
//! - [`cli`]: the `twincf` command-line driver.

pub mod causation;
pub mod cli;
pub mod data;
pub mod datagen;
pub mod error;
pub mod learn;
pub mod models;
pub mod ordering;
pub mod rng;
pub mod scm;
pub mod twin;

pub use error::{Error, Result};

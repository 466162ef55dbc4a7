//! Context-deconfounded training at desk scale.
//!
//! The crate builds a stratified confounder dictionary from masked context
//! features (PCA + k-means++), plugs a causal-intervention layer between a
//! small two-branch classifier's fusion point and its head, and ships a
//! synthetic benchmark with a controllable context -> label confounder plus
//! the entropy-based bias audit to quantify it.
//!
//! Modules:
//! - [`dictionary`] (with [`pca`] and [`kmeans`]): prototype construction,
//!   priors, serialization.
//! - [`ccim`]: the intervention layer, forward and analytic backward.
//! - [`synthetic`]: confounded dataset generator and bias audit.
//! - [`model`] / [`metrics`]: two-branch training, evaluation, average
//!   precision.
//! - [`ablation`]: matched variant runs and the dictionary-size sweep.

pub mod ablation;
pub mod ccim;
pub mod dictionary;
pub mod error;
pub mod kmeans;
pub mod matrix;
pub mod metrics;
pub mod model;
pub mod pca;
pub mod synthetic;

pub use error::{Error, Result};

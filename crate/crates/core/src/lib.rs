//! Bayesian inference for the planted multi-section stochastic block model
//! with an unknown number of classes.
//!
//! The library covers the whole desk-scale pipeline: sampling planted
//! graphs, exact posteriors by enumeration over constrained labelling
//! spaces, a size-respecting Metropolis-Hastings sampler for larger n,
//! finite-n posterior contraction bounds, credible-to-confidence
//! conversion, posterior-odds tests, and a Monte Carlo harness that checks
//! every bound empirically. The `sbm-infer` binary exposes the same
//! machinery as a CLI.

pub mod bounds;
pub mod cli;
pub mod enumerate;
pub mod error;
pub mod family;
pub mod graph;
pub mod harness;
pub mod inference;
pub mod labelling;
pub mod mcmc;
pub mod metrics;
pub mod numeric;
pub mod posterior;
pub mod prior;
pub mod probs;
pub mod sbm;
pub mod sets;

pub use error::{Error, Result};
pub use family::ModelFamily;
pub use graph::Graph;
pub use labelling::Labelling;
pub use probs::{EdgeProbs, Phase};

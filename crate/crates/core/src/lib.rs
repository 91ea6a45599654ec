//! Social affordance models for two-agent interactions.
//!
//! An interaction category is learned from a handful of skeleton sequences:
//! a Metropolis-Hastings sampler discovers latent sub-events, a CRP-style
//! Gibbs sampler selects and groups the joints that matter in each of them,
//! and the fitted spatial/motion potentials are then used to decode new
//! sequences and to synthesize the second agent's motion online.
//!
//! Module map:
//!
//! - [`data`]: sequences, datasets, JSON I/O and validation.
//! - [`geometry`]: facing frames, cylindrical features, alignment, IK.
//! - [`stats`]: distributions (log-density, MLE, sampling) and k-means.
//! - [`model`]: parses, groupings, potentials and every probability term.
//! - [`learning`]: the MCMC structure learner.
//! - [`inference`]: dynamic-programming sub-event decoding.
//! - [`synthesis`]: online reactive motion synthesis.
//! - [`synthbench`]: synthetic scenarios, metrics, ablations and the HMM baseline.

pub mod data;
pub mod error;
pub mod geometry;
pub mod inference;
pub mod learning;
pub mod model;
pub mod stats;
pub mod synthbench;
pub mod synthesis;

pub use error::{Error, Result};

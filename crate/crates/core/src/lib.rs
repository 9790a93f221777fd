//! Exact Monte Carlo fusion.
//!
//! Given exact samplers for densities `f_1, ..., f_C` on `R^d`, draws exact
//! samples from `f ∝ f_1 ··· f_C` by rejection on an extended space of
//! diffusion bridges. Two proposal families are provided: Brownian bridges
//! ([`fusion_bm`]) and Ornstein-Uhlenbeck bridges built around a Gaussian
//! surrogate ([`fusion_ou`]). [`baselines`] holds Consensus Monte Carlo and
//! the approximate OU sampler used for comparison.

pub mod baselines;
pub mod bridges;
pub mod diagnostics;
mod draws;
pub mod error;
pub mod fusion_bm;
pub mod fusion_ou;
pub mod interval;
pub mod model;
pub mod replicate;
pub mod stats;
pub mod thinning;

pub use draws::Draws;
pub use error::{FusionError, Result};

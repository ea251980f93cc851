//! Safety-aware imitation learning with a latent safety embedding.
//!
//! The crate trains goal-reaching policies that avoid a moving obstacle by
//! conditioning the policy on a latent code summarizing the obstacle/goal
//! configuration, learned jointly with the policy from expert demonstrations.

pub mod checkpoint;
pub mod config;
pub mod dataset;
pub mod env;
pub mod error;
pub mod eval;
pub mod expert;
pub mod latent;
pub mod nn;
pub mod policy;
pub mod scenario;
pub mod seeding;
pub mod trainer;

pub use error::{Error, Result};

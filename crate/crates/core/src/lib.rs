//! Reward learning for grid navigation.
//!
//! Raw occupancy layers become per-cell feature vectors ([`features`]); a
//! linear reward over those features is fit to demonstrated paths by
//! maximum-entropy inverse optimal control ([`irl`]); learned rewards drive a
//! grid planner ([`planner`]) whose output is scored against ground truth with
//! the mean Hausdorff distance ([`eval`]). [`scenario`] generates synthetic
//! worlds and runs head-to-head trials.

pub mod environment;
pub mod error;
pub mod eval;
pub mod features;
pub mod geometry;
pub mod irl;
pub mod mdp;
pub mod planner;
pub mod scenario;
pub mod worlds;

pub use error::{Error, Result};

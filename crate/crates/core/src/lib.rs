//! Learning compositions of pre-trained skill policies through skill-state embeddings.
//!
//! Skills (collect or evade one colored object) are trained jointly with a shared
//! policy layer. A composed task, written in a small temporal-logic language, is then
//! solved by training only composition layers that merge skill embeddings.

pub mod baselines;
pub mod error;
pub mod gridworld;
pub mod harness;
pub mod model;
pub mod numcore;
pub mod tasklang;
pub mod trainer;

pub use error::{Error, Result};

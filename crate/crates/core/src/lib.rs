//! Thompson Sampling for logistic bandits on the unit sphere, with exact
//! information-ratio computations on finite posteriors.

pub mod agent;
pub mod check;
pub mod env;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod math;
pub mod metrics;
pub mod rng;
pub mod textio;

pub use check::BoundCheck;
pub use error::{Error, Result};
pub use math::Slope;

pub mod error;
pub mod estimators;
pub mod harness;
pub mod linalg;
pub mod noise;
pub mod optimizers;
pub mod problems;
pub mod schedulers;
pub mod sharding;
pub mod smoothness;

pub use error::{Error, Result};

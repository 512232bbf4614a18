//! Sequential Ruelle-Perron-Frobenius triplets for non-stationary subshifts
//! of finite type and expanding circle maps, the Gibbs families they induce,
//! and exact limit-theorem diagnostics for Birkhoff sums.

pub mod env;
pub mod error;
pub mod experiments;
pub mod gibbs;
pub mod limits;
pub mod linalg;
pub mod rpf;
pub mod systems;

pub use error::{Error, Result};

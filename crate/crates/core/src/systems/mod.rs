//! Sequential dynamical systems and their transfer operators.

pub mod catalog;
pub mod circle;
pub mod operator;
pub mod sft;

pub use circle::{build_circle_operator, CircleSpec};
pub use operator::{build_sft_operator, compose_scaled, log_weak_norm, trust_radius, weak_norm, Reference, TransferFamily};
pub use sft::{primitivity_check, recode_to_memory_one, Extension, SftSpec, Transition};

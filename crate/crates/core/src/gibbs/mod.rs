//! Sequential Gibbs measures, their cylinder masses and mixing coefficients.

pub mod family;
pub mod mixing;

pub use family::{build_gibbs, sample_paths, Cylinder, GibbsFamily, PathBatch};
pub use mixing::{correlation_decay_check, gibbs_ratio_band, psi_mixing_report, MixingReport, RatioBand};

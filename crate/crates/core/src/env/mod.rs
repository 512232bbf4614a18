//! Random non-stationary environments built from finitely many SFT layers.

pub mod mixing;
pub mod pipelines;
pub mod spec;

pub use mixing::{block_probabilities, phi_mixing_exact, phi_of_driver, propgrowth_monte_carlo, propgrowth_report, PhiMixingReport, PropGrowthReport, PropGrowthRow};
pub use pipelines::{
    deterministic_h_check, env_llt_pipeline, pressure_concentration_report, DensityReport, EnvLltOptions, EnvLltReport,
    PressureConcentrationReport,
};
pub use spec::{realize, seeded_kernels, Driver, EnvSpec, Layer, Realization, ResolvedDriver};

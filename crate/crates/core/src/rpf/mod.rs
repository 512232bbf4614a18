//! Sequential Ruelle-Perron-Frobenius triplets and the objects built on them.

pub mod convergence;
pub mod nonsingular;
pub mod normalize;
pub mod pressure;
pub mod stability;
pub mod triplet;

pub use convergence::{convergence_rate_fit, ConvergenceFit};
pub use nonsingular::{nonsingular_check, NonsingularReport};
pub use normalize::{normalize_family, tilde_operator, NormalizedFamily};
pub use pressure::{pressure, pressure_derivatives, pressure_sequence, DerivativeTable, PressureSequence};
pub use stability::{stability_sweep, StabilityRow};
pub use triplet::{solve_family, solve_triplet, RpfTriplet, SolverOptions, TripletFamily};

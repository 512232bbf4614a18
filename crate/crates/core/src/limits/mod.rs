//! Exact and asymptotic diagnostics for Birkhoff sums `S_{j,n} u` under the
//! Gibbs family.

pub mod clt;
pub mod cumulants;
pub mod distribution;
pub mod ldp;
pub mod martingale;
pub mod mgf;
pub mod moments;

pub use clt::{berry_esseen_report, cf_decay_scan, genper_block_count, llt_report, CltReport, EsseenOptions, GenPerCount, LltReport};
pub use cumulants::{cumulant_report, CumulantReport};
pub use distribution::{exact_distribution, exact_distributions, ExactDistribution};
pub use ldp::{ldp_report, LdpOptions, LdpReport};
pub use martingale::{concentration_report, martingale_decompose, ConcentrationReport, MartingaleDecomposition};
pub use mgf::{exact_mgf, log_mgf};
pub use moments::{coboundary_solve, moments_report, variance_growth, CoboundaryWitness, MomentReport, VarianceGrowth};

//! Systems whose potential is the log-Jacobian of a given family of measures:
//! there `λ_j(0) = 1` and `ν_j^{(0)} = m_j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ZERO;
use crate::rpf::triplet::{solve_family, SolverOptions};
use crate::systems::catalog::nonsingular_potential;
use crate::systems::sft::SftSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonsingularReport {
    pub max_lambda_error: f64,
    pub max_nu_error: f64,
    pub passed: bool,
}

/// Replaces the potential by the one matched to `m` and checks the solver
/// returns `λ = 1`, `ν = m` within `tol`.
pub fn nonsingular_check(spec: &SftSpec, m: &[Vec<f64>], tol: f64, opts: &SolverOptions) -> Result<NonsingularReport> {
    if m.len() != spec.period() {
        return Err(Error::DimensionMismatch("one measure per window slot required".into()));
    }
    for (s, v) in m.iter().enumerate() {
        if v.len() != spec.alphabet[s] {
            return Err(Error::DimensionMismatch(format!("measure at slot {s}")));
        }
        if v.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::PreconditionFailed(format!("measure at slot {s} has a zero entry")));
        }
        if (v.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::PreconditionFailed(format!("measure at slot {s} is not normalized")));
        }
    }
    let f = nonsingular_potential(spec, m);
    let matched = spec.with_functions(f, spec.observable.clone())?;
    let fam = solve_family(&matched, spec.lo, spec.period(), ZERO, opts)?;
    let mut lam = 0.0_f64;
    let mut nu = 0.0_f64;
    for i in 0..spec.period() {
        lam = lam.max((fam.lambda[i].re - 1.0).abs().max(fam.lambda[i].im.abs()));
        let err = fam.nu[i].iter().zip(&m[i]).map(|(a, b)| (a.re - b).abs() + a.im.abs()).sum::<f64>();
        nu = nu.max(err);
    }
    Ok(NonsingularReport { max_lambda_error: lam, max_nu_error: nu, passed: lam <= tol && nu <= tol })
}

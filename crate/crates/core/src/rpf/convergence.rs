//! Exponential convergence `‖L_z^{j,n} g / λ_{j,n}(z) − ν_j(g) h_{j+n}‖ ≤ A δ^n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{normalize_pow2, pair, sup_norm, CVector, C64};
use crate::rpf::triplet::{solve_family, SolverOptions};
use crate::systems::operator::TransferFamily;

/// Residuals at or below this multiple of the reference scale are treated as
/// rounding noise and left out of the fit.
pub const RESIDUAL_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceFit {
    pub horizons: Vec<usize>,
    pub residuals: Vec<f64>,
    /// Fitted slope of `ln r_n` against `n` (estimate of `ln δ`).
    pub slope: f64,
    /// Fitted intercept (estimate of `ln A`).
    pub intercept: f64,
    pub r_squared: f64,
    /// Number of residuals above the floor that entered the fit.
    pub used: usize,
    /// True when fewer than two residuals cleared the floor; the slope is then
    /// reported as `-inf`.
    pub degenerate: bool,
}

impl ConvergenceFit {
    pub fn delta(&self) -> f64 {
        self.slope.exp()
    }
}

/// Least squares fit `y ≈ a + b x`; returns `(b, a, r²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::FitDegenerate(format!("{n} points")));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::FitDegenerate("constant abscissa".into()));
    }
    let b = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok((b, my - b * mx, r2))
}

/// Fits `ln r_n` against `n` over points above `floor`.
pub fn fit_exponential(horizons: &[usize], residuals: &[f64], floor: f64) -> ConvergenceFit {
    let (x, y): (Vec<f64>, Vec<f64>) = horizons
        .iter()
        .zip(residuals)
        .filter(|(_, &r)| r > floor)
        .map(|(&n, &r)| (n as f64, r.ln()))
        .unzip();
    let used = x.len();
    match linear_fit(&x, &y) {
        Ok((slope, intercept, r2)) => ConvergenceFit {
            horizons: horizons.to_vec(),
            residuals: residuals.to_vec(),
            slope,
            intercept,
            r_squared: r2,
            used,
            degenerate: false,
        },
        Err(_) => ConvergenceFit {
            horizons: horizons.to_vec(),
            residuals: residuals.to_vec(),
            slope: f64::NEG_INFINITY,
            intercept: 0.0,
            r_squared: 0.0,
            used,
            degenerate: true,
        },
    }
}

/// Residuals `‖L_z^{j,n} g / λ_{j,n}(z) − ν_j(g) h_{j+n}‖_∞` for each horizon,
/// against a reference triplet solved with horizon `opts.horizon`.
pub fn convergence_residuals<F: TransferFamily + ?Sized>(
    fam: &F,
    j: i64,
    z: C64,
    g: &CVector,
    horizons: &[usize],
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    let nmax = horizons.iter().copied().max().unwrap_or(0);
    let fam_z = solve_family(fam, j, nmax, z, opts)?;
    let nu_g = pair(fam_z.nu(j), g);
    let mut v = g.clone();
    // v · 2^{exp} · Π λ^{-1} tracks L^{j,n} g / λ_{j,n}.
    let mut log_scale = C64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(horizons.len());
    let mut n = 0usize;
    let mut sorted: Vec<(usize, usize)> = horizons.iter().copied().enumerate().map(|(i, h)| (h, i)).collect();
    sorted.sort();
    let mut res = vec![0.0; horizons.len()];
    for (h, idx) in sorted {
        while n < h {
            let k = j + n as i64;
            v = fam.operator(k, z) * v;
            log_scale -= fam_z.lambda(k).ln();
            if let Some(e) = normalize_pow2(&mut v) {
                log_scale += e as f64 * std::f64::consts::LN_2;
            }
            n += 1;
        }
        let approx = &v * log_scale.exp();
        let target = fam_z.h(j + h as i64) * nu_g;
        res[idx] = sup_norm(&(approx - target));
    }
    out.extend(res);
    Ok(out)
}

/// Fit of the convergence residuals for a test function `g`.
pub fn convergence_rate_fit<F: TransferFamily + ?Sized>(
    fam: &F,
    j: i64,
    z: C64,
    g: &CVector,
    horizons: &[usize],
    opts: &SolverOptions,
) -> Result<ConvergenceFit> {
    if horizons.len() < 4 {
        return Err(Error::FitDegenerate("need at least 4 horizons".into()));
    }
    let res = convergence_residuals(fam, j, z, g, horizons, opts)?;
    let fam_z = solve_family(fam, j, 0, z, opts)?;
    let scale = sup_norm(fam_z.h(j)) * pair(fam_z.nu(j), g).norm().max(sup_norm(g));
    Ok(fit_exponential(horizons, &res, RESIDUAL_FLOOR * scale.max(1e-300)))
}

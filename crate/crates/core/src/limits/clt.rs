//! Berry-Esseen rates, the lattice local CLT, decay of characteristic
//! operators and GenPer block counting.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::gibbs::{sample_paths, GibbsFamily};
use crate::limits::distribution::{exact_distributions, ExactDistribution, DEFAULT_STATE_CAP};
use crate::limits::mgf::exact_mgf;
use crate::linalg::{c, max_row_sum, CMatrix, CVector, C64, ZERO};
use crate::rpf::triplet::{solve_family, SolverOptions};
use crate::systems::operator::{compose_scaled, log_weak_norm, TransferFamily};

/// Kolmogorov distance between `(S − E S)/σ` and the standard normal,
/// evaluated on both sides of every atom.
pub fn kolmogorov_distance(dist: &ExactDistribution) -> f64 {
    let normal = Normal::standard();
    let mut cdf = 0.0;
    let mut sup = 0.0_f64;
    for (k, &p) in dist.probs.iter().enumerate() {
        let y = (dist.value(k) - dist.mean) / dist.sigma;
        let phi = normal.cdf(y);
        sup = sup.max((cdf - phi).abs());
        cdf += p;
        sup = sup.max((cdf - phi).abs());
    }
    sup
}

/// Kolmogorov distance of a standardized sample, for non-lattice observables.
pub fn kolmogorov_distance_samples(values: &mut [f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    values.sort_by(|a, b| a.total_cmp(b));
    let normal = Normal::standard();
    let mut sup = 0.0_f64;
    for (i, v) in values.iter().enumerate() {
        let phi = normal.cdf((v - mean) / sd);
        sup = sup.max((i as f64 / n - phi).abs()).max(((i + 1) as f64 / n - phi).abs());
    }
    sup
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsseenOptions {
    /// Simpson nodes on `[0, T_max]` (rounded up to even).
    pub nodes: usize,
    /// `T_max` as a fraction of `π σ / h` (lattice) or of `4 σ` otherwise.
    pub t_fraction: f64,
    /// Paths used when the observable is not lattice.
    pub samples: usize,
    pub seed: u64,
}

impl Default for EsseenOptions {
    fn default() -> Self {
        EsseenOptions { nodes: 2048, t_fraction: 1.0, samples: 100_000, seed: 0 }
    }
}

/// `min_T (2/π) ∫_0^T |ψ(t) − e^{−t²/2}| / t dt + 24 / (π T √(2π))` with `ψ`
/// the characteristic function of `(S − mean)/σ` from the operator route.
/// Returns the bound and the minimizing `T`.
pub fn esseen_bound(g: &GibbsFamily, j: i64, n: usize, mean: f64, sigma: f64, t_max: f64, nodes: usize) -> (f64, f64) {
    let nodes = nodes + nodes % 2;
    let step = t_max / nodes as f64;
    let integrand: Vec<f64> = (0..=nodes)
        .into_par_iter()
        .map(|i| {
            if i == 0 {
                return 0.0;
            }
            let t = i as f64 * step;
            let psi = exact_mgf(g, j, n, c(0.0, t / sigma)) * c(0.0, -t * mean / sigma).exp();
            (psi - c((-t * t / 2.0).exp(), 0.0)).norm() / t
        })
        .collect();
    let mut best = (f64::INFINITY, 0.0);
    let mut integral = 0.0;
    for i in (2..=nodes).step_by(2) {
        integral += step / 3.0 * (integrand[i - 2] + 4.0 * integrand[i - 1] + integrand[i]);
        let t = i as f64 * step;
        let bound = 2.0 / PI * integral + 24.0 / (PI * t * (2.0 * PI).sqrt());
        if bound < best.0 {
            best = (bound, t);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltRow {
    pub n: usize,
    pub sigma: f64,
    pub d_n: f64,
    pub scaled: f64,
    pub esseen_bound: f64,
    pub esseen_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub start: i64,
    pub lattice: bool,
    pub rows: Vec<CltRow>,
    /// `n` values skipped because `σ_{0,n} = 0`.
    pub degenerate: Vec<usize>,
    /// `max/min` of `√n D_n` over the rows.
    pub band_ratio: f64,
    pub certified: bool,
}

pub fn berry_esseen_report(g: &GibbsFamily, j: i64, n_list: &[usize], opts: &EsseenOptions) -> Result<CltReport> {
    let mut rows = Vec::new();
    let mut degenerate = Vec::new();
    let lattice = match exact_distributions(g, j, n_list, DEFAULT_STATE_CAP) {
        Ok(dists) => {
            for dist in dists {
                if dist.sigma < 1e-12 {
                    degenerate.push(dist.n);
                    continue;
                }
                let d_n = kolmogorov_distance(&dist);
                let h = dist.support_span();
                let (bound, t) = esseen_bound(g, j, dist.n, dist.mean, dist.sigma, opts.t_fraction * PI * dist.sigma / h, opts.nodes);
                rows.push(CltRow { n: dist.n, sigma: dist.sigma, d_n, scaled: (dist.n as f64).sqrt() * d_n, esseen_bound: bound, esseen_t: t });
            }
            true
        }
        Err(Error::NotLattice) => {
            for &n in n_list {
                let batch = sample_paths(g, j, n, opts.samples, opts.seed ^ n as u64);
                let mut sums: Vec<f64> = batch
                    .paths
                    .iter()
                    .map(|p| p.iter().enumerate().map(|(i, &a)| g.spec.u(j + i as i64)[a]).sum())
                    .collect();
                let m = crate::limits::moments::raw_moments(g, j, &[n], 2).remove(0);
                let sigma = (m[2] - m[1] * m[1]).max(0.0).sqrt();
                if sigma < 1e-12 {
                    degenerate.push(n);
                    continue;
                }
                let d_n = kolmogorov_distance_samples(&mut sums);
                let (bound, t) = esseen_bound(g, j, n, m[1], sigma, opts.t_fraction * 4.0 * sigma, opts.nodes);
                rows.push(CltRow { n, sigma, d_n, scaled: (n as f64).sqrt() * d_n, esseen_bound: bound, esseen_t: t });
            }
            false
        }
        Err(e) => return Err(e),
    };
    let hi = rows.iter().map(|r| r.scaled).fold(0.0, f64::max);
    let lo = rows.iter().map(|r| r.scaled).fold(f64::INFINITY, f64::min);
    let band_ratio = if rows.is_empty() { f64::NAN } else { hi / lo };
    let certified = rows.iter().all(|r| r.esseen_bound >= r.d_n);
    Ok(CltReport { start: j, lattice, rows, degenerate, band_ratio, certified })
}

/// `sup_r |√(2π) σ P(S − E S = r) − h e^{−r²/(2σ²)}|` over the lattice coset.
pub fn llt_gap(dist: &ExactDistribution) -> f64 {
    let h = dist.support_span();
    let stride = (h / dist.span).round().max(1.0) as usize;
    let first = dist.probs.iter().position(|&p| p > 0.0).unwrap_or(0);
    let s2 = dist.sigma * dist.sigma;
    let mut sup = 0.0_f64;
    let mut k = first;
    while k < dist.probs.len() {
        let r = dist.value(k) - dist.mean;
        let gap = ((2.0 * PI).sqrt() * dist.sigma * dist.probs[k] - h * (-r * r / (2.0 * s2)).exp()).abs();
        sup = sup.max(gap);
        k += stride;
    }
    sup
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LltRow {
    pub n: usize,
    pub sigma: f64,
    pub span: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LltReport {
    pub start: i64,
    pub rows: Vec<LltRow>,
    /// Every step satisfies `gap_{i+1} ≤ (1 + slack) gap_i`.
    pub monotone: bool,
}

/// Local CLT gaps; fails with `VarianceTooSmall` when `σ² < c0 n`.
pub fn llt_report(g: &GibbsFamily, j: i64, n_list: &[usize], c0: f64, slack: f64) -> Result<LltReport> {
    let dists = exact_distributions(g, j, n_list, DEFAULT_STATE_CAP)?;
    let mut rows = Vec::with_capacity(dists.len());
    for d in &dists {
        let var = d.sigma * d.sigma;
        if !(var >= c0 * d.n as f64) || var == 0.0 {
            return Err(Error::VarianceTooSmall { var, bound: c0 * d.n as f64, n: d.n });
        }
        rows.push(LltRow { n: d.n, sigma: d.sigma, span: d.support_span(), gap: llt_gap(d) });
    }
    let monotone = rows.windows(2).all(|w| w[1].gap <= (1.0 + slack) * w[0].gap);
    Ok(LltReport { start: j, rows, monotone })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfRow {
    pub n: usize,
    /// `sup_t ‖L_{it}^{j,n}‖ / λ_{j,n}(0)`.
    pub sup_ratio: f64,
    pub scaled: f64,
}

/// Characteristic-operator decay over `t_grid`.
pub fn cf_decay_scan<F: TransferFamily + ?Sized>(fam: &F, j: i64, t_grid: &[f64], n_list: &[usize], opts: &SolverOptions) -> Result<Vec<CfRow>> {
    let n_max = n_list.iter().copied().max().unwrap_or(0);
    let solve_len = match fam.period() {
        Some(p) => p.min(n_max.max(1)),
        None => n_max.max(1),
    };
    let base = solve_family(fam, j, solve_len, ZERO, opts)?;
    let log_lambda = |n: usize| -> f64 { (0..n).map(|k| base.lambda[k % solve_len].norm().ln()).sum() };
    let mut sup = vec![0.0_f64; n_list.len()];
    for &t in t_grid {
        let z = c(0.0, t);
        let mut p = crate::linalg::ScaledProduct::identity(fam.dim(j), j);
        let mut done = 0;
        let mut order: Vec<(usize, usize)> = n_list.iter().copied().enumerate().map(|(i, n)| (n, i)).collect();
        order.sort_unstable();
        for (n, i) in order {
            while done < n {
                p.push(&fam.operator(j + done as i64, z));
                done += 1;
            }
            let ratio = if n == 0 { 1.0 } else { (log_weak_norm(&p) - log_lambda(n)).exp() };
            sup[i] = sup[i].max(ratio);
        }
    }
    Ok(n_list.iter().zip(sup).map(|(&n, s)| CfRow { n, sup_ratio: s, scaled: (n as f64).sqrt() * s }).collect())
}

/// `‖L_{it}^{j,n}‖ / λ_{j,n}(0)` at a single `t`.
pub fn cf_ratio<F: TransferFamily + ?Sized>(fam: &F, j: i64, n: usize, t: f64, opts: &SolverOptions) -> Result<f64> {
    Ok(cf_decay_scan(fam, j, &[t], &[n], opts)?[0].sup_ratio)
}

/// Product `L^{(j+n−1)} ⋯ L^{(j)}` at `z = it`, unscaled.
pub fn block_operator<F: TransferFamily + ?Sized>(fam: &F, j: i64, n: usize, t: f64) -> CMatrix {
    compose_scaled(fam, j, n, c(0.0, t)).unscaled()
}

/// Spectral radius by power iteration (`iters` steps) with a Rayleigh
/// quotient check; returns `(radius, converged)`.
pub fn spectral_radius(m: &CMatrix, iters: usize, tol: f64) -> (f64, bool) {
    let d = m.nrows();
    let mut v = CVector::from_fn(d, |i, _| c(1.0 + 0.1 * i as f64, 0.05 * i as f64));
    let mut log_growth = 0.0;
    let mut steps = 0usize;
    let mut prev_rq: Option<C64> = None;
    let mut converged = false;
    for it in 0..iters {
        let w = m * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return (0.0, true);
        }
        let rq = v.dotc(&w) / v.dotc(&v);
        v = w / c(norm, 0.0);
        if it >= iters / 2 {
            log_growth += norm.ln();
            steps += 1;
        }
        if let Some(p) = prev_rq {
            converged = (rq - p).norm() <= tol * rq.norm().max(1e-300);
        }
        prev_rq = Some(rq);
        if converged && it > 10 {
            return (rq.norm(), true);
        }
    }
    // Oscillating dominant pairs do not converge in the Rayleigh sense; the
    // averaged growth rate still gives the radius.
    ((log_growth / steps.max(1) as f64).exp(), converged)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenPerCount {
    pub blocks: usize,
    pub block_len: usize,
    /// `B_J`: largest norm of any block operator over the grid.
    pub b_j: f64,
    pub count: usize,
    /// Block indices counted.
    pub hits: Vec<usize>,
}

/// `|{0 ≤ m < blocks : B_J ‖L_{it}^{m s m0, s m0} − 𝐋_{it}^s‖ < 1 − δ_0 ∀ t}|`,
/// with `𝐋_{it}` the product of `reference`'s operators over one period.
pub fn genper_block_count<F: TransferFamily + ?Sized, R: TransferFamily + ?Sized>(
    fam: &F,
    j: i64,
    reference: &R,
    m0: usize,
    s: usize,
    delta0: f64,
    t_grid: &[f64],
    blocks: usize,
) -> GenPerCount {
    let block_len = s * m0;
    let refs: Vec<CMatrix> = t_grid
        .iter()
        .map(|&t| {
            let loop_op = block_operator(reference, 0, m0, t);
            let mut p = CMatrix::identity(loop_op.nrows(), loop_op.ncols());
            for _ in 0..s {
                p = &loop_op * p;
            }
            p
        })
        .collect();
    let mut b_j = 0.0_f64;
    let mut diffs = vec![0.0_f64; blocks];
    for (ti, &t) in t_grid.iter().enumerate() {
        for (m, d) in diffs.iter_mut().enumerate() {
            let op = block_operator(fam, j + (m * block_len) as i64, block_len, t);
            b_j = b_j.max(max_row_sum(&op));
            let diff = if op.shape() == refs[ti].shape() { max_row_sum(&(op - &refs[ti])) } else { f64::INFINITY };
            *d = d.max(diff);
        }
    }
    let b = b_j.max(1.0);
    let hits: Vec<usize> = (0..blocks).filter(|&m| b * diffs[m] < 1.0 - delta0).collect();
    GenPerCount { blocks, block_len, b_j, count: hits.len(), hits }
}

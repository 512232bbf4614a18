//! Environment-level experiments: local limit pipeline, concentration of the
//! averaged random pressure, and deterministic densities.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::spec::{realize, EnvSpec};
use crate::error::{Error, Result};
use crate::gibbs::build_gibbs;
use crate::limits::clt::{block_operator, genper_block_count, llt_report, spectral_radius, LltReport};
use crate::linalg::{c, ZERO};
use crate::rpf::convergence::linear_fit;
use crate::rpf::pressure::{pressure, pressure_sequence};
use crate::rpf::triplet::{solve_family, SolverOptions};
use crate::systems::sft::Extension;

pub const POWER_ITERS: usize = 200;
pub const POWER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvLltOptions {
    pub t_grid: Vec<f64>,
    pub s: usize,
    pub delta0: f64,
    /// Block counts are reported after `n` blocks.
    pub n_list: Vec<usize>,
    /// Lengths for the local limit table.
    pub llt_n_list: Vec<usize>,
    pub c0: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusRow {
    pub t: f64,
    pub radius: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockCountRow {
    pub n: usize,
    pub ln_n: f64,
    pub count: usize,
    /// `count / ln n`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvLltReport {
    pub seed: u64,
    pub radius: Vec<RadiusRow>,
    pub max_radius: f64,
    pub b_j: f64,
    pub counts: Vec<BlockCountRow>,
    /// `count / ln n` strictly increases along `n_list`.
    pub increasing: bool,
    pub llt: Option<LltReport>,
    /// Why the local limit table was skipped, if it was.
    pub llt_error: Option<String>,
    pub compliant: bool,
}

/// Spectral radius of the marked loop on `J`, block counts against the
/// marked loop, and the local limit table of one realization.
pub fn env_llt_pipeline(env: &EnvSpec, seed: u64, o: &EnvLltOptions, solver: &SolverOptions) -> Result<EnvLltReport> {
    let reference = env.reference_spec()?;
    let m0 = env.m0();
    let radius: Vec<RadiusRow> = o
        .t_grid
        .iter()
        .map(|&t| {
            let (r, converged) = spectral_radius(&block_operator(&reference, 0, m0, t), POWER_ITERS, POWER_TOL);
            RadiusRow { t, radius: r, converged }
        })
        .collect();
    let max_radius = radius.iter().map(|r| r.radius).fold(0.0, f64::max);
    let blocks = o.n_list.iter().copied().max().unwrap_or(0);
    let llt_max = o.llt_n_list.iter().copied().max().unwrap_or(0);
    let window = (blocks * o.s * m0).max(llt_max).max(m0);
    let real = realize(env, seed, window)?;
    let count = genper_block_count(&real.spec, 0, &reference, m0, o.s, o.delta0, &o.t_grid, blocks);
    let counts: Vec<BlockCountRow> = o
        .n_list
        .iter()
        .map(|&n| {
            let k = count.hits.iter().filter(|&&m| m < n).count();
            let ln_n = (n as f64).ln();
            BlockCountRow { n, ln_n, count: k, ratio: k as f64 / ln_n }
        })
        .collect();
    let increasing = counts.windows(2).all(|w| w[1].ratio > w[0].ratio) && counts.iter().all(|r| r.count > 0);
    let (llt, llt_error) = if o.llt_n_list.is_empty() {
        (None, None)
    } else {
        match build_gibbs(&real.spec, 0, 0, solver).and_then(|g| llt_report(&g, 0, &o.llt_n_list, o.c0, o.slack)) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        }
    };
    let compliant = max_radius < 1.0 && increasing;
    Ok(EnvLltReport { seed, radius, max_radius, b_j: count.b_j, counts, increasing, llt, llt_error, compliant })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub n: usize,
    /// Cross-seed mean of `n^{-1} Σ_{j<n} Π_j(z)`.
    pub mean: f64,
    /// Root mean square deviation from that mean.
    pub deviation: f64,
    /// `n^{-1/2} ln n`.
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalityRow {
    pub radius: usize,
    /// `|Π_j(z)` from the truncated path `− Π_j(z)` from the full window`|`.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureConcentrationReport {
    pub z: f64,
    pub seeds: Vec<u64>,
    pub rows: Vec<ConcentrationRow>,
    /// Fitted exponent of the deviation against `n`; `None` when every
    /// deviation vanishes.
    pub exponent: Option<f64>,
    pub locality: Vec<LocalityRow>,
}

/// Per-seed averages of the random pressure along `n_list`, their spread,
/// and a locality check on the first seed.
pub fn pressure_concentration_report(
    env: &EnvSpec,
    z: f64,
    seeds: &[u64],
    n_list: &[usize],
    locality_radii: &[usize],
    solver: &SolverOptions,
) -> Result<PressureConcentrationReport> {
    let window = n_list.iter().copied().max().unwrap_or(1).max(1);
    let mut per_seed: Vec<(u64, Vec<f64>, Vec<f64>)> = seeds
        .par_iter()
        .map(|&seed| -> Result<(u64, Vec<f64>, Vec<f64>)> {
            let real = realize(env, seed, window)?;
            let seq = pressure_sequence(&real.spec, 0, window, &[c(z, 0.0)], solver)?;
            let values: Vec<f64> = seq.values[0].iter().map(|v| v.re).collect();
            let averages = n_list.iter().map(|&n| values[..n].iter().sum::<f64>() / n as f64).collect();
            Ok((seed, averages, values))
        })
        .collect::<Result<Vec<_>>>()?;
    per_seed.sort_by_key(|p| p.0);
    let k = per_seed.len() as f64;
    let rows: Vec<ConcentrationRow> = n_list
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let mean = per_seed.iter().map(|p| p.1[i]).sum::<f64>() / k;
            let deviation = (per_seed.iter().map(|p| (p.1[i] - mean).powi(2)).sum::<f64>() / k).sqrt();
            let nf = n as f64;
            ConcentrationRow { n, mean, deviation, rate: nf.ln() / nf.sqrt() }
        })
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) =
        rows.iter().filter(|r| r.deviation > 0.0).map(|r| ((r.n as f64).ln(), r.deviation.ln())).unzip();
    let exponent = linear_fit(&x, &y).ok().map(|f| f.0);

    let mut locality = Vec::with_capacity(locality_radii.len());
    if let Some((seed, _, values)) = per_seed.first() {
        let real = realize(env, *seed, window)?;
        let j = window / 2;
        for &r in locality_radii {
            let lo = j.saturating_sub(r);
            let hi = (j + r).min(window - 1);
            let sub = env.spec_for_path(&real.path[lo..=hi], lo as i64, Extension::Frozen)?;
            let local = pressure(&sub, j as i64, c(z, 0.0), solver)?.re;
            locality.push(LocalityRow { radius: r, gap: (local - values[j]).abs() });
        }
    }
    Ok(PressureConcentrationReport { z, seeds: per_seed.iter().map(|p| p.0).collect(), rows, exponent, locality })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    /// Common invariant density with respect to `m`.
    pub h: Vec<f64>,
    pub max_h_error: f64,
    pub max_lambda_error: f64,
    pub max_nu_error: f64,
    pub passed: bool,
}

const LAYER_TOL: f64 = 1e-10;

/// Checks that every layer fixes `m` and a common density `h`, then solves
/// each seeded realization and compares `h_j`, `λ_j`, `ν_j` with `h`, 1, `m`.
pub fn deterministic_h_check(
    env: &EnvSpec,
    m: &[f64],
    seeds: &[u64],
    window: usize,
    tol: f64,
    solver: &SolverOptions,
) -> Result<DensityReport> {
    env.validate()?;
    let d = env.layers[0].d();
    if m.len() != d || m.iter().any(|&x| !(x > 0.0)) || (m.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::PreconditionFailed("m must be a positive probability vector".into()));
    }
    let ops: Vec<DMatrix<f64>> = env
        .layers
        .iter()
        .map(|l| DMatrix::from_fn(d, d, |b, a| if l.transition[a][b] == 1 { l.potential[a].exp() } else { 0.0 }))
        .collect();
    let mv = DVector::from_column_slice(m);
    for (i, op) in ops.iter().enumerate() {
        let dual = op.transpose() * &mv;
        if (dual - &mv).amax() > LAYER_TOL {
            return Err(Error::PreconditionFailed(format!("layer {i} does not fix m")));
        }
    }
    // Density of the first layer by power iteration; λ = 1 there.
    let mut h = DVector::from_element(d, 1.0);
    for _ in 0..10_000 {
        let next = &ops[0] * &h;
        let next = &next / mv.dot(&next);
        let done = (&next - &h).amax() < 1e-15;
        h = next;
        if done {
            break;
        }
    }
    for (i, op) in ops.iter().enumerate() {
        if (op * &h - &h).amax() > LAYER_TOL {
            return Err(Error::PreconditionFailed(format!("layer {i} does not fix the density of layer 0")));
        }
    }
    let mut errs: Vec<(u64, f64, f64, f64)> = seeds
        .par_iter()
        .map(|&seed| -> Result<(u64, f64, f64, f64)> {
            let real = realize(env, seed, window)?;
            let fam = solve_family(&real.spec, 0, window, ZERO, solver)?;
            let mut eh = 0.0_f64;
            let mut el = 0.0_f64;
            let mut en = 0.0_f64;
            for i in 0..window {
                el = el.max((fam.lambda[i] - c(1.0, 0.0)).norm());
                eh = eh.max(fam.h[i].iter().zip(h.iter()).map(|(a, b)| (a - c(*b, 0.0)).norm()).fold(0.0, f64::max));
                en = en.max(fam.nu[i].iter().zip(m).map(|(a, b)| (a - c(*b, 0.0)).norm()).fold(0.0, f64::max));
            }
            Ok((seed, eh, el, en))
        })
        .collect::<Result<Vec<_>>>()?;
    errs.sort_by_key(|e| e.0);
    let max_h_error = errs.iter().map(|e| e.1).fold(0.0, f64::max);
    let max_lambda_error = errs.iter().map(|e| e.2).fold(0.0, f64::max);
    let max_nu_error = errs.iter().map(|e| e.3).fold(0.0, f64::max);
    let passed = max_h_error <= tol && max_lambda_error <= tol && max_nu_error <= tol;
    Ok(DensityReport { h: h.iter().copied().collect(), max_h_error, max_lambda_error, max_nu_error, passed })
}

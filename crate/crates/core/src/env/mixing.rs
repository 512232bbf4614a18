//! Mixing and recurrence diagnostics for environment drivers, computed
//! exactly from kernel products.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::spec::{EnvSpec, ResolvedDriver};
use crate::error::Result;

const MC_BATCH: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiMixingReport {
    /// `phi[n − 1] = φ(n)` for `1 ≤ n ≤ n_max`.
    pub phi: Vec<f64>,
    /// `Σ_{k ≤ n} φ(k)`.
    pub partial_sums: Vec<f64>,
    pub origins: usize,
}

fn tv(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// `φ(n) = sup_i max_{x: P(ξ_i = x) > 0} ‖P(ξ_{i+n} ∈ · | ξ_i = x) − P(ξ_{i+n} ∈ ·)‖_TV`
/// over origins `0 ≤ i < window`. By the Markov property the supremum over
/// past and future events reduces to these one-time laws.
pub fn phi_mixing_exact(env: &EnvSpec, n_max: usize) -> Result<PhiMixingReport> {
    let driver = env.validate()?;
    Ok(phi_of_driver(&driver, env.window.max(1), n_max))
}

pub fn phi_of_driver(driver: &ResolvedDriver, origins: usize, n_max: usize) -> PhiMixingReport {
    let marginals = driver.marginals(origins);
    let y = driver.states();
    let per_origin: Vec<Vec<f64>> = (0..origins)
        .into_par_iter()
        .map(|i| {
            let mut q = DMatrix::<f64>::identity(y, y);
            let mut out = Vec::with_capacity(n_max);
            for n in 1..=n_max {
                q *= driver.kernel(i + n - 1);
                let law: DVector<f64> = q.transpose() * &marginals[i];
                let worst = (0..y)
                    .filter(|&x| marginals[i][x] > 0.0)
                    .map(|x| {
                        let row: Vec<f64> = q.row(x).iter().copied().collect();
                        tv(&row, law.as_slice())
                    })
                    .fold(0.0, f64::max);
                out.push(worst);
            }
            out
        })
        .collect();
    let phi: Vec<f64> = (0..n_max).map(|n| per_origin.iter().map(|v| v[n]).fold(0.0, f64::max)).collect();
    let partial_sums = phi
        .iter()
        .scan(0.0, |acc, &v| {
            *acc += v;
            Some(*acc)
        })
        .collect();
    PhiMixingReport { phi, partial_sums, origins }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropGrowthRow {
    pub n: usize,
    /// `Σ_{m < n} P{ξ_{m s m_0 + i} = y_{i mod m_0} for all i < s m_0}`.
    pub sum: f64,
    pub reference: f64,
    /// `sum / √(n ln n)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropGrowthReport {
    pub s: usize,
    pub m0: usize,
    pub rows: Vec<PropGrowthRow>,
    /// The marked block has probability zero in every block.
    pub unreachable: bool,
    /// Ratios are positive and strictly increasing along `n_list`.
    pub compliant: bool,
}

/// Probabilities of the marked block at each of the first `blocks` blocks.
pub fn block_probabilities(env: &EnvSpec, s: usize, blocks: usize) -> Result<Vec<f64>> {
    let driver = env.validate()?;
    let marked = &env.marked;
    let len = s * marked.len();
    if len == 0 {
        return Ok(vec![0.0; blocks]);
    }
    let mut law = driver.initial.clone();
    let mut out = Vec::with_capacity(blocks);
    for m in 0..blocks {
        let t0 = m * len;
        let mut p = law[marked[0]];
        for i in 1..len {
            p *= driver.kernel(t0 + i - 1)[(marked[(i - 1) % marked.len()], marked[i % marked.len()])];
        }
        out.push(p);
        for i in 0..len {
            law = driver.kernel(t0 + i).transpose() * law;
        }
    }
    Ok(out)
}

pub fn propgrowth_report(env: &EnvSpec, s: usize, n_list: &[usize]) -> Result<PropGrowthReport> {
    let n_max = n_list.iter().copied().max().unwrap_or(0);
    let probs = block_probabilities(env, s, n_max)?;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let sum: f64 = probs[..n].iter().sum();
        let nf = n as f64;
        let reference = (nf * nf.ln().max(0.0)).sqrt();
        rows.push(PropGrowthRow { n, sum, reference, ratio: sum / reference });
    }
    let unreachable = probs.iter().all(|&p| p == 0.0);
    let compliant = !unreachable && rows.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0) && rows.windows(2).all(|w| w[1].ratio > w[0].ratio);
    Ok(PropGrowthReport { s, m0: env.m0(), rows, unreachable, compliant })
}

/// Monte Carlo estimate of the block sum over `n` blocks: mean number of
/// marked blocks per path and its standard error.
pub fn propgrowth_monte_carlo(env: &EnvSpec, s: usize, n: usize, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let driver = env.validate()?;
    let marked = &env.marked;
    let len = s * marked.len();
    let batches = samples.div_ceil(MC_BATCH);
    let counts: Vec<f64> = (0..batches)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let size = MC_BATCH.min(samples - b * MC_BATCH);
            (0..size)
                .map(|_| {
                    let path = driver.sample(n * len, &mut rng);
                    (0..n).filter(|&m| (0..len).all(|i| path[m * len + i] == marked[i % marked.len()])).count() as f64
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let k = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / k;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
    Ok((mean, (var / k).sqrt()))
}

//! Exact law of `S_{j,n} u` for lattice observables, by dynamic programming
//! over (symbol, lattice sum).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::GibbsFamily;
use crate::systems::sft::lattice_span;

/// Default cap on the number of lattice points per symbol.
pub const DEFAULT_STATE_CAP: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactDistribution {
    pub n: usize,
    /// Lattice span `h` of the observable values.
    pub span: f64,
    /// Value of the first atom; atom `k` sits at `offset + k h`.
    pub offset: f64,
    pub probs: Vec<f64>,
    pub mean: f64,
    pub sigma: f64,
}

impl ExactDistribution {
    pub fn value(&self, k: usize) -> f64 {
        self.offset + k as f64 * self.span
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `μ{S ∈ [a, b]}`.
    pub fn prob_between(&self, a: f64, b: f64) -> f64 {
        let tol = 1e-9 * self.span;
        self.probs.iter().enumerate().filter(|(k, _)| {
            let x = self.value(*k);
            x >= a - tol && x <= b + tol
        }).map(|(_, p)| p).sum()
    }

    /// `μ{|S − E S| ≥ t}`.
    pub fn two_sided_tail(&self, t: f64) -> f64 {
        let tol = 1e-9 * self.span;
        self.probs.iter().enumerate().filter(|(k, _)| (self.value(*k) - self.mean).abs() >= t - tol).map(|(_, p)| p).sum()
    }

    /// Span of the smallest lattice containing the support minus its minimum.
    pub fn support_span(&self) -> f64 {
        let support: Vec<f64> = self
            .probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(k, _)| k as f64)
            .collect();
        match support.first() {
            Some(&k0) => lattice_span(support.iter().map(|k| k - k0)).unwrap_or(1.0) * self.span,
            None => self.span,
        }
    }

    /// `E e^{z S}` summed directly over the atoms.
    pub fn mgf(&self, z: crate::linalg::C64) -> crate::linalg::C64 {
        self.probs.iter().enumerate().map(|(k, &p)| (z * self.value(k)).exp() * p).sum()
    }
}

fn lattice_of(g: &GibbsFamily, j: i64, n: usize) -> Result<f64> {
    let slots = if g.periodic { n.min(g.len) } else { n };
    let values = (0..slots as i64).flat_map(|k| g.spec.u(j + k).to_vec());
    lattice_span(values).ok_or(Error::NotLattice)
}

/// Exact distributions of `S_{j,n} u` for every `n` in `n_list`, from one pass.
pub fn exact_distributions(g: &GibbsFamily, j: i64, n_list: &[usize], cap: usize) -> Result<Vec<ExactDistribution>> {
    let n_max = n_list.iter().copied().max().unwrap_or(0);
    let h = lattice_of(g, j, n_max.max(1))?;
    let slots = if g.periodic { n_max.min(g.len).max(1) } else { n_max.max(1) };
    // Integer steps per slot.
    let steps: Vec<Vec<i64>> = (0..slots as i64)
        .map(|k| g.spec.u(j + k).iter().map(|&u| (u / h).round() as i64).collect())
        .collect();
    let lo_step: i64 = steps.iter().map(|s| *s.iter().min().unwrap()).min().unwrap_or(0);
    let hi_step: i64 = steps.iter().map(|s| *s.iter().max().unwrap()).max().unwrap_or(0);
    let width = ((hi_step - lo_step) as u128 * n_max as u128 + 1) as usize;
    let d_max = (0..slots as i64).map(|k| g.marginal(j + k).len()).max().unwrap_or(1);
    if width.saturating_mul(d_max) > cap {
        return Err(Error::StateCapExceeded { needed: width.saturating_mul(d_max), cap });
    }
    let mut wanted: Vec<usize> = n_list.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    let mut found = std::collections::BTreeMap::new();
    // dist[a][k]: probability of x_t = a and accumulated sum lo_step*t + k (in units of h).
    let m0 = g.marginal(j);
    let mut dist: Vec<Vec<f64>> = m0.iter().map(|&p| vec![p]).collect();
    let record = |t: usize, dist: &Vec<Vec<f64>>, found: &mut std::collections::BTreeMap<usize, ExactDistribution>| {
        let len = dist.iter().map(|v| v.len()).max().unwrap_or(1);
        let mut probs = vec![0.0; len];
        for v in dist {
            for (k, p) in v.iter().enumerate() {
                probs[k] += p;
            }
        }
        // Trim zero tails so the support starts at a charged atom.
        let first = probs.iter().position(|&p| p > 0.0).unwrap_or(0);
        let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        let probs = probs[first..=last].to_vec();
        let offset = (lo_step * t as i64 + first as i64) as f64 * h;
        let mean: f64 = probs.iter().enumerate().map(|(k, p)| p * (offset + k as f64 * h)).sum();
        let var: f64 = probs.iter().enumerate().map(|(k, p)| p * (offset + k as f64 * h - mean).powi(2)).sum();
        found.insert(t, ExactDistribution { n: t, span: h, offset, probs, mean, sigma: var.max(0.0).sqrt() });
    };
    if wanted.first() == Some(&0) {
        record(0, &vec![vec![1.0]], &mut found);
    }
    for t in 0..n_max {
        let k = j + t as i64;
        let step = &steps[t % slots];
        let p = g.kernel(k);
        let old_len = dist[0].len();
        let new_len = old_len + (hi_step - lo_step) as usize;
        let mut next = vec![vec![0.0; new_len]; p.ncols()];
        for (a, row) in dist.iter().enumerate() {
            let shift = (step[a] - lo_step) as usize;
            for b in 0..p.ncols() {
                let w = p[(a, b)];
                if w == 0.0 {
                    continue;
                }
                let target = &mut next[b][shift..shift + old_len];
                for (x, &y) in target.iter_mut().zip(row) {
                    *x += w * y;
                }
            }
        }
        dist = next;
        if wanted.binary_search(&(t + 1)).is_ok() {
            record(t + 1, &dist, &mut found);
        }
    }
    Ok(n_list.iter().map(|n| found[n].clone()).collect())
}

/// Exact distribution of `S_{j,n} u`.
pub fn exact_distribution(g: &GibbsFamily, j: i64, n: usize) -> Result<ExactDistribution> {
    Ok(exact_distributions(g, j, &[n], DEFAULT_STATE_CAP)?.remove(0))
}

//! The Gibbs family `μ_j = h_j^{(0)} ν_j^{(0)}` as a non-homogeneous Markov chain.
//!
//! For a depth-1 potential `μ_j` is Markov with marginals `m_j(a) = h_j(a) ν_j(a)`
//! and forward kernels `P_j(a→b) = A_j(a,b) e^{f_j(a)} ν_{j+1}(b) / (λ_j ν_j(a))`.

use nalgebra::{DMatrix, DVector};
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ZERO;
use crate::rpf::triplet::{solve_family, SolverOptions};
use crate::systems::operator::TransferFamily;
use crate::systems::sft::SftSpec;

#[derive(Debug, Clone)]
pub struct GibbsFamily {
    pub spec: SftSpec,
    pub start: i64,
    /// Stored indices; for periodic specs everything wraps modulo this length.
    pub len: usize,
    pub periodic: bool,
    pub lambda: Vec<f64>,
    pub h: Vec<DVector<f64>>,
    pub nu: Vec<DVector<f64>>,
    pub marginals: Vec<DVector<f64>>,
    /// `kernels[j][(a, b)] = P_j(a→b)`.
    pub kernels: Vec<DMatrix<f64>>,
    /// Matrices of the normalized operators at z = 0:
    /// `backward[j][(b, a)] = m_j(a) P_j(a→b) / m_{j+1}(b)`.
    pub backward: Vec<DMatrix<f64>>,
    /// Set once the observable has been replaced by `u_j − μ_j(u_j)`.
    pub centered: bool,
    /// `max_j ‖m_j P_j − m_{j+1}‖_1` over the stored range.
    pub pushforward_error: f64,
}

/// A cylinder `{x_j = w_0, …, x_{j+r} = w_r}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cylinder {
    pub start: i64,
    pub word: Vec<usize>,
}

/// Builds the family on `[start, start + len]`. Periodic specs solve a single
/// period and ignore `len`.
pub fn build_gibbs(spec: &SftSpec, start: i64, len: usize, opts: &SolverOptions) -> Result<GibbsFamily> {
    if spec.memory != 1 {
        return Err(Error::PreconditionFailed("Gibbs family needs a memory-one spec; recode first".into()));
    }
    let (periodic, solve_len) = match TransferFamily::period(spec) {
        Some(p) => (true, p),
        None => (false, len + 1),
    };
    let fam = solve_family(spec, start, solve_len, ZERO, opts)?;
    let real = |v: &crate::linalg::CVector| DVector::from_iterator(v.len(), v.iter().map(|x| x.re));
    let n_store = if periodic { solve_len } else { solve_len + 1 };
    let lambda: Vec<f64> = fam.lambda[..n_store.min(fam.lambda.len())].iter().map(|l| l.re).collect();
    let h: Vec<DVector<f64>> = fam.h[..n_store].iter().map(real).collect();
    let nu: Vec<DVector<f64>> = fam.nu[..n_store].iter().map(real).collect();
    let marginals: Vec<DVector<f64>> = h
        .iter()
        .zip(&nu)
        .map(|(h, n)| {
            let m = h.component_mul(n).map(|x| x.max(0.0));
            let s = m.sum();
            m / s
        })
        .collect();
    let next = |i: usize| if periodic { (i + 1) % solve_len } else { i + 1 };
    let n_kernels = solve_len;
    let mut kernels = Vec::with_capacity(n_kernels);
    for i in 0..n_kernels {
        let j = start + i as i64;
        let t = spec.a(j);
        let f = spec.f(j);
        let nu_next = &nu[next(i)];
        let mut k = DMatrix::zeros(t.rows, t.cols);
        for a in 0..t.rows {
            for b in 0..t.cols {
                if t.get(a, b) {
                    k[(a, b)] = f[a].exp() * nu_next[b].max(0.0) / (lambda[i] * nu[i][a]);
                }
            }
            let s: f64 = k.row(a).sum();
            k.row_mut(a).iter_mut().for_each(|x| *x /= s);
        }
        kernels.push(k);
    }
    let mut err = 0.0_f64;
    let mut backward = Vec::with_capacity(n_kernels);
    for i in 0..n_kernels {
        let pushed = kernels[i].tr_mul(&marginals[i]);
        err = err.max((&pushed - &marginals[next(i)]).abs().sum());
        let (m, k) = (&marginals[i], &kernels[i]);
        backward.push(DMatrix::from_fn(k.ncols(), k.nrows(), |b, a| {
            if pushed[b] > 0.0 {
                m[a] * k[(a, b)] / pushed[b]
            } else {
                0.0
            }
        }));
    }
    Ok(GibbsFamily {
        spec: spec.clone(),
        start,
        len: solve_len,
        periodic,
        lambda,
        h,
        nu,
        marginals,
        kernels,
        backward,
        centered: false,
        pushforward_error: err,
    })
}

impl GibbsFamily {
    fn idx(&self, j: i64, extra: usize) -> usize {
        let i = j - self.start;
        if self.periodic {
            i.rem_euclid(self.len as i64) as usize
        } else {
            assert!(i >= 0 && (i as usize) < self.len + extra, "index {j} outside the Gibbs window");
            i as usize
        }
    }

    pub fn marginal(&self, j: i64) -> &DVector<f64> {
        &self.marginals[self.idx(j, 1)]
    }

    pub fn kernel(&self, j: i64) -> &DMatrix<f64> {
        &self.kernels[self.idx(j, 0)]
    }

    pub fn backward(&self, j: i64) -> &DMatrix<f64> {
        &self.backward[self.idx(j, 0)]
    }

    /// `μ_j(u_j)`.
    pub fn mean_observable(&self, j: i64) -> f64 {
        self.marginal(j).iter().zip(self.spec.u(j)).map(|(m, u)| m * u).sum()
    }

    /// The same family with `u_j` replaced by `u_j − μ_j(u_j)`. Centering a
    /// centered family returns it unchanged.
    pub fn centered(&self) -> Result<GibbsFamily> {
        if self.centered {
            return Ok(self.clone());
        }
        if !self.periodic {
            return Err(Error::PreconditionFailed("centering needs a periodic family".into()));
        }
        let shift: Vec<f64> = (0..self.spec.period()).map(|s| self.mean_observable(self.spec.lo + s as i64)).collect();
        let mut out = self.clone();
        out.spec = self.spec.shifted_observable(&shift)?;
        out.centered = true;
        Ok(out)
    }

    pub fn lambda(&self, j: i64) -> f64 {
        self.lambda[self.idx(j, 0)]
    }

    pub fn h(&self, j: i64) -> &DVector<f64> {
        &self.h[self.idx(j, 1)]
    }

    pub fn nu(&self, j: i64) -> &DVector<f64> {
        &self.nu[self.idx(j, 1)]
    }

    /// `ln λ_{j,n}(0)`.
    pub fn log_lambda(&self, j: i64, n: usize) -> f64 {
        (0..n as i64).map(|k| self.lambda(j + k).ln()).sum()
    }

    /// `P_j ⋯ P_{j+n-1}`.
    pub fn kernel_product(&self, j: i64, n: usize) -> DMatrix<f64> {
        let d = self.marginal(j).len();
        let mut p = DMatrix::identity(d, d);
        for k in 0..n as i64 {
            p *= self.kernel(j + k);
        }
        p
    }

    /// Closed-form cylinder mass
    /// `h_j(w_0) e^{Σ f_i(w_i)} (Σ_b A(w_r, b) ν_{j+r+1}(b)) / λ_{j,r+1}`;
    /// zero for inadmissible words.
    pub fn cylinder_mass(&self, cyl: &Cylinder) -> f64 {
        let (j, w) = (cyl.start, &cyl.word);
        if w.is_empty() {
            return 1.0;
        }
        if !self.spec.admissible(j, w) {
            return 0.0;
        }
        let r = w.len() - 1;
        let s: f64 = w.iter().enumerate().map(|(i, &a)| self.spec.f(j + i as i64)[a]).sum();
        let last = j + r as i64;
        let t = self.spec.a(last);
        let nu_next = self.nu(last + 1);
        let tail: f64 = (0..t.cols).filter(|&b| t.get(w[r], b)).map(|b| nu_next[b]).sum();
        self.h(j)[w[0]] * tail * (s - self.log_lambda(j, r + 1)).exp()
    }

    /// Mass of the same cylinder from the chain: `m_j(w_0) Π P_i(w_i → w_{i+1})`.
    pub fn chain_mass(&self, cyl: &Cylinder) -> f64 {
        let (j, w) = (cyl.start, &cyl.word);
        if w.is_empty() {
            return 1.0;
        }
        if !self.spec.admissible(j, w) {
            return 0.0;
        }
        let mut m = self.marginal(j)[w[0]];
        for (i, p) in w.windows(2).enumerate() {
            m *= self.kernel(j + i as i64)[(p[0], p[1])];
        }
        m
    }

    /// `μ_j(g · f∘T^n)` for depth-1 observables `g` at `j` and `f` at `j+n`.
    pub fn correlation(&self, j: i64, g: &[f64], f: &[f64], n: usize) -> f64 {
        let pf = self.kernel_product(j, n) * DVector::from_column_slice(f);
        let m = self.marginal(j);
        let joint: f64 = (0..m.len()).map(|a| m[a] * g[a] * pf[a]).sum();
        let mg: f64 = m.iter().zip(g).map(|(x, y)| x * y).sum();
        let mf: f64 = self.marginal(j + n as i64).iter().zip(f).map(|(x, y)| x * y).sum();
        joint - mg * mf
    }
}

/// Sampled paths `x_j, …, x_{j+n-1}` of the chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathBatch {
    pub start: i64,
    pub n: usize,
    pub seed: u64,
    pub paths: Vec<Vec<usize>>,
}

pub const SAMPLE_BATCH: usize = 4096;

/// Forward simulation; batch `b` uses stream `b` of the generator seeded by
/// `seed`, so output does not depend on scheduling.
pub fn sample_paths(family: &GibbsFamily, j: i64, n: usize, count: usize, seed: u64) -> PathBatch {
    let m0 = WeightedIndex::new(family.marginal(j).iter().copied()).expect("marginal is a probability vector");
    let steps: Vec<Vec<WeightedIndex<f64>>> = (0..kernel_span(family, n))
        .map(|k| {
            let p = family.kernel(j + k as i64);
            (0..p.nrows()).map(|a| WeightedIndex::new(p.row(a).iter().copied()).expect("stochastic row")).collect()
        })
        .collect();
    let span = steps.len().max(1);
    let batches = count.div_ceil(SAMPLE_BATCH);
    let paths: Vec<Vec<usize>> = (0..batches)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let size = SAMPLE_BATCH.min(count - b * SAMPLE_BATCH);
            let mut out = Vec::with_capacity(size);
            for _ in 0..size {
                let mut x = Vec::with_capacity(n);
                if n > 0 {
                    x.push(m0.sample(&mut rng));
                }
                for k in 1..n {
                    let prev = x[k - 1];
                    x.push(steps[(k - 1) % span][prev].sample(&mut rng));
                }
                out.push(x);
            }
            out.into_iter()
        })
        .collect();
    PathBatch { start: j, n, seed, paths }
}

// Periodic families repeat their kernels, so one period suffices.
fn kernel_span(family: &GibbsFamily, n: usize) -> usize {
    let steps = n.saturating_sub(1);
    if family.periodic {
        steps.min(family.len)
    } else {
        steps
    }
}

//! Random environments: a finite state space of SFT layers selected along
//! time by an independent or Markov driver.

use nalgebra::{DMatrix, DVector};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::systems::sft::{Extension, SftSpec, Transition};

const STOCHASTIC_TOL: f64 = 1e-12;

/// SFT data attached to one environment state. All layers share the
/// alphabet size so that any sequence of states composes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    pub transition: Vec<Vec<u8>>,
    pub potential: Vec<f64>,
    pub observable: Vec<f64>,
}

impl Layer {
    pub fn new(transition: Vec<Vec<u8>>, potential: Vec<f64>, observable: Vec<f64>) -> Self {
        Layer { transition, potential, observable }
    }

    /// Full shift on `d` symbols with weights `p` (potential `ln p`).
    pub fn bernoulli(p: &[f64], observable: Vec<f64>) -> Self {
        let d = p.len();
        Layer { transition: vec![vec![1; d]; d], potential: p.iter().map(|x| x.ln()).collect(), observable }
    }

    pub fn d(&self) -> usize {
        self.transition.len()
    }
}

/// Time-inhomogeneous law of the environment sequence `ξ_0, ξ_1, …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Driver {
    /// `ξ_i` independent with law `probs[i mod len]`.
    Independent { probs: Vec<Vec<f64>> },
    /// Markov chain with step `i → i+1` kernel `kernels[i mod len]`.
    Markov { initial: Vec<f64>, kernels: Vec<Vec<Vec<f64>>> },
    /// Markov chain with `period` seeded kernels whose entries are at least
    /// `floor`, started from the uniform law.
    SeededMarkov { period: usize, floor: f64, seed: u64 },
}

/// Driver reduced to an initial law and a cycle of row-stochastic kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedDriver {
    pub initial: DVector<f64>,
    pub kernels: Vec<DMatrix<f64>>,
    pub independent: bool,
}

impl ResolvedDriver {
    /// Kernel for the step `i → i + 1`.
    pub fn kernel(&self, i: usize) -> &DMatrix<f64> {
        &self.kernels[i % self.kernels.len()]
    }

    /// Laws of `ξ_0, …, ξ_{len−1}`.
    pub fn marginals(&self, len: usize) -> Vec<DVector<f64>> {
        let mut out = Vec::with_capacity(len);
        let mut p = self.initial.clone();
        for i in 0..len {
            out.push(p.clone());
            p = self.kernel(i).transpose() * p;
        }
        out
    }

    pub fn states(&self) -> usize {
        self.initial.len()
    }

    /// One path of length `len`.
    pub fn sample<R: Rng>(&self, len: usize, rng: &mut R) -> Vec<usize> {
        let samplers: Vec<Vec<WeightedIndex<f64>>> = self
            .kernels
            .iter()
            .map(|k| (0..k.nrows()).map(|a| WeightedIndex::new(k.row(a).iter().copied()).expect("stochastic row")).collect())
            .collect();
        let first = WeightedIndex::new(self.initial.iter().copied()).expect("initial law");
        let mut path = Vec::with_capacity(len);
        if len > 0 {
            path.push(first.sample(rng));
        }
        for i in 1..len {
            let prev = path[i - 1];
            path.push(samplers[(i - 1) % samplers.len()][prev].sample(rng));
        }
        path
    }
}

fn check_law(v: &[f64], y: usize, what: &str) -> Result<()> {
    if v.len() != y {
        return Err(Error::InvalidDriver(format!("{what} has {} entries for {y} states", v.len())));
    }
    if v.iter().any(|&x| !(x >= 0.0)) || (v.iter().sum::<f64>() - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::InvalidDriver(format!("{what} is not a probability vector")));
    }
    Ok(())
}

/// Seeded row-stochastic kernels with entries at least `floor`.
pub fn seeded_kernels(seed: u64, states: usize, period: usize, floor: f64) -> Result<Vec<DMatrix<f64>>> {
    if !(floor >= 0.0) || floor * states as f64 > 1.0 {
        return Err(Error::InvalidDriver(format!("floor {floor} is infeasible for {states} states")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let free = 1.0 - floor * states as f64;
    Ok((0..period)
        .map(|_| {
            let mut k = DMatrix::from_fn(states, states, |_, _| rng.gen::<f64>());
            for mut row in k.row_iter_mut() {
                let s = row.sum();
                row.apply(|x| *x = floor + free * *x / s);
            }
            k
        })
        .collect())
}

impl Driver {
    pub fn resolve(&self, states: usize) -> Result<ResolvedDriver> {
        match self {
            Driver::Independent { probs } => {
                if probs.is_empty() {
                    return Err(Error::InvalidDriver("no laws given".into()));
                }
                for (i, p) in probs.iter().enumerate() {
                    check_law(p, states, &format!("law {i}"))?;
                }
                let k = probs.len();
                let kernels = (0..k)
                    .map(|i| {
                        let next = &probs[(i + 1) % k];
                        DMatrix::from_fn(states, states, |_, b| next[b])
                    })
                    .collect();
                Ok(ResolvedDriver { initial: DVector::from_column_slice(&probs[0]), kernels, independent: true })
            }
            Driver::Markov { initial, kernels } => {
                check_law(initial, states, "initial law")?;
                if kernels.is_empty() {
                    return Err(Error::InvalidDriver("no kernels given".into()));
                }
                let mut out = Vec::with_capacity(kernels.len());
                for (i, k) in kernels.iter().enumerate() {
                    if k.len() != states {
                        return Err(Error::InvalidDriver(format!("kernel {i} has {} rows for {states} states", k.len())));
                    }
                    for (a, row) in k.iter().enumerate() {
                        check_law(row, states, &format!("kernel {i} row {a}"))?;
                    }
                    out.push(DMatrix::from_fn(states, states, |a, b| k[a][b]));
                }
                Ok(ResolvedDriver { initial: DVector::from_column_slice(initial), kernels: out, independent: false })
            }
            Driver::SeededMarkov { period, floor, seed } => {
                if *period == 0 {
                    return Err(Error::InvalidDriver("period must be positive".into()));
                }
                let kernels = seeded_kernels(*seed, states, *period, *floor)?;
                Ok(ResolvedDriver {
                    initial: DVector::from_element(states, 1.0 / states as f64),
                    kernels,
                    independent: false,
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvSpec {
    pub layers: Vec<Layer>,
    pub driver: Driver,
    /// Marked cycle `y_1, …, y_{m_0}`; neighborhoods are exact matches.
    #[serde(default)]
    pub marked: Vec<usize>,
    pub window: usize,
}

impl EnvSpec {
    pub fn states(&self) -> usize {
        self.layers.len()
    }

    pub fn m0(&self) -> usize {
        self.marked.len()
    }

    /// Checks layer shapes, marked states and the driver.
    pub fn validate(&self) -> Result<ResolvedDriver> {
        let y = self.states();
        if y == 0 {
            return Err(Error::InvalidSpec("environment has no states".into()));
        }
        let d = self.layers[0].d();
        for (i, l) in self.layers.iter().enumerate() {
            if l.d() != d || l.transition.iter().any(|r| r.len() != d) {
                return Err(Error::DimensionMismatch(format!("layer {i} is not {d}x{d}")));
            }
            if l.potential.len() != d || l.observable.len() != d {
                return Err(Error::DimensionMismatch(format!("layer {i} functions need {d} entries")));
            }
            // Each layer alone must be a valid system.
            SftSpec::new(
                0,
                Extension::Periodic,
                vec![Transition::from_rows(&l.transition)?],
                vec![l.potential.clone()],
                vec![l.observable.clone()],
            )
            .map_err(|e| Error::InvalidSpec(format!("layer {i}: {e}")))?;
        }
        if let Some(&s) = self.marked.iter().find(|&&s| s >= y) {
            return Err(Error::InvalidSpec(format!("marked state {s} out of range")));
        }
        self.driver.resolve(y)
    }

    /// SFT spec following the state path `path`, starting at time `lo`.
    pub fn spec_for_path(&self, path: &[usize], lo: i64, extension: Extension) -> Result<SftSpec> {
        let ls: Vec<&Layer> = path.iter().map(|&y| &self.layers[y]).collect();
        SftSpec::new(
            lo,
            extension,
            ls.iter().map(|l| Transition::from_rows(&l.transition)).collect::<Result<_>>()?,
            ls.iter().map(|l| l.potential.clone()).collect(),
            ls.iter().map(|l| l.observable.clone()).collect(),
        )
    }

    /// The marked cycle as a periodic system of period `m_0`.
    pub fn reference_spec(&self) -> Result<SftSpec> {
        if self.marked.is_empty() {
            return Err(Error::PreconditionFailed("no marked states configured".into()));
        }
        self.spec_for_path(&self.marked, 0, Extension::Periodic)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub seed: u64,
    pub path: Vec<usize>,
    /// Periodic extension of the realized window.
    pub spec: SftSpec,
    /// Times `t` with `ξ_{t..t+m_0} = (y_1, …, y_{m_0})`.
    pub marked_hits: Vec<usize>,
}

impl Realization {
    /// Blocks `m` of length `s m_0` on which the path runs the marked cycle
    /// `s` times.
    pub fn block_hits(&self, marked: &[usize], s: usize) -> Vec<usize> {
        let len = s * marked.len();
        if len == 0 {
            return Vec::new();
        }
        (0..self.path.len() / len)
            .filter(|&m| (0..len).all(|i| self.path[m * len + i] == marked[i % marked.len()]))
            .collect()
    }
}

/// Environment path on `[0, window)` drawn from `ChaCha8Rng` seeded by `seed`.
pub fn realize(env: &EnvSpec, seed: u64, window: usize) -> Result<Realization> {
    if window == 0 {
        return Err(Error::InvalidSpec("window is empty".into()));
    }
    let driver = env.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let path = driver.sample(window, &mut rng);
    let spec = env.spec_for_path(&path, 0, Extension::Periodic)?;
    let m0 = env.m0();
    let marked_hits = if m0 == 0 {
        Vec::new()
    } else {
        (0..window.saturating_sub(m0 - 1)).filter(|&t| path[t..t + m0] == env.marked[..]).collect()
    };
    Ok(Realization { seed, path, spec, marked_hits })
}

//! Named systems and seeded generators used by tests, examples and configs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::systems::sft::{Extension, SftSpec, Transition};

/// Rule producing a per-index vector of values over each alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Generator {
    Constant { value: f64 },
    SymbolLinear { slope: f64, intercept: f64 },
    SeededUniform { lo: f64, hi: f64, seed: u64 },
    SeededInteger { lo: i64, hi: i64, seed: u64 },
    Explicit { values: Vec<Vec<f64>> },
}

impl Generator {
    /// Values for each window slot given alphabet sizes.
    pub fn realize(&self, alphabet: &[usize]) -> Result<Vec<Vec<f64>>> {
        Ok(match self {
            Generator::Constant { value } => alphabet.iter().map(|&d| vec![*value; d]).collect(),
            Generator::SymbolLinear { slope, intercept } => alphabet
                .iter()
                .map(|&d| (0..d).map(|a| intercept + slope * a as f64).collect())
                .collect(),
            Generator::SeededUniform { lo, hi, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                alphabet
                    .iter()
                    .map(|&d| (0..d).map(|_| rng.gen_range(*lo..=*hi)).collect())
                    .collect()
            }
            Generator::SeededInteger { lo, hi, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                alphabet
                    .iter()
                    .map(|&d| (0..d).map(|_| rng.gen_range(*lo..=*hi) as f64).collect())
                    .collect()
            }
            Generator::Explicit { values } => {
                if values.len() == 1 && alphabet.len() > 1 {
                    alphabet.iter().map(|_| values[0].clone()).collect()
                } else {
                    values.clone()
                }
            }
        })
    }
}

fn constant_window(t: Transition, len: usize, f: Vec<f64>, u: Vec<f64>) -> Result<SftSpec> {
    SftSpec::new(0, Extension::Periodic, vec![t; len], vec![f; len], vec![u; len])
}

/// Full shift on `d` symbols with constant layers.
pub fn full_shift(d: usize, f: Vec<f64>, u: Vec<f64>, window: usize) -> Result<SftSpec> {
    constant_window(Transition::full(d, d), window, f, u)
}

/// Golden-mean shift `A = [[1,1],[1,0]]` with constant layers.
pub fn golden_mean(f: Vec<f64>, u: Vec<f64>, window: usize) -> Result<SftSpec> {
    let t = Transition::from_rows(&[vec![1, 1], vec![1, 0]])?;
    constant_window(t, window, f, u)
}

/// Fair coin tossing with `u = (0, 1)`: the Bernoulli reference system.
pub fn iid_coin(window: usize) -> SftSpec {
    full_shift(2, vec![0.0, 0.0], vec![0.0, 1.0], window).expect("valid")
}

/// Random 0/1 matrix with no zero row or column and density `p`.
fn random_transition(rng: &mut ChaCha8Rng, r: usize, c: usize, p: f64) -> Transition {
    loop {
        let data: Vec<u8> = (0..r * c).map(|_| u8::from(rng.gen_bool(p))).collect();
        let t = Transition { rows: r, cols: c, data };
        let rows_ok = (0..r).all(|a| (0..c).any(|b| t.get(a, b)));
        let cols_ok = (0..c).all(|b| (0..r).any(|a| t.get(a, b)));
        if rows_ok && cols_ok {
            return t;
        }
    }
}

/// Options for [`seeded_primitive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeededOptions {
    pub window: usize,
    pub d_min: usize,
    pub d_max: usize,
    pub density: f64,
    pub max_n0: usize,
    pub potential_range: f64,
    /// Observable values are drawn from `0..=obs_int_max` when `Some`,
    /// otherwise uniformly from `[-1, 1]`.
    pub obs_int_max: Option<i64>,
}

impl Default for SeededOptions {
    fn default() -> Self {
        SeededOptions {
            window: 16,
            d_min: 2,
            d_max: 3,
            density: 0.75,
            max_n0: 3,
            potential_range: 0.5,
            obs_int_max: None,
        }
    }
}

/// Seeded non-stationary primitive SFT with periodic extension.
pub fn seeded_primitive(seed: u64, opts: SeededOptions) -> Result<SftSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10_000 {
        let alphabet: Vec<usize> = (0..opts.window).map(|_| rng.gen_range(opts.d_min..=opts.d_max)).collect();
        let transitions: Vec<Transition> = (0..opts.window)
            .map(|s| random_transition(&mut rng, alphabet[s], alphabet[(s + 1) % opts.window], opts.density))
            .collect();
        let potential: Vec<Vec<f64>> = alphabet
            .iter()
            .map(|&d| (0..d).map(|_| rng.gen_range(-opts.potential_range..=opts.potential_range)).collect())
            .collect();
        let observable: Vec<Vec<f64>> = alphabet
            .iter()
            .map(|&d| {
                (0..d)
                    .map(|_| match opts.obs_int_max {
                        Some(m) => rng.gen_range(0..=m) as f64,
                        None => rng.gen_range(-1.0..=1.0),
                    })
                    .collect()
            })
            .collect();
        if let Ok(spec) = SftSpec::new(0, Extension::Periodic, transitions, potential, observable) {
            if spec.n0 <= opts.max_n0 {
                return Ok(spec);
            }
        }
    }
    Err(Error::InvalidSpec("could not draw a primitive spec".into()))
}

/// Seeded probability vectors `m_j` with entries bounded below by `floor`.
pub fn seeded_measures(seed: u64, alphabet: &[usize], floor: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    alphabet
        .iter()
        .map(|&d| {
            let w: Vec<f64> = (0..d).map(|_| floor + rng.gen::<f64>()).collect();
            let s: f64 = w.iter().sum();
            w.into_iter().map(|x| x / s).collect()
        })
        .collect()
}

/// Potential making the spec nonsingular with respect to `m`:
/// `e^{f_j(a)} = m_j(a) / Σ_b A_j(a, b) m_{j+1}(b)`.
pub fn nonsingular_potential(spec: &SftSpec, m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..spec.period())
        .map(|s| {
            let j = spec.lo + s as i64;
            let t = spec.a(j);
            let next = &m[spec.slot(j + 1)];
            (0..t.rows)
                .map(|a| {
                    let denom: f64 = (0..t.cols).filter(|&b| t.get(a, b)).map(|b| next[b]).sum();
                    (m[s][a] / denom).ln()
                })
                .collect()
        })
        .collect()
}

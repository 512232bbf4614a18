//! Experiment configuration files (TOML) and their validation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::env::EnvSpec;
use crate::error::{Error, Result};
use crate::linalg::{c, C64};
use crate::rpf::SolverOptions;
use crate::systems::catalog::{seeded_primitive, Generator, SeededOptions};
use crate::systems::circle::CircleSpec;
use crate::systems::sft::{Extension, SftSpec, Transition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Rpf,
    Stability,
    Gibbs,
    Mixing,
    Moments,
    BerryEsseen,
    Llt,
    Concentration,
    Cumulants,
    Ldp,
    Variance,
    Nonsingular,
    EnvPhi,
    EnvGrowth,
    EnvLlt,
    EnvPressure,
    EnvH,
}

impl Kind {
    pub const ALL: [Kind; 17] = [
        Kind::Rpf,
        Kind::Stability,
        Kind::Gibbs,
        Kind::Mixing,
        Kind::Moments,
        Kind::BerryEsseen,
        Kind::Llt,
        Kind::Concentration,
        Kind::Cumulants,
        Kind::Ldp,
        Kind::Variance,
        Kind::Nonsingular,
        Kind::EnvPhi,
        Kind::EnvGrowth,
        Kind::EnvLlt,
        Kind::EnvPressure,
        Kind::EnvH,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Rpf => "rpf",
            Kind::Stability => "stability",
            Kind::Gibbs => "gibbs",
            Kind::Mixing => "mixing",
            Kind::Moments => "moments",
            Kind::BerryEsseen => "berry-esseen",
            Kind::Llt => "llt",
            Kind::Concentration => "concentration",
            Kind::Cumulants => "cumulants",
            Kind::Ldp => "ldp",
            Kind::Variance => "variance",
            Kind::Nonsingular => "nonsingular",
            Kind::EnvPhi => "env-phi",
            Kind::EnvGrowth => "env-growth",
            Kind::EnvLlt => "env-llt",
            Kind::EnvPressure => "env-pressure",
            Kind::EnvH => "env-h",
        }
    }

    pub fn needs_environment(self) -> bool {
        matches!(self, Kind::EnvPhi | Kind::EnvGrowth | Kind::EnvLlt | Kind::EnvPressure | Kind::EnvH)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Kind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment kind `{s}`")))
    }
}

fn one() -> usize {
    1
}

/// System under study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemConfig {
    FullShift {
        d: usize,
        window: usize,
        potential: Option<Generator>,
        observable: Option<Generator>,
    },
    GoldenMean {
        window: usize,
        potential: Option<Generator>,
        observable: Option<Generator>,
    },
    IidCoin {
        window: usize,
    },
    Seeded {
        window: usize,
        seed: u64,
        d_min: Option<usize>,
        d_max: Option<usize>,
        density: Option<f64>,
        max_n0: Option<usize>,
        potential_range: Option<f64>,
        obs_int_max: Option<i64>,
    },
    Explicit {
        window: usize,
        transitions: Vec<Vec<Vec<u8>>>,
        potential: Generator,
        observable: Generator,
        #[serde(default)]
        extension: Extension,
        #[serde(default = "one")]
        memory: usize,
    },
    /// Expanding circle maps `x ↦ m_j x` with trigonometric potentials given
    /// as `[re, im]` Fourier coefficients indexed `k + k_pot`.
    Circle {
        window: usize,
        multipliers: Vec<u32>,
        potential: Vec<Vec<[f64; 2]>>,
        observable: Vec<Vec<[f64; 2]>>,
        k_pot: usize,
        k_cut: usize,
        #[serde(default)]
        extension: Extension,
    },
}

fn constant_layers(d: usize, window: usize, g: &Option<Generator>, fallback: Vec<f64>) -> Result<Vec<Vec<f64>>> {
    match g {
        Some(g) => g.realize(&vec![d; window]),
        None => Ok(vec![fallback; window]),
    }
}

fn check_window(window: usize, len: usize, what: &str) -> Result<()> {
    if window == 0 {
        return Err(Error::Config("system.window must be positive".into()));
    }
    if len != window {
        return Err(Error::Config(format!("system.window is {window} but {len} {what} were given")));
    }
    Ok(())
}

impl SystemConfig {
    pub fn is_circle(&self) -> bool {
        matches!(self, SystemConfig::Circle { .. })
    }

    pub fn build(&self) -> Result<SftSpec> {
        match self {
            SystemConfig::FullShift { d, window, potential, observable } => {
                let w = *window;
                check_window(w, w, "")?;
                let f = constant_layers(*d, w, potential, vec![0.0; *d])?;
                let u = constant_layers(*d, w, observable, (0..*d).map(|a| a as f64).collect())?;
                SftSpec::new(0, Extension::Periodic, vec![Transition::full(*d, *d); w], f, u)
            }
            SystemConfig::GoldenMean { window, potential, observable } => {
                let w = *window;
                check_window(w, w, "")?;
                let f = constant_layers(2, w, potential, vec![0.0; 2])?;
                let u = constant_layers(2, w, observable, vec![0.0, 1.0])?;
                let t = Transition::from_rows(&[vec![1, 1], vec![1, 0]])?;
                SftSpec::new(0, Extension::Periodic, vec![t; w], f, u)
            }
            SystemConfig::IidCoin { window } => {
                check_window(*window, *window, "")?;
                Ok(crate::systems::catalog::iid_coin(*window))
            }
            SystemConfig::Seeded { window, seed, d_min, d_max, density, max_n0, potential_range, obs_int_max } => {
                check_window(*window, *window, "")?;
                let base = SeededOptions::default();
                let o = SeededOptions {
                    window: *window,
                    d_min: d_min.unwrap_or(base.d_min),
                    d_max: d_max.unwrap_or(base.d_max),
                    density: density.unwrap_or(base.density),
                    max_n0: max_n0.unwrap_or(base.max_n0),
                    potential_range: potential_range.unwrap_or(base.potential_range),
                    obs_int_max: obs_int_max.or(base.obs_int_max),
                };
                seeded_primitive(*seed, o)
            }
            SystemConfig::Explicit { window, transitions, potential, observable, extension, memory } => {
                check_window(*window, transitions.len(), "transition matrices")?;
                let ts = transitions.iter().map(|t| Transition::from_rows(t)).collect::<Result<Vec<_>>>()?;
                let words: Vec<usize> = (0..ts.len())
                    .map(|s| (0..*memory).map(|i| ts[(s + i) % ts.len()].rows).product())
                    .collect();
                let f = potential.realize(&words)?;
                let u = observable.realize(&words)?;
                SftSpec::with_memory(0, *extension, ts, f, u, *memory)
            }
            SystemConfig::Circle { .. } => Err(Error::Config("circle systems only support the rpf kind".into())),
        }
    }

    pub fn build_circle(&self) -> Result<CircleSpec> {
        match self {
            SystemConfig::Circle { window, multipliers, potential, observable, k_pot, k_cut, extension } => {
                check_window(*window, multipliers.len(), "multipliers")?;
                let conv = |v: &Vec<Vec<[f64; 2]>>| -> Vec<Vec<C64>> {
                    v.iter().map(|r| r.iter().map(|p| c(p[0], p[1])).collect()).collect()
                };
                CircleSpec::new(0, *extension, multipliers.clone(), conv(potential), conv(observable), *k_pot, *k_cut)
            }
            _ => Err(Error::Config("not a circle system".into())),
        }
    }
}

/// Solver settings; unset fields keep the library defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub horizon: Option<usize>,
    pub tol: Option<f64>,
    pub trust_radius: Option<f64>,
}

impl SolverConfig {
    pub fn options(&self) -> SolverOptions {
        let mut o = SolverOptions::default();
        if let Some(h) = self.horizon {
            o.horizon = h;
        }
        if let Some(t) = self.tol {
            o.tol = t;
        }
        o.trust_radius = self.trust_radius;
        o
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Option<Kind>,
    #[serde(default)]
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub system: Option<SystemConfig>,
    pub environment: Option<EnvSpec>,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Kind-specific parameters, validated by the runner.
    pub params: Option<toml::Table>,
}

/// Parsed configuration together with its canonical hash.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub hash: String,
}

/// SHA-256 of the canonical JSON form (keys sorted), so the hash does not
/// depend on key order or formatting.
pub fn config_hash(text: &str) -> Result<String> {
    let value: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let json = serde_json::to_value(&value).map_err(|e| Error::Config(e.to_string()))?;
    let canonical = serde_json::to_string(&json).map_err(|e| Error::Config(e.to_string()))?;
    Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
}

pub fn parse_config(text: &str, kind: Kind) -> Result<LoadedConfig> {
    let config: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().trim().to_string()))?;
    if let Some(k) = config.kind {
        if k != kind {
            return Err(Error::Config(format!("config is for `{k}` but `{kind}` was requested")));
        }
    }
    if kind.needs_environment() {
        if config.environment.is_none() {
            return Err(Error::Config("missing table `environment`".into()));
        }
    } else if config.system.is_none() {
        return Err(Error::Config("missing table `system`".into()));
    }
    Ok(LoadedConfig { config, hash: config_hash(text)? })
}

pub fn load_config(path: &Path, kind: Kind) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text, kind)
}

/// Deserializes the `[params]` table into the runner's parameter type.
pub fn params<P: DeserializeOwned + Default>(config: &ExperimentConfig) -> Result<P> {
    match &config.params {
        None => Ok(P::default()),
        Some(t) => P::deserialize(toml::Value::Table(t.clone())).map_err(|e| Error::Config(format!("params: {}", e.message().trim()))),
    }
}

//! Response of the triplet to small perturbations of potential and observable.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{l1_norm, sup_norm, C64};
use crate::rpf::triplet::{solve_family, SolverOptions};
use crate::systems::sft::SftSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub delta: f64,
    pub lambda_diff: f64,
    pub h_diff: f64,
    pub nu_diff: f64,
}

impl StabilityRow {
    pub fn response(&self) -> f64 {
        self.lambda_diff.max(self.h_diff).max(self.nu_diff)
    }
}

/// Seeded noise in `[-1, 1]` shaped like the spec's potential and observable.
pub fn noise_direction(spec: &SftSpec, seed: u64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |v: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        v.iter().map(|r| r.iter().map(|_| rng.gen_range(-1.0..=1.0)).collect()).collect()
    };
    let f = draw(&spec.potential);
    let u = draw(&spec.observable);
    (f, u)
}

/// `spec` with `f + δ ξ_f`, `u + δ ξ_u`.
pub fn perturb(spec: &SftSpec, delta: f64, dir: &(Vec<Vec<f64>>, Vec<Vec<f64>>)) -> Result<SftSpec> {
    let add = |base: &Vec<Vec<f64>>, d: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        base.iter().zip(d).map(|(b, n)| b.iter().zip(n).map(|(x, y)| x + delta * y).collect()).collect()
    };
    spec.with_functions(add(&spec.potential, &dir.0), add(&spec.observable, &dir.1))
}

/// Grid on the closed disk of radius `k_radius`: the center, and 8 points on
/// each of the circles of radius `k_radius/2` and `k_radius`.
pub fn disk_grid(k_radius: f64) -> Vec<C64> {
    let mut g = vec![C64::new(0.0, 0.0)];
    for r in [0.5 * k_radius, k_radius] {
        for i in 0..8 {
            g.push(C64::from_polar(r, std::f64::consts::PI * i as f64 / 4.0));
        }
    }
    g
}

/// For each `δ`, the sup over the z-grid and the window of `|λ − λ₁|`,
/// `‖h − h₁‖_∞` and `‖ν − ν₁‖_1`.
pub fn stability_sweep(
    spec: &SftSpec,
    deltas: &[f64],
    z_grid: &[C64],
    seed: u64,
    opts: &SolverOptions,
) -> Result<Vec<StabilityRow>> {
    let dir = noise_direction(spec, seed);
    let len = spec.period();
    // The perturbed observable can be larger; use one common trust radius.
    let mut common = *opts;
    let max_delta = deltas.iter().fold(0.0_f64, |a, &d| a.max(d));
    common.trust_radius = Some(opts.radius(spec).min(0.5 / (1.0 + spec.sup_observable() + max_delta)));
    let bases: Vec<_> = z_grid
        .iter()
        .map(|&z| solve_family(spec, spec.lo, len, z, &common))
        .collect::<Result<_>>()?;
    deltas
        .iter()
        .map(|&delta| {
            let other = perturb(spec, delta, &dir)?;
            let mut row = StabilityRow { delta, lambda_diff: 0.0, h_diff: 0.0, nu_diff: 0.0 };
            for (base, &z) in bases.iter().zip(z_grid) {
                let pert = solve_family(&other, spec.lo, len, z, &common)?;
                for i in 0..len {
                    row.lambda_diff = row.lambda_diff.max((base.lambda[i] - pert.lambda[i]).norm());
                    row.h_diff = row.h_diff.max(sup_norm(&(&base.h[i] - &pert.h[i])));
                    row.nu_diff = row.nu_diff.max(l1_norm(&(&base.nu[i] - &pert.nu[i])));
                }
            }
            Ok(row)
        })
        .collect()
}

// Random non-stationary subshift driven by a seeded Markov chain over three
// layers: mixing of the driver, marked-block growth, the local limit
// pipeline and concentration of the averaged pressure.

use std::f64::consts::PI;

use seqrpf::env::{env_llt_pipeline, phi_mixing_exact, pressure_concentration_report, propgrowth_report, Driver, EnvLltOptions, EnvSpec, Layer};
use seqrpf::rpf::SolverOptions;

/// Returns the fitted exponent of the cross-seed pressure deviation.
pub fn run_example() -> seqrpf::Result<f64> {
    let env = EnvSpec {
        layers: vec![
            Layer::bernoulli(&[0.5, 0.5], vec![0.0, 1.0]),
            Layer::bernoulli(&[0.3, 0.7], vec![0.0, 1.0]),
            Layer::new(vec![vec![1, 1], vec![1, 0]], vec![0.0, 0.2], vec![0.0, 1.0]),
        ],
        driver: Driver::SeededMarkov { period: 8, floor: 0.05, seed: 7 },
        marked: vec![0],
        window: 64,
    };
    let opts = SolverOptions::default();

    let phi = phi_mixing_exact(&env, 8)?;
    println!("phi(1..8) = {:?}", phi.phi.iter().map(|p| format!("{p:.2e}")).collect::<Vec<_>>());

    let growth = propgrowth_report(&env, 1, &[256, 1024, 4096])?;
    for r in &growth.rows {
        println!("n = {:5}: marked visits {:.2}, ratio to sqrt(n ln n) {:.3}", r.n, r.sum, r.ratio);
    }

    let o = EnvLltOptions {
        t_grid: (0..9).map(|i| PI / 2.0 + PI * i as f64 / 8.0).collect(),
        s: 1,
        delta0: 0.1,
        n_list: vec![256, 1024, 4096],
        llt_n_list: vec![128, 256],
        c0: 0.01,
        slack: 0.1,
    };
    let llt = env_llt_pipeline(&env, 2, &o, &opts)?;
    println!("max spectral radius {:.4}, compliant {}", llt.max_radius, llt.compliant);
    for r in &llt.counts {
        println!("n = {:5}: block count {} (ln n = {:.2})", r.n, r.count, r.ln_n);
    }

    let seeds: Vec<u64> = (0..16).collect();
    let rep = pressure_concentration_report(&env, 0.2, &seeds, &[64, 256, 1024], &[4, 16], &opts)?;
    for r in &rep.rows {
        println!("n = {:5}: mean {:.6}, deviation {:.3e}", r.n, r.mean, r.deviation);
    }
    let exponent = rep.exponent.unwrap_or(0.0);
    println!("deviation exponent {exponent:.3}");
    Ok(exponent)
}

#[allow(dead_code)]
fn main() {
    run_example().expect("random_environment");
}

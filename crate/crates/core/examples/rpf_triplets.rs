// Sequential triplets, pressure and convergence rate for a golden-mean
// shift with a random potential.

use seqrpf::linalg::c;
use seqrpf::rpf::{convergence_rate_fit, pressure_sequence, solve_family, SolverOptions};
use seqrpf::systems::catalog::{golden_mean, Generator};
use seqrpf::systems::TransferFamily;

/// Returns the fitted contraction rate of the residuals.
pub fn run_example() -> seqrpf::Result<f64> {
    let window = 8;
    let f = Generator::SeededUniform { lo: -0.5, hi: 0.5, seed: 3 }.realize(&vec![2; window])?;
    let spec = golden_mean(f[0].clone(), vec![0.0, 1.0], window)?;
    let spec = seqrpf::systems::SftSpec { potential: f, ..spec };
    let opts = SolverOptions::default();

    let fam = solve_family(&spec, 0, window, c(0.0, 0.0), &opts)?;
    for (j, l) in fam.lambda.iter().enumerate() {
        println!("j = {j}: lambda = {:.12}", l.re);
    }
    println!("max residuals: eigen {:.2e}, dual {:.2e}", fam.max_residual_eigen, fam.max_residual_dual);

    let zs = [c(0.0, 0.0), c(0.1, 0.0), c(0.0, 0.1)];
    let p = pressure_sequence(&spec, 0, window, &zs, &opts)?;
    for (z, row) in zs.iter().zip(&p.values) {
        println!("Pi_0({z}) = {:.10}", row[0]);
    }

    let horizons: Vec<usize> = (1..=8).map(|k| 2 * k).collect();
    let fit = convergence_rate_fit(&spec, 0, c(0.0, 0.0), &spec.ones(0), &horizons, &opts)?;
    println!("residual decay rate {:.4} (r^2 = {:.4})", fit.delta(), fit.r_squared);
    Ok(fit.delta())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("rpf_triplets");
}

// Sequential Gibbs family of a golden-mean shift: marginals, the ratio
// band, ψ-mixing and forward sampling.

use seqrpf::gibbs::{build_gibbs, gibbs_ratio_band, psi_mixing_report, sample_paths};
use seqrpf::rpf::SolverOptions;
use seqrpf::systems::catalog::{golden_mean, Generator};

/// Returns the fitted ψ-mixing rate.
pub fn run_example() -> seqrpf::Result<f64> {
    let window = 8;
    let f = Generator::SeededUniform { lo: -0.5, hi: 0.5, seed: 3 }.realize(&vec![2; window])?;
    let spec = golden_mean(vec![0.0; 2], vec![0.0, 1.0], window)?;
    let spec = seqrpf::systems::SftSpec { potential: f, ..spec };
    let g = build_gibbs(&spec, 0, 0, &SolverOptions::default())?;
    for j in 0..4 {
        println!("mu_{j}[x_{j} = 1] = {:.10}", g.marginal(j)[1]);
    }
    let band = gibbs_ratio_band(&g, 0, 16, 6);
    println!("Gibbs ratio band [{:.6}, {:.6}] over {} words", band.lo, band.hi, band.words);
    let rep = psi_mixing_report(&g, 0, 3, &(1..=12).collect::<Vec<_>>());
    for (n, p) in rep.gaps.iter().zip(&rep.psi).take(6) {
        println!("psi({n}) = {p:.3e}");
    }
    println!("psi(n) <= {:.3} * {:.4}^n", rep.c, rep.delta);
    let batch = sample_paths(&g, 0, 16, 1000, 7);
    let ones = batch.paths.iter().filter(|p| p[0] == 1).count() as f64 / 1000.0;
    println!("sampled frequency of x_0 = 1: {ones:.3}");
    Ok(rep.delta)
}

#[allow(dead_code)]
fn main() {
    run_example().expect("gibbs_mixing");
}

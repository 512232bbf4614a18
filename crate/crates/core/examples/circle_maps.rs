// Triplets of a non-stationary sequence of expanding circle maps
// `x ↦ 2x`, `x ↦ 3x` with trigonometric potentials.

use seqrpf::linalg::c;
use seqrpf::rpf::{pressure, solve_triplet, SolverOptions};
use seqrpf::systems::{CircleSpec, Extension};

/// Returns `λ_0(0)`.
pub fn run_example() -> seqrpf::Result<f64> {
    let cos = |a: f64| vec![c(a / 2.0, 0.0), c(0.0, 0.0), c(a / 2.0, 0.0)];
    let spec = CircleSpec::new(0, Extension::Periodic, vec![2, 3], vec![cos(0.2), cos(-0.1)], vec![cos(1.0), cos(1.0)], 1, 24)?;
    let opts = SolverOptions::default();
    let t = solve_triplet(&spec, 0, c(0.0, 0.0), &opts)?;
    println!("lambda_0 = {:.12}, horizon {}, residual {:.2e}", t.lambda.re, t.n_used, t.residual_eigen);
    for z in [0.05, 0.1] {
        println!("Pi_0({z}) = {:.10}", pressure(&spec, 0, c(z, 0.0), &opts)?.re);
    }
    Ok(t.lambda.re)
}

#[allow(dead_code)]
fn main() {
    run_example().expect("circle_maps");
}

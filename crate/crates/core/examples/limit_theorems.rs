// Exact distributional diagnostics for Birkhoff sums of a golden-mean
// Gibbs family: moments, Berry-Esseen, local limit, concentration and
// cumulants.

use seqrpf::gibbs::build_gibbs;
use seqrpf::limits::{berry_esseen_report, concentration_report, cumulant_report, llt_report, moments_report, EsseenOptions};
use seqrpf::rpf::SolverOptions;
use seqrpf::systems::catalog::{golden_mean, Generator};

/// Returns the largest `√n D_n` over the table.
pub fn run_example() -> seqrpf::Result<f64> {
    let window = 8;
    let f = Generator::SeededUniform { lo: -0.5, hi: 0.5, seed: 3 }.realize(&vec![2; window])?;
    let spec = golden_mean(vec![0.0; 2], vec![0.0, 1.0], window)?;
    let spec = seqrpf::systems::SftSpec { potential: f, ..spec };
    let opts = SolverOptions::default();
    let g = build_gibbs(&spec, 0, 0, &opts)?;
    let n_list = [64, 256, 1024];

    let m = moments_report(&g, 0, &n_list, 4, &opts)?;
    println!("moment gap slopes: {:?}", m.slopes);

    let be = berry_esseen_report(&g, 0, &n_list, &EsseenOptions::default())?;
    for r in &be.rows {
        println!("n = {:5}: D_n = {:.3e}, sqrt(n) D_n = {:.4}, Esseen bound {:.3e}", r.n, r.d_n, r.scaled, r.esseen_bound);
    }

    let llt = llt_report(&g, 0, &n_list, 0.01, 0.1)?;
    for r in &llt.rows {
        println!("n = {:5}: local limit gap {:.3e}", r.n, r.gap);
    }

    let conc = concentration_report(&g, 0, &[64, 256], 20)?;
    println!("martingale constants C = {:.4}, C1 = {:.4}, violations {}", conc.c, conc.c1, conc.violations);

    let cum = cumulant_report(&g, 0, 4, &[256, 1024], 64)?;
    for r in cum.rows.iter().filter(|r| r.n == 1024) {
        println!("Gamma_{}(n)/n = {:.8}", r.k, r.per_step);
    }
    Ok(be.rows.iter().map(|r| r.scaled).fold(0.0, f64::max))
}

#[allow(dead_code)]
fn main() {
    run_example().expect("limit_theorems");
}

// Averaged pressure and rate function of a fair coin, compared with the
// Cramér rate of a centered Bernoulli(1/2) variable.

use seqrpf::gibbs::build_gibbs;
use seqrpf::limits::{ldp_report, LdpOptions};
use seqrpf::rpf::SolverOptions;
use seqrpf::systems::catalog::iid_coin;

fn cramer(t: f64) -> f64 {
    let p = 0.5 + t;
    let q = 0.5 - t;
    p * (2.0 * p).ln() + q * (2.0 * q).ln()
}

/// Returns the largest deviation from the Cramér rate.
pub fn run_example() -> seqrpf::Result<f64> {
    let opts = SolverOptions::default();
    let g = build_gibbs(&iid_coin(4), 0, 0, &opts)?;
    let o = LdpOptions {
        delta: 0.3,
        s_points: 7,
        t_grid: (-3..=3).map(|i| 0.02 * i as f64).collect(),
        n_list: vec![256, 1024],
        x_local: vec![0.05],
        eps: None,
        x_moderate: 1.0,
        a_exponent: 0.1,
        b_exponent: 0.75,
    };
    let rep = ldp_report(&g, 0, &o, &opts)?;
    println!("asymptotic variance {:.10}", rep.sigma2);
    let mut worst = 0.0_f64;
    for l in &rep.legendre {
        let gap = (l.value - cramer(l.t)).abs();
        worst = worst.max(gap);
        println!("L({:+.2}) = {:.10}  Cramér {:.10}", l.t, l.value, cramer(l.t));
    }
    for r in &rep.local {
        println!("n = {:5}: local deviation gap {:.3e}", r.n, r.gap);
    }
    Ok(worst)
}

#[allow(dead_code)]
fn main() {
    run_example().expect("large_deviations");
}

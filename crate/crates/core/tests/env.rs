use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seqrpf::env::*;
use seqrpf::rpf::SolverOptions;
use seqrpf::Error;

fn opts() -> SolverOptions {
    SolverOptions::default()
}

fn coin() -> Layer {
    Layer::bernoulli(&[0.5, 0.5], vec![0.0, 1.0])
}

fn biased() -> Layer {
    Layer::bernoulli(&[0.3, 0.7], vec![0.0, 1.0])
}

fn golden() -> Layer {
    Layer::new(vec![vec![1, 1], vec![1, 0]], vec![0.0, 0.2], vec![0.0, 1.0])
}

fn markov_env(marked: Vec<usize>) -> EnvSpec {
    EnvSpec {
        layers: vec![coin(), biased(), golden()],
        driver: Driver::SeededMarkov { period: 8, floor: 0.05, seed: 7 },
        marked,
        window: 64,
    }
}

#[test]
fn single_state_is_constant_system() {
    let env = EnvSpec { layers: vec![golden()], driver: Driver::Independent { probs: vec![vec![1.0]] }, marked: vec![0], window: 8 };
    let r = realize(&env, 3, 20).unwrap();
    assert!(r.path.iter().all(|&y| y == 0));
    assert!(r.spec.transitions.windows(2).all(|w| w[0] == w[1]));
    assert_eq!(r.marked_hits.len(), 20);
}

#[test]
fn degenerate_law_selects_first_layer() {
    let env = EnvSpec {
        layers: vec![biased(), coin()],
        driver: Driver::Independent { probs: vec![vec![1.0, 0.0]] },
        marked: vec![],
        window: 8,
    };
    let r = realize(&env, 9, 30).unwrap();
    assert!(r.path.iter().all(|&y| y == 0));
    assert!(r.spec.potential.iter().all(|f| *f == biased().potential));
}

#[test]
fn seeded_markov_trace_matches_golden_file() {
    let r = realize(&markov_env(vec![0]), 11, 200).unwrap();
    let got: String = r.path.iter().map(|y| char::from(b'0' + *y as u8)).collect();
    let want = include_str!("data/env_trace.txt").trim();
    assert_eq!(got, want);
}

#[test]
fn realizations_are_reproducible() {
    let env = markov_env(vec![0, 1]);
    assert_eq!(realize(&env, 5, 300).unwrap(), realize(&env, 5, 300).unwrap());
    assert_ne!(realize(&env, 5, 300).unwrap().path, realize(&env, 6, 300).unwrap().path);
}

#[test]
fn invalid_drivers_are_rejected() {
    let mut env = markov_env(vec![0]);
    env.driver = Driver::Markov { initial: vec![0.5, 0.5, 0.0], kernels: vec![vec![vec![0.5, 0.6, 0.0]; 3]] };
    assert!(matches!(realize(&env, 0, 4), Err(Error::InvalidDriver(_))));
    env.driver = Driver::Independent { probs: vec![vec![0.5, 0.5]] };
    assert!(matches!(realize(&env, 0, 4), Err(Error::InvalidDriver(_))));
    env.driver = Driver::SeededMarkov { period: 2, floor: 0.5, seed: 1 };
    assert!(matches!(realize(&env, 0, 4), Err(Error::InvalidDriver(_))));
}

#[test]
fn independent_driver_has_zero_phi() {
    let env = EnvSpec {
        layers: vec![coin(), biased(), golden()],
        driver: Driver::Independent { probs: vec![vec![0.2, 0.5, 0.3], vec![0.6, 0.1, 0.3]] },
        marked: vec![],
        window: 16,
    };
    let rep = phi_mixing_exact(&env, 10).unwrap();
    assert!(rep.phi.iter().all(|&p| p < 1e-15));
}

#[test]
fn two_state_phi_matches_eigenvalue() {
    for (p, q) in [(0.2, 0.3), (0.7, 0.6), (0.05, 0.1)] {
        let k = vec![vec![1.0 - p, p], vec![q, 1.0 - q]];
        let pi = vec![q / (p + q), p / (p + q)];
        let env = EnvSpec {
            layers: vec![coin(), biased()],
            driver: Driver::Markov { initial: pi.clone(), kernels: vec![k.clone()] },
            marked: vec![],
            window: 5,
        };
        let m = DMatrix::from_fn(2, 2, |a, b| k[a][b]);
        let second = m.trace() - 1.0;
        let rep = phi_mixing_exact(&env, 30).unwrap();
        for (i, &v) in rep.phi.iter().enumerate() {
            let want = second.abs().powi(i as i32 + 1) * (1.0 - pi[0].min(pi[1]));
            assert!((v - want).abs() < 1e-13, "n={} {v} vs {want}", i + 1);
        }
    }
}

#[test]
fn doeblin_bound_on_seeded_kernels() {
    let delta = 0.1;
    let env = EnvSpec {
        layers: vec![coin(), biased(), golden()],
        driver: Driver::SeededMarkov { period: 5, floor: delta, seed: 42 },
        marked: vec![],
        window: 20,
    };
    let rep = phi_mixing_exact(&env, 25).unwrap();
    for (i, &v) in rep.phi.iter().enumerate() {
        assert!(v <= (1.0 - delta).powi(i as i32 + 1) + 1e-15);
    }
    assert!(rep.phi.windows(2).all(|w| w[1] <= w[0] + 1e-15));
}

#[test]
fn phi_bounds_sampled_dependence() {
    let env = markov_env(vec![0]);
    let driver = env.validate().unwrap();
    let rep = phi_mixing_exact(&env, 4).unwrap();
    let samples = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let paths: Vec<Vec<usize>> = (0..samples).map(|_| driver.sample(10, &mut rng)).collect();
    let nf = samples as f64;
    for n in 1..=4 {
        for x in 0..3 {
            for y in 0..3 {
                let (i, k) = (3, 3 + n);
                let pa = paths.iter().filter(|p| p[i] == x).count() as f64 / nf;
                let pb = paths.iter().filter(|p| p[k] == y).count() as f64 / nf;
                let pab = paths.iter().filter(|p| p[i] == x && p[k] == y).count() as f64 / nf;
                let sigma = (pab * (1.0 - pab) / nf).sqrt() + (pa * pb * (2.0 - pa - pb) / nf).sqrt();
                assert!((pab - pa * pb).abs() <= pa * rep.phi[n - 1] + 4.0 * sigma);
            }
        }
    }
}

#[test]
fn propgrowth_linear_lower_bound() {
    let env = markov_env(vec![0, 2]);
    let rep = propgrowth_report(&env, 2, &[16, 64, 256, 1024]).unwrap();
    // Every kernel entry is at least 0.05, so each block has probability ≥ 0.05^4.
    for r in &rep.rows {
        assert!(r.sum >= 0.05f64.powi(4) * r.n as f64);
    }
    assert!(rep.compliant && !rep.unreachable);
}

#[test]
fn unreachable_marked_state_is_flagged() {
    let env = EnvSpec {
        layers: vec![coin(), biased()],
        driver: Driver::Independent { probs: vec![vec![1.0, 0.0]] },
        marked: vec![1],
        window: 8,
    };
    let rep = propgrowth_report(&env, 1, &[16, 256]).unwrap();
    assert!(rep.unreachable && !rep.compliant);
    assert!(rep.rows.iter().all(|r| r.sum == 0.0));
}

#[test]
fn logarithmic_visits_still_outgrow_the_reference() {
    let n = 4096;
    let probs: Vec<Vec<f64>> = (0..n)
        .map(|m| {
            let p = 1.0 / ((m + 3) as f64).ln();
            vec![1.0 - p, p]
        })
        .collect();
    let env = EnvSpec { layers: vec![coin(), biased()], driver: Driver::Independent { probs }, marked: vec![1], window: 8 };
    let n_list = [64, 256, 1024, 4096];
    let rep = propgrowth_report(&env, 1, &n_list).unwrap();
    for r in &rep.rows {
        let series: f64 = (0..r.n).map(|m| 1.0 / ((m + 3) as f64).ln()).sum();
        assert!((r.sum - series).abs() < 1e-9 * series);
    }
    assert!(rep.compliant);
}

#[test]
fn propgrowth_exact_agrees_with_monte_carlo() {
    let env = markov_env(vec![0, 1]);
    let n = 50;
    let exact = propgrowth_report(&env, 1, &[n]).unwrap().rows[0].sum;
    let (mean, se) = propgrowth_monte_carlo(&env, 1, n, 100_000, 3).unwrap();
    assert!((mean - exact).abs() <= 4.0 * se, "{mean} ± {se} vs {exact}");
}

fn llt_options(n_list: Vec<usize>, llt_n_list: Vec<usize>) -> EnvLltOptions {
    EnvLltOptions {
        t_grid: (0..17).map(|i| PI / 2.0 + PI * i as f64 / 16.0).collect(),
        s: 1,
        delta0: 0.1,
        n_list,
        llt_n_list,
        c0: 0.01,
        slack: 0.1,
    }
}

#[test]
fn constant_marked_environment_counts_every_block() {
    let env = EnvSpec { layers: vec![coin(), biased()], driver: Driver::Independent { probs: vec![vec![1.0, 0.0]] }, marked: vec![0], window: 8 };
    let rep = env_llt_pipeline(&env, 1, &llt_options(vec![64, 256], vec![]), &opts()).unwrap();
    assert_eq!(rep.counts.iter().map(|c| c.count).collect::<Vec<_>>(), vec![64, 256]);
    for r in &rep.radius {
        assert!((r.radius - (r.t / 2.0).cos().abs()).abs() < 1e-10);
    }
    assert!(rep.compliant);
}

#[test]
fn seeded_markov_environment_is_compliant() {
    let env = markov_env(vec![0]);
    let n_list: Vec<usize> = (8..=14).map(|k| 1 << k).collect();
    let rep = env_llt_pipeline(&env, 2, &llt_options(n_list, vec![128, 256, 512, 1024]), &opts()).unwrap();
    assert!(rep.max_radius < 1.0 && rep.radius.iter().all(|r| r.converged));
    assert!(rep.increasing, "{:?}", rep.counts);
    let llt = rep.llt.expect("llt table");
    assert!(llt.monotone, "{:?}", llt.rows);
}

#[test]
fn unreachable_marked_loop_fails_genper() {
    let env = EnvSpec { layers: vec![coin(), golden()], driver: Driver::Independent { probs: vec![vec![0.0, 1.0]] }, marked: vec![0], window: 8 };
    let rep = env_llt_pipeline(&env, 1, &llt_options(vec![64, 256], vec![]), &opts()).unwrap();
    assert!(rep.counts.iter().all(|c| c.count == 0) && !rep.compliant);
}

#[test]
fn single_state_pressure_has_no_spread() {
    let env = EnvSpec { layers: vec![golden()], driver: Driver::Independent { probs: vec![vec![1.0]] }, marked: vec![], window: 8 };
    let rep = pressure_concentration_report(&env, 0.2, &[1, 2, 3], &[32, 64], &[], &opts()).unwrap();
    assert!(rep.rows.iter().all(|r| r.deviation < 1e-14));
}

#[test]
fn random_pressure_concentrates() {
    let env = EnvSpec {
        layers: vec![coin(), golden()],
        driver: Driver::Independent { probs: vec![vec![0.5, 0.5]] },
        marked: vec![],
        window: 8,
    };
    let seeds: Vec<u64> = (0..64).collect();
    let n_list = [64, 128, 256, 512, 1024, 2048, 4096];
    let rep = pressure_concentration_report(&env, 0.2, &seeds, &n_list, &[2, 4, 8, 16, 32], &opts()).unwrap();
    let e = rep.exponent.unwrap();
    assert!((-0.65..=-0.35).contains(&e), "exponent {e}");
    let gaps: Vec<f64> = rep.locality.iter().map(|l| l.gap).collect();
    assert!(gaps.windows(2).all(|w| w[1] <= w[0] + 1e-14), "{gaps:?}");
    assert!(*gaps.last().unwrap() < 1e-8);
    // The seed average concentrates around a common value.
    let means: Vec<f64> = rep.rows.iter().map(|r| r.mean).collect();
    assert!((means[0] - means[means.len() - 1]).abs() < 3.0 * rep.rows[0].deviation);
}

fn uniform_preserving() -> Vec<Layer> {
    let third = (1.0f64 / 3.0).ln();
    let half = 0.5f64.ln();
    vec![
        Layer::new(vec![vec![1; 3]; 3], vec![third; 3], vec![0.0, 1.0, 2.0]),
        Layer::new(vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]], vec![half; 3], vec![1.0, 0.0, 1.0]),
    ]
}

#[test]
fn normalized_coin_layers_have_unit_density() {
    let env = EnvSpec {
        layers: vec![coin(), Layer::bernoulli(&[0.5, 0.5], vec![1.0, 0.0])],
        driver: Driver::Independent { probs: vec![vec![0.5, 0.5]] },
        marked: vec![],
        window: 8,
    };
    let rep = deterministic_h_check(&env, &[0.5, 0.5], &[1, 2], 32, 1e-8, &opts()).unwrap();
    assert!(rep.passed && rep.h.iter().all(|&x| (x - 1.0).abs() < 1e-12));
}

#[test]
fn shared_fixed_measure_gives_deterministic_density() {
    let env = EnvSpec {
        layers: uniform_preserving(),
        driver: Driver::SeededMarkov { period: 3, floor: 0.1, seed: 4 },
        marked: vec![],
        window: 8,
    };
    let m = [1.0 / 3.0; 3];
    let rep = deterministic_h_check(&env, &m, &(0..8).collect::<Vec<_>>(), 64, 1e-8, &opts()).unwrap();
    assert!(rep.passed, "{rep:?}");
    let mut bad = env.clone();
    bad.layers.push(Layer::bernoulli(&[0.3, 0.4, 0.3], vec![0.0; 3]));
    bad.driver = Driver::SeededMarkov { period: 3, floor: 0.1, seed: 4 };
    assert!(matches!(deterministic_h_check(&bad, &m, &[0], 64, 1e-8, &opts()), Err(Error::PreconditionFailed(_))));
}

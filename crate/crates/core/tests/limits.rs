use std::f64::consts::PI;

use proptest::prelude::*;
use seqrpf::gibbs::*;
use seqrpf::limits::clt::{cf_ratio, kolmogorov_distance, llt_gap, spectral_radius};
use seqrpf::limits::martingale::martingale_property_error;
use seqrpf::limits::mgf::exact_mgf_forward;
use seqrpf::limits::moments::{c_const, d_const, raw_moments, Growth};
use seqrpf::limits::*;
use seqrpf::linalg::{c, C64};
use seqrpf::rpf::SolverOptions;
use seqrpf::systems::catalog::*;
use seqrpf::systems::{recode_to_memory_one, Extension, SftSpec};
use seqrpf::Error;
use statrs::distribution::{Binomial, ContinuousCDF, Discrete, DiscreteCDF, Normal};

fn opts() -> SolverOptions {
    SolverOptions::default()
}

fn iid() -> GibbsFamily {
    build_gibbs(&iid_coin(1), 0, 0, &opts()).unwrap()
}

fn lattice_spec(seed: u64) -> SftSpec {
    seeded_primitive(seed, SeededOptions { obs_int_max: Some(1), ..Default::default() }).unwrap()
}

fn brute_mgf(g: &GibbsFamily, j: i64, n: usize, z: C64) -> C64 {
    g.spec
        .words(j, n)
        .iter()
        .map(|w| {
            let s: f64 = w.iter().enumerate().map(|(i, &a)| g.spec.u(j + i as i64)[a]).sum();
            (z * s).exp() * g.cylinder_mass(&Cylinder { start: j, word: w.clone() })
        })
        .sum()
}

#[test]
fn mgf_of_coin_flips() {
    let g = iid();
    for n in [1, 5, 40] {
        for z in [c(0.3, 0.0), c(-0.2, 0.7), c(0.0, 2.5)] {
            let want = ((c(1.0, 0.0) + z.exp()) / 2.0).powu(n as u32);
            assert!((exact_mgf(&g, 0, n, z) - want).norm() <= 1e-13 * want.norm());
        }
    }
    assert_eq!(exact_mgf(&g, 0, 17, c(0.0, 0.0)), c(1.0, 0.0));
}

#[test]
fn mgf_matches_enumeration_on_seeded_specs() {
    let zs: Vec<C64> = (0..8).map(|i| C64::from_polar(0.2, PI * i as f64 / 4.0)).collect();
    for seed in 0..4 {
        let g = build_gibbs(&seeded_primitive(seed, SeededOptions::default()).unwrap(), 0, 0, &opts()).unwrap();
        for n in [1, 4, 8] {
            for &z in &zs {
                let brute = brute_mgf(&g, 3, n, z);
                assert!((exact_mgf(&g, 3, n, z) - brute).norm() <= 1e-10 * brute.norm());
                assert!((exact_mgf_forward(&g, 3, n, z) - brute).norm() <= 1e-10 * brute.norm());
            }
        }
    }
}

#[test]
fn binomial_distribution_oracle() {
    let d = exact_distribution(&iid(), 0, 10).unwrap();
    let b = Binomial::new(0.5, 10).unwrap();
    assert_eq!(d.probs.len(), 11);
    for k in 0..=10u64 {
        assert!((d.probs[k as usize] - b.pmf(k)).abs() < 1e-15);
    }
    assert!((d.mean - 5.0).abs() < 1e-13 && (d.sigma - 2.5f64.sqrt()).abs() < 1e-13);
}

#[test]
fn zero_observable_is_point_mass() {
    let spec = seeded_primitive(2, SeededOptions::default()).unwrap();
    let zero = spec.observable.iter().map(|v| vec![0.0; v.len()]).collect();
    let spec = spec.with_functions(spec.potential.clone(), zero).unwrap();
    let g = build_gibbs(&spec, 0, 0, &opts()).unwrap();
    let d = exact_distribution(&g, 0, 12).unwrap();
    assert_eq!(d.probs.len(), 1);
    assert!((d.probs[0] - 1.0).abs() < 1e-12 && d.value(0) == 0.0);
    let m = moments_report(&g, 0, &[8, 16], 4, &opts()).unwrap();
    assert!(m.rows.iter().all(|r| r.gamma == 0.0 && r.gap == 0.0));
    assert!(matches!(llt_report(&g, 0, &[16], 0.01, 0.1), Err(Error::VarianceTooSmall { .. })));
    let be = berry_esseen_report(&g, 0, &[16], &EsseenOptions::default()).unwrap();
    assert!(be.rows.is_empty() && be.degenerate == vec![16]);
    let cum = cumulant_report(&g, 0, 4, &[16], 64).unwrap();
    assert!(cum.rows.iter().all(|r| r.gamma.abs() < 1e-14));
    let conc = concentration_report(&g, 0, &[8], 10).unwrap();
    assert_eq!(conc.violations, 0);
}

#[test]
fn golden_mean_distribution_by_enumeration() {
    let spec = golden_mean(vec![0.0; 2], vec![0.0, 1.0], 2).unwrap();
    let g = build_gibbs(&spec, 0, 0, &opts()).unwrap();
    let d = exact_distribution(&g, 0, 4).unwrap();
    let mut table = [0.0; 5];
    for w in spec.words(0, 4) {
        let s: usize = w.iter().sum();
        table[s] += g.cylinder_mass(&Cylinder { start: 0, word: w });
    }
    for (k, p) in d.probs.iter().enumerate() {
        assert!((p - table[d.value(k) as usize]).abs() < 1e-14);
    }
}

#[test]
fn distribution_agrees_with_mgf_and_moments() {
    let g = build_gibbs(&lattice_spec(6), 0, 0, &opts()).unwrap();
    let n = 30;
    let d = exact_distribution(&g, 2, n).unwrap();
    assert!((d.total() - 1.0).abs() < 1e-12);
    for z in [c(0.1, 0.0), c(0.0, 1.3), c(-0.05, 0.4)] {
        let a = exact_mgf(&g, 2, n, z);
        assert!((a - d.mgf(z)).norm() <= 1e-10 * a.norm());
    }
    let m = raw_moments(&g, 2, &[n], 2).remove(0);
    assert!((m[1] - d.mean).abs() < 1e-8);
    assert!((m[2] - m[1] * m[1] - d.sigma * d.sigma).abs() < 1e-8);
}

#[test]
fn state_cap_and_non_lattice_errors() {
    let g = iid();
    assert!(matches!(exact_distributions(&g, 0, &[100], 50), Err(Error::StateCapExceeded { .. })));
    let spec = seeded_primitive(3, SeededOptions::default()).unwrap();
    let spec = spec.with_functions(spec.potential.clone(), spec.observable.iter().map(|v| v.iter().map(|x| x + 2f64.sqrt()).collect()).collect()).unwrap();
    let g = build_gibbs(&spec, 0, 0, &opts()).unwrap();
    if spec.lattice_span().is_none() {
        assert!(matches!(exact_distribution(&g, 0, 5), Err(Error::NotLattice)));
    }
}

#[test]
fn moment_constants() {
    assert_eq!(c_const(2), 1.0);
    assert_eq!(c_const(4), 3.0);
    assert_eq!(c_const(6), 15.0);
    assert_eq!(d_const(3), 1.0);
    assert_eq!(d_const(5), 10.0);
}

#[test]
fn coin_flip_fourth_moment() {
    let g = iid();
    let ns = [64, 256, 1024, 4096];
    let rep = moments_report(&g, 0, &ns, 4, &opts()).unwrap();
    for r in rep.rows.iter().filter(|r| r.k == 4) {
        let n = r.n as f64;
        // Central moments of a sum of n fair ±1/2 steps.
        let want = (3.0 * n * n - 2.0 * n) / 16.0 / (n * n);
        assert!((r.gamma - want).abs() < 1e-12);
        assert!((r.predicted - 3.0 / 16.0).abs() < 1e-12);
    }
    let slope = rep.slopes.iter().find(|s| s.0 == 4).unwrap().1;
    assert!((slope + 1.0).abs() < 1e-6);
    assert!(rep.mean_identity.iter().all(|&x| x < 1e-9));
}

#[test]
fn odd_moment_gap_decays_on_asymmetric_spec() {
    let spec = seeded_primitive(41, SeededOptions { potential_range: 1.0, ..Default::default() }).unwrap();
    let g = build_gibbs(&spec, 0, 0, &opts()).unwrap();
    let rep = moments_report(&g, 0, &[64, 128, 256, 512, 1024, 2048, 4096], 5, &opts()).unwrap();
    for k in [3, 4, 5] {
        let s = rep.slopes.iter().find(|s| s.0 == k).unwrap().1;
        assert!((s + 1.0).abs() < 0.25, "k={k} slope {s}");
    }
    let m = &rep.mean_identity;
    assert!(m.iter().all(|&x| x < m[0] + 1e-6));
}

#[test]
fn centering_is_idempotent() {
    let g = build_gibbs(&lattice_spec(9), 0, 0, &opts()).unwrap();
    let once = g.centered().unwrap();
    let twice = once.centered().unwrap();
    assert_eq!(once.spec, twice.spec);
}

#[test]
fn coin_variance_is_linear() {
    let v = variance_growth(&iid(), 0, &[16, 64, 512]).unwrap();
    assert_eq!(v.class, Growth::Linear);
    assert!(v.per_step.iter().all(|x| (x - 0.25).abs() < 1e-10));
}

fn coboundary_spec(seed: u64) -> (SftSpec, Vec<Vec<f64>>) {
    let base = seeded_primitive(seed, SeededOptions::default()).unwrap();
    let y = seeded_measures(seed + 1000, &base.alphabet, 0.0);
    let y: Vec<Vec<f64>> = y.iter().map(|v| {
        let m = v.iter().cloned().fold(0.0, f64::max);
        v.iter().map(|x| x / m).collect()
    }).collect();
    let p = base.period();
    let mut obs = Vec::new();
    let mut pot = Vec::new();
    for s in 0..p {
        let (d0, d1) = (base.alphabet[s], base.alphabet[(s + 1) % p]);
        let mut u = vec![0.0; d0 * d1];
        let mut f = vec![0.0; d0 * d1];
        for a in 0..d0 {
            for b in 0..d1 {
                u[a + d0 * b] = y[(s + 1) % p][b] - y[s][a];
                f[a + d0 * b] = base.potential[s][a];
            }
        }
        obs.push(u);
        pot.push(f);
    }
    let spec = SftSpec::with_memory(0, Extension::Periodic, base.transitions.clone(), pot, obs, 2).unwrap();
    (spec, y)
}

#[test]
fn constructed_coboundary_is_recovered() {
    for seed in [1, 2] {
        let (spec, _) = coboundary_spec(seed);
        let (one, _) = recode_to_memory_one(&spec).unwrap();
        let g = build_gibbs(&one, 0, 0, &opts()).unwrap();
        let w = coboundary_solve(&g, 16, 80, 1e-10).unwrap();
        assert!(w.residual <= 1e-8, "residual {}", w.residual);
        assert!(w.sup_norm <= 2.0);
        let v = variance_growth(&g, 0, &[8, 64, 512]).unwrap();
        assert_eq!(v.class, Growth::Bounded);
        assert!(v.variance.iter().all(|&x| x <= 4.0));
    }
    let g = build_gibbs(&lattice_spec(3), 0, 0, &opts()).unwrap();
    assert!(matches!(coboundary_solve(&g, 4, 2, 1e-12), Err(Error::HorizonInsufficient(2))));
}

#[test]
fn coin_berry_esseen_matches_binomial_oracle() {
    let g = iid();
    let ns = [64, 256, 1024];
    let rep = berry_esseen_report(&g, 0, &ns, &EsseenOptions::default()).unwrap();
    let normal = Normal::standard();
    for r in &rep.rows {
        let b = Binomial::new(0.5, r.n as u64).unwrap();
        let (mu, sd) = (r.n as f64 / 2.0, (r.n as f64).sqrt() / 2.0);
        let mut sup = 0.0_f64;
        for k in 0..=r.n as u64 {
            let phi = normal.cdf((k as f64 - mu) / sd);
            let below = if k == 0 { 0.0 } else { b.cdf(k - 1) };
            sup = sup.max((b.cdf(k) - phi).abs()).max((below - phi).abs());
        }
        assert!((r.d_n - sup).abs() < 1e-10);
        assert!(r.scaled > 0.1 && r.scaled < 1.0);
        assert!(r.esseen_bound >= r.d_n);
    }
    assert!(rep.certified);
}

#[test]
fn coin_llt_matches_binomial_oracle() {
    let g = iid();
    let rep = llt_report(&g, 0, &[128, 512, 4096], 0.01, 0.1).unwrap();
    assert!(rep.monotone);
    let n = 4096u64;
    let b = Binomial::new(0.5, n).unwrap();
    let sigma = (n as f64).sqrt() / 2.0;
    let oracle = (0..=n)
        .map(|k| {
            let r = k as f64 - n as f64 / 2.0;
            ((2.0 * PI).sqrt() * sigma * b.pmf(k) - (-r * r / (2.0 * sigma * sigma)).exp()).abs()
        })
        .fold(0.0, f64::max);
    let got = rep.rows.last().unwrap().gap;
    assert!((got - oracle).abs() <= 1e-6 * oracle, "{got} vs {oracle}");
    let d = exact_distribution(&g, 0, 100).unwrap();
    assert!((llt_gap(&d) - rep.rows[0].gap).abs() > 0.0);
}

#[test]
fn cf_decay_closed_form() {
    let s = iid_coin(1);
    for n in [1, 5, 30] {
        for t in [PI / 2.0, 1.0, 3.0 * PI / 2.0] {
            let r = cf_ratio(&s, 0, n, t, &opts()).unwrap();
            assert!((r - (t / 2.0).cos().abs().powi(n as i32 - 1)).abs() < 1e-13);
        }
    }
    let grid: Vec<f64> = (0..256).map(|i| PI / 2.0 + PI * i as f64 / 255.0).collect();
    let scan = cf_decay_scan(&s, 0, &grid, &[16, 64, 256], &opts()).unwrap();
    for w in scan.windows(2) {
        assert!(w[1].scaled < w[0].scaled);
    }
    assert!((cf_ratio(&s, 0, 10, 1e-9, &opts()).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn spectral_radius_of_bernoulli_loop() {
    for (p, t) in [(0.5, 2.0), (0.3, PI / 2.0), (0.8, 4.0)] {
        let spec = full_shift(2, vec![(1.0f64 - p).ln(), p.ln()], vec![0.0, 1.0], 1).unwrap();
        let m = clt::block_operator(&spec, 0, 1, t);
        let (r, _) = spectral_radius(&m, 200, 1e-10);
        let want = (c(1.0 - p, 0.0) + c(0.0, t).exp() * p).norm();
        assert!((r - want).abs() < 1e-10);
    }
}

#[test]
fn genper_count_for_reference_environment() {
    let reference = full_shift(2, vec![0.4f64.ln(), 0.6f64.ln()], vec![0.0, 1.0], 2).unwrap();
    let grid: Vec<f64> = (0..16).map(|i| PI / 2.0 + PI * i as f64 / 15.0).collect();
    let count = genper_block_count(&reference, 0, &reference, 2, 1, 0.1, &grid, 50);
    assert_eq!(count.count, 50);
    let other = full_shift(2, vec![0.5f64.ln(); 2], vec![0.0, 1.0], 2).unwrap();
    let count = genper_block_count(&other, 0, &reference, 2, 1, 0.9, &grid, 50);
    assert_eq!(count.count, 0);
}

#[test]
fn coin_martingale_is_hoeffding() {
    let g = iid();
    let dec = martingale_decompose(&g, 0, 20).unwrap();
    assert!((dec.c - 0.5).abs() < 1e-15 && dec.c1 == 0.0 && dec.terms == 20);
    let rep = concentration_report(&g, 0, &[64, 256], 50).unwrap();
    assert_eq!(rep.violations, 0);
    assert!(rep.rows.iter().all(|r| r.tail <= r.azuma));
}

#[test]
fn martingale_property_by_enumeration() {
    let spec = golden_mean(vec![0.0, 0.3], vec![0.2, 1.0], 3).unwrap();
    let g = build_gibbs(&spec, 0, 0, &opts()).unwrap();
    assert!(martingale_property_error(&g, 0, 8).unwrap() < 1e-12);
    let g = build_gibbs(&seeded_primitive(5, SeededOptions::default()).unwrap(), 0, 0, &opts()).unwrap();
    assert!(martingale_property_error(&g, 2, 6).unwrap() < 1e-12);
    // S − M_n is bounded by C_1 on every path.
    let dec = martingale_decompose(&g, 2, 6).unwrap();
    let cg = g.centered().unwrap();
    for w in g.spec.words(2, 6) {
        let s: f64 = w.iter().enumerate().map(|(i, &a)| cg.spec.u(2 + i as i64)[a]).sum();
        let m: f64 = (1..6).map(|i| dec.w(i, w[i - 1], w[i])).sum::<f64>() + if dec.terms == 6 { dec.g[5][w[5]] } else { 0.0 };
        assert!((s - m).abs() <= dec.c1 + 1e-12);
    }
}

#[test]
fn coin_cumulants() {
    let g = iid();
    let rep = cumulant_report(&g, 0, 6, &[256, 1024, 4096], 64).unwrap();
    for r in &rep.rows {
        let want = match r.k {
            1 | 3 | 5 => 0.0,
            2 => 0.25,
            4 => -0.125,
            6 => 0.25,
            _ => unreachable!(),
        };
        assert!((r.per_step - want).abs() < 1e-8, "k={} n={} {}", r.k, r.n, r.per_step);
    }
}

#[test]
fn second_cumulant_is_variance() {
    let g = build_gibbs(&lattice_spec(14), 0, 0, &opts()).unwrap();
    let d = exact_distribution(&g, 0, 200).unwrap();
    let rep = cumulant_report(&g, 0, 2, &[200], 64).unwrap();
    let g2 = rep.rows.iter().find(|r| r.k == 2).unwrap().gamma;
    assert!((g2 - d.sigma * d.sigma).abs() < 1e-8);
    assert!(rep.rows.iter().find(|r| r.k == 1).unwrap().gamma.abs() < 1e-10);
}

fn cramer(t: f64) -> f64 {
    let p = t + 0.5;
    p * (2.0 * p).ln() + (1.0 - p) * (2.0 * (1.0 - p)).ln()
}

#[test]
fn coin_legendre_is_cramer_rate() {
    let g = iid();
    let delta: f64 = 0.3;
    let edge = delta.exp() / (1.0 + delta.exp()) - 0.5;
    let t_grid: Vec<f64> = (0..21).map(|i| -0.95 * edge + 1.9 * edge * i as f64 / 20.0).collect();
    let o = LdpOptions {
        delta,
        s_points: 9,
        t_grid: t_grid.clone(),
        n_list: vec![256, 1024],
        x_local: vec![0.07],
        eps: None,
        x_moderate: 1.0,
        a_exponent: 0.1,
        b_exponent: 0.75,
    };
    let rep = ldp_report(&g, 0, &o, &opts()).unwrap();
    for p in &rep.legendre {
        assert!(!p.out_of_range);
        assert!((p.value - cramer(p.t)).abs() < 1e-8, "t={} {} vs {}", p.t, p.value, cramer(p.t));
    }
    assert!(rep.max_duality_gap < 1e-8);
    assert!(!rep.nonconvex);
    assert!((rep.sigma2 - 0.25).abs() < 1e-6);
    for p in &rep.pressure {
        let want = ((1.0 + p.s.exp()) / 2.0).ln() - p.s / 2.0;
        assert!((p.pi - want).abs() < 1e-12);
        assert!(p.limit_gap < 1e-12);
    }
    let local: Vec<f64> = rep.local.iter().map(|r| r.gap).collect();
    assert!(local[1] < local[0]);
}

#[test]
fn zero_observable_legendre_is_out_of_range() {
    let spec = full_shift(2, vec![0.0; 2], vec![0.0; 2], 1).unwrap();
    let g = build_gibbs(&spec, 0, 0, &opts()).unwrap();
    let o = LdpOptions {
        delta: 0.25,
        s_points: 5,
        t_grid: vec![0.0, 0.1],
        n_list: vec![],
        x_local: vec![],
        eps: Some(0.0),
        x_moderate: 1.0,
        a_exponent: 0.1,
        b_exponent: 0.75,
    };
    let rep = ldp_report(&g, 0, &o, &opts()).unwrap();
    assert!(rep.legendre[0].value.abs() < 1e-15 && !rep.legendre[0].out_of_range);
    assert!(rep.legendre[1].out_of_range);
}

#[test]
fn legendre_argmax_is_shift_invariant() {
    let spec = lattice_spec(21);
    let shifted = spec.shifted_observable(&vec![-3.0; spec.period()]).unwrap();
    let pa = build_gibbs(&spec, 0, 0, &opts()).unwrap().centered().unwrap();
    let pb = build_gibbs(&shifted, 0, 0, &opts()).unwrap().centered().unwrap();
    let a = ldp::legendre(&ldp::AveragedPressure::new(&pa, &opts()), 0.01, 0.1).unwrap();
    let b = ldp::legendre(&ldp::AveragedPressure::new(&pb, &opts()), 0.01, 0.1).unwrap();
    assert!((a.argmax - b.argmax).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn characteristic_function_modulus(seed in 0u64..300, t in -20.0f64..20.0, n in 1usize..40) {
        let g = build_gibbs(&lattice_spec(seed), 0, 0, &opts()).unwrap();
        prop_assert!(exact_mgf(&g, 0, n, c(0.0, t)).norm() <= 1.0 + 1e-12);
        let h = g.spec.lattice_span().unwrap();
        let full = exact_mgf(&g, 0, n, c(0.0, 2.0 * PI / h));
        prop_assert!((full.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn distribution_sums_to_one(seed in 0u64..300, n in 1usize..60) {
        let g = build_gibbs(&lattice_spec(seed), 0, 0, &opts()).unwrap();
        let d = exact_distribution(&g, 1, n).unwrap();
        prop_assert!((d.total() - 1.0).abs() < 1e-10);
        prop_assert!(kolmogorov_distance(&d) <= 1.0);
    }
}

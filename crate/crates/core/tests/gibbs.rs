use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use seqrpf::gibbs::mixing::psi_by_enumeration;
use seqrpf::gibbs::*;
use seqrpf::rpf::SolverOptions;
use seqrpf::systems::catalog::*;
use seqrpf::systems::SftSpec;

const PHI: f64 = 1.618_033_988_749_895;

fn opts() -> SolverOptions {
    SolverOptions::default()
}

fn cyl(start: i64, word: &[usize]) -> Cylinder {
    Cylinder { start, word: word.to_vec() }
}

fn golden() -> GibbsFamily {
    build_gibbs(&golden_mean(vec![0.0; 2], vec![0.0, 1.0], 2).unwrap(), 0, 0, &opts()).unwrap()
}

fn seeded(seed: u64) -> SftSpec {
    seeded_primitive(seed, SeededOptions::default()).unwrap()
}

/// Finite-volume Gibbs weight with free boundary, computed by transfer
/// matrices only: `μ_j[w] ≈ 1ᵀ B_future · D_w · B_past 1 / 1ᵀ B 1`.
fn finite_volume_mass(spec: &SftSpec, j: i64, w: &[usize], past: usize, future: usize) -> f64 {
    let m = |k: i64| {
        let t = spec.a(k);
        let f = spec.f(k);
        DMatrix::from_fn(t.cols, t.rows, |b, a| if t.get(a, b) { f[a].exp() } else { 0.0 })
    };
    let mut v = DVector::from_element(spec.d(j - past as i64), 1.0);
    for k in j - past as i64..j {
        v = m(k) * v;
        v /= v.max();
    }
    let mut full = v.clone();
    let mut restricted = v;
    for (i, k) in (j..j + (w.len() + future) as i64).enumerate() {
        if i < w.len() {
            for a in 0..restricted.len() {
                if a != w[i] {
                    restricted[a] = 0.0;
                }
            }
        }
        let mk = m(k);
        full = &mk * full;
        restricted = &mk * restricted;
        let s = full.max();
        full /= s;
        restricted /= s;
    }
    restricted.sum() / full.sum()
}

#[test]
fn full_shift_is_uniform() {
    let g = build_gibbs(&iid_coin(4), 0, 0, &opts()).unwrap();
    for j in 0..4 {
        assert!(g.marginal(j).iter().all(|&x| x == 0.5));
        assert!(g.kernel(j).iter().all(|&x| x == 0.5));
    }
    for r in 0..6 {
        for w in g.spec.words(1, r + 1) {
            assert!((g.cylinder_mass(&cyl(1, &w)) - 0.5f64.powi(r as i32 + 1)).abs() < 1e-15);
        }
    }
}

#[test]
fn golden_mean_is_parry_measure() {
    let g = golden();
    let m = g.marginal(0);
    assert!((m[0] - PHI * PHI / (1.0 + PHI * PHI)).abs() < 1e-14);
    assert!((m[1] - 1.0 / (1.0 + PHI * PHI)).abs() < 1e-14);
    let p = g.kernel(0);
    assert!((p[(0, 0)] / p[(0, 1)] - PHI).abs() < 1e-13);
    assert_eq!(p[(1, 1)], 0.0);
    assert!((g.cylinder_mass(&cyl(0, &[0, 1, 0])) - 1.0 / (1.0 + PHI * PHI)).abs() < 1e-14);
    assert_eq!(g.cylinder_mass(&cyl(0, &[1, 1])), 0.0);
}

#[test]
fn masses_match_finite_volume_route() {
    for seed in [1, 2, 3] {
        let spec = seeded(seed);
        let g = build_gibbs(&spec, 0, 0, &opts()).unwrap();
        for j in [0_i64, 7] {
            for w in spec.words(j, 3) {
                let a = g.cylinder_mass(&cyl(j, &w));
                let b = finite_volume_mass(&spec, j, &w, 80, 80);
                assert!((a - b).abs() <= 1e-10 * b, "seed {seed} j {j} {w:?}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn masses_sum_to_one_and_extend_additively() {
    let spec = seeded(17);
    let g = build_gibbs(&spec, 0, 0, &opts()).unwrap();
    for len in 1..=10 {
        let total: f64 = spec.words(3, len).iter().map(|w| g.cylinder_mass(&cyl(3, w))).sum();
        assert!((total - 1.0).abs() < 1e-10);
    }
    for w in spec.words(5, 4) {
        let base = g.cylinder_mass(&cyl(5, &w));
        let ext: f64 = (0..spec.d(9))
            .map(|b| {
                let mut v = w.clone();
                v.push(b);
                g.cylinder_mass(&cyl(5, &v))
            })
            .sum();
        assert!((base - ext).abs() < 1e-12);
        assert!((base - g.chain_mass(&cyl(5, &w))).abs() < 1e-12);
    }
}

#[test]
fn frozen_extension_family() {
    let base = seeded_primitive(4, SeededOptions { d_min: 3, d_max: 3, ..Default::default() }).unwrap();
    let spec = SftSpec::new(
        0,
        seqrpf::systems::Extension::Frozen,
        base.transitions.clone(),
        base.potential.clone(),
        base.observable.clone(),
    )
    .unwrap();
    let g = build_gibbs(&spec, 0, 20, &opts()).unwrap();
    assert!(!g.periodic && g.pushforward_error < 1e-12);
    let total: f64 = spec.words(14, 5).iter().map(|w| g.cylinder_mass(&cyl(14, w))).sum();
    assert!((total - 1.0).abs() < 1e-10);
}

#[test]
fn ratio_band_is_finite_and_stable() {
    let spec = seeded(8);
    let g = build_gibbs(&spec, 0, 0, &opts()).unwrap();
    let b16 = gibbs_ratio_band(&g, 0, 16, 8);
    let b32 = gibbs_ratio_band(&g, 0, 32, 8);
    assert!(b16.lo > 0.0 && b16.hi.is_finite());
    assert!((b16.lo - b32.lo).abs() <= 0.05 * b16.lo && (b16.hi - b32.hi).abs() <= 0.05 * b16.hi);
}

#[test]
fn sampling_full_shift_and_golden_mean() {
    let g = build_gibbs(&iid_coin(2), 0, 0, &opts()).unwrap();
    let batch = sample_paths(&g, 0, 20, 20_000, 5);
    let ones: usize = batch.paths.iter().flatten().sum();
    let n = 20.0 * 20_000.0;
    assert!(((ones as f64) - n / 2.0).abs() < 4.0 * (n / 4.0).sqrt());
    let gm = golden();
    let batch = sample_paths(&gm, 0, 50, 5000, 9);
    assert!(batch.paths.iter().all(|p| p.windows(2).all(|w| !(w[0] == 1 && w[1] == 1))));
}

#[test]
fn sampling_is_reproducible() {
    let g = build_gibbs(&seeded(3), 0, 0, &opts()).unwrap();
    let a = sample_paths(&g, 2, 30, 9000, 42);
    let b = sample_paths(&g, 2, 30, 9000, 42);
    assert_eq!(a, b);
    assert_eq!(a.paths.len(), 9000);
    assert_ne!(a, sample_paths(&g, 2, 30, 9000, 43));
}

#[test]
fn sampled_frequencies_match_masses() {
    let spec = seeded(12);
    let g = build_gibbs(&spec, 0, 0, &opts()).unwrap();
    let count = 100_000;
    let batch = sample_paths(&g, 3, 3, count, 7);
    let words = spec.words(3, 3);
    for w in &words {
        let p = g.cylinder_mass(&cyl(3, w));
        let freq = batch.paths.iter().filter(|x| *x == w).count() as f64;
        let sd = (count as f64 * p * (1.0 - p)).sqrt();
        assert!((freq - count as f64 * p).abs() <= 4.0 * sd + 1.0, "{w:?}");
    }
}

#[test]
fn correlation_decay() {
    let g = build_gibbs(&iid_coin(2), 0, 0, &opts()).unwrap();
    for n in 1..6 {
        assert_eq!(g.correlation(0, &[1.0, 0.0], &[0.0, 1.0], n), 0.0);
    }
    let gm = golden();
    let ind = [1.0, 0.0];
    let fit = correlation_decay_check(&gm, 0, &ind, &ind, &(1..=20).collect::<Vec<_>>());
    assert!((fit.delta() - PHI.powi(-2)).abs() < 1e-6, "{}", fit.delta());
    let spec = seeded_primitive(22, SeededOptions { d_min: 3, d_max: 3, ..Default::default() }).unwrap();
    let g = build_gibbs(&spec, 0, 0, &opts()).unwrap();
    let gv: Vec<f64> = (0..spec.d(0)).map(|a| a as f64).collect();
    let fv: Vec<f64> = (0..spec.d(6)).map(|a| (a as f64).powi(2)).collect();
    let fit = correlation_decay_check(&g, 0, &gv, &fv, &[2, 4, 6]);
    assert!(fit.degenerate || fit.slope < 0.0);
}

#[test]
fn psi_full_shift_is_zero() {
    let g = build_gibbs(&iid_coin(2), 0, 0, &opts()).unwrap();
    let rep = psi_mixing_report(&g, 0, 6, &[1, 2, 3, 4]);
    assert!(rep.psi.iter().all(|&x| x == 0.0));
}

#[test]
fn psi_matches_enumeration() {
    let gm = golden();
    for n in 1..=5 {
        let fast = mixing::psi_coefficient(&gm, 0, 2, n);
        let slow = psi_by_enumeration(&gm, 0, 2, 2, n);
        assert!((fast - slow).abs() < 1e-10, "n={n}: {fast} {slow}");
    }
    let rep = psi_mixing_report(&gm, 0, 2, &(1..=12).collect::<Vec<_>>());
    assert!(rep.delta < 1.0 && rep.delta > 0.0);
    let g = build_gibbs(&seeded(30), 0, 0, &opts()).unwrap();
    for n in [1, 3] {
        let fast = mixing::psi_coefficient(&g, 0, 2, n);
        let slow = psi_by_enumeration(&g, 0, 2, 2, n);
        assert!((fast - slow).abs() < 1e-10 * fast.max(1.0));
    }
    let rep = psi_mixing_report(&g, 0, 3, &[2, 4, 6, 8, 10]);
    assert!(rep.delta < 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn pushforward_and_kernels(seed in 0u64..400) {
        let spec = seeded(seed);
        let g = build_gibbs(&spec, 0, 0, &opts()).unwrap();
        prop_assert!(g.pushforward_error < 1e-12);
        for j in 0..16 {
            let k = g.kernel(j);
            let t = spec.a(j);
            for a in 0..k.nrows() {
                prop_assert!((k.row(a).sum() - 1.0).abs() < 1e-14);
                for b in 0..k.ncols() {
                    prop_assert_eq!(k[(a, b)] > 0.0, t.get(a, b));
                }
            }
            prop_assert!((g.marginal(j).sum() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn psi_dominates_indicator_correlations(seed in 0u64..400, n in 1usize..6) {
        let g = build_gibbs(&seeded(seed), 0, 0, &opts()).unwrap();
        let psi = mixing::psi_coefficient(&g, 0, 1, n);
        let d0 = g.marginal(0).len();
        let dn = g.marginal(n as i64).len();
        for a in 0..d0 {
            for b in 0..dn {
                let ga: Vec<f64> = (0..d0).map(|x| (x == a) as u8 as f64).collect();
                let fb: Vec<f64> = (0..dn).map(|x| (x == b) as u8 as f64).collect();
                let c = g.correlation(0, &ga, &fb, n).abs();
                prop_assert!(c <= psi * g.marginal(0)[a] * g.marginal(n as i64)[b] * (1.0 + 1e-9) + 1e-15);
            }
        }
    }
}

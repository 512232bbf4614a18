use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use seqrpf::linalg::{c, pair, CVector, C64, ZERO};
use seqrpf::rpf::convergence::convergence_residuals;
use seqrpf::rpf::pressure::{cauchy_derivatives, pressure_from_base};
use seqrpf::rpf::stability::{disk_grid, perturb};
use seqrpf::rpf::*;
use seqrpf::systems::catalog::*;
use seqrpf::systems::*;
use seqrpf::Error;

const PHI: f64 = 1.618_033_988_749_895;

fn opts() -> SolverOptions {
    SolverOptions::default()
}

#[test]
fn full_shift_triplet() {
    let s = iid_coin(4);
    let t = solve_triplet(&s, 0, ZERO, &opts()).unwrap();
    assert!((t.lambda - c(2.0, 0.0)).norm() < 1e-14);
    for i in 0..2 {
        assert!((t.h[i] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((t.nu[i] - c(0.5, 0.0)).norm() < 1e-14);
    }
}

#[test]
fn golden_mean_triplet_matches_eigendecomposition() {
    let s = golden_mean(vec![0.0; 2], vec![0.0; 2], 3).unwrap();
    let t = solve_triplet(&s, 1, ZERO, &opts()).unwrap();
    // Independent route: symmetric eigendecomposition of the 0/1 matrix.
    let eig = SymmetricEigen::new(DMatrix::<f64>::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 0.0]));
    let i = if eig.eigenvalues[0] > eig.eigenvalues[1] { 0 } else { 1 };
    let v = eig.eigenvectors.column(i);
    assert!((t.lambda.re - eig.eigenvalues[i]).abs() < 1e-13);
    assert!((t.lambda.re - PHI).abs() < 1e-13);
    // ν is the normalized Perron vector; h the Perron vector with ν(h) = 1.
    let s_v = v[0] + v[1];
    let nu = [v[0] / s_v, v[1] / s_v];
    let norm = nu[0] * v[0] + nu[1] * v[1];
    for k in 0..2 {
        assert!((t.nu[k].re - nu[k]).abs() < 1e-13);
        assert!((t.h[k].re - v[k] / norm).abs() < 1e-13);
    }
    assert!((t.h[0].re / t.h[1].re - PHI).abs() < 1e-12);
}

#[test]
fn full_shift_lambda_at_real_z_matches_cylinder_sums() {
    let s = iid_coin(2);
    let z = 0.3;
    let mut o = opts();
    o.trust_radius = Some(1.0);
    let t = solve_triplet(&s, 0, c(z, 0.0), &o).unwrap();
    assert!((t.lambda - c(1.0 + z.exp(), 0.0)).norm() < 1e-13);
    // Brute force: Σ_words e^{z S_n u} grows by the factor λ per step.
    let sum = |n: usize| -> f64 { s.words(0, n).iter().map(|w| (z * w.iter().map(|&a| a as f64).sum::<f64>()).exp()).sum() };
    for n in 1..8 {
        assert!((sum(n + 1) / sum(n) - t.lambda.re).abs() < 1e-12);
    }
}

#[test]
fn triplet_family_matches_single_solves() {
    let s = seeded_primitive(11, SeededOptions::default()).unwrap();
    let z = c(0.05, 0.08);
    let fam = solve_family(&s, 0, 16, z, &opts()).unwrap();
    for j in [0_i64, 5, 15] {
        let t = solve_triplet(&s, j, z, &opts()).unwrap();
        assert!((t.lambda - fam.lambda(j)).norm() < 1e-12);
        assert!((&t.h - fam.h(j)).norm() < 1e-11);
        assert!((&t.nu - fam.nu(j)).norm() < 1e-11);
    }
}

#[test]
fn uniform_reference_gives_same_triplet() {
    let s = seeded_primitive(5, SeededOptions::default()).unwrap();
    let a = solve_triplet(&s, 3, c(0.1, 0.0), &opts()).unwrap();
    let mut o = opts();
    o.reference = Reference::Uniform;
    let b = solve_triplet(&s, 3, c(0.1, 0.0), &o).unwrap();
    assert!((a.lambda - b.lambda).norm() < 1e-12);
    assert!((&a.nu - &b.nu).norm() < 1e-11);
}

#[test]
fn branch_loss_and_trust_errors() {
    let s = iid_coin(2);
    let z = c(0.0, std::f64::consts::PI);
    assert!(matches!(solve_triplet(&s, 0, z, &opts()), Err(Error::OutsideTrustDisk { .. })));
    let mut o = opts();
    o.trust_radius = Some(10.0);
    assert!(matches!(solve_triplet(&s, 0, z, &o), Err(Error::BranchLoss { .. })));
}

#[test]
fn short_horizon_is_not_converged() {
    let s = golden_mean(vec![0.0, 0.7], vec![0.0; 2], 3).unwrap();
    let mut o = opts();
    o.horizon = 1;
    o.tol = 1e-12;
    assert!(matches!(solve_triplet(&s, 0, ZERO, &o), Err(Error::NotConverged { .. })));
}

#[test]
fn normalized_family_full_shift() {
    let s = iid_coin(4);
    let z = c(0.1, 0.2);
    let fz = solve_family(&s, 0, 4, z, &opts()).unwrap();
    let f0 = solve_family(&s, 0, 4, ZERO, &opts()).unwrap();
    let nf = normalize_family(&fz, &f0, 1e-6).unwrap();
    for (i, a) in nf.a.iter().enumerate() {
        assert!((a - c(1.0, 0.0)).norm() < 1e-14);
        if i < nf.tilde_lambda.len() {
            assert!((nf.tilde_lambda[i] - fz.lambda[i] / 2.0).norm() < 1e-14);
        }
    }
}

#[test]
fn normalized_family_at_zero_is_identity() {
    let s = seeded_primitive(21, SeededOptions::default()).unwrap();
    let f0 = solve_family(&s, 0, 16, ZERO, &opts()).unwrap();
    let nf = normalize_family(&f0, &f0, 1e-6).unwrap();
    for i in 0..16 {
        assert!((nf.tilde_lambda[i] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(nf.tilde_h[i].iter().all(|v| (v - c(1.0, 0.0)).norm() < 1e-12));
        let mass: C64 = nf.tilde_nu[i].iter().sum();
        assert!((mass - c(1.0, 0.0)).norm() < 1e-12);
        assert!(nf.tilde_nu[i].iter().all(|v| v.re >= 0.0));
        let m = tilde_operator(&s, &f0, i as i64, ZERO);
        for b in 0..m.nrows() {
            let row: C64 = m.row(b).iter().sum();
            assert!((row - c(1.0, 0.0)).norm() < 1e-12);
        }
    }
}

#[test]
fn telescoping_identity() {
    let s = seeded_primitive(8, SeededOptions::default()).unwrap();
    let z = c(0.05, -0.07);
    let n = 12;
    let f0 = solve_family(&s, 0, n, ZERO, &opts()).unwrap();
    let fz = solve_family(&s, 0, n, z, &opts()).unwrap();
    let nf = normalize_family(&fz, &f0, 1e-6).unwrap();
    let (pi, _) = pressure_from_base(&s, &f0, n, z, &opts()).unwrap();
    let sum_pi: C64 = pi.iter().sum();
    let sum_tilde: C64 = nf.tilde_lambda.iter().map(|l| l.ln()).sum();
    let gap = (sum_pi - sum_tilde).norm();
    let ends = (nf.a[0].ln() - nf.a[n].ln()).norm();
    assert!((gap - ends).abs() < 1e-10, "gap {gap} vs {ends}");
}

#[test]
fn pressure_of_logistic_family() {
    let s = iid_coin(2);
    for z in [c(0.1, 0.0), c(0.05, 0.1), c(-0.1, -0.05)] {
        let p = pressure(&s, 0, z, &opts()).unwrap();
        let want = ((c(1.0, 0.0) + z.exp()) / 2.0).ln();
        assert!((p - want).norm() < 1e-13);
    }
    assert_eq!(pressure(&s, 0, ZERO, &opts()).unwrap(), ZERO);
    let d = pressure_derivatives(&s, 0, 2, 4, None, 64, &opts()).unwrap();
    assert!((d.get(1, 0) - 0.5).abs() < 1e-12);
    assert!((d.get(2, 0) - 0.25).abs() < 1e-12);
    assert!(d.get(3, 0).abs() < 1e-10);
    assert!((d.get(4, 0) + 0.125).abs() < 1e-9);
    assert!(d.error_estimate[..=4].iter().all(|&e| e < 1e-9));
    assert!(d.max_imag < 1e-10);
}

#[test]
fn zero_observable_has_zero_pressure() {
    let s = seeded_primitive(4, SeededOptions::default()).unwrap();
    let zero: Vec<Vec<f64>> = s.observable.iter().map(|v| vec![0.0; v.len()]).collect();
    let s = s.with_functions(s.potential.clone(), zero).unwrap();
    let d = pressure_derivatives(&s, 0, 16, 4, None, 64, &opts()).unwrap();
    for k in 0..=4 {
        assert!(d.values[k].iter().all(|v| v.abs() < 1e-13));
    }
}

#[test]
fn pressure_branch_consistency() {
    let s = seeded_primitive(9, SeededOptions::default()).unwrap();
    let r = 0.5 / (1.0 + s.sup_observable());
    let grid: Vec<C64> = (0..6).map(|i| C64::from_polar(0.9 * r, i as f64)).collect();
    let seq = pressure_sequence(&s, 0, 16, &grid, &opts()).unwrap();
    let f0 = solve_family(&s, 0, 16, ZERO, &opts()).unwrap();
    for (i, &z) in grid.iter().enumerate() {
        let fz = solve_family(&s, 0, 16, z, &opts()).unwrap();
        for j in 0..16 {
            let lhs = seq.values[i][j].exp() * f0.lambda[j];
            assert!((lhs - fz.lambda[j]).norm() < 1e-12 * fz.lambda[j].norm());
        }
    }
}

#[test]
fn continuation_tracks_argument_beyond_pi() {
    // With a large trust radius the principal log would wrap; the continued
    // value must keep growing like z/2 in the imaginary direction.
    let s = iid_coin(1);
    let mut o = opts();
    o.trust_radius = Some(10.0);
    let z = c(0.0, 3.0);
    let p = pressure(&s, 0, z, &o).unwrap();
    let want = ((c(1.0, 0.0) + z.exp()) / 2.0).ln();
    assert!((p.re - want.re).abs() < 1e-12);
    assert!((p.im - 1.5).abs() < 1e-12, "{p}");
}

#[test]
fn cauchy_rule_on_polynomial() {
    let r = 0.3;
    let samples: Vec<C64> = (0..16).map(|i| {
        let z = C64::from_polar(r, 2.0 * std::f64::consts::PI * i as f64 / 16.0);
        c(1.0, 0.0) + z * 2.0 + z * z * z * 5.0
    }).collect();
    let d = cauchy_derivatives(&samples, r, 4);
    assert!((d[1].re - 2.0).abs() < 1e-12);
    assert!((d[3].re - 30.0).abs() < 1e-10);
    assert!(d[2].norm() < 1e-10 && d[4].norm() < 1e-8);
}

#[test]
fn convergence_fit_full_shift_is_degenerate() {
    let s = iid_coin(2);
    let g = CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
    let fit = convergence_rate_fit(&s, 0, ZERO, &g, &[1, 2, 3, 4, 5], &opts()).unwrap();
    assert!(fit.degenerate && fit.slope == f64::NEG_INFINITY);
    assert!(fit.residuals.iter().all(|&r| r < 1e-14));
}

#[test]
fn convergence_fit_golden_mean_rate() {
    let s = golden_mean(vec![0.0; 2], vec![0.0, 1.0], 1).unwrap();
    let horizons: Vec<usize> = (2..=24).step_by(2).collect();
    for g in [s.ones(0), CVector::from_vec(vec![ZERO, c(1.0, 0.0)])] {
        let fit = convergence_rate_fit(&s, 0, ZERO, &g, &horizons, &opts()).unwrap();
        let want = PHI.powi(-2);
        assert!((fit.delta() - want).abs() < 0.05 * want, "delta {}", fit.delta());
    }
}

#[test]
fn stability_closed_form_shift() {
    let s = iid_coin(2);
    let eps = 0.01;
    let other = s.with_functions(vec![vec![eps; 2]; 2], s.observable.clone()).unwrap();
    let a = solve_triplet(&s, 0, ZERO, &opts()).unwrap();
    let b = solve_triplet(&other, 0, ZERO, &opts()).unwrap();
    assert!(((b.lambda - a.lambda).norm() - 2.0 * (eps.exp() - 1.0)).abs() < 1e-13);
    let rows = stability_sweep(&s, &[0.0], &disk_grid(0.1), 3, &opts()).unwrap();
    assert_eq!(rows[0].response(), 0.0);
}

#[test]
fn stability_response_decreases() {
    let s = seeded_primitive(31, SeededOptions::default()).unwrap();
    let rows = stability_sweep(&s, &[1e-1, 1e-2, 1e-3], &disk_grid(0.1), 7, &opts()).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].response() * 5.0 <= w[0].response());
    }
    let dir = seqrpf::rpf::stability::noise_direction(&s, 7);
    assert!(perturb(&s, 0.0, &dir).unwrap() == s);
}

#[test]
fn nonsingular_examples() {
    let s = iid_coin(3);
    let r = nonsingular_check(&s, &vec![vec![0.5, 0.5]; 3], 1e-10, &opts()).unwrap();
    assert!(r.passed);
    let p = 0.3;
    let r = nonsingular_check(&s, &vec![vec![p, 1.0 - p]; 3], 1e-10, &opts()).unwrap();
    assert!(r.passed, "{r:?}");
    assert!(nonsingular_check(&s, &vec![vec![1.0, 0.0]; 3], 1e-10, &opts()).is_err());
    let f = seqrpf::systems::catalog::nonsingular_potential(&s, &vec![vec![0.5, 0.5]; 3]);
    assert!(f.iter().flatten().all(|&v| (v + 2f64.ln()).abs() < 1e-15));
}

#[test]
fn circle_normalized_doubling_triplet() {
    let k = 4;
    let spec = CircleSpec::new(0, Extension::Periodic, vec![2, 3], vec![vec![c(-(2f64).ln(), 0.0)], vec![c(-(3f64).ln(), 0.0)]], vec![vec![ZERO]; 2], 0, k).unwrap();
    let t = solve_triplet(&spec, 0, ZERO, &opts()).unwrap();
    assert!((t.lambda - c(1.0, 0.0)).norm() < 1e-12);
    let ones = spec.ones(0);
    assert!((&t.h - &ones).norm() < 1e-12);
    assert!((pair(&t.nu, &ones) - c(1.0, 0.0)).norm() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn triplet_invariants(seed in 0u64..500, j in 0i64..16, re in -0.1f64..0.1, im in -0.1f64..0.1) {
        let s = seeded_primitive(seed, SeededOptions::default()).unwrap();
        let t = solve_triplet(&s, j, c(re, im), &opts()).unwrap();
        prop_assert!((pair(&t.nu, &s.ones(j)) - c(1.0, 0.0)).norm() < 1e-12);
        prop_assert!((pair(&t.nu, &t.h) - c(1.0, 0.0)).norm() < 1e-12);
        prop_assert!(t.residual_eigen <= 1e-9 && t.residual_dual <= 1e-9);
        let t0 = solve_triplet(&s, j, ZERO, &opts()).unwrap();
        prop_assert!(t0.lambda.re > 0.0 && t0.lambda.im.abs() < 1e-14);
        prop_assert!(t0.h.iter().all(|v| v.re > 0.0));
        prop_assert!(t0.nu.iter().all(|v| v.re >= 0.0));
    }

    #[test]
    fn residuals_decay(seed in 0u64..500) {
        let s = seeded_primitive(seed, SeededOptions::default()).unwrap();
        let horizons = [4usize, 8, 12, 16, 20];
        let res = convergence_residuals(&s, 0, ZERO, &s.ones(0), &horizons, &opts()).unwrap();
        let fit = seqrpf::rpf::convergence::fit_exponential(&horizons, &res, 1e-13);
        prop_assert!(fit.degenerate || fit.slope < -0.01);
    }
}

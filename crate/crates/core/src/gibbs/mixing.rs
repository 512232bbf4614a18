//! Decay of correlations, ψ-mixing coefficients and the Gibbs ratio band.

use serde::{Deserialize, Serialize};

use crate::gibbs::family::{Cylinder, GibbsFamily};
use crate::rpf::convergence::{fit_exponential, ConvergenceFit};

/// Values at or below this are treated as exact zeros in decay fits.
pub const DECAY_FLOOR: f64 = 1e-15;

/// `|μ_j(g · f∘T^n) − μ_j(g) μ_{j+n}(f)|` for each `n`, with an exponential fit.
pub fn correlation_decay_check(family: &GibbsFamily, j: i64, g: &[f64], f: &[f64], n_list: &[usize]) -> ConvergenceFit {
    let corr: Vec<f64> = n_list.iter().map(|&n| family.correlation(j, g, f, n).abs()).collect();
    fit_exponential(n_list, &corr, DECAY_FLOOR)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    pub start: i64,
    pub r_max: usize,
    pub gaps: Vec<usize>,
    pub psi: Vec<f64>,
    pub fit: ConvergenceFit,
    /// Fitted `C` and `δ` in `ψ(n) ≤ C δ^n`.
    pub c: f64,
    pub delta: f64,
}

/// `ψ(n)` over cylinders `A` of rank at most `r_max` starting at `j` and any
/// cylinder `B` starting `n` steps after the end of `A`.
///
/// For the Markov representation the ratio
/// `μ(A∩B) / (μ(A) μ(B))` equals `P^{(k,n)}(a, b) / m_{k+n}(b)` with `a` the last
/// symbol of `A` at time `k` and `b` the first of `B`, so the supremum only
/// runs over `k ∈ [j, j + r_max)` and symbol pairs.
pub fn psi_coefficient(family: &GibbsFamily, j: i64, r_max: usize, n: usize) -> f64 {
    let mut sup = 0.0_f64;
    for k in j..j + r_max.max(1) as i64 {
        let p = family.kernel_product(k, n);
        let m_a = family.marginal(k);
        let m_b = family.marginal(k + n as i64);
        for a in 0..p.nrows() {
            if m_a[a] <= 0.0 {
                continue;
            }
            for b in 0..p.ncols() {
                if m_b[b] > 0.0 {
                    sup = sup.max((p[(a, b)] / m_b[b] - 1.0).abs());
                }
            }
        }
    }
    sup
}

pub fn psi_mixing_report(family: &GibbsFamily, j: i64, r_max: usize, n_list: &[usize]) -> MixingReport {
    let psi: Vec<f64> = n_list.iter().map(|&n| psi_coefficient(family, j, r_max, n)).collect();
    let fit = fit_exponential(n_list, &psi, DECAY_FLOOR);
    let (c, delta) = if fit.degenerate { (0.0, 0.0) } else { (fit.intercept.exp(), fit.delta()) };
    MixingReport { start: j, r_max, gaps: n_list.to_vec(), psi, fit, c, delta }
}

/// `ψ(n)` by direct enumeration of cylinder pairs of ranks `r, s ≤ r_max`;
/// `μ(A ∩ B)` sums the masses of all admissible fillers of the gap.
pub fn psi_by_enumeration(family: &GibbsFamily, j: i64, r_max: usize, s_max: usize, n: usize) -> f64 {
    let spec = &family.spec;
    let mut sup = 0.0_f64;
    for r in 1..=r_max {
        let b_start = j + (r - 1 + n) as i64;
        for a_word in spec.words(j, r) {
            let mu_a = family.cylinder_mass(&Cylinder { start: j, word: a_word.clone() });
            for s in 1..=s_max {
                for b_word in spec.words(b_start, s) {
                    let mu_b = family.cylinder_mass(&Cylinder { start: b_start, word: b_word.clone() });
                    let mut joint = 0.0;
                    let last = j + r as i64 - 1;
                    for filler in spec.words(last, n + 1) {
                        if filler[0] != a_word[r - 1] || filler[n] != b_word[0] {
                            continue;
                        }
                        let mut w = a_word.clone();
                        w.extend_from_slice(&filler[1..n]);
                        w.extend_from_slice(&b_word);
                        joint += family.cylinder_mass(&Cylinder { start: j, word: w });
                    }
                    if mu_a > 0.0 && mu_b > 0.0 {
                        sup = sup.max((joint - mu_a * mu_b).abs() / (mu_a * mu_b));
                    }
                }
            }
        }
    }
    sup
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioBand {
    pub lo: f64,
    pub hi: f64,
    pub words: usize,
}

/// Range of `μ_j[w] / e^{S f(w) − ln λ_{j,|w|}}` over admissible words of
/// length `1..=max_len` and starting indices `j ∈ [start, start + window)`.
pub fn gibbs_ratio_band(family: &GibbsFamily, start: i64, window: usize, max_len: usize) -> RatioBand {
    let spec = &family.spec;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    let mut count = 0;
    for j in start..start + window as i64 {
        for len in 1..=max_len {
            for w in spec.words(j, len) {
                let s: f64 = w.iter().enumerate().map(|(i, &a)| spec.f(j + i as i64)[a]).sum();
                let ratio = family.cylinder_mass(&Cylinder { start: j, word: w }) / (s - family.log_lambda(j, len)).exp();
                lo = lo.min(ratio);
                hi = hi.max(ratio);
                count += 1;
            }
        }
    }
    RatioBand { lo, hi, words: count }
}

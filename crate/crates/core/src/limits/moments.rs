//! Moments of Birkhoff sums against pressure derivatives, and the variance
//! dichotomy (linear growth versus coboundaries).

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::GibbsFamily;
use crate::rpf::convergence::linear_fit;
use crate::rpf::pressure::{factorial, pressure_derivatives};
use crate::rpf::triplet::SolverOptions;

/// `C_k = 2^{-k/2} k! / (k/2)!` for even `k`.
pub fn c_const(k: usize) -> f64 {
    assert!(k % 2 == 0, "C_k is defined for even k");
    factorial(k) / (2f64.powi(k as i32 / 2) * factorial(k / 2))
}

/// `D_k = k!/3! · 2^{-(k-3)/2} / ((k-3)/2)!` for odd `k ≥ 3`.
pub fn d_const(k: usize) -> f64 {
    assert!(k % 2 == 1 && k >= 3, "D_k is defined for odd k >= 3");
    factorial(k) / 6.0 / (2f64.powi((k as i32 - 3) / 2) * factorial((k - 3) / 2))
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Raw moments `μ_j(S^k)` for `k ≤ kmax` and every `n` in `n_list`, from the
/// recursion `E[S_{t+1}^k; x_{t+1}=b] = Σ_a P(a→b) Σ_i C(k,i) u(a)^{k−i} E[S_t^i; x_t=a]`.
pub fn raw_moments(g: &GibbsFamily, j: i64, n_list: &[usize], kmax: usize) -> Vec<Vec<f64>> {
    let n_max = n_list.iter().copied().max().unwrap_or(0);
    let d0 = g.marginal(j).len();
    let mut e: Vec<DVector<f64>> = (0..=kmax)
        .map(|k| if k == 0 { g.marginal(j).clone() } else { DVector::zeros(d0) })
        .collect();
    let mut out = vec![Vec::new(); n_list.len()];
    let collect = |e: &Vec<DVector<f64>>| -> Vec<f64> { e.iter().map(|v| v.sum()).collect() };
    for (i, &n) in n_list.iter().enumerate() {
        if n == 0 {
            out[i] = collect(&e);
        }
    }
    for t in 0..n_max {
        let k_idx = j + t as i64;
        let u = g.spec.u(k_idx);
        let p = g.kernel(k_idx);
        let shifted: Vec<DVector<f64>> = (0..=kmax)
            .map(|k| {
                DVector::from_fn(u.len(), |a, _| {
                    (0..=k).map(|i| binomial(k, i) * u[a].powi((k - i) as i32) * e[i][a]).sum()
                })
            })
            .collect();
        e = shifted.iter().map(|v| p.tr_mul(v)).collect();
        for (i, &n) in n_list.iter().enumerate() {
            if n == t + 1 {
                out[i] = collect(&e);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub n: usize,
    pub k: usize,
    /// `γ_{j,k,n} = n^{-⌊k/2⌋} μ_j(S^k)`.
    pub gamma: f64,
    /// `C_k Π_{j,2,n}^{k/2}` or `D_k Π_{j,2,n}^{(k−3)/2} Π_{j,3,n}`.
    pub predicted: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub start: i64,
    pub rows: Vec<MomentRow>,
    /// Log-log slope of the gap against `n` for each `k ≥ 2` (NaN if degenerate).
    pub slopes: Vec<(usize, f64)>,
    /// `|μ_j(S_{j,n} u) − Σ Π'_{j+m}(0)|` on the raw observable, per `n`.
    pub mean_identity: Vec<f64>,
    pub c: Vec<(usize, f64)>,
    pub d: Vec<(usize, f64)>,
}

pub fn moments_report(g: &GibbsFamily, j: i64, n_list: &[usize], kmax: usize, opts: &SolverOptions) -> Result<MomentReport> {
    let n_max = n_list.iter().copied().max().unwrap_or(1);
    let raw_derivs = pressure_derivatives(&g.spec, j, n_max, 3, None, 64, opts)?;
    let raw_means = raw_moments(g, j, n_list, 1);
    let mean_identity = n_list
        .iter()
        .zip(&raw_means)
        .map(|(&n, m)| (m[1] - raw_derivs.averaged(j, 1, n) * n as f64).abs())
        .collect();
    let centered = g.centered()?;
    let derivs = pressure_derivatives(&centered.spec, j, n_max, 3, None, 64, opts)?;
    let moments = raw_moments(&centered, j, n_list, kmax);
    let mut rows = Vec::new();
    for (&n, m) in n_list.iter().zip(&moments) {
        let p2 = derivs.averaged(j, 2, n);
        let p3 = derivs.averaged(j, 3, n);
        for k in 2..=kmax {
            let gamma = m[k] / (n as f64).powi((k / 2) as i32);
            let predicted = if k % 2 == 0 {
                c_const(k) * p2.powi(k as i32 / 2)
            } else {
                d_const(k) * p2.powi((k as i32 - 3) / 2) * p3
            };
            rows.push(MomentRow { n, k, gamma, predicted, gap: (gamma - predicted).abs() });
        }
    }
    let slopes = (2..=kmax)
        .map(|k| {
            let (x, y): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter(|r| r.k == k && r.gap > 0.0)
                .map(|r| ((r.n as f64).ln(), r.gap.ln()))
                .unzip();
            (k, linear_fit(&x, &y).map(|f| f.0).unwrap_or(f64::NAN))
        })
        .collect();
    let c = (2..=kmax).step_by(2).map(|k| (k, c_const(k))).collect();
    let d = (3..=kmax).step_by(2).map(|k| (k, d_const(k))).collect();
    Ok(MomentReport { start: j, rows, slopes, mean_identity, c, d })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Growth {
    Bounded,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceGrowth {
    pub start: i64,
    pub n_list: Vec<usize>,
    pub variance: Vec<f64>,
    pub per_step: Vec<f64>,
    pub class: Growth,
}

/// `var_{μ_j}(S_{j,n} u)` along `n_list`; bounded when the largest value is
/// at most twice the smallest plus `1e-9`, linear otherwise.
pub fn variance_growth(g: &GibbsFamily, j: i64, n_list: &[usize]) -> Result<VarianceGrowth> {
    let centered = g.centered()?;
    let m = raw_moments(&centered, j, n_list, 2);
    let variance: Vec<f64> = m.iter().map(|v| v[2] - v[1] * v[1]).collect();
    let per_step = n_list.iter().zip(&variance).map(|(&n, v)| v / n.max(1) as f64).collect();
    let lo = variance.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = variance.iter().cloned().fold(0.0, f64::max);
    let class = if hi <= 2.0 * lo + 1e-9 { Growth::Bounded } else { Growth::Linear };
    Ok(VarianceGrowth { start: j, n_list: n_list.to_vec(), variance, per_step, class })
}

/// `inf_{j in window} var_{μ_j}(S_{j,n} u) / n`.
pub fn variance_lower_bound(g: &GibbsFamily, n: usize) -> Result<f64> {
    let centered = g.centered()?;
    let mut inf = f64::INFINITY;
    for j in 0..g.len as i64 {
        let m = &raw_moments(&centered, g.start + j, &[n], 2)[0];
        inf = inf.min((m[2] - m[1] * m[1]) / n as f64);
    }
    Ok(inf)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoboundaryWitness {
    pub start: i64,
    pub horizon: usize,
    /// `Y_k` for `k ∈ [start, start + len]`.
    pub y: Vec<Vec<f64>>,
    /// `sup ‖ũ_k(a) − (Y_{k+1}(b) − Y_k(a))‖` over admissible pairs.
    pub residual: f64,
    /// Size of the last series term, a proxy for the truncation error.
    pub tail: f64,
    pub sup_norm: f64,
}

/// `Y_k = Σ_{i=1}^{horizon} L̃_0^{k−i,i} ũ_{k−i}`, the truncated series whose
/// limit solves `ũ_k = Y_{k+1}∘T_k − Y_k` when `u` is a coboundary.
pub fn coboundary_solve(g: &GibbsFamily, len: usize, horizon: usize, tail_tol: f64) -> Result<CoboundaryWitness> {
    let c = g.centered()?;
    let start = g.start;
    let mut y = Vec::with_capacity(len + 1);
    let mut tail = 0.0_f64;
    for k in start..=start + len as i64 {
        let mut acc = DVector::zeros(c.marginal(k).len());
        let mut last = 0.0;
        for i in 1..=horizon as i64 {
            let mut v = DVector::from_column_slice(c.spec.u(k - i));
            for s in k - i..k {
                v = c.backward(s) * v;
            }
            last = v.amax();
            acc += v;
        }
        tail = tail.max(last);
        y.push(acc.iter().copied().collect::<Vec<f64>>());
    }
    if tail > tail_tol {
        return Err(Error::HorizonInsufficient(horizon));
    }
    let mut residual = 0.0_f64;
    for (i, k) in (start..start + len as i64).enumerate() {
        let t = c.spec.a(k);
        let u = c.spec.u(k);
        for a in 0..t.rows {
            for b in 0..t.cols {
                if t.get(a, b) {
                    residual = residual.max((u[a] - (y[i + 1][b] - y[i][a])).abs());
                }
            }
        }
    }
    let sup_norm = y.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok(CoboundaryWitness { start, horizon, y, residual, tail, sup_norm })
}

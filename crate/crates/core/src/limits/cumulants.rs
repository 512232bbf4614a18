//! Cumulants `Γ_k(n)` of `S_{j,n} u`: Taylor coefficients of
//! `ln μ_j(e^{zS})` at 0, from the Cauchy integral of a continuous logarithm.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::GibbsFamily;
use crate::limits::mgf::log_mgf;
use crate::linalg::{c, C64};
use crate::rpf::pressure::{cauchy_derivatives, factorial};
use crate::systems::operator::trust_radius;

const MAX_NODES: usize = 1 << 14;

/// Continuous `ln μ_j(e^{zS})` on `|z| = r` at `nodes` points; doubles the node
/// count until consecutive arguments differ by less than π/2.
fn log_mgf_on_circle(g: &GibbsFamily, j: i64, n: usize, r: f64, mut nodes: usize) -> Result<Vec<C64>> {
    loop {
        let raw: Vec<C64> = (0..nodes)
            .map(|i| log_mgf(g, j, n, C64::from_polar(r, 2.0 * PI * i as f64 / nodes as f64)))
            .collect();
        let mut out = Vec::with_capacity(nodes);
        let mut ok = true;
        // At z = r the value is real, so the branch is fixed there.
        let mut prev = 0.0;
        out.push(c(raw[0].re, 0.0));
        for v in &raw[1..] {
            let mut d = v.im - prev;
            d -= 2.0 * PI * (d / (2.0 * PI)).round();
            if d.abs() > PI / 2.0 {
                ok = false;
            }
            prev += d;
            out.push(c(v.re, prev));
        }
        let mut closing = -prev;
        closing -= 2.0 * PI * (closing / (2.0 * PI)).round();
        if closing.abs() > PI / 2.0 {
            ok = false;
        }
        if ok {
            // A nonzero winding number means a zero of the mgf inside the circle.
            if (prev + closing).abs() > 1.0 {
                return Err(Error::BranchLoss { index: j, modulus: 0.0 });
            }
            return Ok(out);
        }
        if nodes >= MAX_NODES {
            return Err(Error::BranchLoss { index: j, modulus: 0.0 });
        }
        nodes *= 2;
    }
}

/// `Γ_k(n)` for `k ≤ kmax` on radius `r`.
pub fn cumulants(g: &GibbsFamily, j: i64, n: usize, kmax: usize, r: f64, nodes: usize) -> Result<Vec<f64>> {
    let samples = log_mgf_on_circle(g, j, n, r, nodes.max(2 * kmax + 2))?;
    Ok(cauchy_derivatives(&samples, r, kmax).iter().map(|d| d.re).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulantRow {
    pub n: usize,
    pub k: usize,
    pub gamma: f64,
    pub per_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulantReport {
    pub start: i64,
    pub radius: f64,
    pub rows: Vec<CumulantRow>,
    /// `c_0` such that `|Γ_k(n)| ≤ n (k!)² c_0^k` over the table.
    pub c0: f64,
    /// `(max − min) / |mean|` of `Γ_k(n)/n` over `n_list`, per `k ≥ 2`.
    pub variation: Vec<(usize, f64)>,
}

/// Cumulants of the centered sums; radius `min(0.1, r_max/4)` with `r_max`
/// the trust radius.
pub fn cumulant_report(g: &GibbsFamily, j: i64, kmax: usize, n_list: &[usize], nodes: usize) -> Result<CumulantReport> {
    let cg = g.centered()?;
    let radius = (0.1_f64).min(trust_radius(&cg.spec) / 4.0);
    let mut rows = Vec::new();
    let mut c0 = 0.0_f64;
    for &n in n_list {
        let gam = cumulants(&cg, j, n, kmax, radius, nodes)?;
        for (k, &v) in gam.iter().enumerate().skip(1) {
            rows.push(CumulantRow { n, k, gamma: v, per_step: v / n as f64 });
            c0 = c0.max((v.abs() / (n as f64 * factorial(k).powi(2))).powf(1.0 / k as f64));
        }
    }
    let variation = (2..=kmax)
        .map(|k| {
            let vals: Vec<f64> = rows.iter().filter(|r| r.k == k).map(|r| r.per_step).collect();
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            (k, (hi - lo) / mean.abs())
        })
        .collect();
    Ok(CumulantReport { start: j, radius, rows, c0, variation })
}

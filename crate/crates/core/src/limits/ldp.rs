//! Large and moderate deviations: averaged pressure on the real axis, its
//! Legendre transform, and local deviation probabilities from exact laws.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gibbs::GibbsFamily;
use crate::limits::distribution::{exact_distributions, DEFAULT_STATE_CAP};
use crate::limits::mgf::log_mgf;
use crate::linalg::c;
use crate::rpf::pressure::pressure_sequence;
use crate::rpf::triplet::SolverOptions;

/// Step for central differences of `Π`.
pub const DIFF_STEP: f64 = 1e-4;
const GOLDEN_ITERS: usize = 120;

/// Cesàro average of `Π_j(s)` over one period of the centered family.
pub struct AveragedPressure<'a> {
    family: &'a GibbsFamily,
    opts: SolverOptions,
}

impl<'a> AveragedPressure<'a> {
    /// `family` must already be centered.
    pub fn new(family: &'a GibbsFamily, opts: &SolverOptions) -> Self {
        AveragedPressure { family, opts: *opts }
    }

    pub fn value(&self, s: f64) -> Result<f64> {
        let g = self.family;
        let seq = pressure_sequence(&g.spec, g.start, g.len, &[c(s, 0.0)], &self.opts)?;
        Ok(seq.values[0].iter().map(|v| v.re).sum::<f64>() / g.len as f64)
    }

    pub fn derivative(&self, s: f64) -> Result<f64> {
        Ok((self.value(s + DIFF_STEP)? - self.value(s - DIFF_STEP)?) / (2.0 * DIFF_STEP))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegendrePoint {
    pub t: f64,
    pub value: f64,
    pub argmax: f64,
    /// The maximizer sits on the boundary of `[−δ, δ]`: `t` is outside the
    /// range of `Π'` and the value is only a lower bound.
    pub out_of_range: bool,
}

/// `L(t) = sup_{|s| ≤ δ} (s t − Π(s))` by golden-section search.
pub fn legendre(pi: &AveragedPressure, t: f64, delta: f64) -> Result<LegendrePoint> {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (-delta, delta);
    let f = |s: f64| -> Result<f64> { Ok(s * t - pi.value(s)?) };
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..GOLDEN_ITERS {
        if (b - a) < 1e-12 * delta.max(1e-300) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1)?;
        }
    }
    let s = 0.5 * (a + b);
    let value = f(s)?;
    // A flat objective has no preferred maximizer; only a strict gain over
    // s = 0 at the boundary counts as out of range.
    let out_of_range = (delta - s.abs()) < 1e-6 * delta && value > f(0.0)? + 1e-14;
    Ok(LegendrePoint { t, value, argmax: s, out_of_range })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressurePoint {
    pub s: f64,
    pub pi: f64,
    pub derivative: f64,
    /// `|L(Π'(s)) − (s Π'(s) − Π(s))|`.
    pub duality_gap: f64,
    /// `max_n |Π(s) − n^{-1} ln μ_j(e^{s S_n})|` over the deviation `n_list`.
    pub limit_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalRow {
    pub n: usize,
    pub x: f64,
    pub eps: f64,
    pub log_prob_rate: f64,
    pub rate_min: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModerateRow {
    pub n: usize,
    pub x: f64,
    /// `a_n = n^{0.1}` form: `a_n^{-2} ln μ{S̄/(σ_n a_n) ≥ x} + x²/2`.
    pub gap_a: f64,
    /// `b_n = n^{0.75}` form: `(n/b_n²) ln μ{S̄/b_n ≥ x} + x²/(2σ²)`.
    pub gap_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdpReport {
    pub start: i64,
    pub delta: f64,
    pub pressure: Vec<PressurePoint>,
    pub legendre: Vec<LegendrePoint>,
    pub local: Vec<LocalRow>,
    pub moderate: Vec<ModerateRow>,
    /// Asymptotic variance `Π''(0)`.
    pub sigma2: f64,
    pub max_duality_gap: f64,
    /// Midpoint convexity of `Π` fails on the real grid beyond 1e-9.
    pub nonconvex: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdpOptions {
    pub delta: f64,
    pub s_points: usize,
    pub t_grid: Vec<f64>,
    pub n_list: Vec<usize>,
    /// Centers of the local-deviation windows.
    pub x_local: Vec<f64>,
    /// Half width; default `0.05 · range(u)`.
    pub eps: Option<f64>,
    pub x_moderate: f64,
    pub a_exponent: f64,
    pub b_exponent: f64,
}

fn log_tail_at_least(d: &crate::limits::distribution::ExactDistribution, threshold: f64) -> f64 {
    let tol = 1e-9 * d.span;
    let p: f64 = d.probs.iter().enumerate().filter(|(k, _)| d.value(*k) - d.mean >= threshold - tol).map(|(_, p)| p).sum();
    p.ln()
}

pub fn ldp_report(g: &GibbsFamily, j: i64, o: &LdpOptions, solver: &SolverOptions) -> Result<LdpReport> {
    let cg = g.centered()?;
    let pi = AveragedPressure::new(&cg, solver);
    let delta = o.delta;
    let eps = o.eps.unwrap_or_else(|| {
        let all = g.spec.observable.iter().flatten();
        let hi = all.clone().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = all.cloned().fold(f64::INFINITY, f64::min);
        0.05 * (hi - lo)
    });
    let sigma2 = (pi.value(DIFF_STEP)? - 2.0 * pi.value(0.0)? + pi.value(-DIFF_STEP)?) / (DIFF_STEP * DIFF_STEP);
    let s_grid: Vec<f64> = (0..o.s_points).map(|i| -delta + 2.0 * delta * i as f64 / (o.s_points - 1).max(1) as f64).collect();
    let mut pressure = Vec::with_capacity(s_grid.len());
    let mut values = Vec::with_capacity(s_grid.len());
    for &s in &s_grid {
        let v = pi.value(s)?;
        let d = pi.derivative(s)?;
        let l = legendre(&pi, d, delta)?;
        let limit_gap = o
            .n_list
            .iter()
            .map(|&n| (v - log_mgf(&cg, j, n, c(s, 0.0)).re / n as f64).abs())
            .fold(0.0, f64::max);
        values.push(v);
        pressure.push(PressurePoint { s, pi: v, derivative: d, duality_gap: (l.value - (s * d - v)).abs(), limit_gap });
    }
    let nonconvex = values.windows(3).any(|w| w[1] > 0.5 * (w[0] + w[2]) + 1e-9);
    let max_duality_gap = pressure.iter().map(|p| p.duality_gap).fold(0.0, f64::max);
    let legendre_pts = o.t_grid.iter().map(|&t| legendre(&pi, t, delta)).collect::<Result<Vec<_>>>()?;

    let dists = if o.n_list.is_empty() { Vec::new() } else { exact_distributions(g, j, &o.n_list, DEFAULT_STATE_CAP)? };
    let mut local = Vec::new();
    for &x in &o.x_local {
        let (lo, hi) = (x - eps, x + eps);
        let nearest = if lo <= 0.0 && hi >= 0.0 { 0.0 } else if lo > 0.0 { lo } else { hi };
        let rate_min = if nearest == 0.0 { 0.0 } else { legendre(&pi, nearest, delta)?.value };
        for d in &dists {
            let n = d.n as f64;
            let p = d.prob_between(d.mean + lo * n, d.mean + hi * n);
            let rate = p.ln() / n;
            local.push(LocalRow { n: d.n, x, eps, log_prob_rate: rate, rate_min, gap: (rate + rate_min).abs() });
        }
    }
    let mut moderate = Vec::new();
    for d in &dists {
        let n = d.n as f64;
        let a = n.powf(o.a_exponent);
        let b = n.powf(o.b_exponent);
        let x = o.x_moderate;
        let gap_a = log_tail_at_least(d, x * d.sigma * a) / (a * a) + x * x / 2.0;
        let gap_b = n / (b * b) * log_tail_at_least(d, x * b) + x * x / (2.0 * sigma2);
        moderate.push(ModerateRow { n: d.n, x, gap_a, gap_b });
    }
    Ok(LdpReport {
        start: j,
        delta,
        pressure,
        legendre: legendre_pts,
        local,
        moderate,
        sigma2,
        max_duality_gap,
        nonconvex,
    })
}

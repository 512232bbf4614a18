//! Reverse martingale decomposition of centered Birkhoff sums and the
//! resulting concentration inequality.
//!
//! With `L̃` the normalized operators at z = 0 (conditional expectation on
//! the next coordinate), set `G_0 = ũ_0`, `G_i = ũ_i + L̃_{i−1} G_{i−1}`. Then
//! `W_i = G_{i−1}(x_{i−1}) − (L̃_{i−1} G_{i−1})(x_i)` are reverse martingale
//! differences and `S_n − Σ_{i<n} W_i = G_{n−1}(x_{n−1})`. The remainder has
//! mean zero, so it is itself a difference for the trivial σ-algebra; it joins
//! the martingale when it obeys the same bound and is kept as the offset
//! `C_1` otherwise.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gibbs::{Cylinder, GibbsFamily};
use crate::limits::distribution::{exact_distributions, DEFAULT_STATE_CAP};

#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleDecomposition {
    pub start: i64,
    pub n: usize,
    /// `G_i` for `i < n`.
    pub g: Vec<DVector<f64>>,
    /// `L̃_{i−1} G_{i−1}` for `1 ≤ i < n` (index `i − 1`).
    pub conditional: Vec<DVector<f64>>,
    /// `C = max_i sup |W_i|` over admissible transitions.
    pub c: f64,
    /// Bound on `|S_n − M_n|`: zero when the remainder joins the martingale,
    /// `‖G_{n−1}‖_∞` otherwise.
    pub c1: f64,
    /// Number of martingale differences in `M_n`.
    pub terms: usize,
}

impl MartingaleDecomposition {
    /// `W_i(x_{i−1} = a, x_i = b)` for `1 ≤ i < n`.
    pub fn w(&self, i: usize, a: usize, b: usize) -> f64 {
        self.g[i - 1][a] - self.conditional[i - 1][b]
    }
}

/// Decomposition of `S_{j,n} ũ` for the centered family.
pub fn martingale_decompose(g: &GibbsFamily, j: i64, n: usize) -> Result<MartingaleDecomposition> {
    let c = g.centered()?;
    let mut gs: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut cond = Vec::with_capacity(n.saturating_sub(1));
    let mut bound = 0.0_f64;
    for i in 0..n {
        let k = j + i as i64;
        let u = DVector::from_column_slice(c.spec.u(k));
        if i == 0 {
            gs.push(u);
            continue;
        }
        let prev = &gs[i - 1];
        let lg = c.backward(k - 1) * prev;
        let t = c.spec.a(k - 1);
        for a in 0..t.rows {
            for b in 0..t.cols {
                if c.kernel(k - 1)[(a, b)] > 0.0 {
                    bound = bound.max((prev[a] - lg[b]).abs());
                }
            }
        }
        gs.push(u + &lg);
        cond.push(lg);
    }
    let rest = gs.last().map_or(0.0, |v| v.amax());
    let (c1, terms) = if rest <= bound || n == 1 { (0.0, n) } else { (rest, n - 1) };
    let bound = if n == 1 { rest } else { bound };
    Ok(MartingaleDecomposition { start: j, n, g: gs, conditional: cond, c: bound, c1, terms })
}

/// Largest `|E[W_i | x_i, …, x_{n−1}]|` over `1 ≤ i < n` and all conditioning
/// words, by enumeration of cylinders of length `n`.
pub fn martingale_property_error(g: &GibbsFamily, j: i64, n: usize) -> Result<f64> {
    let dec = martingale_decompose(g, j, n)?;
    let words = g.spec.words(j, n);
    let masses: Vec<f64> = words.iter().map(|w| g.cylinder_mass(&Cylinder { start: j, word: w.clone() })).collect();
    let mut worst = 0.0_f64;
    for i in 1..n {
        let mut groups: std::collections::BTreeMap<&[usize], (f64, f64)> = std::collections::BTreeMap::new();
        for (w, &m) in words.iter().zip(&masses) {
            let e = groups.entry(&w[i..]).or_insert((0.0, 0.0));
            e.0 += m * dec.w(i, w[i - 1], w[i]);
            e.1 += m;
        }
        for (num, den) in groups.values() {
            if *den > 0.0 {
                worst = worst.max((num / den).abs());
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub n: usize,
    pub t: f64,
    /// `μ{|S − E S| ≥ t + C_1}`.
    pub tail: f64,
    /// `2 e^{−t²/(4nC)}`.
    pub bound: f64,
    /// Azuma: `2 e^{−t²/(2 m C²)}` with `m` differences.
    pub azuma: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub start: i64,
    pub c: f64,
    pub c1: f64,
    pub rows: Vec<ConcentrationRow>,
    pub violations: usize,
}

/// Exact tails against the martingale bound on `t_count` equally spaced
/// values of `t` in `(0, √(80 n C)]`. Needs a lattice observable.
pub fn concentration_report(g: &GibbsFamily, j: i64, n_list: &[usize], t_count: usize) -> Result<ConcentrationReport> {
    let mut c = 0.0_f64;
    let mut c1 = 0.0_f64;
    let mut decs = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let dec = martingale_decompose(g, j, n)?;
        c = c.max(dec.c);
        c1 = c1.max(dec.c1);
        decs.push(dec);
    }
    let mut rows = Vec::new();
    if c == 0.0 {
        // The centered sum vanishes identically.
        return Ok(ConcentrationReport { start: j, c, c1, rows, violations: 0 });
    }
    let dists = exact_distributions(g, j, n_list, DEFAULT_STATE_CAP)?;
    for (d, dec) in dists.iter().zip(&decs) {
        let n = d.n as f64;
        let m = dec.terms as f64;
        let t_max = (80.0 * n * c).sqrt();
        for i in 1..=t_count {
            let t = t_max * i as f64 / t_count as f64;
            let tail = d.two_sided_tail(t + c1);
            let bound = 2.0 * (-t * t / (4.0 * n * c)).exp();
            let azuma = 2.0 * (-t * t / (2.0 * m.max(1.0) * c * c)).exp();
            rows.push(ConcentrationRow { n: d.n, t, tail, bound, azuma, violated: tail > bound });
        }
    }
    let violations = rows.iter().filter(|r| r.violated).count();
    Ok(ConcentrationReport { start: j, c, c1, rows, violations })
}

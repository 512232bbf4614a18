//! Pressure sequence `Π_j(z)` with `e^{Π_j(z)} = λ_j(z)/λ_j(0)` and its
//! derivatives at 0.
//!
//! The logarithm is continued along the segment `[0, z]`, halving the step
//! whenever the argument of consecutive ratios jumps by more than π/4.
//! Derivatives come from the trapezoidal rule for the Cauchy integral on
//! `|z| = r`, which is spectrally accurate for functions analytic on a larger
//! disk.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::linalg::{c, C64, ZERO};
use crate::rpf::triplet::{solve_family, SolverOptions, TripletFamily};
use crate::systems::operator::TransferFamily;

const MAX_DEPTH: usize = 24;

/// Values `Π_j(z)` for a list of parameters, plus continuation bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureSequence {
    pub start: i64,
    pub z_grid: Vec<C64>,
    /// `values[i][j - start]` is `Π_j(z_grid[i])`.
    pub values: Vec<Vec<C64>>,
    /// Number of continuation segments used for each grid point.
    pub segments: Vec<usize>,
}

fn ratios<F: TransferFamily + ?Sized>(
    fam: &F,
    base: &TripletFamily,
    len: usize,
    z: C64,
    opts: &SolverOptions,
) -> Result<Vec<C64>> {
    if z == ZERO {
        return Ok(vec![c(1.0, 0.0); len]);
    }
    let fz = solve_family(fam, base.start, len, z, opts)?;
    Ok((0..len).map(|i| fz.lambda[i] / base.lambda[i]).collect())
}

#[allow(clippy::too_many_arguments)]
fn continue_segment<F: TransferFamily + ?Sized>(
    fam: &F,
    base: &TripletFamily,
    len: usize,
    z: C64,
    (t0, r0): (f64, &[C64]),
    (t1, r1): (f64, &[C64]),
    depth: usize,
    acc: &mut [C64],
    segments: &mut usize,
    opts: &SolverOptions,
) -> Result<()> {
    let jump = r0.iter().zip(r1).any(|(a, b)| (b / a).arg().abs() > FRAC_PI_4);
    if jump {
        if depth >= MAX_DEPTH {
            return Err(Error::BranchLoss { index: base.start, modulus: 0.0 });
        }
        let tm = 0.5 * (t0 + t1);
        let rm = ratios(fam, base, len, z * tm, opts)?;
        continue_segment(fam, base, len, z, (t0, r0), (tm, &rm), depth + 1, acc, segments, opts)?;
        continue_segment(fam, base, len, z, (tm, &rm), (t1, r1), depth + 1, acc, segments, opts)?;
    } else {
        for ((a, x), y) in acc.iter_mut().zip(r0).zip(r1) {
            *a += (y / x).ln();
        }
        *segments += 1;
    }
    Ok(())
}

/// `Π_j(z)` for `j ∈ [base.start, base.start + len)` given the z = 0 family.
pub fn pressure_from_base<F: TransferFamily + ?Sized>(
    fam: &F,
    base: &TripletFamily,
    len: usize,
    z: C64,
    opts: &SolverOptions,
) -> Result<(Vec<C64>, usize)> {
    let mut acc = vec![ZERO; len];
    if z == ZERO {
        return Ok((acc, 0));
    }
    let r0 = vec![c(1.0, 0.0); len];
    let r1 = ratios(fam, base, len, z, opts)?;
    let mut segments = 0;
    continue_segment(fam, base, len, z, (0.0, &r0), (1.0, &r1), 0, &mut acc, &mut segments, opts)?;
    Ok((acc, segments))
}

/// `Π_j(z)` at a single index.
pub fn pressure<F: TransferFamily + ?Sized>(fam: &F, j: i64, z: C64, opts: &SolverOptions) -> Result<C64> {
    let base = solve_family(fam, j, 1, ZERO, opts)?;
    Ok(pressure_from_base(fam, &base, 1, z, opts)?.0[0])
}

/// Pressure sequence on `[start, start + len)` for every point of `z_grid`.
pub fn pressure_sequence<F: TransferFamily + ?Sized>(
    fam: &F,
    start: i64,
    len: usize,
    z_grid: &[C64],
    opts: &SolverOptions,
) -> Result<PressureSequence> {
    let base = solve_family(fam, start, len, ZERO, opts)?;
    let mut values = Vec::with_capacity(z_grid.len());
    let mut segments = Vec::with_capacity(z_grid.len());
    for &z in z_grid {
        let (v, s) = pressure_from_base(fam, &base, len, z, opts)?;
        values.push(v);
        segments.push(s);
    }
    Ok(PressureSequence { start, z_grid: z_grid.to_vec(), values, segments })
}

/// Derivatives `Π_j^{(k)}(0)` for `k ≤ kmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeTable {
    pub start: i64,
    pub radius: f64,
    pub nodes: usize,
    /// `values[k][j - start]`.
    pub values: Vec<Vec<f64>>,
    /// Largest imaginary part discarded (should be at rounding level).
    pub max_imag: f64,
    /// `|D_M − D_{M/2}|` per order, maximized over `j`.
    pub error_estimate: Vec<f64>,
}

impl DerivativeTable {
    pub fn len(&self) -> usize {
        self.values.first().map_or(0, |v| v.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, k: usize, j: i64) -> f64 {
        self.values[k][(j - self.start) as usize]
    }

    /// `Π_{j,k,n} = n^{-1} Σ_{m<n} Π_{j+m}^{(k)}(0)`.
    pub fn averaged(&self, j: i64, k: usize, n: usize) -> f64 {
        (0..n).map(|m| self.get(k, j + m as i64)).sum::<f64>() / n as f64
    }
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Cauchy-integral coefficients `k! / (M r^k) Σ_m g(z_m) e^{-2πimk/M}`.
pub fn cauchy_derivatives(samples: &[C64], radius: f64, kmax: usize) -> Vec<C64> {
    let m = samples.len();
    (0..=kmax)
        .map(|k| {
            let s: C64 = samples
                .iter()
                .enumerate()
                .map(|(i, g)| g * c(0.0, -2.0 * PI * (i * k) as f64 / m as f64).exp())
                .sum();
            s * factorial(k) / (m as f64 * radius.powi(k as i32))
        })
        .collect()
}

/// Derivatives at 0 for `j ∈ [start, start + len)` with `nodes` quadrature
/// nodes on the circle of radius `radius` (default: half the trust radius).
pub fn pressure_derivatives<F: TransferFamily + ?Sized>(
    fam: &F,
    start: i64,
    len: usize,
    kmax: usize,
    radius: Option<f64>,
    nodes: usize,
    opts: &SolverOptions,
) -> Result<DerivativeTable> {
    let r = radius.unwrap_or_else(|| 0.5 * opts.radius(fam));
    // One period suffices for periodic families.
    let solve_len = match fam.period() {
        Some(p) if p < len => p,
        _ => len,
    };
    let base = solve_family(fam, start, solve_len, ZERO, opts)?;
    let mut samples = vec![Vec::with_capacity(nodes); solve_len];
    for i in 0..nodes {
        let z = C64::from_polar(r, 2.0 * PI * i as f64 / nodes as f64);
        let (v, _) = pressure_from_base(fam, &base, solve_len, z, opts)?;
        for (s, x) in samples.iter_mut().zip(v) {
            s.push(x);
        }
    }
    let mut values = vec![Vec::with_capacity(len); kmax + 1];
    let mut error = vec![0.0_f64; kmax + 1];
    let mut max_imag = 0.0_f64;
    let mut per_slot = Vec::with_capacity(solve_len);
    for s in &samples {
        let full = cauchy_derivatives(s, r, kmax);
        let half: Vec<C64> = s.iter().step_by(2).copied().collect();
        let coarse = cauchy_derivatives(&half, r, kmax);
        for k in 0..=kmax {
            error[k] = error[k].max((full[k] - coarse[k]).norm());
            max_imag = max_imag.max(full[k].im.abs());
        }
        per_slot.push(full);
    }
    for i in 0..len {
        let d = &per_slot[i % solve_len];
        for k in 0..=kmax {
            values[k].push(if k == 0 { 0.0 } else { d[k].re });
        }
    }
    Ok(DerivativeTable { start, radius: r, nodes, values, max_imag, error_estimate: error })
}

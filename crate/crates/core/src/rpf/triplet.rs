//! Sequential RPF triplets `(λ_j(z), h_j^{(z)}, ν_j^{(z)})`.
//!
//! With `M_j` the matrix of `L_z^{(j)}` on the invariant subspace:
//!
//! * `h_j ∝ M_{j-1} ⋯ M_{j-n} 1` (pulled in from the past),
//! * `ν_j ∝ θ_{j+n} M_{j+n-1} ⋯ M_j` (pulled back from the future),
//! * `λ_j = ν_{j+1}(M_j 1)`,
//!
//! normalized by `ν_j(1) = ν_j(h_j) = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{l1_norm, CMatrix, max_row_sum, normalize_pow2, pair, row_times, sup_norm, CVector, C64};
use crate::systems::operator::{trust_radius, Reference, TransferFamily};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub horizon: usize,
    pub reference: Reference,
    /// Tolerance on the relative eigen and duality residuals.
    pub tol: f64,
    /// `|λ_j(z)|` below `lambda_floor · ‖L_z^{(j)}‖` is reported as branch loss.
    pub lambda_floor: f64,
    /// Overrides the default trust radius `0.5 / (1 + sup|u|)`.
    pub trust_radius: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            horizon: 60,
            reference: Reference::Point,
            tol: 1e-9,
            lambda_floor: 1e-6,
            trust_radius: None,
        }
    }
}

impl SolverOptions {
    pub fn with_horizon(mut self, n: usize) -> Self {
        self.horizon = n;
        self
    }

    pub fn radius<F: TransferFamily + ?Sized>(&self, fam: &F) -> f64 {
        self.trust_radius.unwrap_or_else(|| trust_radius(fam))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RpfTriplet {
    pub j: i64,
    pub z: C64,
    pub lambda: C64,
    pub h: CVector,
    pub nu: CVector,
    pub n_used: usize,
    /// `‖M_j h_j − λ_j h_{j+1}‖_∞ / (|λ_j| ‖h_{j+1}‖_∞)`.
    pub residual_eigen: f64,
    /// `‖ν_{j+1} M_j − λ_j ν_j‖_1 / (|λ_j| ‖ν_j‖_1)`.
    pub residual_dual: f64,
}

fn check_trust<F: TransferFamily + ?Sized>(fam: &F, z: C64, opts: &SolverOptions) -> Result<()> {
    let r = opts.radius(fam);
    if z.norm() > r * (1.0 + 1e-12) {
        return Err(Error::OutsideTrustDisk { z: format!("{z}"), radius: r });
    }
    Ok(())
}

/// Direction of `L_z^{j-n,n} 1`, scaled by a power of two.
pub fn h_direction<F: TransferFamily + ?Sized>(fam: &F, j: i64, z: C64, n: usize) -> CVector {
    let mut v = fam.ones(j - n as i64);
    for k in (j - n as i64)..j {
        v = fam.operator(k, z) * v;
        normalize_pow2(&mut v);
    }
    v
}

/// `F(j, n, z)`: the functional `g ↦ θ_{j+n}(L^{j,n} g) / θ_{j+n}(L^{j,n} 1)`.
pub fn nu_estimate<F: TransferFamily + ?Sized>(fam: &F, j: i64, z: C64, n: usize, r: Reference) -> CVector {
    let mut w = fam.reference(j + n as i64, r);
    for k in (j..j + n as i64).rev() {
        w = row_times(&w, &fam.operator(k, z));
        normalize_pow2(&mut w);
    }
    let s = pair(&w, &fam.ones(j));
    w / s
}

/// Ratio `θ(L^{j,n+1} 1) / θ(L^{j+1,n} 1)`, an estimate of `λ_j(z)` that only
/// uses the data at indices `j..=j+n`.
pub fn lambda_ratio<F: TransferFamily + ?Sized>(fam: &F, j: i64, z: C64, n: usize, r: Reference) -> C64 {
    let nu = nu_estimate(fam, j + 1, z, n, r);
    pair(&nu, &(fam.operator(j, z) * fam.ones(j)))
}

fn residuals(
    m: &CMatrix,
    lambda: C64,
    h: &CVector,
    h_next: &CVector,
    nu: &CVector,
    nu_next: &CVector,
) -> (f64, f64) {
    let e = sup_norm(&(m * h - h_next * lambda)) / (lambda.norm() * sup_norm(h_next));
    let d = l1_norm(&(row_times(nu_next, m) - nu * lambda)) / (lambda.norm() * l1_norm(nu));
    (e, d)
}

fn check_lambda(m: &CMatrix, j: i64, lambda: C64, opts: &SolverOptions) -> Result<()> {
    let scale = max_row_sum(m);
    if !(lambda.norm() >= opts.lambda_floor * scale) {
        return Err(Error::BranchLoss { index: j, modulus: lambda.norm() });
    }
    Ok(())
}

/// Solves for the triplet at `j` using horizon `opts.horizon`.
pub fn solve_triplet<F: TransferFamily + ?Sized>(fam: &F, j: i64, z: C64, opts: &SolverOptions) -> Result<RpfTriplet> {
    let n = opts.horizon;
    check_trust(fam, z, opts)?;
    if !fam.covering_ok(j) {
        return Err(Error::NonPrimitive { index: j, n0: 0 });
    }
    let nu = nu_estimate(fam, j, z, n, opts.reference);
    let nu_next = nu_estimate(fam, j + 1, z, n, opts.reference);
    let m = fam.operator(j, z);
    let lambda = pair(&nu_next, &(&m * fam.ones(j)));
    check_lambda(&m, j, lambda, opts)?;
    let v = h_direction(fam, j, z, n);
    let v_next = h_direction(fam, j + 1, z, n);
    let h = &v / pair(&nu, &v);
    let h_next = &v_next / pair(&nu_next, &v_next);
    let (re, rd) = residuals(&m, lambda, &h, &h_next, &nu, &nu_next);
    let worst = re.max(rd);
    if !(worst <= opts.tol) {
        return Err(Error::NotConverged { residual: worst, tol: opts.tol, horizon: n });
    }
    Ok(RpfTriplet { j, z, lambda, h, nu, n_used: n, residual_eigen: re, residual_dual: rd })
}

/// Triplets on `[start, start + len]` from one forward and one backward sweep.
///
/// Every index sees at least `opts.horizon` steps of past and future.
#[derive(Debug, Clone, PartialEq)]
pub struct TripletFamily {
    pub start: i64,
    pub z: C64,
    /// `λ_j` for `j ∈ [start, start + len]`.
    pub lambda: Vec<C64>,
    pub h: Vec<CVector>,
    pub nu: Vec<CVector>,
    pub max_residual_eigen: f64,
    pub max_residual_dual: f64,
    pub horizon: usize,
}

impl TripletFamily {
    pub fn len(&self) -> usize {
        self.lambda.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn idx(&self, j: i64) -> usize {
        let i = j - self.start;
        assert!(i >= 0 && (i as usize) < self.lambda.len(), "index {j} outside solved range");
        i as usize
    }

    pub fn lambda(&self, j: i64) -> C64 {
        self.lambda[self.idx(j)]
    }

    pub fn h(&self, j: i64) -> &CVector {
        &self.h[self.idx(j)]
    }

    pub fn nu(&self, j: i64) -> &CVector {
        &self.nu[self.idx(j)]
    }

    /// `ln λ_{j,n} = Σ_{k<n} ln λ_{j+k}` (real part, for z = 0).
    pub fn log_lambda_product(&self, j: i64, n: usize) -> f64 {
        (0..n).map(|k| self.lambda(j + k as i64).norm().ln()).sum()
    }

    pub fn triplet(&self, j: i64) -> RpfTriplet {
        RpfTriplet {
            j,
            z: self.z,
            lambda: self.lambda(j),
            h: self.h(j).clone(),
            nu: self.nu(j).clone(),
            n_used: self.horizon,
            residual_eigen: self.max_residual_eigen,
            residual_dual: self.max_residual_dual,
        }
    }
}

/// Operators on `[lo, hi)`, stored once per period when the family is periodic.
pub struct OperatorCache {
    lo: i64,
    period: Option<usize>,
    ops: Vec<CMatrix>,
}

impl OperatorCache {
    pub fn new<F: TransferFamily + ?Sized>(fam: &F, lo: i64, hi: i64, z: C64) -> Self {
        let span = (hi - lo).max(0) as usize;
        match fam.period() {
            Some(p) if p < span => OperatorCache {
                lo,
                period: Some(p),
                ops: (0..p as i64).map(|k| fam.operator(lo + k, z)).collect(),
            },
            _ => OperatorCache { lo, period: None, ops: (lo..hi).map(|k| fam.operator(k, z)).collect() },
        }
    }

    #[inline]
    pub fn get(&self, k: i64) -> &CMatrix {
        match self.period {
            Some(p) => &self.ops[(k - self.lo).rem_euclid(p as i64) as usize],
            None => &self.ops[(k - self.lo) as usize],
        }
    }
}

/// Solves every index in `[start, start + len]`.
pub fn solve_family<F: TransferFamily + ?Sized>(
    fam: &F,
    start: i64,
    len: usize,
    z: C64,
    opts: &SolverOptions,
) -> Result<TripletFamily> {
    check_trust(fam, z, opts)?;
    let n = opts.horizon as i64;
    let end = start + len as i64;
    for j in start..=end {
        if !fam.covering_ok(j) {
            return Err(Error::NonPrimitive { index: j, n0: 0 });
        }
        // Periodic families only need one period checked.
        if fam.period().is_some_and(|p| j - start + 1 >= p as i64) {
            break;
        }
    }
    let cache = OperatorCache::new(fam, start - n, end + n + 1, z);
    let op = |k: i64| cache.get(k);

    let mut dirs = Vec::with_capacity(len + 2);
    let mut v = fam.ones(start - n);
    for k in start - n..=end + 1 {
        if k >= start {
            dirs.push(v.clone());
        }
        if k <= end {
            v = op(k) * v;
            normalize_pow2(&mut v);
        }
    }
    let mut rows = vec![CVector::zeros(0); len + 2];
    let mut w = fam.reference(end + 1 + n, opts.reference);
    for k in (start..end + 1 + n).rev() {
        w = row_times(&w, op(k));
        normalize_pow2(&mut w);
        if k <= end + 1 {
            let s = pair(&w, &fam.ones(k));
            rows[(k - start) as usize] = &w / s;
        }
    }
    let mut lambda = Vec::with_capacity(len + 1);
    let mut hs = Vec::with_capacity(len + 2);
    for k in start..=end + 1 {
        let i = (k - start) as usize;
        hs.push(&dirs[i] / pair(&rows[i], &dirs[i]));
    }
    let mut max_e = 0.0_f64;
    let mut max_d = 0.0_f64;
    for k in start..=end {
        let i = (k - start) as usize;
        let l = pair(&rows[i + 1], &(op(k) * fam.ones(k)));
        check_lambda(op(k), k, l, opts)?;
        let (e, d) = residuals(op(k), l, &hs[i], &hs[i + 1], &rows[i], &rows[i + 1]);
        max_e = max_e.max(e);
        max_d = max_d.max(d);
        lambda.push(l);
    }
    let worst = max_e.max(max_d);
    if !(worst <= opts.tol) {
        return Err(Error::NotConverged { residual: worst, tol: opts.tol, horizon: opts.horizon });
    }
    hs.truncate(len + 1);
    rows.truncate(len + 1);
    Ok(TripletFamily {
        start,
        z,
        lambda,
        h: hs,
        nu: rows,
        max_residual_eigen: max_e,
        max_residual_dual: max_d,
        horizon: opts.horizon,
    })
}

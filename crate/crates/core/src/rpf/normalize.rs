//! The normalized family `(λ̃_j, h̃_j, ν̃_j)`, obtained by conjugating with the
//! z = 0 triplet:
//!
//! ```text
//! a_j(z) = ν_j^{(z)}(h_j^{(0)})
//! λ̃_j(z) = a_j(z) λ_j(z) / (a_{j+1}(z) λ_j(0))
//! h̃_j = a_j h_j^{(z)} / h_j^{(0)},   ν̃_j = a_j^{-1} h_j^{(0)} ν_j^{(z)}
//! L̃_z^{(j)} g = L_z^{(j)}(g h_j^{(0)}) / (λ_j(0) h_{j+1}^{(0)})
//! ```

use crate::error::{Error, Result};
use crate::linalg::{c, pair, CMatrix, CVector, C64, ZERO};
use crate::rpf::triplet::TripletFamily;
use crate::systems::sft::SftSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedFamily {
    pub start: i64,
    pub z: C64,
    pub a: Vec<C64>,
    /// One fewer entry than `a`: `λ̃_j` needs `a_{j+1}`.
    pub tilde_lambda: Vec<C64>,
    pub tilde_h: Vec<CVector>,
    pub tilde_nu: Vec<CVector>,
}

/// Builds the normalized family from triplets at `z` and at 0 on the same range.
/// `a_floor` is the lower bound on `|a_j(z)|`.
pub fn normalize_family(at_z: &TripletFamily, at_0: &TripletFamily, a_floor: f64) -> Result<NormalizedFamily> {
    if at_z.start != at_0.start || at_z.len() != at_0.len() {
        return Err(Error::DimensionMismatch("triplet families cover different ranges".into()));
    }
    let n = at_z.lambda.len();
    let mut a = Vec::with_capacity(n);
    let mut tilde_h = Vec::with_capacity(n);
    let mut tilde_nu = Vec::with_capacity(n);
    for i in 0..n {
        let h0 = &at_0.h[i];
        let aj = pair(&at_z.nu[i], h0);
        if aj.norm() < a_floor {
            return Err(Error::PreconditionFailed(format!(
                "|a_j(z)| = {:.3e} below {a_floor:.3e} at index {}",
                aj.norm(),
                at_z.start + i as i64
            )));
        }
        a.push(aj);
        tilde_h.push(at_z.h[i].zip_map(h0, |hz, h| aj * hz / h));
        tilde_nu.push(at_z.nu[i].zip_map(h0, |nz, h| nz * h / aj));
    }
    let tilde_lambda = (0..n - 1)
        .map(|i| a[i] * at_z.lambda[i] / (a[i + 1] * at_0.lambda[i]))
        .collect();
    Ok(NormalizedFamily { start: at_z.start, z: at_z.z, a, tilde_lambda, tilde_h, tilde_nu })
}

/// Matrix of `L̃_z^{(j)}`: entry `(b, a) = A_j(a,b) e^{f_j(a) + z u_j(a)} h_j(a) / (λ_j h_{j+1}(b))`,
/// with `h`, `λ` from the z = 0 family. At z = 0 every row sums to 1.
pub fn tilde_operator(spec: &SftSpec, base: &TripletFamily, j: i64, z: C64) -> CMatrix {
    let t = spec.a(j);
    let h = base.h(j);
    let hn = base.h(j + 1);
    let lam = base.lambda(j);
    let f = spec.f(j);
    let u = spec.u(j);
    CMatrix::from_fn(t.cols, t.rows, |b, a| {
        if t.get(a, b) {
            (c(f[a], 0.0) + z * u[a]).exp() * h[a] / (lam * hn[b])
        } else {
            ZERO
        }
    })
}

/// Real version of [`tilde_operator`] at z = 0 as row-major `Vec<Vec<f64>>`
/// indexed `[b][a]`.
pub fn tilde_operator_real(spec: &SftSpec, base: &TripletFamily, j: i64) -> Vec<Vec<f64>> {
    let m = tilde_operator(spec, base, j, ZERO);
    (0..m.nrows()).map(|b| (0..m.ncols()).map(|a| m[(b, a)].re).collect()).collect()
}

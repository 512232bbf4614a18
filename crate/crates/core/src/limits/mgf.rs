//! Moment generating function `μ_j(e^{z S_{j,n} u})` through the normalized
//! operators: `μ_j(e^{zS}) = μ_{j+n}(L̃_z^{j,n} 1)` with
//! `L̃_z g = L̃_0(e^{zu} g)`.

use nalgebra::DVector;

use crate::gibbs::GibbsFamily;
use crate::linalg::{c, C64, ZERO};

/// `(ln |μ_j(e^{zS})|, arg)` with the modulus tracked in log scale, so that
/// large `n` and real `z` do not overflow. The argument is principal.
pub fn log_mgf(g: &GibbsFamily, j: i64, n: usize, z: C64) -> C64 {
    if z == ZERO {
        return ZERO;
    }
    let mut v = DVector::from_element(g.marginal(j).len(), c(1.0, 0.0));
    let mut log_scale = 0.0;
    for k in j..j + n as i64 {
        let u = g.spec.u(k);
        for (a, x) in v.iter_mut().enumerate() {
            *x *= (z * u[a]).exp();
        }
        let b = g.backward(k);
        v = DVector::from_fn(b.nrows(), |r, _| (0..b.ncols()).map(|a| v[a] * b[(r, a)]).sum());
        let m = v.iter().fold(0.0_f64, |m, x| m.max(x.norm()));
        if m > 0.0 && !(0.5..2.0).contains(&m) {
            let e = m.log2().floor();
            v.iter_mut().for_each(|x| *x *= (-e).exp2());
            log_scale += e * std::f64::consts::LN_2;
        }
    }
    let total: C64 = g.marginal(j + n as i64).iter().zip(v.iter()).map(|(m, x)| x * *m).sum();
    if total == ZERO {
        return c(f64::NEG_INFINITY, 0.0);
    }
    c(total.norm().ln() + log_scale, total.arg())
}

/// `μ_j(e^{z S_{j,n} u})`.
pub fn exact_mgf(g: &GibbsFamily, j: i64, n: usize, z: C64) -> C64 {
    let l = log_mgf(g, j, n, z);
    if l.re == f64::NEG_INFINITY {
        return ZERO;
    }
    C64::from_polar(l.re.exp(), l.im)
}

/// Same quantity through the forward kernels:
/// `Σ_a m_j(a) e^{z u_j(a)} (P_j (e^{z u_{j+1}} (P_{j+1} ⋯)))(a)`.
pub fn exact_mgf_forward(g: &GibbsFamily, j: i64, n: usize, z: C64) -> C64 {
    if n == 0 {
        return c(1.0, 0.0);
    }
    let last = j + n as i64 - 1;
    let mut v: Vec<C64> = g.spec.u(last).iter().map(|&u| (z * u).exp()).collect();
    for k in (j..last).rev() {
        let p = g.kernel(k);
        let u = g.spec.u(k);
        v = (0..p.nrows())
            .map(|a| (z * u[a]).exp() * (0..p.ncols()).map(|b| v[b] * p[(a, b)]).sum::<C64>())
            .collect();
    }
    g.marginal(j).iter().zip(&v).map(|(m, x)| x * *m).sum()
}

//! Expanding circle maps `x ↦ m_j x mod 1` acting on trigonometric
//! polynomials of degree at most `K` (Fourier-Galerkin truncation).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector, C64, ONE, ZERO};
use crate::systems::operator::{Reference, TransferFamily};
use crate::systems::sft::Extension;

use std::f64::consts::PI;

/// Coefficients are indexed `k + K_pot` for `|k| <= K_pot`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleSpec {
    pub lo: i64,
    pub extension: Extension,
    pub multipliers: Vec<u32>,
    pub potential: Vec<Vec<C64>>,
    pub observable: Vec<Vec<C64>>,
    pub k_pot: usize,
    pub k_cut: usize,
}

impl CircleSpec {
    pub fn new(
        lo: i64,
        extension: Extension,
        multipliers: Vec<u32>,
        potential: Vec<Vec<C64>>,
        observable: Vec<Vec<C64>>,
        k_pot: usize,
        k_cut: usize,
    ) -> Result<Self> {
        let p = multipliers.len();
        if p == 0 {
            return Err(Error::InvalidSpec("window is empty".into()));
        }
        if multipliers.iter().any(|&m| m < 2) {
            return Err(Error::InvalidSpec("multipliers must be at least 2".into()));
        }
        if k_pot > k_cut {
            return Err(Error::InvalidSpec("K_pot must not exceed K".into()));
        }
        if potential.len() != p || observable.len() != p {
            return Err(Error::DimensionMismatch("coefficient list length".into()));
        }
        for v in potential.iter().chain(observable.iter()) {
            if v.len() != 2 * k_pot + 1 {
                return Err(Error::DimensionMismatch("coefficient vector length".into()));
            }
            for k in 0..=k_pot {
                let a = v[k_pot + k];
                let b = v[k_pot - k].conj();
                if (a - b).norm() > 1e-12 * (1.0 + a.norm()) {
                    return Err(Error::InvalidSpec("coefficients are not conjugate-symmetric".into()));
                }
            }
        }
        Ok(CircleSpec { lo, extension, multipliers, potential, observable, k_pot, k_cut })
    }

    pub fn period(&self) -> usize {
        self.multipliers.len()
    }

    pub fn slot(&self, j: i64) -> usize {
        let p = self.period() as i64;
        match self.extension {
            Extension::Periodic => (j - self.lo).rem_euclid(p) as usize,
            Extension::Frozen => (j.clamp(self.lo, self.lo + p - 1) - self.lo) as usize,
        }
    }

    /// Real-valued trigonometric polynomial from coefficients at `x`.
    fn eval(&self, coeffs: &[C64], x: f64) -> f64 {
        let kp = self.k_pot as i64;
        (-kp..=kp)
            .map(|k| coeffs[(k + kp) as usize] * c(0.0, 2.0 * PI * k as f64 * x).exp())
            .sum::<C64>()
            .re
    }

    /// Quadrature grid size used for the weight coefficients at index `j`.
    pub fn grid_size(&self, j: i64) -> usize {
        let m = self.multipliers[self.slot(j)] as usize;
        let need = 4 * (self.k_cut + self.k_pot).max((m + 1) * self.k_cut + self.k_pot);
        need.next_power_of_two()
    }

    /// Fourier coefficients `ŵ(n)` of `w = e^{f + z u}` for `|n| <= nmax`,
    /// by the uniform-grid rule on `grid` points.
    pub fn weight_coefficients(&self, j: i64, z: C64, nmax: usize, grid: usize) -> Vec<C64> {
        let s = self.slot(j);
        let w: Vec<C64> = (0..grid)
            .map(|i| {
                let x = i as f64 / grid as f64;
                (c(self.eval(&self.potential[s], x), 0.0) + z * self.eval(&self.observable[s], x)).exp()
            })
            .collect();
        let nm = nmax as i64;
        (-nm..=nm)
            .map(|n| {
                w.iter()
                    .enumerate()
                    .map(|(i, &wi)| wi * c(0.0, -2.0 * PI * n as f64 * i as f64 / grid as f64).exp())
                    .sum::<C64>()
                    / grid as f64
            })
            .collect()
    }
}

/// Galerkin matrix with aliasing diagnostics.
#[derive(Debug, Clone)]
pub struct CircleOperator {
    pub matrix: CMatrix,
    /// Raised when the weight coefficients near the Nyquist band are not
    /// negligible, i.e. the grid does not resolve the integrand.
    pub aliasing_warning: bool,
}

/// Entry `(k, l) = m ŵ(m k - l)`: the k-th coefficient of `L e_l`.
pub fn build_circle_operator(spec: &CircleSpec, j: i64, z: C64) -> CircleOperator {
    build_circle_operator_with_grid(spec, j, z, spec.grid_size(j))
}

pub fn build_circle_operator_with_grid(spec: &CircleSpec, j: i64, z: C64, grid: usize) -> CircleOperator {
    let m = spec.multipliers[spec.slot(j)] as i64;
    let kc = spec.k_cut as i64;
    let nmax = ((m + 1) * kc) as usize;
    let what = spec.weight_coefficients(j, z, nmax.max(grid / 2 - 1), grid);
    let off = nmax.max(grid / 2 - 1) as i64;
    let dim = (2 * kc + 1) as usize;
    let matrix = CMatrix::from_fn(dim, dim, |r, col| {
        let k = r as i64 - kc;
        let l = col as i64 - kc;
        what[(m * k - l + off) as usize] * m as f64
    });
    let peak = what.iter().fold(0.0_f64, |a, v| a.max(v.norm()));
    let band = (spec.k_pot as i64).max(1);
    let edge = what
        .iter()
        .enumerate()
        .filter(|(i, _)| (*i as i64 - off).abs() >= off - band)
        .fold(0.0_f64, |a, (_, v)| a.max(v.norm()));
    CircleOperator { matrix, aliasing_warning: edge > 1e-12 * peak }
}

impl TransferFamily for CircleSpec {
    fn dim(&self, _j: i64) -> usize {
        2 * self.k_cut + 1
    }

    fn operator(&self, j: i64, z: C64) -> CMatrix {
        build_circle_operator(self, j, z).matrix
    }

    fn ones(&self, j: i64) -> CVector {
        let d = self.dim(j);
        CVector::from_fn(d, |i, _| if i == self.k_cut { ONE } else { ZERO })
    }

    fn reference(&self, j: i64, r: Reference) -> CVector {
        let d = self.dim(j);
        match r {
            Reference::Point => CVector::from_element(d, ONE),
            Reference::Uniform => self.ones(j),
        }
    }

    fn sup_observable(&self) -> f64 {
        self.observable.iter().map(|v| v.iter().map(|x| x.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    fn period(&self) -> Option<usize> {
        (self.extension == Extension::Periodic).then(|| CircleSpec::period(self))
    }

    fn window(&self) -> (i64, i64) {
        (self.lo, self.lo + CircleSpec::period(self) as i64 - 1)
    }
}

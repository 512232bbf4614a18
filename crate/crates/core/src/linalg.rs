//! Small complex matrix helpers and log-scaled products.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.norm()))
}

pub fn max_abs_vec(v: &CVector) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.norm()))
}

/// Max over rows of the sum of absolute entries.
pub fn max_row_sum(m: &CMatrix) -> f64 {
    (0..m.nrows())
        .map(|r| m.row(r).iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn sup_norm(v: &CVector) -> f64 {
    max_abs_vec(v)
}

pub fn l1_norm(v: &CVector) -> f64 {
    v.iter().map(|x| x.norm()).sum()
}

/// Bilinear pairing `Σ a_i b_i` (no conjugation).
pub fn pair(a: &CVector, b: &CVector) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Row vector times matrix: `(w^T M)^T`.
pub fn row_times(w: &CVector, m: &CMatrix) -> CVector {
    m.tr_mul(w)
}

/// Power of two exponent `e` with `2^e <= x < 2^{e+1}`.
fn binary_exponent(x: f64) -> i64 {
    x.log2().floor() as i64
}

fn scale_pow2(m: &mut CMatrix, e: i64) {
    let s = (2.0_f64).powi(-(e as i32));
    m.iter_mut().for_each(|v| *v *= s);
}

/// Rescales a vector by a power of two so its largest entry lies in [1, 2).
/// Returns the removed binary exponent, or `None` for the zero vector.
pub fn normalize_pow2(v: &mut CVector) -> Option<i64> {
    let m = max_abs_vec(v);
    if m == 0.0 || !m.is_finite() {
        return None;
    }
    let e = binary_exponent(m);
    let s = (2.0_f64).powi(-(e as i32));
    v.iter_mut().for_each(|x| *x *= s);
    Some(e)
}

/// A matrix product stored as `matrix · 2^exponent`.
///
/// Scaling is by exact powers of two, so the mantissa carries no rounding
/// beyond that of the multiplications themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledProduct {
    pub matrix: CMatrix,
    pub exponent: i64,
    pub span: (i64, usize),
    /// Set when the product underflowed to the zero matrix.
    pub degenerate: bool,
}

impl ScaledProduct {
    pub fn identity(dim: usize, j: i64) -> Self {
        ScaledProduct {
            matrix: CMatrix::identity(dim, dim),
            exponent: 0,
            span: (j, 0),
            degenerate: false,
        }
    }

    pub fn log_scale(&self) -> f64 {
        self.exponent as f64 * std::f64::consts::LN_2
    }

    /// Left-multiplies by the next factor and restores the scaling invariant.
    pub fn push(&mut self, factor: &CMatrix) {
        self.matrix = factor * &self.matrix;
        self.span.1 += 1;
        self.rescale();
    }

    fn rescale(&mut self) {
        let m = max_abs(&self.matrix);
        if m == 0.0 || !m.is_finite() {
            self.degenerate = true;
            return;
        }
        let e = binary_exponent(m);
        if e != 0 {
            scale_pow2(&mut self.matrix, e);
            self.exponent += e;
        }
    }

    /// Entries multiplied back by the scale. Only meaningful for short spans.
    pub fn unscaled(&self) -> CMatrix {
        let s = self.log_scale().exp();
        self.matrix.map(|v| v * s)
    }
}

/// Relative entrywise distance `max |a-b| / max(max|a|, tiny)`.
pub fn rel_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    let scale = max_abs(a).max(max_abs(b)).max(1e-300);
    max_abs(&(a - b)) / scale
}

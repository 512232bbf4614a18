//! Transfer operators `L_z^{(j)}` restricted to finite invariant subspaces,
//! their compositions and norms.

use serde::{Deserialize, Serialize};

use crate::linalg::{c, max_row_sum, CMatrix, CVector, ScaledProduct, C64, ONE, ZERO};
use crate::systems::sft::{primitivity_check, Extension, SftSpec};

/// Reference functional `θ_j` used to normalize conformal measures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Reference {
    /// Evaluation at symbol 0 (SFT) or at x = 0 (circle).
    #[default]
    Point,
    /// Uniform average over symbols (SFT) or Lebesgue mean (circle).
    Uniform,
}

/// A sequence of transfer operators on finite-dimensional subspaces.
///
/// `operator(j, z)` maps the space at `j` to the space at `j + 1`, so it has
/// shape `dim(j + 1) × dim(j)`.
pub trait TransferFamily: Sync {
    fn dim(&self, j: i64) -> usize;
    fn operator(&self, j: i64, z: C64) -> CMatrix;
    /// Coordinates of the constant function 1.
    fn ones(&self, j: i64) -> CVector;
    /// Coordinates of `θ_j` as a covector.
    fn reference(&self, j: i64, r: Reference) -> CVector;
    /// Whether the covering condition holds at `j`.
    fn covering_ok(&self, _j: i64) -> bool {
        true
    }
    fn sup_observable(&self) -> f64;
    /// `Some(p)` when `operator(j + p, z) == operator(j, z)` for all `j`.
    fn period(&self) -> Option<usize>;
    fn window(&self) -> (i64, i64);
}

/// Entry `(b, a) = A_j(a, b) e^{f_j(a) + z u_j(a)}`.
pub fn build_sft_operator(spec: &SftSpec, j: i64, z: C64) -> CMatrix {
    let t = spec.a(j);
    let f = spec.f(j);
    let u = spec.u(j);
    let w: Vec<C64> = f.iter().zip(u).map(|(&fa, &ua)| (c(fa, 0.0) + z * ua).exp()).collect();
    CMatrix::from_fn(t.cols, t.rows, |b, a| if t.get(a, b) { w[a] } else { ZERO })
}

impl TransferFamily for SftSpec {
    fn dim(&self, j: i64) -> usize {
        self.d(j)
    }

    fn operator(&self, j: i64, z: C64) -> CMatrix {
        build_sft_operator(self, j, z)
    }

    fn ones(&self, j: i64) -> CVector {
        CVector::from_element(self.d(j), ONE)
    }

    fn reference(&self, j: i64, r: Reference) -> CVector {
        let d = self.d(j);
        match r {
            Reference::Point => CVector::from_fn(d, |i, _| if i == 0 { ONE } else { ZERO }),
            Reference::Uniform => CVector::from_element(d, c(1.0 / d as f64, 0.0)),
        }
    }

    fn covering_ok(&self, j: i64) -> bool {
        primitivity_check(self, j, self.n0)
    }

    fn sup_observable(&self) -> f64 {
        SftSpec::sup_observable(self)
    }

    fn period(&self) -> Option<usize> {
        (self.extension == Extension::Periodic).then(|| SftSpec::period(self))
    }

    fn window(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }
}

/// `L_z^{j,n} = L^{(j+n-1)} ∘ ... ∘ L^{(j)}` as a scaled product.
pub fn compose_scaled<F: TransferFamily + ?Sized>(fam: &F, j: i64, n: usize, z: C64) -> ScaledProduct {
    let mut p = ScaledProduct::identity(fam.dim(j), j);
    for k in 0..n {
        p.push(&fam.operator(j + k as i64, z));
    }
    p
}

/// `e^{log_scale} · max_b Σ_a |entry(b, a)|`.
pub fn weak_norm(p: &ScaledProduct) -> f64 {
    max_row_sum(&p.matrix) * p.log_scale().exp()
}

/// `ln` of [`weak_norm`], safe for long spans.
pub fn log_weak_norm(p: &ScaledProduct) -> f64 {
    max_row_sum(&p.matrix).ln() + p.log_scale()
}

/// Trust radius `0.5 / (1 + sup |u|)` for the analytic parameter.
pub fn trust_radius<F: TransferFamily + ?Sized>(fam: &F) -> f64 {
    0.5 / (1.0 + fam.sup_observable())
}

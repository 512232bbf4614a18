//! Non-stationary subshifts of finite type on a finite window of time indices.
//!
//! Data outside `[lo, hi]` is resolved by the [`Extension`] convention.
//! Potentials and observables of memory `k` are stored per index as vectors
//! over k-words encoded in mixed radix (`a_j + d_j a_{j+1} + ...`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Extension {
    #[default]
    Periodic,
    Frozen,
}

/// Dense 0/1 matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u8>,
}

impl Transition {
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::InvalidSpec("empty transition matrix".into()));
        }
        let c = rows[0].len();
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::InvalidSpec("ragged transition matrix".into()));
            }
            for &v in row {
                if v > 1 {
                    return Err(Error::InvalidSpec("transition entries must be 0 or 1".into()));
                }
                data.push(v);
            }
        }
        Ok(Transition { rows: r, cols: c, data })
    }

    pub fn full(rows: usize, cols: usize) -> Self {
        Transition { rows, cols, data: vec![1; rows * cols] }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> bool {
        self.data[a * self.cols + b] == 1
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        self.data.chunks(self.cols).map(|r| r.to_vec()).collect()
    }

    pub fn ones(&self) -> usize {
        self.data.iter().filter(|&&v| v == 1).count()
    }

    /// Boolean product.
    pub fn bool_mul(&self, other: &Transition) -> Transition {
        let mut data = vec![0u8; self.rows * other.cols];
        for a in 0..self.rows {
            for m in 0..self.cols {
                if !self.get(a, m) {
                    continue;
                }
                for b in 0..other.cols {
                    if other.get(m, b) {
                        data[a * other.cols + b] = 1;
                    }
                }
            }
        }
        Transition { rows: self.rows, cols: other.cols, data }
    }
}

/// A memory-`k` non-stationary SFT with potentials and observables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SftSpec {
    pub lo: i64,
    pub hi: i64,
    pub extension: Extension,
    pub alphabet: Vec<usize>,
    pub transitions: Vec<Transition>,
    pub potential: Vec<Vec<f64>>,
    pub observable: Vec<Vec<f64>>,
    pub memory: usize,
    /// Primitivity horizon.
    pub n0: usize,
    /// Bound on sup norms of potentials and observables.
    pub bound: f64,
}

impl SftSpec {
    /// Builds and validates a memory-1 spec; `n0` is the smallest
    /// primitivity horizon valid across the window.
    pub fn new(
        lo: i64,
        extension: Extension,
        transitions: Vec<Transition>,
        potential: Vec<Vec<f64>>,
        observable: Vec<Vec<f64>>,
    ) -> Result<Self> {
        Self::with_memory(lo, extension, transitions, potential, observable, 1)
    }

    pub fn with_memory(
        lo: i64,
        extension: Extension,
        transitions: Vec<Transition>,
        potential: Vec<Vec<f64>>,
        observable: Vec<Vec<f64>>,
        memory: usize,
    ) -> Result<Self> {
        let p = transitions.len();
        if p == 0 {
            return Err(Error::InvalidSpec("window is empty".into()));
        }
        if memory == 0 {
            return Err(Error::InvalidSpec("memory must be at least 1".into()));
        }
        let alphabet: Vec<usize> = transitions.iter().map(|t| t.rows).collect();
        let mut spec = SftSpec {
            lo,
            hi: lo + p as i64 - 1,
            extension,
            alphabet,
            transitions,
            potential,
            observable,
            memory,
            n0: 1,
            bound: 0.0,
        };
        spec.validate(true)?;
        Ok(spec)
    }

    /// Like [`SftSpec::new`] but skips the primitivity requirement
    /// (`n0` is left at 0 when no horizon is found). For diagnostics only.
    pub fn new_relaxed(
        lo: i64,
        extension: Extension,
        transitions: Vec<Transition>,
        potential: Vec<Vec<f64>>,
        observable: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let alphabet: Vec<usize> = transitions.iter().map(|t| t.rows).collect();
        let mut spec = SftSpec {
            lo,
            hi: lo + transitions.len() as i64 - 1,
            extension,
            alphabet,
            transitions,
            potential,
            observable,
            memory: 1,
            n0: 0,
            bound: 0.0,
        };
        spec.validate(false)?;
        Ok(spec)
    }

    pub fn period(&self) -> usize {
        self.transitions.len()
    }

    /// Window slot used for time index `j`.
    #[inline]
    pub fn slot(&self, j: i64) -> usize {
        match self.extension {
            Extension::Periodic => (j - self.lo).rem_euclid(self.period() as i64) as usize,
            Extension::Frozen => (j.clamp(self.lo, self.hi) - self.lo) as usize,
        }
    }

    #[inline]
    pub fn d(&self, j: i64) -> usize {
        self.alphabet[self.slot(j)]
    }

    #[inline]
    pub fn a(&self, j: i64) -> &Transition {
        &self.transitions[self.slot(j)]
    }

    #[inline]
    pub fn f(&self, j: i64) -> &[f64] {
        &self.potential[self.slot(j)]
    }

    #[inline]
    pub fn u(&self, j: i64) -> &[f64] {
        &self.observable[self.slot(j)]
    }

    fn word_len(&self, j: i64) -> usize {
        (0..self.memory as i64).map(|i| self.d(j + i)).product()
    }

    fn validate(&mut self, need_primitive: bool) -> Result<()> {
        for j in self.lo - 1..=self.hi + 1 {
            let t = self.a(j);
            if t.cols != self.d(j + 1) {
                return Err(Error::DimensionMismatch(format!(
                    "A_{j} has {} columns but d_{} = {}",
                    t.cols,
                    j + 1,
                    self.d(j + 1)
                )));
            }
        }
        for j in self.lo..=self.hi {
            let t = self.a(j);
            for a in 0..t.rows {
                if !(0..t.cols).any(|b| t.get(a, b)) {
                    return Err(Error::InvalidSpec(format!("A_{j} has a zero row {a}")));
                }
            }
            for b in 0..t.cols {
                if !(0..t.rows).any(|a| t.get(a, b)) {
                    return Err(Error::InvalidSpec(format!("A_{j} has a zero column {b}")));
                }
            }
        }
        let p = self.period();
        if self.potential.len() != p || self.observable.len() != p {
            return Err(Error::DimensionMismatch(
                "potential/observable count differs from window length".into(),
            ));
        }
        let mut bound = 0.0_f64;
        for j in self.lo..=self.hi {
            let need = self.word_len(j);
            let s = self.slot(j);
            if self.potential[s].len() != need || self.observable[s].len() != need {
                return Err(Error::DimensionMismatch(format!(
                    "potential/observable at {j} must have length {need}"
                )));
            }
            for &v in self.potential[s].iter().chain(self.observable[s].iter()) {
                if !v.is_finite() {
                    return Err(Error::InvalidSpec(format!("non-finite value at {j}")));
                }
                bound = bound.max(v.abs());
            }
        }
        self.bound = bound;
        let max_n0 = 4 * self.alphabet.iter().max().copied().unwrap_or(1).pow(2) + p;
        let n0 = (1..=max_n0).find(|&n| (self.lo..=self.hi).all(|j| primitivity_check(self, j, n)));
        match n0 {
            Some(n) => self.n0 = n,
            None if need_primitive => return Err(Error::NonPrimitive { index: self.lo, n0: max_n0 }),
            None => self.n0 = 0,
        }
        Ok(())
    }

    /// Returns a copy with modified potentials/observables (same transitions).
    pub fn with_functions(&self, potential: Vec<Vec<f64>>, observable: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_memory(
            self.lo,
            self.extension,
            self.transitions.clone(),
            potential,
            observable,
            self.memory,
        )
    }

    /// Copy with observables centered by `shift[slot]`.
    pub fn shifted_observable(&self, shift: &[f64]) -> Result<Self> {
        let obs = self
            .observable
            .iter()
            .zip(shift)
            .map(|(u, s)| u.iter().map(|v| v - s).collect())
            .collect();
        self.with_functions(self.potential.clone(), obs)
    }

    /// Whether the finite word `w` starting at `j` is admissible.
    pub fn admissible(&self, j: i64, w: &[usize]) -> bool {
        w.iter().enumerate().all(|(i, &a)| a < self.d(j + i as i64))
            && w.windows(2)
                .enumerate()
                .all(|(i, p)| self.a(j + i as i64).get(p[0], p[1]))
    }

    /// All admissible words of length `len` starting at `j`.
    pub fn words(&self, j: i64, len: usize) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = (0..self.d(j)).map(|a| vec![a]).collect();
        for i in 1..len {
            let k = j + i as i64 - 1;
            let t = self.a(k);
            out = out
                .into_iter()
                .flat_map(|w| {
                    let last = *w.last().unwrap();
                    (0..t.cols).filter(move |&b| t.get(last, b)).map(move |b| {
                        let mut v = w.clone();
                        v.push(b);
                        v
                    })
                })
                .collect();
        }
        if len == 0 {
            return vec![vec![]];
        }
        out
    }

    /// Largest |u| over the window, used for the trust radius.
    pub fn sup_observable(&self) -> f64 {
        self.observable.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Lattice span `h` such that every observable value is in `hZ`.
    pub fn lattice_span(&self) -> Option<f64> {
        lattice_span(self.observable.iter().flatten().copied())
    }
}

/// Positivity of `A_j ... A_{j+n0-1}`.
pub fn primitivity_check(spec: &SftSpec, j: i64, n0: usize) -> bool {
    if n0 == 0 {
        return false;
    }
    let mut prod = spec.a(j).clone();
    for i in 1..n0 {
        prod = prod.bool_mul(spec.a(j + i as i64));
    }
    prod.data.iter().all(|&v| v == 1)
}

/// Common span of a set of reals via rational reconstruction of ratios.
/// Returns `None` when no span exists at tolerance 1e-9.
pub fn lattice_span(values: impl Iterator<Item = f64>) -> Option<f64> {
    let vals: Vec<f64> = values.filter(|v| v.abs() > 1e-12).collect();
    if vals.is_empty() {
        return Some(1.0);
    }
    let base = vals.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    // Each value is base * p/q; the span is base / lcm(q) * gcd(p).
    let mut qs = Vec::new();
    let mut ps = Vec::new();
    for v in &vals {
        let (p, q) = rational_approx(v.abs() / base, 1e-9, 10_000)?;
        ps.push(p);
        qs.push(q);
    }
    let l = qs.iter().try_fold(1_i64, |a, &b| lcm(a, b))?;
    let g = ps
        .iter()
        .zip(&qs)
        .map(|(&p, &q)| p.checked_mul(l / q))
        .try_fold(0_i64, |a, b| Some(gcd(a, b?)))?;
    let h = base * g as f64 / l as f64;
    let ok = vals.iter().all(|v| {
        let r = v / h;
        (r - r.round()).abs() <= 1e-9 * r.abs().max(1.0)
    });
    ok.then_some(h)
}

fn rational_approx(x: f64, tol: f64, max_den: i64) -> Option<(i64, i64)> {
    // Continued fraction convergents.
    let (mut h0, mut h1) = (0_i64, 1_i64);
    let (mut k0, mut k1) = (1_i64, 0_i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        let ai = a as i64;
        let h2 = ai.checked_mul(h1)?.checked_add(h0)?;
        let k2 = ai.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            return None;
        }
        if (h2 as f64 / k2 as f64 - x).abs() <= tol * x.max(1.0) {
            return Some((h2, k2));
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = r - a;
        if frac.abs() < 1e-15 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

fn lcm(a: i64, b: i64) -> Option<i64> {
    (a / gcd(a, b)).checked_mul(b)
}

/// Recodes a memory-`k` spec onto the alphabet of admissible k-words.
///
/// The symbol at index `j` of the result is the word `(x_j, ..., x_{j+k-1})`,
/// listed in the order produced by [`SftSpec::words`].
pub fn recode_to_memory_one(spec: &SftSpec) -> Result<(SftSpec, Vec<Vec<Vec<usize>>>)> {
    let k = spec.memory;
    let p = spec.period();
    let words: Vec<Vec<Vec<usize>>> = (0..p)
        .map(|s| spec.words(spec.lo + s as i64, k))
        .collect();
    if k == 1 {
        return Ok((spec.clone(), words));
    }
    if words.iter().any(|w| w.is_empty()) {
        return Err(Error::InvalidSpec("empty admissible word set".into()));
    }
    let code = |j: i64, w: &[usize]| -> usize {
        let mut idx = 0;
        let mut radix = 1;
        for (i, &a) in w.iter().enumerate() {
            idx += a * radix;
            radix *= spec.d(j + i as i64);
        }
        idx
    };
    // Word lists must be resolvable at j = hi + 1 under the extension rule.
    let words_at = |j: i64| -> &Vec<Vec<usize>> { &words[spec.slot(j)] };
    let mut transitions = Vec::with_capacity(p);
    let mut potential = Vec::with_capacity(p);
    let mut observable = Vec::with_capacity(p);
    for s in 0..p {
        let j = spec.lo + s as i64;
        let here = words_at(j);
        let next = words_at(j + 1);
        let mut data = vec![0u8; here.len() * next.len()];
        for (ia, wa) in here.iter().enumerate() {
            for (ib, wb) in next.iter().enumerate() {
                let overlap = wa[1..] == wb[..k - 1];
                if overlap && spec.a(j + k as i64 - 1).get(wa[k - 1], wb[k - 1]) {
                    data[ia * next.len() + ib] = 1;
                }
            }
        }
        transitions.push(Transition { rows: here.len(), cols: next.len(), data });
        potential.push(here.iter().map(|w| spec.f(j)[code(j, w)]).collect());
        observable.push(here.iter().map(|w| spec.u(j)[code(j, w)]).collect());
    }
    let out = SftSpec::new(spec.lo, spec.extension, transitions, potential, observable)?;
    Ok((out, words))
}

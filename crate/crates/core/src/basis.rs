//! Multi-indices, the natural quadratic basis and quadratic polynomials
//! expressed in it.
//!
//! The basis ordering is fixed crate-wide:
//!
//! ```text
//! 1, y_1, ..., y_n, ½y_1², y_1 y_2, ..., y_1 y_n, ½y_2², y_2 y_3, ..., ½y_n²
//! ```
//!
//! i.e. the constant, the linear terms in coordinate order, then the quadratic
//! terms in row-major upper-triangle order. [`vec_upper`] enumerates symmetric
//! matrices in the same order, so that the coefficient vector of
//! `c + gᵀs + ½sᵀHs` is exactly `[c, g, vec_upper(H)]`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of quadratic monomials in `n` variables, `n(n+1)/2`.
pub fn quad_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Dimension of the space of quadratics in `n` variables, i.e. `q + 1`.
pub fn basis_len(n: usize) -> usize {
    (n + 1) * (n + 2) / 2
}

/// Position of the `(i, j)` entry (`i <= j`) in the upper-triangle enumeration.
#[inline]
pub fn upper_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < n);
    // rows 0..i contribute n, n-1, ..., n-i+1 entries
    i * n - i * (i.saturating_sub(1)) / 2 + (j - i)
}

/// A partial-derivative multi-index `α`, stored densely.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u8>);

/// Shape of a multi-index of total order at most two.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Zero,
    /// `∂/∂x_k`
    First(usize),
    /// `∂²/∂x_k∂x_l` with `k <= l`.
    Second(usize, usize),
}

impl MultiIndex {
    pub fn new(entries: Vec<u8>) -> Self {
        Self(entries)
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn first(n: usize, k: usize) -> Self {
        let mut e = vec![0; n];
        e[k] = 1;
        Self(e)
    }

    pub fn second(n: usize, k: usize, l: usize) -> Self {
        let mut e = vec![0; n];
        e[k] += 1;
        e[l] += 1;
        Self(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u8] {
        &self.0
    }

    /// Total order of differentiation `|α| = Σ α_j`.
    pub fn total_order(&self) -> usize {
        self.0.iter().map(|&a| a as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// Classifies the index. Panics if `|α| > 2`.
    pub fn order(&self) -> Order {
        let mut first = None;
        let mut second = None;
        for (k, &a) in self.0.iter().enumerate() {
            match a {
                0 => {}
                1 if first.is_none() => first = Some(k),
                1 if second.is_none() => second = Some(k),
                2 if first.is_none() => {
                    first = Some(k);
                    second = Some(k);
                }
                _ => panic!("multi-index {self:?} has total order above two"),
            }
        }
        match (first, second) {
            (None, _) => Order::Zero,
            (Some(k), None) => Order::First(k),
            (Some(k), Some(l)) => Order::Second(k, l),
        }
    }

    /// Componentwise `self <= other`.
    pub fn le_componentwise(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Ordering used for deterministic tie-breaking: smaller total order
    /// first, then lexicographically smaller entries.
    pub fn cmp_priority(&self, other: &MultiIndex) -> Ordering {
        self.total_order()
            .cmp(&other.total_order())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "]")
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_priority(other)
    }
}

/// The set `A` of multi-indices the oracle can serve. Always contains zero;
/// iteration order is by increasing total order, then lexicographic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvailableSet {
    n: usize,
    indices: Vec<MultiIndex>,
}

impl AvailableSet {
    pub fn new(n: usize, indices: impl IntoIterator<Item = MultiIndex>) -> Result<Self> {
        let mut set: BTreeSet<MultiIndex> = indices.into_iter().collect();
        set.insert(MultiIndex::zero(n));
        for alpha in &set {
            if alpha.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: alpha.dim(),
                });
            }
            if alpha.total_order() > 2 {
                return Err(Error::InvalidMultiIndex(alpha.to_string()));
            }
        }
        Ok(Self {
            n,
            indices: set.into_iter().collect(),
        })
    }

    /// Function values only.
    pub fn lagrange(n: usize) -> Self {
        Self {
            n,
            indices: vec![MultiIndex::zero(n)],
        }
    }

    /// Every multi-index of order at most two.
    pub fn full(n: usize) -> Self {
        Self::from_known(n, &(0..n).collect::<Vec<_>>())
    }

    /// All `α` with `|α| <= 2` supported on the coordinates in `known`
    /// (zero-based).
    pub fn from_known(n: usize, known: &[usize]) -> Self {
        let mut indices = vec![MultiIndex::zero(n)];
        for &k in known {
            indices.push(MultiIndex::first(n, k));
        }
        for (a, &k) in known.iter().enumerate() {
            for &l in &known[a..] {
                indices.push(MultiIndex::second(n, k.min(l), k.max(l)));
            }
        }
        indices.sort();
        indices.dedup();
        Self { n, indices }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, alpha: &MultiIndex) -> bool {
        self.indices.binary_search(alpha).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex> {
        self.indices.iter()
    }
}

/// Evaluates every natural basis function at `y`.
pub fn phi_vector(y: &DVector<f64>) -> DVector<f64> {
    phi_derivative_vector(&MultiIndex::zero(y.len()), y)
}

/// `∂^α φ_j(y)` for every basis function `φ_j`.
pub fn phi_derivative_vector(alpha: &MultiIndex, y: &DVector<f64>) -> DVector<f64> {
    let n = y.len();
    let mut out = DVector::zeros(basis_len(n));
    match alpha.order() {
        Order::Zero => {
            out[0] = 1.0;
            for k in 0..n {
                out[1 + k] = y[k];
            }
            let mut idx = 1 + n;
            for i in 0..n {
                out[idx] = 0.5 * y[i] * y[i];
                idx += 1;
                for j in i + 1..n {
                    out[idx] = y[i] * y[j];
                    idx += 1;
                }
            }
        }
        Order::First(k) => {
            out[1 + k] = 1.0;
            // ∂_k of ½y_k² is y_k, of y_i y_k is y_i.
            for i in 0..n {
                let (a, b) = if i <= k { (i, k) } else { (k, i) };
                out[1 + n + upper_index(n, a, b)] = y[i];
            }
        }
        Order::Second(k, l) => {
            out[1 + n + upper_index(n, k, l)] = 1.0;
        }
    }
    out
}

/// Upper triangle of a symmetric matrix, row-major.
pub fn vec_upper(h: &DMatrix<f64>) -> DVector<f64> {
    let n = h.nrows();
    let mut out = DVector::zeros(quad_len(n));
    let mut idx = 0;
    for i in 0..n {
        for j in i..n {
            out[idx] = h[(i, j)];
            idx += 1;
        }
    }
    out
}

/// Inverse of [`vec_upper`].
pub fn unvec_upper(n: usize, v: &[f64]) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(n, n);
    let mut idx = 0;
    for i in 0..n {
        for j in i..n {
            h[(i, j)] = v[idx];
            h[(j, i)] = v[idx];
            idx += 1;
        }
    }
    h
}

/// `vec_upper(W(x, z))` with `W_ii = x_i z_i`, `W_ij = x_i z_j + x_j z_i`,
/// so that `w_pair(x, z) · vec_upper(B) = xᵀ B z` for symmetric `B`.
pub fn w_pair(x: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
    let n = x.len();
    let mut out = DVector::zeros(quad_len(n));
    let mut idx = 0;
    for i in 0..n {
        out[idx] = x[i] * z[i];
        idx += 1;
        for j in i + 1..n {
            out[idx] = x[i] * z[j] + x[j] * z[i];
            idx += 1;
        }
    }
    out
}

/// A quadratic `c + gᵀy + ½yᵀHy`, stored as its coefficient vector in the
/// natural basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    n: usize,
    coeffs: DVector<f64>,
}

impl Quadratic {
    pub fn from_coeffs(n: usize, coeffs: DVector<f64>) -> Self {
        assert_eq!(coeffs.len(), basis_len(n), "coefficient length");
        Self { n, coeffs }
    }

    pub fn from_parts(c: f64, g: &DVector<f64>, h: &DMatrix<f64>) -> Self {
        let n = g.len();
        let mut coeffs = DVector::zeros(basis_len(n));
        coeffs[0] = c;
        coeffs.rows_mut(1, n).copy_from(g);
        coeffs.rows_mut(1 + n, quad_len(n)).copy_from(&vec_upper(h));
        Self { n, coeffs }
    }

    /// The `j`-th natural basis function.
    pub fn basis_function(n: usize, j: usize) -> Self {
        let mut coeffs = DVector::zeros(basis_len(n));
        coeffs[j] = 1.0;
        Self { n, coeffs }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            coeffs: DVector::zeros(basis_len(n)),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.coeffs
    }

    pub fn constant(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn linear(&self) -> DVector<f64> {
        self.coeffs.rows(1, self.n).into_owned()
    }

    pub fn hessian(&self) -> DMatrix<f64> {
        unvec_upper(
            self.n,
            self.coeffs.rows(1 + self.n, quad_len(self.n)).as_slice(),
        )
    }

    /// `H_kl` read straight from the coefficient vector.
    #[inline]
    pub fn hess_entry(&self, k: usize, l: usize) -> f64 {
        let (a, b) = if k <= l { (k, l) } else { (l, k) };
        self.coeffs[1 + self.n + upper_index(self.n, a, b)]
    }

    pub fn eval(&self, y: &DVector<f64>) -> f64 {
        self.derivative(&MultiIndex::zero(self.n), y)
    }

    pub fn gradient(&self, y: &DVector<f64>) -> DVector<f64> {
        self.linear() + self.hessian() * y
    }

    /// `∂^α p(y)` without forming basis vectors.
    pub fn derivative(&self, alpha: &MultiIndex, y: &DVector<f64>) -> f64 {
        let n = self.n;
        let c = &self.coeffs;
        match alpha.order() {
            Order::Zero => {
                let mut v = c[0];
                for k in 0..n {
                    v += c[1 + k] * y[k];
                }
                let mut idx = 1 + n;
                for i in 0..n {
                    v += 0.5 * c[idx] * y[i] * y[i];
                    idx += 1;
                    for j in i + 1..n {
                        v += c[idx] * y[i] * y[j];
                        idx += 1;
                    }
                }
                v
            }
            Order::First(k) => {
                let mut v = c[1 + k];
                for i in 0..n {
                    v += self.hess_entry(k, i) * y[i];
                }
                v
            }
            Order::Second(k, l) => self.hess_entry(k, l),
        }
    }

    /// `self - factor * other`
    pub fn axpy(&mut self, factor: f64, other: &Quadratic) {
        self.coeffs.axpy(-factor, &other.coeffs, 1.0);
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&v| v == 0.0)
    }
}

//! Interpolation conditions and quadratic models.

use nalgebra::{DMatrix, DVector};

use crate::basis::{basis_len, quad_len, unvec_upper, MultiIndex, Quadratic};
use crate::error::{Error, Result};

/// One interpolation condition `∂^α m(y) = ∂^α f(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Datum {
    pub point: DVector<f64>,
    pub index: MultiIndex,
}

impl Datum {
    pub fn new(point: DVector<f64>, index: MultiIndex) -> Self {
        debug_assert_eq!(point.len(), index.dim());
        Self { point, index }
    }

    pub fn value(point: DVector<f64>) -> Self {
        let n = point.len();
        Self::new(point, MultiIndex::zero(n))
    }

    /// Exact identity: bitwise-equal coordinates and equal multi-index.
    pub fn same_as(&self, other: &Datum) -> bool {
        self.index == other.index && same_point(&self.point, &other.point)
    }
}

pub fn same_point(a: &DVector<f64>, b: &DVector<f64>) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b.iter())
            .all(|(x, y)| x.to_bits() == y.to_bits())
}

/// Ordered interpolation data whose first item is the center `(y⁰, 0)`.
/// Duplicates are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    items: Vec<Datum>,
}

impl DataSet {
    pub fn new(items: Vec<Datum>) -> Result<Self> {
        let first = items
            .first()
            .ok_or_else(|| Error::Degenerate("empty data set".into()))?;
        if !first.index.is_zero() {
            return Err(Error::Degenerate(
                "first datum must be a function value at the center".into(),
            ));
        }
        let n = first.point.len();
        for d in &items {
            if d.point.len() != n || d.index.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: d.point.len(),
                });
            }
            if d.point.iter().any(|v| !v.is_finite()) {
                return Err(Error::Degenerate("non-finite point".into()));
            }
        }
        Ok(Self { items })
    }

    pub fn dim(&self) -> usize {
        self.items[0].point.len()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.items[0].point
    }

    pub fn items(&self) -> &[Datum] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn into_items(self) -> Vec<Datum> {
        self.items
    }

    /// `true` when there are exactly `q + 1` conditions.
    pub fn is_square(&self) -> bool {
        self.items.len() == basis_len(self.dim())
    }
}

/// `m(y⁰ + s) = c + gᵀs + ½sᵀHs`, with `H` kept as its upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel {
    pub center: DVector<f64>,
    poly: Quadratic,
}

impl QuadraticModel {
    pub fn new(center: DVector<f64>, poly: Quadratic) -> Self {
        assert_eq!(center.len(), poly.dim());
        Self { center, poly }
    }

    pub fn from_parts(center: DVector<f64>, c: f64, g: DVector<f64>, h: &DMatrix<f64>) -> Self {
        let poly = Quadratic::from_parts(c, &g, h);
        Self { center, poly }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn c(&self) -> f64 {
        self.poly.constant()
    }

    pub fn g(&self) -> DVector<f64> {
        self.poly.linear()
    }

    pub fn h(&self) -> DMatrix<f64> {
        self.poly.hessian()
    }

    pub fn hess_upper(&self) -> &[f64] {
        let n = self.dim();
        &self.poly.coeffs().as_slice()[1 + n..1 + n + quad_len(n)]
    }

    /// `[c, g, vec_upper(H)]`
    pub fn coeffs(&self) -> &DVector<f64> {
        self.poly.coeffs()
    }

    pub fn poly(&self) -> &Quadratic {
        &self.poly
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        self.poly.eval(&(x - &self.center))
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.poly.gradient(&(x - &self.center))
    }

    pub fn derivative(&self, alpha: &MultiIndex, x: &DVector<f64>) -> f64 {
        self.poly.derivative(alpha, &(x - &self.center))
    }

    /// Rebuilds the symmetric Hessian from the stored triangle.
    pub fn hessian_matrix(&self) -> DMatrix<f64> {
        unvec_upper(self.dim(), self.hess_upper())
    }
}

//! Birkhoff interpolation systems: assembly, normalization, solution, and
//! the Birkhoff interpolation polynomials.

use nalgebra::{DMatrix, DVector};

use crate::basis::{basis_len, phi_derivative_vector, Quadratic};
use crate::data::{DataSet, Datum, QuadraticModel};
use crate::error::{Error, Result};
use crate::linalg;

/// Systems whose reciprocal condition estimate falls below this are treated
/// as not poised.
pub const POISED_RCOND: f64 = 1e-12;

/// `Δ(Y)`: largest distance from the center to any datum point.
pub fn radius(data: &DataSet) -> f64 {
    radius_of(data.center(), data.items())
}

pub fn radius_of(center: &DVector<f64>, items: &[Datum]) -> f64 {
    items
        .iter()
        .map(|d| (&d.point - center).norm())
        .fold(0.0, f64::max)
}

/// `‖y - c‖ <= r` up to the rounding incurred by forming `y = c + s`.
pub fn in_ball(y: &DVector<f64>, center: &DVector<f64>, radius: f64) -> bool {
    (y - center).norm() <= radius + 1e-12 * (center.norm() + radius)
}

/// The scale actually used for normalization: `Δ(Y)`, or 1 when every point
/// coincides with the center.
pub fn normalization_scale(data: &DataSet) -> f64 {
    let r = radius(data);
    if r > 0.0 {
        r
    } else {
        1.0
    }
}

/// `M̂` together with the scale and center that produced it.
#[derive(Debug, Clone)]
pub struct NormalizedSystem {
    pub mhat: DMatrix<f64>,
    pub scale: f64,
    pub center: DVector<f64>,
}

impl NormalizedSystem {
    /// Normalized right-hand side `Δ(Y)^{|αⁱ|} rhsᵢ`.
    pub fn scale_rhs(&self, data: &DataSet, rhs: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            rhs.len(),
            data.items()
                .iter()
                .zip(rhs.iter())
                .map(|(d, v)| self.scale.powi(d.index.total_order() as i32) * v),
        )
    }

    /// Maps normalized coefficients `[c, Δĝ, Δ²Ĥ]` back to a model.
    pub fn unscale(&self, normalized: &DVector<f64>) -> QuadraticModel {
        let n = self.center.len();
        let mut coeffs = normalized.clone();
        for j in 1..coeffs.len() {
            coeffs[j] /= if j <= n {
                self.scale
            } else {
                self.scale * self.scale
            };
        }
        QuadraticModel::new(self.center.clone(), Quadratic::from_coeffs(n, coeffs))
    }
}

/// Rows `∂^{αⁱ} φ((yⁱ - y⁰)/s)` for an explicit scale `s`. Works for any
/// number of rows.
pub fn normalized_rows(center: &DVector<f64>, items: &[Datum], scale: f64) -> DMatrix<f64> {
    let n = center.len();
    let mut m = DMatrix::zeros(items.len(), basis_len(n));
    for (i, d) in items.iter().enumerate() {
        let yhat = (&d.point - center) / scale;
        m.row_mut(i)
            .copy_from(&phi_derivative_vector(&d.index, &yhat).transpose());
    }
    m
}

pub fn build_normalized(data: &DataSet) -> Result<NormalizedSystem> {
    if !data.is_square() {
        return Err(Error::DimensionMismatch {
            expected: basis_len(data.dim()),
            found: data.len(),
        });
    }
    let scale = normalization_scale(data);
    Ok(NormalizedSystem {
        mhat: normalized_rows(data.center(), data.items(), scale),
        scale,
        center: data.center().clone(),
    })
}

fn poised_solve(sys: &NormalizedSystem, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let sol = linalg::solve_square(&sys.mhat, rhs).map_err(|_| Error::NotPoised { rcond: 0.0 })?;
    if sol.rcond < POISED_RCOND {
        return Err(Error::NotPoised { rcond: sol.rcond });
    }
    Ok(sol.x)
}

/// Solves the normalized system and returns the model in original
/// coordinates.
pub fn solve_model(data: &DataSet, rhs: &DVector<f64>) -> Result<QuadraticModel> {
    let sys = build_normalized(data)?;
    if rhs.len() != data.len() {
        return Err(Error::DimensionMismatch {
            expected: data.len(),
            found: rhs.len(),
        });
    }
    let normalized = poised_solve(&sys, &sys.scale_rhs(data, rhs))?;
    Ok(sys.unscale(&normalized))
}

/// `λᵢ` in the normalized frame: column `i` of `M̂⁻¹`.
#[derive(Debug, Clone)]
pub struct BirkhoffPolynomials {
    pub polys: Vec<Quadratic>,
    pub scale: f64,
    pub center: DVector<f64>,
    pub rcond: f64,
}

pub fn birkhoff_polynomials(data: &DataSet) -> Result<BirkhoffPolynomials> {
    let sys = build_normalized(data)?;
    let (inv, rcond) = linalg::inverse(&sys.mhat).map_err(|_| Error::NotPoised { rcond: 0.0 })?;
    if rcond < POISED_RCOND {
        return Err(Error::NotPoised { rcond });
    }
    let n = data.dim();
    let polys = (0..inv.ncols())
        .map(|i| Quadratic::from_coeffs(n, inv.column(i).into_owned()))
        .collect();
    Ok(BirkhoffPolynomials {
        polys,
        scale: sys.scale,
        center: sys.center,
        rcond,
    })
}

/// `m(x) = Σᵢ Δ(Y)^{|αⁱ|} rhsᵢ λᵢ((x - y⁰)/Δ(Y))`.
pub fn model_from_polynomials(
    data: &DataSet,
    rhs: &DVector<f64>,
    polys: &BirkhoffPolynomials,
) -> Result<QuadraticModel> {
    if polys.polys.len() != data.len() || rhs.len() != data.len() {
        return Err(Error::DimensionMismatch {
            expected: data.len(),
            found: rhs.len(),
        });
    }
    let n = data.dim();
    let mut acc = DVector::zeros(basis_len(n));
    for ((d, v), lam) in data.items().iter().zip(rhs.iter()).zip(&polys.polys) {
        let w = polys.scale.powi(d.index.total_order() as i32) * v;
        acc.axpy(w, lam.coeffs(), 1.0);
    }
    let sys = NormalizedSystem {
        mhat: DMatrix::zeros(0, 0),
        scale: polys.scale,
        center: polys.center.clone(),
    };
    Ok(sys.unscale(&acc))
}

/// Largest residual `|∂^{αⁱ} m(yⁱ) - rhsᵢ|`.
pub fn interpolation_residual(model: &QuadraticModel, data: &DataSet, rhs: &DVector<f64>) -> f64 {
    data.items()
        .iter()
        .zip(rhs.iter())
        .map(|(d, v)| (model.derivative(&d.index, &d.point) - v).abs())
        .fold(0.0, f64::max)
}

//! Geometry measures for Birkhoff interpolation sets: the exact
//! Λ-poisedness constant, `‖M̂⁻¹‖`, determinant certificates, and heatmaps of
//! Λ over candidate completions.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{basis_len, AvailableSet, MultiIndex};
use crate::data::{DataSet, Datum};
use crate::error::{Error, Result};
use crate::interp::{self, BirkhoffPolynomials};
use crate::linalg;

/// `σ∞` of the natural quadratic basis.
pub const SIGMA_INF: f64 = 0.25;

/// `C(n, φ) = (q + 1) / σ∞`.
pub fn converse_constant(n: usize) -> f64 {
    basis_len(n) as f64 / SIGMA_INF
}

/// Where the maximum defining Λ is attained.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaArgmax {
    pub lambda: f64,
    pub polynomial: usize,
    pub alpha: MultiIndex,
    /// Point in original coordinates.
    pub point: DVector<f64>,
}

/// Exact Λ over `B(y⁰, region_radius)` from precomputed polynomials.
pub fn lambda_from_polynomials(
    polys: &BirkhoffPolynomials,
    available: &AvailableSet,
    region_radius: f64,
) -> LambdaArgmax {
    // Λ always normalizes by Δ(Y); the region may be larger than the data.
    let r = region_radius / polys.scale;
    let mut best: Option<LambdaArgmax> = None;
    for (i, lam) in polys.polys.iter().enumerate() {
        let (alpha, ext) = linalg::max_abs_over_available(lam, available, r);
        if best.as_ref().is_none_or(|b| ext.value > b.lambda) {
            best = Some(LambdaArgmax {
                lambda: ext.value,
                polynomial: i,
                alpha,
                point: &polys.center + ext.point * polys.scale,
            });
        }
    }
    best.expect("at least one polynomial")
}

/// `max |∂^α λᵢ((x - y⁰)/Δ(Y))|` over `i`, `α ∈ A` and `x ∈ B(y⁰, region_radius)`.
pub fn lambda_poisedness(
    data: &DataSet,
    available: &AvailableSet,
    region_radius: f64,
) -> Result<f64> {
    let polys = interp::birkhoff_polynomials(data)?;
    Ok(lambda_from_polynomials(&polys, available, region_radius).lambda)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoisednessReport {
    /// Exact Λ; `+∞` when the data are not poised.
    pub lambda: f64,
    /// `‖M̂⁻¹‖₂`; `+∞` when not poised.
    pub inv_norm: f64,
    pub det_abs: f64,
    /// `‖M̂⁻¹‖ <= Λ/√(q+1)`: the norm bound alone already certifies Λ.
    pub certified_by_forward: bool,
    /// `√(q+1)·‖M̂⁻¹‖`, a Λ bound valid on `B(y⁰, Δ(Y))`.
    pub forward_bound: f64,
}

impl PoisednessReport {
    fn not_poised() -> Self {
        Self {
            lambda: f64::INFINITY,
            inv_norm: f64::INFINITY,
            det_abs: 0.0,
            certified_by_forward: false,
            forward_bound: f64::INFINITY,
        }
    }
}

pub fn poisedness_report(
    data: &DataSet,
    available: &AvailableSet,
    region_radius: f64,
) -> Result<PoisednessReport> {
    let sys = interp::build_normalized(data)?;
    let polys = match interp::birkhoff_polynomials(data) {
        Ok(p) => p,
        Err(Error::NotPoised { .. }) => return Ok(PoisednessReport::not_poised()),
        Err(e) => return Err(e),
    };
    let lambda = lambda_from_polynomials(&polys, available, region_radius).lambda;
    let inv_norm = match linalg::spectral_norm_inverse(&sys.mhat) {
        Ok(v) => v,
        Err(_) => return Ok(PoisednessReport::not_poised()),
    };
    let root = (basis_len(data.dim()) as f64).sqrt();
    Ok(PoisednessReport {
        lambda,
        inv_norm,
        det_abs: sys.mhat.determinant().abs(),
        certified_by_forward: inv_norm <= lambda / root * (1.0 + 1e-12),
        forward_bound: root * inv_norm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Poised,
    NotPoised,
    /// Grid point lies outside the region ball.
    Outside,
}

/// Λ sampled on a square grid over a two-dimensional region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapGrid {
    pub center: Vec<f64>,
    pub radius: f64,
    pub resolution: usize,
    /// Cell-center coordinates along each axis.
    pub axis: Vec<f64>,
    /// Row-major: `values[row * resolution + col]` at `(axis[col], axis[row])`
    /// relative to the center. Non-finite for masked cells.
    pub values: Vec<f64>,
    pub status: Vec<CellStatus>,
}

/// Λ of `base ∪ {(x, α) : α ∈ additions}` for every grid point `x` of the
/// region `B(y⁰, radius)`, `y⁰` being the first datum of `base`.
pub fn heatmap_grid(
    base: &[Datum],
    additions: &[MultiIndex],
    available: &AvailableSet,
    radius: f64,
    resolution: usize,
) -> Result<HeatmapGrid> {
    let first = base
        .first()
        .ok_or_else(|| Error::Degenerate("heatmap base data is empty".into()))?;
    let n = first.point.len();
    if n != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: n,
        });
    }
    if base.len() + additions.len() != basis_len(n) {
        return Err(Error::DimensionMismatch {
            expected: basis_len(n),
            found: base.len() + additions.len(),
        });
    }
    if resolution == 0 || !(radius > 0.0) {
        return Err(Error::InvalidParams(
            "heatmap needs resolution >= 1 and radius > 0".into(),
        ));
    }
    let center = first.point.clone();
    let step = 2.0 * radius / resolution as f64;
    let axis: Vec<f64> = (0..resolution)
        .map(|i| -radius + (i as f64 + 0.5) * step)
        .collect();

    let cells: Vec<(f64, CellStatus)> = (0..resolution * resolution)
        .into_par_iter()
        .map(|cell| {
            let (row, col) = (cell / resolution, cell % resolution);
            let offset = DVector::from_vec(vec![axis[col], axis[row]]);
            if offset.norm() > radius * (1.0 + 1e-12) {
                return (f64::INFINITY, CellStatus::Outside);
            }
            let x = &center + offset;
            let mut items = base.to_vec();
            items.extend(additions.iter().map(|a| Datum::new(x.clone(), a.clone())));
            let lam = DataSet::new(items).and_then(|d| lambda_poisedness(&d, available, radius));
            match lam {
                Ok(v) if v.is_finite() => (v, CellStatus::Poised),
                _ => (f64::INFINITY, CellStatus::NotPoised),
            }
        })
        .collect();

    let (values, status) = cells.into_iter().unzip();
    Ok(HeatmapGrid {
        center: center.iter().copied().collect(),
        radius,
        resolution,
        axis,
        values,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn worked() -> DataSet {
        DataSet::new(vec![
            Datum::value(dvector![0.0]),
            Datum::value(dvector![1.0]),
            Datum::new(dvector![1.0], MultiIndex::first(1, 0)),
        ])
        .unwrap()
    }

    fn lagrange_1d() -> DataSet {
        DataSet::new(vec![
            Datum::value(dvector![0.0]),
            Datum::value(dvector![1.0]),
            Datum::value(dvector![-1.0]),
        ])
        .unwrap()
    }

    /// Dense scan of the explicit λᵢ and their derivatives on [-1, 1].
    #[test]
    fn worked_example_lambda_matches_grid_scan() {
        let a = AvailableSet::full(1);
        let lam = lambda_poisedness(&worked(), &a, 1.0).unwrap();
        let mut scan = 0.0f64;
        for k in 0..=20000 {
            let x = -1.0 + k as f64 / 10000.0;
            for v in [
                1.0 - 2.0 * x + x * x,
                -2.0 + 2.0 * x,
                2.0 * x - x * x,
                2.0 - 2.0 * x,
                -x + x * x,
                -1.0 + 2.0 * x,
            ] {
                scan = scan.max(v.abs());
            }
        }
        assert!((scan - 4.0).abs() < 1e-12);
        assert!((lam - 4.0).abs() < 1e-10, "{lam}");
    }

    #[test]
    fn lagrange_lambda_is_one() {
        let lam = lambda_poisedness(&lagrange_1d(), &AvailableSet::lagrange(1), 1.0).unwrap();
        assert!((lam - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lambda_is_scale_invariant() {
        let a = AvailableSet::full(1);
        let scaled = DataSet::new(
            worked()
                .items()
                .iter()
                .map(|d| Datum::new(&d.point * 10.0, d.index.clone()))
                .collect(),
        )
        .unwrap();
        let l1 = lambda_poisedness(&worked(), &a, 1.0).unwrap();
        let l10 = lambda_poisedness(&scaled, &a, 10.0).unwrap();
        assert!((l1 - l10).abs() < 1e-10);
    }

    #[test]
    fn report_worked_example() {
        let r = poisedness_report(&worked(), &AvailableSet::full(1), 1.0).unwrap();
        assert!((r.lambda - 4.0).abs() < 1e-10);
        assert!((r.det_abs - 0.5).abs() < 1e-14);
        assert!(
            (r.inv_norm - 4.583_613_745_677_844).abs() < 1e-10,
            "{}",
            r.inv_norm
        );
        assert!(r.inv_norm <= converse_constant(1) * r.lambda);
        assert!(r.lambda <= r.forward_bound);
    }

    #[test]
    fn report_lagrange_relations_hold() {
        let r = poisedness_report(&lagrange_1d(), &AvailableSet::lagrange(1), 1.0).unwrap();
        assert!(r.lambda <= r.forward_bound * (1.0 + 1e-12));
        assert!(r.inv_norm <= converse_constant(1) * r.lambda);
        let bound = (converse_constant(1) * r.lambda).powi(-3);
        assert!(r.det_abs >= bound);
    }

    #[test]
    fn report_singular() {
        let d = DataSet::new(vec![Datum::value(dvector![0.0]); 3]).unwrap();
        let r = poisedness_report(&d, &AvailableSet::lagrange(1), 1.0).unwrap();
        assert_eq!(r.det_abs, 0.0);
        assert!(r.lambda.is_infinite());
    }

    fn fig_base() -> Vec<Datum> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        vec![
            Datum::value(dvector![0.0, 0.0]),
            Datum::value(dvector![h, h]),
            Datum::new(dvector![h, h], MultiIndex::new(vec![1, 0])),
            Datum::new(dvector![h, h], MultiIndex::new(vec![0, 1])),
        ]
    }

    #[test]
    fn heatmap_duplicate_condition_cell_is_infinite() {
        // adding (y¹, [0,0]) again duplicates an existing row
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut base = fig_base();
        base.push(Datum::value(dvector![0.0, -1.0]));
        let shifted: Vec<Datum> = base
            .iter()
            .map(|d| Datum::new(&d.point - dvector![h, h], d.index.clone()))
            .collect();
        // center the region on y¹ so the single 1x1 cell sits exactly on it
        let mut reordered = vec![Datum::value(dvector![0.0, 0.0])];
        reordered.extend(
            shifted
                .into_iter()
                .filter(|d| !(d.index.is_zero() && d.point.norm() == 0.0)),
        );
        let grid = heatmap_grid(
            &reordered,
            &[MultiIndex::zero(2)],
            &AvailableSet::full(2),
            1.0,
            1,
        )
        .unwrap();
        assert_eq!(grid.status[0], CellStatus::NotPoised);
        assert!(grid.values[0].is_infinite());
    }

    #[test]
    fn heatmap_single_cell_matches_direct() {
        let a = AvailableSet::full(2);
        let mut base = fig_base();
        base.push(Datum::value(dvector![0.5, -0.5]));
        let grid = heatmap_grid(&base, &[MultiIndex::zero(2)], &a, 1.0, 1).unwrap();
        // 1x1 cell center is the region center; that duplicates (y⁰, 0)
        assert_eq!(grid.status[0], CellStatus::NotPoised);

        let grid = heatmap_grid(
            &base[..4],
            &[MultiIndex::zero(2), MultiIndex::new(vec![1, 0])],
            &a,
            1.0,
            2,
        )
        .unwrap();
        for (cell, status) in grid.status.iter().enumerate() {
            let (row, col) = (cell / 2, cell % 2);
            let x = dvector![grid.axis[col], grid.axis[row]];
            let mut items = base[..4].to_vec();
            items.push(Datum::value(x.clone()));
            items.push(Datum::new(x, MultiIndex::new(vec![1, 0])));
            let direct = lambda_poisedness(&DataSet::new(items).unwrap(), &a, 1.0);
            match status {
                CellStatus::Poised => assert_eq!(direct.unwrap(), grid.values[cell]),
                CellStatus::NotPoised => assert!(direct.is_err()),
                CellStatus::Outside => unreachable!("2x2 cell centers lie inside the unit ball"),
            }
        }
    }
}

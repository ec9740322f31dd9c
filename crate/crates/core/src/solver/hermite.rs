//! Hermite baseline: points are chosen by Lagrange pivoting, every available
//! derivative is queried at each point, and the model is the least-squares
//! fit of the resulting (possibly overdetermined) system.

use nalgebra::{DMatrix, DVector};

use super::{lagrange_set, push_unique, with_retries, Built, ModelBuilder, SolverParams};
use crate::basis::basis_len;
use crate::data::Datum;
use crate::error::{Error, Result};
use crate::interp::{normalized_rows, NormalizedSystem};
use crate::oracle::{hermite_expand, Oracle};
use crate::pivot::{self, CompletionOptions, CompletionResult};

const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Default)]
pub struct HermiteBuilder {
    pub options: CompletionOptions,
}

fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > RANK_TOL * smax.max(1.0)).count()
}

/// Least-squares Hermite model at `points` (first point is the center).
pub fn hermite_fit(oracle: &mut Oracle, points: &[DVector<f64>]) -> Result<Built> {
    let center = points[0].clone();
    let a = oracle.mask.available.clone();
    let data: Vec<Datum> = points.iter().flat_map(|p| hermite_expand(p, &a)).collect();
    let rhs = DVector::from_iterator(
        data.len(),
        data.iter()
            .map(|d| oracle.query_datum(d))
            .collect::<Result<Vec<_>>>()?,
    );
    let r = points
        .iter()
        .map(|p| (p - &center).norm())
        .fold(0.0, f64::max);
    let scale = if r > 0.0 { r } else { 1.0 };
    let m = normalized_rows(&center, &data, scale);
    let scaled = DVector::from_iterator(
        data.len(),
        data.iter()
            .zip(rhs.iter())
            .map(|(d, v)| scale.powi(d.index.total_order() as i32) * v),
    );
    if numerical_rank(&m) < m.ncols() {
        return Err(Error::NotPoised { rcond: 0.0 });
    }
    let coef = m
        .clone()
        .svd(true, true)
        .solve(&scaled, RANK_TOL)
        .map_err(|e| Error::Degenerate(e.to_string()))?;
    let sys = NormalizedSystem {
        mhat: m,
        scale,
        center,
    };
    let model = sys.unscale(&coef);
    let interp_residual = data
        .iter()
        .zip(rhs.iter())
        .map(|(d, v)| (model.derivative(&d.index, &d.point) - v).abs())
        .fold(0.0, f64::max);
    Ok(Built {
        model,
        working: data,
        interp_residual,
    })
}

impl HermiteBuilder {
    /// The shortest prefix of the pivot order with at least `q+1` conditions
    /// and full rank.
    fn select(&self, oracle: &Oracle, res: &CompletionResult) -> Vec<DVector<f64>> {
        let n = oracle.problem.n;
        let q1 = basis_len(n);
        let per_point = oracle.mask.available.len();
        let points: Vec<DVector<f64>> = res.data.items().iter().map(|d| d.point.clone()).collect();
        let mut p1 = q1.div_ceil(per_point);
        let a = &oracle.mask.available;
        while p1 < points.len() {
            let data: Vec<Datum> = points[..p1]
                .iter()
                .flat_map(|p| hermite_expand(p, a))
                .collect();
            let r = points[..p1]
                .iter()
                .map(|p| (p - &points[0]).norm())
                .fold(0.0, f64::max);
            let m = normalized_rows(&points[0], &data, if r > 0.0 { r } else { 1.0 });
            if numerical_rank(&m) == q1 {
                break;
            }
            p1 += 1;
        }
        points[..p1].to_vec()
    }

    fn points_history(history: &[Datum]) -> Vec<Datum> {
        history
            .iter()
            .filter(|d| d.index.is_zero())
            .cloned()
            .collect()
    }

    fn finish(
        &self,
        oracle: &mut Oracle,
        history: &mut Vec<Datum>,
        res: &CompletionResult,
    ) -> Result<Built> {
        let points = self.select(oracle, res);
        for p in &points {
            push_unique(history, Datum::value(p.clone()));
        }
        hermite_fit(oracle, &points)
    }
}

impl ModelBuilder for HermiteBuilder {
    fn build(
        &mut self,
        oracle: &mut Oracle,
        history: &mut Vec<Datum>,
        x: &DVector<f64>,
        delta: f64,
        params: &SolverParams,
    ) -> Result<Built> {
        let pts = Self::points_history(history);
        let a = lagrange_set(x.len());
        let res = with_retries(params, |xi| {
            pivot::complete(&pts, x, delta, xi, &a, &self.options)
        })?;
        self.finish(oracle, history, &res)
    }

    fn improve(
        &mut self,
        oracle: &mut Oracle,
        history: &mut Vec<Datum>,
        x: &DVector<f64>,
        delta: f64,
        params: &SolverParams,
    ) -> Result<(Built, bool)> {
        let pts = Self::points_history(history);
        let a = lagrange_set(x.len());
        let imp = with_retries(params, |xi| {
            match pivot::improve(&pts, x, delta, xi, params.xi_imp, &a, &self.options) {
                Err(Error::RecertificationFailed) => {
                    pivot::complete(&pts, x, delta, xi, &a, &self.options)
                        .map(pivot::Improvement::NoImprovement)
                }
                other => other,
            }
        })?;
        let improved = imp.improved();
        let built = self.finish(oracle, history, imp.result())?;
        Ok((built, improved))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{problem_by_name, Mask};
    use nalgebra::dvector;

    #[test]
    fn single_point_full_availability_is_taylor() {
        let p = problem_by_name("rosenbrock2").unwrap();
        let mut o = Oracle::new(p.clone(), Mask::full(2)).unwrap();
        let x = dvector![0.3, -0.4];
        let b = hermite_fit(&mut o, std::slice::from_ref(&x)).unwrap();
        assert!((b.model.c() - p.f(&x)).abs() < 1e-10);
        assert!((b.model.g() - p.grad(&x)).norm() < 1e-10);
        assert!((b.model.h() - p.hess(&x)).norm() < 1e-9);
        assert_eq!(o.ledger.distinct_count(), 6);
    }

    #[test]
    fn builder_uses_minimal_point_count() {
        let p = problem_by_name("sphere5").unwrap();
        for (known, expect) in [(vec![0, 1, 2, 3, 4], 1), (vec![], 21)] {
            let mask = Mask::from_known(5, known);
            let mut o = Oracle::new(p.clone(), mask).unwrap();
            let mut hist = vec![Datum::value(p.x0.clone())];
            let b = HermiteBuilder::default()
                .build(&mut o, &mut hist, &p.x0, 1.0, &SolverParams::default())
                .unwrap();
            let npts = b.working.len() / o.mask.available.len();
            assert_eq!(npts, expect);
        }
    }
}

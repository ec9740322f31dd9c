//! Fully-quadratic error constants, the error linear system `Q̂`, and
//! empirical error scans for checking both.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::basis::{basis_len, quad_len, w_pair, Order};
use crate::data::{DataSet, Datum, QuadraticModel};
use crate::error::{Error, Result};
use crate::interp;
use crate::linalg::{spectral_norm, spectral_norm_inverse};
use crate::poise::converse_constant;

/// Number of conditions of each total order.
pub fn count_orders(data: &DataSet) -> (usize, usize, usize) {
    let mut c = (0, 0, 0);
    for d in data.items() {
        match d.index.total_order() {
            0 => c.0 += 1,
            1 => c.1 += 1,
            _ => c.2 += 1,
        }
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FullyQuadraticConstants {
    pub kappa_ef: f64,
    pub kappa_eg: f64,
    pub kappa_eh: f64,
    pub n0: usize,
    pub n1: usize,
    pub n2: usize,
    pub inv_norm_used: f64,
}

impl FullyQuadraticConstants {
    pub fn from_parts(counts: (usize, usize, usize), lipschitz: f64, inv_norm: f64) -> Self {
        let (n0, n1, n2) = counts;
        let s = (2.25 * n0 as f64 + 4.0 * n1 as f64 + 4.0 * n2 as f64).sqrt();
        let sqrt2 = std::f64::consts::SQRT_2;
        Self {
            kappa_ef: (4.0 / 3.0 + 2.0 * (1.0 + 2.0 * sqrt2) * s * inv_norm) * lipschitz,
            kappa_eg: (1.0 + sqrt2) * s * lipschitz * inv_norm,
            kappa_eh: sqrt2 * s * lipschitz * inv_norm,
            n0,
            n1,
            n2,
            inv_norm_used: inv_norm,
        }
    }

    /// `(κ_ef Δ³, κ_eg Δ², κ_eh Δ)`.
    pub fn bounds(&self, delta: f64) -> (f64, f64, f64) {
        (
            self.kappa_ef * delta.powi(3),
            self.kappa_eg * delta * delta,
            self.kappa_eh * delta,
        )
    }
}

/// Constants with `‖M̂⁻¹‖₂` of the data.
pub fn constants(data: &DataSet, lipschitz: f64) -> Result<FullyQuadraticConstants> {
    if !(lipschitz >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "Lipschitz constant must be nonnegative, got {lipschitz}"
        )));
    }
    let sys = interp::build_normalized(data)?;
    let inv = spectral_norm_inverse(&sys.mhat).map_err(|_| Error::NotPoised { rcond: 0.0 })?;
    Ok(FullyQuadraticConstants::from_parts(
        count_orders(data),
        lipschitz,
        inv,
    ))
}

/// Constants with `‖M̂⁻¹‖` replaced by its upper bound `C·Λ`, `C = 4(q+1)`.
pub fn constants_from_lambda(
    data: &DataSet,
    lipschitz: f64,
    lambda: f64,
) -> FullyQuadraticConstants {
    let c = converse_constant(data.dim());
    FullyQuadraticConstants::from_parts(count_orders(data), lipschitz, c * lambda)
}

#[derive(Debug, Clone)]
pub struct ErrorSystem {
    pub qhat: DMatrix<f64>,
    /// `M̂` of the sorted data.
    pub mhat: DMatrix<f64>,
    /// `order[i]` is the position in the input of sorted condition `i`.
    pub order: Vec<usize>,
    pub q_inv_norm: f64,
    pub m_inv_norm: f64,
    /// Largest entry of `M̂ - [[1, 0], [z, Q̂]]`.
    pub embedding_residual: f64,
}

impl ErrorSystem {
    pub fn norms_ordered(&self, tol: f64) -> bool {
        self.q_inv_norm <= self.m_inv_norm * (1.0 + tol) + tol
    }
}

/// Assembles `Q̂` row by row from the three cases of the error system and
/// compares it with the trailing block of `M̂`.
pub fn error_system(data: &DataSet) -> Result<ErrorSystem> {
    if !data.is_square() {
        return Err(Error::DimensionMismatch {
            expected: basis_len(data.dim()),
            found: data.len(),
        });
    }
    let n = data.dim();
    let q = basis_len(n) - 1;
    let items = data.items();
    let mut order: Vec<usize> = (1..items.len()).collect();
    order.sort_by_key(|&i| items[i].index.total_order());
    order.insert(0, 0);
    let sorted: Vec<Datum> = order.iter().map(|&i| items[i].clone()).collect();
    let sorted = DataSet::new(sorted)?;
    let sys = interp::build_normalized(&sorted)?;
    let delta = sys.scale;
    let y0 = sorted.center();

    let mut qhat = DMatrix::zeros(q, q);
    let mut z = DVector::zeros(q);
    for (r, d) in sorted.items()[1..].iter().enumerate() {
        let s = &d.point - y0;
        let (lin, quad, dscale) = match d.index.order() {
            Order::Zero => {
                z[r] = 1.0;
                (s.clone(), w_pair(&s, &s) * 0.5, 1.0)
            }
            Order::First(k) => {
                let e = DVector::from_fn(n, |i, _| if i == k { 1.0 } else { 0.0 });
                (e.clone(), w_pair(&e, &s), delta)
            }
            Order::Second(k, l) => {
                let ek = DVector::from_fn(n, |i, _| if i == k { 1.0 } else { 0.0 });
                let el = DVector::from_fn(n, |i, _| if i == l { 1.0 } else { 0.0 });
                (DVector::zeros(n), w_pair(&ek, &el), delta * delta)
            }
        };
        // diag(I, ΔI, Δ²I) · Q · diag(Δ⁻¹I, Δ⁻²I)
        for j in 0..n {
            qhat[(r, j)] = dscale * lin[j] / delta;
        }
        for j in 0..quad_len(n) {
            qhat[(r, n + j)] = dscale * quad[j] / (delta * delta);
        }
    }

    let mut embedded = DMatrix::zeros(q + 1, q + 1);
    embedded[(0, 0)] = 1.0;
    embedded.view_mut((1, 0), (q, 1)).copy_from(&z);
    embedded.view_mut((1, 1), (q, q)).copy_from(&qhat);
    let embedding_residual = (&sys.mhat - &embedded).amax();

    let not_poised = |_| Error::NotPoised { rcond: 0.0 };
    let m_inv_norm = spectral_norm_inverse(&sys.mhat).map_err(not_poised)?;
    let q_inv_norm = if q == 0 {
        0.0
    } else {
        spectral_norm_inverse(&qhat).map_err(not_poised)?
    };
    Ok(ErrorSystem {
        qhat,
        mhat: sys.mhat,
        order,
        q_inv_norm,
        m_inv_norm,
        embedding_residual,
    })
}

/// A `C³` function with analytic derivatives and a Lipschitz bound for its
/// Hessian on balls.
pub trait SmoothFunction: Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64>;
    /// Lipschitz constant of `∇²f` (spectral norm) on `B(center, radius)`.
    fn hessian_lipschitz(&self, center: &DVector<f64>, radius: f64) -> f64;
}

/// `exp(x₁)`.
#[derive(Debug, Clone, Copy)]
pub struct ExpFirst {
    pub n: usize,
}

impl SmoothFunction for ExpFirst {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        x[0].exp()
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(self.n);
        g[0] = x[0].exp();
        g
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.n, self.n);
        h[(0, 0)] = x[0].exp();
        h
    }
    fn hessian_lipschitz(&self, center: &DVector<f64>, radius: f64) -> f64 {
        (center[0] + radius).exp()
    }
}

/// `c + bᵀx + ½xᵀAx`.
#[derive(Debug, Clone)]
pub struct QuadraticFn {
    pub c: f64,
    pub b: DVector<f64>,
    pub a: DMatrix<f64>,
}

impl SmoothFunction for QuadraticFn {
    fn dim(&self) -> usize {
        self.b.len()
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.c + self.b.dot(x) + 0.5 * x.dot(&(&self.a * x))
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.b + &self.a * x
    }
    fn hessian(&self, _: &DVector<f64>) -> DMatrix<f64> {
        self.a.clone()
    }
    fn hessian_lipschitz(&self, _: &DVector<f64>, _: f64) -> f64 {
        0.0
    }
}

/// `Σ_j x_j³ / 6`.
#[derive(Debug, Clone, Copy)]
pub struct CubicSum {
    pub n: usize,
}

impl SmoothFunction for CubicSum {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        x.iter().map(|v| v.powi(3) / 6.0).sum()
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        x.map(|v| 0.5 * v * v)
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_diagonal(x)
    }
    fn hessian_lipschitz(&self, _: &DVector<f64>, _: f64) -> f64 {
        1.0
    }
}

/// `Σ_j a_j cos(ω_jᵀx + φ_j)`.
#[derive(Debug, Clone)]
pub struct CosineSum {
    pub amp: Vec<f64>,
    pub freq: Vec<DVector<f64>>,
    pub phase: Vec<f64>,
}

impl CosineSum {
    pub fn random(n: usize, terms: usize, rng: &mut impl Rng) -> Self {
        let amp = (0..terms).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let freq = (0..terms)
            .map(|_| DVector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0)))
            .collect();
        let phase = (0..terms)
            .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
            .collect();
        Self { amp, freq, phase }
    }

    fn terms(&self) -> impl Iterator<Item = (f64, &DVector<f64>, f64)> {
        self.amp
            .iter()
            .zip(&self.freq)
            .zip(&self.phase)
            .map(|((&a, w), &p)| (a, w, p))
    }
}

impl SmoothFunction for CosineSum {
    fn dim(&self) -> usize {
        self.freq[0].len()
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.terms().map(|(a, w, p)| a * (w.dot(x) + p).cos()).sum()
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(self.dim());
        for (a, w, p) in self.terms() {
            g -= w * (a * (w.dot(x) + p).sin());
        }
        g
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.dim(), self.dim());
        for (a, w, p) in self.terms() {
            h -= w * w.transpose() * (a * (w.dot(x) + p).cos());
        }
        h
    }
    fn hessian_lipschitz(&self, _: &DVector<f64>, _: f64) -> f64 {
        self.terms()
            .map(|(a, w, _)| a.abs() * w.norm().powi(3))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorScanRow {
    pub delta: f64,
    pub err_f: f64,
    pub err_g: f64,
    pub err_h: f64,
    pub bound_f: f64,
    pub bound_g: f64,
    pub bound_h: f64,
}

impl ErrorScanRow {
    /// Errors within the bounds up to `tol·(1 + bound)`.
    pub fn dominated(&self, tol: f64) -> bool {
        self.err_f <= self.bound_f + tol * (1.0 + self.bound_f)
            && self.err_g <= self.bound_g + tol * (1.0 + self.bound_g)
            && self.err_h <= self.bound_h + tol * (1.0 + self.bound_h)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub samples: usize,
    pub polish_steps: usize,
    pub seed: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            samples: 10_000,
            polish_steps: 60,
            seed: 0,
        }
    }
}

/// Template data scaled to radius `delta` about `center`.
pub fn scale_template(template: &[Datum], center: &DVector<f64>, delta: f64) -> Result<DataSet> {
    let first = template
        .first()
        .ok_or_else(|| Error::InvalidParams("empty template".into()))?;
    let r = interp::radius_of(&first.point, template);
    if r == 0.0 {
        return Err(Error::Degenerate("template has zero radius".into()));
    }
    let items = template
        .iter()
        .map(|d| {
            Datum::new(
                center + (&d.point - &first.point) * (delta / r),
                d.index.clone(),
            )
        })
        .collect();
    DataSet::new(items)
}

/// Model of `f` interpolating the data.
pub fn fit(f: &dyn SmoothFunction, data: &DataSet) -> Result<QuadraticModel> {
    let rhs = DVector::from_iterator(
        data.len(),
        data.items().iter().map(|d| match d.index.order() {
            Order::Zero => f.value(&d.point),
            Order::First(k) => f.gradient(&d.point)[k],
            Order::Second(k, l) => f.hessian(&d.point)[(k, l)],
        }),
    );
    interp::solve_model(data, &rhs)
}

fn errors(
    f: &dyn SmoothFunction,
    m: &QuadraticModel,
    h: &DMatrix<f64>,
    x: &DVector<f64>,
) -> [f64; 3] {
    [
        (m.eval(x) - f.value(x)).abs(),
        (m.gradient(x) - f.gradient(x)).norm(),
        spectral_norm(&(h - f.hessian(x))),
    ]
}

fn sample_ball(rng: &mut ChaCha8Rng, center: &DVector<f64>, radius: f64) -> DVector<f64> {
    let n = center.len();
    let dir = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let norm = dir.norm().max(f64::MIN_POSITIVE);
    let r = radius * rng.gen::<f64>().powf(1.0 / n as f64);
    center + dir * (r / norm)
}

fn project(x: DVector<f64>, center: &DVector<f64>, radius: f64) -> DVector<f64> {
    let s = &x - center;
    let d = s.norm();
    if d <= radius {
        x
    } else {
        center + s * (radius / d)
    }
}

/// Maximum of the three model errors over `B(center, delta)`: uniform
/// samples followed by a random-direction ascent from the best sample of
/// each error.
pub fn max_errors(
    f: &dyn SmoothFunction,
    m: &QuadraticModel,
    center: &DVector<f64>,
    delta: f64,
    opts: &ScanOptions,
    rng: &mut ChaCha8Rng,
) -> [f64; 3] {
    let h = m.hessian_matrix();
    let mut best = [0.0; 3];
    let mut arg = [center.clone(), center.clone(), center.clone()];
    let consider = |x: DVector<f64>, best: &mut [f64; 3], arg: &mut [DVector<f64>; 3]| {
        let e = errors(f, m, &h, &x);
        for j in 0..3 {
            if e[j] > best[j] {
                best[j] = e[j];
                arg[j] = x.clone();
            }
        }
    };
    consider(center.clone(), &mut best, &mut arg);
    for _ in 0..opts.samples {
        let x = sample_ball(rng, center, delta);
        consider(x, &mut best, &mut arg);
    }
    for j in 0..3 {
        let mut x = arg[j].clone();
        let mut step = 0.1 * delta;
        for _ in 0..opts.polish_steps {
            let dir = DVector::from_fn(center.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
            let dir = &dir / dir.norm().max(f64::MIN_POSITIVE);
            let mut moved = false;
            for sign in [1.0, -1.0] {
                let y = project(&x + &dir * (sign * step), center, delta);
                let e = errors(f, m, &h, &y)[j];
                if e > best[j] {
                    best[j] = e;
                    x = y;
                    moved = true;
                    break;
                }
            }
            if !moved {
                step *= 0.7;
            }
        }
    }
    best
}

/// One row per radius: measured maximal errors and the fully-quadratic
/// bounds from [`constants`] with the Hessian Lipschitz constant of `f` on
/// the ball.
pub fn error_scan(
    f: &dyn SmoothFunction,
    template: &[Datum],
    center: &DVector<f64>,
    deltas: &[f64],
    opts: &ScanOptions,
) -> Result<Vec<ErrorScanRow>> {
    if template.first().map(|d| d.point.len()) != Some(f.dim()) || center.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: center.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    deltas
        .iter()
        .map(|&delta| {
            let data = scale_template(template, center, delta)?;
            let model = fit(f, &data)?;
            let k = constants(&data, f.hessian_lipschitz(center, delta))?;
            let [err_f, err_g, err_h] = max_errors(f, &model, center, delta, opts, &mut rng);
            let (bound_f, bound_g, bound_h) = k.bounds(delta);
            Ok(ErrorScanRow {
                delta,
                err_f,
                err_g,
                err_h,
                bound_f,
                bound_g,
                bound_h,
            })
        })
        .collect()
}

/// Ratios `err(Δ_i) / err(Δ_{i+1})` for each error column.
pub fn rate_ratios(rows: &[ErrorScanRow]) -> [Vec<f64>; 3] {
    let mut out = [Vec::new(), Vec::new(), Vec::new()];
    for w in rows.windows(2) {
        out[0].push(w[0].err_f / w[1].err_f);
        out[1].push(w[0].err_g / w[1].err_g);
        out[2].push(w[0].err_h / w[1].err_h);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{AvailableSet, MultiIndex};
    use crate::oracle::hermite_expand;
    use nalgebra::dvector;

    fn worked_example() -> DataSet {
        DataSet::new(vec![
            Datum::value(dvector![0.0]),
            Datum::value(dvector![1.0]),
            Datum::new(dvector![1.0], MultiIndex::new(vec![1])),
        ])
        .unwrap()
    }

    /// Center plus value, gradient and Hessian conditions spread over a
    /// few points in the unit disc.
    fn template2() -> Vec<Datum> {
        let e = |a: u8, b: u8| MultiIndex::new(vec![a, b]);
        vec![
            Datum::value(dvector![0.0, 0.0]),
            Datum::value(dvector![1.0, 0.0]),
            Datum::value(dvector![0.0, 1.0]),
            Datum::new(dvector![-0.6, -0.8], e(1, 0)),
            Datum::new(dvector![0.6, -0.8], e(0, 1)),
            Datum::new(dvector![-0.7, 0.7], e(1, 1)),
        ]
    }

    #[test]
    fn counts() {
        assert_eq!(count_orders(&worked_example()), (2, 1, 0));
        let h = DataSet::new(hermite_expand(&dvector![0.3, 0.1], &AvailableSet::full(2))).unwrap();
        assert_eq!(count_orders(&h), (1, 2, 3));
        let l = DataSet::new(vec![
            Datum::value(dvector![0.0]),
            Datum::value(dvector![1.0]),
            Datum::value(dvector![-1.0]),
        ])
        .unwrap();
        assert_eq!(count_orders(&l), (3, 0, 0));
    }

    #[test]
    fn constants_formulas() {
        let d = worked_example();
        let k = constants(&d, 1.0).unwrap();
        let inv = 4.583613745677844;
        assert!((k.inv_norm_used - inv).abs() < 1e-10);
        let s = (2.25f64 * 2.0 + 4.0).sqrt();
        assert!((k.kappa_eh - 2f64.sqrt() * s * inv).abs() < 1e-9);
        assert!((k.kappa_eg - (1.0 + 2f64.sqrt()) * s * inv).abs() < 1e-9);
        assert!(
            (k.kappa_ef - (4.0 / 3.0 + 2.0 * (1.0 + 2.0 * 2f64.sqrt()) * s * inv)).abs() < 1e-9
        );
        let z = constants(&d, 0.0).unwrap();
        assert_eq!((z.kappa_ef, z.kappa_eg, z.kappa_eh), (0.0, 0.0, 0.0));

        // all-Lagrange: S = (3/2)√(q+1)
        let l = DataSet::new(vec![
            Datum::value(dvector![0.0]),
            Datum::value(dvector![1.0]),
            Datum::value(dvector![-1.0]),
        ])
        .unwrap();
        let k = constants(&l, 2.0).unwrap();
        let expect = 2f64.sqrt() * 1.5 * 3f64.sqrt() * 2.0 * k.inv_norm_used;
        assert!((k.kappa_eh - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn lambda_form_dominates() {
        let d = worked_example();
        let k = constants(&d, 1.0).unwrap();
        let lam = crate::poise::lambda_poisedness(&d, &AvailableSet::full(1), 1.0).unwrap();
        let c = constants_from_lambda(&d, 1.0, lam);
        assert!(c.kappa_ef >= k.kappa_ef && c.kappa_eg >= k.kappa_eg && c.kappa_eh >= k.kappa_eh);
    }

    #[test]
    fn worked_example_block() {
        let es = error_system(&worked_example()).unwrap();
        assert_eq!(es.qhat.shape(), (2, 2));
        assert!(es.embedding_residual < 1e-14);
        let expect = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 1.0, 1.0]);
        assert!((&es.qhat - expect).amax() < 1e-14);
        assert!(es.norms_ordered(1e-10));
    }

    #[test]
    fn unsorted_input_is_sorted() {
        let mut items = template2();
        items.swap(1, 5);
        let d = DataSet::new(items).unwrap();
        let es = error_system(&d).unwrap();
        assert_eq!(es.order[0], 0);
        assert!(es.embedding_residual < 1e-13);
        assert!(es.norms_ordered(1e-10));
    }

    #[test]
    fn lagrange_first_block() {
        let pts = [
            [0.0, 0.0],
            [0.5, 0.0],
            [0.0, 0.5],
            [-0.5, 0.2],
            [0.1, -0.4],
            [0.3, 0.3],
        ];
        let d = DataSet::new(
            pts.iter()
                .map(|p| Datum::value(dvector![p[0], p[1]]))
                .collect(),
        )
        .unwrap();
        let es = error_system(&d).unwrap();
        let r = interp::radius(&d);
        for (i, p) in pts[1..].iter().enumerate() {
            let s = dvector![p[0], p[1]] / r;
            let row = es.qhat.row(i);
            assert!((row[0] - s[0]).abs() < 1e-14 && (row[1] - s[1]).abs() < 1e-14);
            let w = w_pair(&s, &s) * 0.5;
            for j in 0..3 {
                assert!((row[2 + j] - w[j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn quadratic_reproduced() {
        let f = QuadraticFn {
            c: 1.0,
            b: dvector![0.5, -2.0],
            a: DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]),
        };
        let opts = ScanOptions {
            samples: 500,
            ..Default::default()
        };
        let rows = error_scan(
            &f,
            &template2(),
            &dvector![0.2, -0.1],
            &[1.0, 0.1, 0.01],
            &opts,
        )
        .unwrap();
        for r in &rows {
            assert!(
                r.err_f < 1e-10 && r.err_g < 1e-10 && r.err_h < 1e-10,
                "{r:?}"
            );
            assert_eq!(r.bound_f, 0.0);
        }
    }

    #[test]
    fn exp_rates() {
        let f = ExpFirst { n: 2 };
        let deltas: Vec<f64> = (0..6).map(|i| 0.1 / 2f64.powi(i)).collect();
        let opts = ScanOptions {
            samples: 2000,
            ..Default::default()
        };
        let rows = error_scan(&f, &template2(), &dvector![0.3, -0.2], &deltas, &opts).unwrap();
        for r in &rows {
            assert!(r.dominated(0.0), "{r:?}");
        }
        let [rf, rg, rh] = rate_ratios(&rows);
        let med = |mut v: Vec<f64>| {
            v.sort_by(f64::total_cmp);
            v[v.len() / 2]
        };
        let (mf, mg, mh) = (med(rf), med(rg), med(rh));
        assert!((5.5..=10.5).contains(&mf), "{mf}");
        assert!((2.8..=5.5).contains(&mg), "{mg}");
        assert!((1.5..=2.8).contains(&mh), "{mh}");
    }

    #[test]
    fn scan_is_deterministic() {
        let f = CubicSum { n: 2 };
        let opts = ScanOptions {
            samples: 300,
            seed: 5,
            ..Default::default()
        };
        let a = error_scan(&f, &template2(), &dvector![0.0, 0.0], &[0.5, 0.25], &opts).unwrap();
        let b = error_scan(&f, &template2(), &dvector![0.0, 0.0], &[0.5, 0.25], &opts).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|r| r.dominated(0.0)));
    }
}

//! Analytic unconstrained test problems with exact gradients and Hessians.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

/// A twice-differentiable objective with closed-form derivatives.
pub trait Objective: Send + Sync {
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64>;
}

/// A named test problem.
#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub n: usize,
    pub x0: DVector<f64>,
    pub fmin: Option<f64>,
    objective: Arc<dyn Objective>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("x0", &self.x0.as_slice())
            .field("fmin", &self.fmin)
            .finish()
    }
}

impl Problem {
    pub fn new(
        name: impl Into<String>,
        x0: DVector<f64>,
        fmin: Option<f64>,
        objective: impl Objective + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            n: x0.len(),
            x0,
            fmin,
            objective: Arc::new(objective),
        }
    }

    pub fn f(&self, x: &DVector<f64>) -> f64 {
        self.objective.value(x)
    }

    pub fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        self.objective.gradient(x)
    }

    pub fn hess(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.objective.hessian(x)
    }
}

/// Objective given by closures.
pub struct FnObjective<F, G, H> {
    pub f: F,
    pub g: G,
    pub h: H,
}

impl<F, G, H> Objective for FnObjective<F, G, H>
where
    F: Fn(&DVector<f64>) -> f64 + Send + Sync,
    G: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync,
    H: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync,
{
    fn value(&self, x: &DVector<f64>) -> f64 {
        (self.f)(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.g)(x)
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (self.h)(x)
    }
}

/// Residuals with their Jacobian and per-residual Hessians.
pub trait Residuals: Send + Sync {
    fn eval(&self, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>, Vec<DMatrix<f64>>);
}

/// `f = Σ rᵢ²`.
pub struct SumOfSquares<R>(pub R);

impl<R: Residuals> Objective for SumOfSquares<R> {
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.0.eval(x).0.norm_squared()
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let (r, j, _) = self.0.eval(x);
        2.0 * j.transpose() * r
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let (r, j, hs) = self.0.eval(x);
        let mut h = j.transpose() * &j;
        for (ri, hi) in r.iter().zip(&hs) {
            h += hi * *ri;
        }
        2.0 * h
    }
}

/// `½xᵀQx + bᵀx`.
pub struct QuadraticObjective {
    pub q: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl QuadraticObjective {
    pub fn minimizer(&self) -> DVector<f64> {
        -self
            .q
            .clone()
            .lu()
            .solve(&self.b)
            .expect("positive definite")
    }

    pub fn min_value(&self) -> f64 {
        -0.5 * self.b.dot(
            &self
                .q
                .clone()
                .lu()
                .solve(&self.b)
                .expect("positive definite"),
        )
    }
}

impl Objective for QuadraticObjective {
    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.q * x)) + self.b.dot(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.q * x + &self.b
    }
    fn hessian(&self, _: &DVector<f64>) -> DMatrix<f64> {
        self.q.clone()
    }
}

fn dv(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

struct Fn3<F>(F);

impl<F> Residuals for Fn3<F>
where
    F: Fn(&DVector<f64>) -> (DVector<f64>, DMatrix<f64>, Vec<DMatrix<f64>>) + Send + Sync,
{
    fn eval(&self, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>, Vec<DMatrix<f64>>) {
        (self.0)(x)
    }
}

fn residual_problem<F>(name: &str, x0: &[f64], fmin: Option<f64>, r: F) -> Problem
where
    F: Fn(&DVector<f64>) -> (DVector<f64>, DMatrix<f64>, Vec<DMatrix<f64>>) + Send + Sync + 'static,
{
    Problem::new(name, dv(x0), fmin, SumOfSquares(Fn3(r)))
}

pub fn sphere(n: usize) -> Problem {
    let x0: Vec<f64> = (0..n)
        .map(|i| {
            if i % 2 == 0 {
                1.0 + i as f64 * 0.5
            } else {
                -(1.0 + i as f64 * 0.5)
            }
        })
        .collect();
    Problem::new(
        format!("sphere{n}"),
        dv(&x0),
        Some(0.0),
        FnObjective {
            f: |x: &DVector<f64>| x.norm_squared(),
            g: |x: &DVector<f64>| 2.0 * x,
            h: |x: &DVector<f64>| DMatrix::identity(x.len(), x.len()) * 2.0,
        },
    )
}

/// `Q = R diag(1, cond) Rᵀ` with `R` a rotation by `angle`.
pub fn rotated_quadratic2(cond: f64, angle: f64, b: [f64; 2]) -> QuadraticObjective {
    let (s, c) = angle.sin_cos();
    let r = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
    let d = DMatrix::from_diagonal(&dv(&[1.0, cond]));
    QuadraticObjective {
        q: &r * d * r.transpose(),
        b: dv(&b),
    }
}

fn quadratic2() -> Problem {
    let obj = rotated_quadratic2(10.0, PI / 6.0, [1.0, -2.0]);
    let fmin = obj.min_value();
    Problem::new("quadratic2", dv(&[1.0, 1.0]), Some(fmin), obj)
}

/// Householder-rotated diagonal with eigenvalues spread geometrically up to
/// `cond`.
fn quadratic8() -> Problem {
    let n = 8;
    let cond: f64 = 1e3;
    let v = DVector::from_iterator(n, (1..=n).map(|i| i as f64));
    let house = DMatrix::identity(n, n) - (&v * v.transpose()) * (2.0 / v.norm_squared());
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        n,
        (0..n).map(|i| cond.powf(i as f64 / (n - 1) as f64)),
    ));
    let obj = QuadraticObjective {
        q: &house * d * &house,
        b: DVector::from_element(n, 1.0),
    };
    let fmin = obj.min_value();
    Problem::new("quadratic8", DVector::zeros(n), Some(fmin), obj)
}

/// Extended Rosenbrock on `n/2` independent pairs.
pub fn rosenbrock(n: usize) -> Problem {
    assert!(n.is_multiple_of(2), "rosenbrock needs even n");
    let x0: Vec<f64> = (0..n)
        .map(|i| if i % 2 == 0 { -1.2 } else { 1.0 })
        .collect();
    let name = if n == 2 {
        "rosenbrock2".to_string()
    } else {
        format!("ext_rosenbrock{n}")
    };
    residual_problem(&name, &x0, Some(0.0), move |x| {
        let mut r = DVector::zeros(n);
        let mut j = DMatrix::zeros(n, n);
        let mut hs = vec![DMatrix::zeros(n, n); n];
        for p in 0..n / 2 {
            let (a, b) = (2 * p, 2 * p + 1);
            r[a] = 10.0 * (x[b] - x[a] * x[a]);
            r[b] = 1.0 - x[a];
            j[(a, a)] = -20.0 * x[a];
            j[(a, b)] = 10.0;
            j[(b, a)] = -1.0;
            hs[a][(a, a)] = -20.0;
        }
        (r, j, hs)
    })
}

fn beale() -> Problem {
    const C: [f64; 3] = [1.5, 2.25, 2.625];
    residual_problem("beale2", &[1.0, 1.0], Some(0.0), |x| {
        let (u, v) = (x[0], x[1]);
        let mut r = DVector::zeros(3);
        let mut j = DMatrix::zeros(3, 2);
        let mut hs = Vec::with_capacity(3);
        for i in 0..3 {
            let k = (i + 1) as i32;
            r[i] = C[i] - u * (1.0 - v.powi(k));
            j[(i, 0)] = -(1.0 - v.powi(k));
            j[(i, 1)] = u * k as f64 * v.powi(k - 1);
            let dvdv = if k >= 2 {
                u * (k * (k - 1)) as f64 * v.powi(k - 2)
            } else {
                0.0
            };
            let duv = k as f64 * v.powi(k - 1);
            hs.push(DMatrix::from_row_slice(2, 2, &[0.0, duv, duv, dvdv]));
        }
        (r, j, hs)
    })
}

fn powell_singular() -> Problem {
    let s5 = 5f64.sqrt();
    let s10 = 10f64.sqrt();
    residual_problem(
        "powell_singular4",
        &[3.0, -1.0, 0.0, 1.0],
        Some(0.0),
        move |x| {
            let t = x[1] - 2.0 * x[2];
            let w = x[0] - x[3];
            let r = dv(&[x[0] + 10.0 * x[1], s5 * (x[2] - x[3]), t * t, s10 * w * w]);
            let j = DMatrix::from_row_slice(
                4,
                4,
                &[
                    1.0,
                    10.0,
                    0.0,
                    0.0, //
                    0.0,
                    0.0,
                    s5,
                    -s5, //
                    0.0,
                    2.0 * t,
                    -4.0 * t,
                    0.0, //
                    2.0 * s10 * w,
                    0.0,
                    0.0,
                    -2.0 * s10 * w,
                ],
            );
            let mut h2 = DMatrix::zeros(4, 4);
            h2[(1, 1)] = 2.0;
            h2[(1, 2)] = -4.0;
            h2[(2, 1)] = -4.0;
            h2[(2, 2)] = 8.0;
            let mut h3 = DMatrix::zeros(4, 4);
            h3[(0, 0)] = 2.0 * s10;
            h3[(0, 3)] = -2.0 * s10;
            h3[(3, 0)] = -2.0 * s10;
            h3[(3, 3)] = 2.0 * s10;
            (
                r,
                j,
                vec![DMatrix::zeros(4, 4), DMatrix::zeros(4, 4), h2, h3],
            )
        },
    )
}

fn wood() -> Problem {
    Problem::new(
        "wood4",
        dv(&[-3.0, -1.0, -3.0, -1.0]),
        Some(0.0),
        FnObjective {
            f: |x: &DVector<f64>| {
                100.0 * (x[0] * x[0] - x[1]).powi(2)
                    + (x[0] - 1.0).powi(2)
                    + (x[2] - 1.0).powi(2)
                    + 90.0 * (x[2] * x[2] - x[3]).powi(2)
                    + 10.1 * ((x[1] - 1.0).powi(2) + (x[3] - 1.0).powi(2))
                    + 19.8 * (x[1] - 1.0) * (x[3] - 1.0)
            },
            g: |x: &DVector<f64>| {
                let a = x[0] * x[0] - x[1];
                let b = x[2] * x[2] - x[3];
                dv(&[
                    400.0 * a * x[0] + 2.0 * (x[0] - 1.0),
                    -200.0 * a + 20.2 * (x[1] - 1.0) + 19.8 * (x[3] - 1.0),
                    360.0 * b * x[2] + 2.0 * (x[2] - 1.0),
                    -180.0 * b + 20.2 * (x[3] - 1.0) + 19.8 * (x[1] - 1.0),
                ])
            },
            h: |x: &DVector<f64>| {
                let mut h = DMatrix::zeros(4, 4);
                h[(0, 0)] = 1200.0 * x[0] * x[0] - 400.0 * x[1] + 2.0;
                h[(0, 1)] = -400.0 * x[0];
                h[(1, 0)] = -400.0 * x[0];
                h[(1, 1)] = 220.2;
                h[(1, 3)] = 19.8;
                h[(3, 1)] = 19.8;
                h[(2, 2)] = 1080.0 * x[2] * x[2] - 360.0 * x[3] + 2.0;
                h[(2, 3)] = -360.0 * x[2];
                h[(3, 2)] = -360.0 * x[2];
                h[(3, 3)] = 200.2;
                h
            },
        },
    )
}

/// `rᵢ = n - Σ cos xⱼ + i(1 - cos xᵢ) - sin xᵢ`, `i = 1..n`.
fn trigonometric(n: usize) -> Problem {
    let x0 = vec![1.0 / n as f64; n];
    residual_problem(&format!("trigonometric{n}"), &x0, Some(0.0), move |x| {
        let sum_cos: f64 = x.iter().map(|v| v.cos()).sum();
        let mut r = DVector::zeros(n);
        let mut j = DMatrix::zeros(n, n);
        let mut hs = Vec::with_capacity(n);
        for i in 0..n {
            let k = (i + 1) as f64;
            r[i] = n as f64 - sum_cos + k * (1.0 - x[i].cos()) - x[i].sin();
            let mut h = DMatrix::zeros(n, n);
            for l in 0..n {
                j[(i, l)] = x[l].sin();
                h[(l, l)] = x[l].cos();
            }
            j[(i, i)] += k * x[i].sin() - x[i].cos();
            h[(i, i)] += k * x[i].cos() + x[i].sin();
            hs.push(h);
        }
        (r, j, hs)
    })
}

/// `rᵢ = (3 - 2xᵢ)xᵢ - x_{i-1} - 2x_{i+1} + 1` with `x₀ = x_{n+1} = 0`.
fn broyden_tridiagonal(n: usize) -> Problem {
    residual_problem(
        &format!("broyden_tridiag{n}"),
        &vec![-1.0; n],
        Some(0.0),
        move |x| {
            let mut r = DVector::zeros(n);
            let mut j = DMatrix::zeros(n, n);
            let mut hs = Vec::with_capacity(n);
            for i in 0..n {
                let prev = if i > 0 { x[i - 1] } else { 0.0 };
                let next = if i + 1 < n { x[i + 1] } else { 0.0 };
                r[i] = (3.0 - 2.0 * x[i]) * x[i] - prev - 2.0 * next + 1.0;
                j[(i, i)] = 3.0 - 4.0 * x[i];
                if i > 0 {
                    j[(i, i - 1)] = -1.0;
                }
                if i + 1 < n {
                    j[(i, i + 1)] = -2.0;
                }
                let mut h = DMatrix::zeros(n, n);
                h[(i, i)] = -4.0;
                hs.push(h);
            }
            (r, j, hs)
        },
    )
}

fn freudenstein_roth() -> Problem {
    residual_problem("freudenstein_roth2", &[0.5, -2.0], Some(0.0), |x| {
        let y = x[1];
        let r = dv(&[
            -13.0 + x[0] + ((5.0 - y) * y - 2.0) * y,
            -29.0 + x[0] + ((y + 1.0) * y - 14.0) * y,
        ]);
        let j = DMatrix::from_row_slice(
            2,
            2,
            &[
                1.0,
                10.0 * y - 3.0 * y * y - 2.0,
                1.0,
                3.0 * y * y + 2.0 * y - 14.0,
            ],
        );
        let h0 = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 10.0 - 6.0 * y]);
        let h1 = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 6.0 * y + 2.0]);
        (r, j, vec![h0, h1])
    })
}

/// `r₁ = x₁ - 1`, `rᵢ = √i (2xᵢ² - x_{i-1})`.
fn dixon_price(n: usize) -> Problem {
    residual_problem(
        &format!("dixon_price{n}"),
        &vec![1.0; n],
        Some(0.0),
        move |x| {
            let mut r = DVector::zeros(n);
            let mut j = DMatrix::zeros(n, n);
            let mut hs = vec![DMatrix::zeros(n, n); n];
            r[0] = x[0] - 1.0;
            j[(0, 0)] = 1.0;
            for i in 1..n {
                let s = ((i + 1) as f64).sqrt();
                r[i] = s * (2.0 * x[i] * x[i] - x[i - 1]);
                j[(i, i)] = 4.0 * s * x[i];
                j[(i, i - 1)] = -s;
                hs[i][(i, i)] = 4.0 * s;
            }
            (r, j, hs)
        },
    )
}

/// `Σxᵢ² + t² + t⁴` with `t = Σ ½ i xᵢ`.
fn zakharov(n: usize) -> Problem {
    let c = DVector::from_iterator(n, (1..=n).map(|i| 0.5 * i as f64));
    let (c1, c2, c3) = (c.clone(), c.clone(), c);
    Problem::new(
        format!("zakharov{n}"),
        DVector::from_element(n, 1.0),
        Some(0.0),
        FnObjective {
            f: move |x: &DVector<f64>| {
                let t = c1.dot(x);
                x.norm_squared() + t * t + t.powi(4)
            },
            g: move |x: &DVector<f64>| {
                let t = c2.dot(x);
                2.0 * x + &c2 * (2.0 * t + 4.0 * t.powi(3))
            },
            h: move |x: &DVector<f64>| {
                let t = c3.dot(x);
                let n = x.len();
                DMatrix::identity(n, n) * 2.0 + (&c3 * c3.transpose()) * (2.0 + 12.0 * t * t)
            },
        },
    )
}

/// The benchmark suite.
pub fn problem_suite() -> Vec<Problem> {
    vec![
        sphere(5),
        quadratic2(),
        quadratic8(),
        rosenbrock(2),
        rosenbrock(6),
        beale(),
        powell_singular(),
        wood(),
        trigonometric(5),
        broyden_tridiagonal(6),
        freudenstein_roth(),
        dixon_price(4),
        zakharov(3),
    ]
}

pub fn problem_by_name(name: &str) -> Option<Problem> {
    problem_suite().into_iter().find(|p| p.name == name)
}

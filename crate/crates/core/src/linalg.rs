//! Dense kernels for the small systems that appear in model building, plus
//! exact extremization of quadratics over Euclidean balls.
//!
//! Factorizations (LU, SVD, symmetric eigendecomposition) come from
//! `nalgebra`. The trust-region subproblem is solved here with an
//! eigendecomposition and a safeguarded Newton iteration on the secular
//! equation, including the hard case.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::basis::{AvailableSet, MultiIndex, Order, Quadratic};
use crate::error::{Error, Result};

/// Relative pivot size below which a matrix is reported singular.
pub const SINGULAR_PIVOT: f64 = 1e-14;

const SECULAR_MAX_ITERS: usize = 100;
const SECULAR_TOL: f64 = 1e-12;

/// A point in a ball together with the value attained there.
#[derive(Debug, Clone, PartialEq)]
pub struct BallExtremum {
    /// Offset from the ball center.
    pub point: DVector<f64>,
    pub value: f64,
}

/// Solution of `min gᵀs + ½sᵀHs` subject to `‖s‖ <= Δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustRegionStep {
    pub step: DVector<f64>,
    /// Lagrange multiplier of the norm constraint.
    pub multiplier: f64,
    /// Model change `gᵀs + ½sᵀHs` (never positive).
    pub value: f64,
    pub on_boundary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution {
    pub x: DVector<f64>,
    /// Reciprocal 1-norm condition number, `1 / (‖M‖₁ ‖M⁻¹‖₁)`.
    pub rcond: f64,
}

fn norm_inf(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn norm_one(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves `Mx = b` with partial pivoting.
pub fn solve_square(m: &DMatrix<f64>, b: &DVector<f64>) -> Result<LinearSolution> {
    assert!(m.is_square(), "solve_square needs a square matrix");
    assert_eq!(m.nrows(), b.len());
    let scale = norm_inf(m);
    let threshold = SINGULAR_PIVOT * scale;
    let lu = m.clone().lu();
    let u = lu.u();
    let pivot = u
        .diagonal()
        .iter()
        .map(|v| v.abs())
        .fold(f64::INFINITY, f64::min);
    if !(pivot > threshold) || scale == 0.0 {
        return Err(Error::Singular { pivot, threshold });
    }
    let x = lu.solve(b).ok_or(Error::Singular { pivot, threshold })?;
    let inv = lu
        .try_inverse()
        .ok_or(Error::Singular { pivot, threshold })?;
    let rcond = 1.0 / (norm_one(m) * norm_one(&inv));
    Ok(LinearSolution { x, rcond })
}

/// Inverse with the same singularity test as [`solve_square`].
pub fn inverse(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let scale = norm_inf(m);
    let threshold = SINGULAR_PIVOT * scale;
    let lu = m.clone().lu();
    let pivot = lu
        .u()
        .diagonal()
        .iter()
        .map(|v| v.abs())
        .fold(f64::INFINITY, f64::min);
    if !(pivot > threshold) || scale == 0.0 {
        return Err(Error::Singular { pivot, threshold });
    }
    let inv = lu
        .try_inverse()
        .ok_or(Error::Singular { pivot, threshold })?;
    let rcond = 1.0 / (norm_one(m) * norm_one(&inv));
    Ok((inv, rcond))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn eig_min_symmetric(h: &DMatrix<f64>) -> f64 {
    if h.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(h.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// `‖M⁻¹‖₂ = 1 / σ_min(M)`.
pub fn spectral_norm_inverse(m: &DMatrix<f64>) -> Result<f64> {
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let threshold = SINGULAR_PIVOT * norm_inf(m);
    if !(smin > threshold) || smax == 0.0 {
        return Err(Error::Singular {
            pivot: smin,
            threshold,
        });
    }
    Ok(1.0 / smin)
}

/// Spectral norm `‖M‖₂`.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

fn quad_value(g: &DVector<f64>, h: &DMatrix<f64>, s: &DVector<f64>) -> f64 {
    g.dot(s) + 0.5 * s.dot(&(h * s))
}

/// Global minimizer of `gᵀs + ½sᵀHs` over `‖s‖ <= Δ`.
pub fn min_quadratic_ball(g: &DVector<f64>, h: &DMatrix<f64>, delta: f64) -> TrustRegionStep {
    assert!(delta > 0.0, "trust-region radius must be positive");
    let n = g.len();
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lambda: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors: Vec<DVector<f64>> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    let gt: Vec<f64> = vectors.iter().map(|q| q.dot(g)).collect();

    let gnorm = g.norm();
    let hnorm = lambda.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let scale = gnorm + hnorm * delta;
    if scale == 0.0 {
        return TrustRegionStep {
            step: DVector::zeros(n),
            multiplier: 0.0,
            value: 0.0,
            on_boundary: false,
        };
    }

    let assemble = |mu: f64, skip: &dyn Fn(usize) -> bool| -> DVector<f64> {
        let mut s = DVector::zeros(n);
        for i in 0..n {
            if skip(i) || gt[i] == 0.0 {
                continue;
            }
            s.axpy(-gt[i] / (lambda[i] + mu), &vectors[i], 1.0);
        }
        s
    };
    let finish = |step: DVector<f64>, mu: f64, on_boundary: bool| {
        let value = quad_value(g, h, &step);
        TrustRegionStep {
            step,
            multiplier: mu,
            value,
            on_boundary,
        }
    };

    let lam1 = lambda[0];
    if lam1 > 0.0 {
        let newton = assemble(0.0, &|_| false);
        if newton.norm() <= delta {
            return finish(newton, 0.0, false);
        }
    }

    let lower = (-lam1).max(0.0);
    let eig_tol = 1e-12 * hnorm.max(f64::MIN_POSITIVE);
    let leading: Vec<usize> = (0..n).filter(|&i| lambda[i] <= lam1 + eig_tol).collect();
    let leading_g = leading.iter().map(|&i| gt[i] * gt[i]).sum::<f64>().sqrt();

    // Hard case: g has no component along the leftmost eigenspace and the
    // shifted solution fits strictly inside the ball.
    if lam1 <= 0.0 && leading_g <= 1e-13 * scale {
        let partial = assemble(lower, &|i| leading.contains(&i));
        let pn = partial.norm();
        if pn <= delta {
            let tau = (delta * delta - pn * pn).max(0.0).sqrt();
            let mut s = partial;
            let mut q1 = vectors[0].clone();
            // fix the sign so the result does not depend on the eigensolver
            let pivot = q1.iamax();
            if q1[pivot] < 0.0 {
                q1.neg_mut();
            }
            s.axpy(tau, &q1, 1.0);
            return finish(s, lower, true);
        }
    }

    let norm_at = |mu: f64| -> (f64, f64) {
        // returns (‖s(μ)‖, d‖s‖²/dμ · (-1/2)) = (Σ gt²/(λ+μ)²)^{1/2}, Σ gt²/(λ+μ)³
        let mut sq = 0.0;
        let mut cube = 0.0;
        for i in 0..n {
            if gt[i] == 0.0 {
                continue;
            }
            let d = lambda[i] + mu;
            sq += gt[i] * gt[i] / (d * d);
            cube += gt[i] * gt[i] / (d * d * d);
        }
        (sq.sqrt(), cube)
    };

    let mut lo = lower;
    let mut hi = (gnorm / delta - lam1).max(lower);
    // ψ(μ) = 1/‖s(μ)‖ - 1/Δ is increasing and concave on (lower, ∞)
    let psi = |norm: f64| {
        if norm > 0.0 {
            1.0 / norm - 1.0 / delta
        } else {
            f64::INFINITY
        }
    };
    let mut mu = hi;
    for _ in 0..SECULAR_MAX_ITERS {
        let (norm, cube) = norm_at(mu);
        let value = psi(norm);
        if (norm - delta).abs() <= SECULAR_TOL * delta {
            break;
        }
        if value < 0.0 {
            lo = mu;
        } else {
            hi = mu;
        }
        let deriv = cube / (norm * norm * norm);
        let newton = mu - value / deriv;
        mu = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    let mut s = assemble(mu, &|_| false);
    let sn = s.norm();
    if sn > 0.0 {
        s *= delta / sn;
    }
    finish(s, mu, true)
}

/// Maximizer of `|c + gᵀs + ½sᵀHs|` over `‖s‖ <= Δ`.
pub fn max_abs_quadratic_ball(
    c: f64,
    g: &DVector<f64>,
    h: &DMatrix<f64>,
    delta: f64,
) -> BallExtremum {
    if delta == 0.0 {
        return BallExtremum {
            point: DVector::zeros(g.len()),
            value: c.abs(),
        };
    }
    let lowest = min_quadratic_ball(g, h, delta);
    let highest = min_quadratic_ball(&(-g), &(-h), delta);
    let min_val = c + lowest.value;
    let max_val = c - highest.value;
    if max_val.abs() >= min_val.abs() {
        BallExtremum {
            point: highest.step,
            value: max_val.abs(),
        }
    } else {
        BallExtremum {
            point: lowest.step,
            value: min_val.abs(),
        }
    }
}

/// Maximizer of `|∂^α u(s)|` over `‖s‖ <= Δ` for a quadratic `u`.
pub fn max_abs_derivative_ball(u: &Quadratic, alpha: &MultiIndex, delta: f64) -> BallExtremum {
    let n = u.dim();
    match alpha.order() {
        Order::Zero => max_abs_quadratic_ball(u.constant(), &u.linear(), &u.hessian(), delta),
        Order::First(k) => {
            let gk = u.coeffs()[1 + k];
            let row = DVector::from_iterator(n, (0..n).map(|i| u.hess_entry(k, i)));
            let rn = row.norm();
            if rn == 0.0 {
                return BallExtremum {
                    point: DVector::zeros(n),
                    value: gk.abs(),
                };
            }
            let sign = if gk < 0.0 { -1.0 } else { 1.0 };
            BallExtremum {
                point: row * (sign * delta / rn),
                value: gk.abs() + delta * rn,
            }
        }
        Order::Second(k, l) => BallExtremum {
            point: DVector::zeros(n),
            value: u.hess_entry(k, l).abs(),
        },
    }
}

/// Maximizes `|∂^α u(s)|` jointly over the ball and `α ∈ A`. Ties go to the
/// earlier index in `A`'s order (smaller `|α|`, then lexicographic).
pub fn max_abs_over_available(
    u: &Quadratic,
    available: &AvailableSet,
    delta: f64,
) -> (MultiIndex, BallExtremum) {
    let mut best: Option<(MultiIndex, BallExtremum)> = None;
    for alpha in available.iter() {
        let cand = max_abs_derivative_ball(u, alpha, delta);
        if best.as_ref().is_none_or(|(_, b)| cand.value > b.value) {
            best = Some((alpha.clone(), cand));
        }
    }
    best.expect("available set always contains the zero index")
}

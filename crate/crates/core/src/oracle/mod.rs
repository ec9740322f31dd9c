//! Partial-derivative oracles: availability masks, cached queries with
//! distinct-query accounting, and the test-problem suite.

mod problems;

use std::collections::HashMap;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{AvailableSet, MultiIndex, Order};
use crate::data::Datum;
use crate::error::{Error, Result};

pub use problems::{
    problem_by_name, problem_suite, rosenbrock, rotated_quadratic2, sphere, FnObjective, Objective,
    Problem, QuadraticObjective, Residuals, SumOfSquares,
};

/// Which coordinates have known partial derivatives.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mask {
    /// Zero-based, sorted.
    pub known: Vec<usize>,
    pub available: AvailableSet,
}

impl Mask {
    pub fn from_known(n: usize, mut known: Vec<usize>) -> Self {
        known.sort_unstable();
        known.dedup();
        let available = AvailableSet::from_known(n, &known);
        Self { known, available }
    }

    pub fn full(n: usize) -> Self {
        Self::from_known(n, (0..n).collect())
    }

    pub fn lagrange(n: usize) -> Self {
        Self::from_known(n, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.available.dim()
    }
}

/// `|K| = max(1, ceil(fraction·n))`.
pub fn known_count(n: usize, fraction: f64) -> usize {
    // guard against 0.75·4 = 3.0000000000000004 style rounding
    (((fraction * n as f64) - 1e-12).ceil() as usize).clamp(1, n)
}

/// Samples `K` uniformly without replacement.
pub fn make_mask(n: usize, fraction: f64, seed: u64) -> Result<Mask> {
    if n == 0 {
        return Err(Error::InvalidParams(
            "mask dimension must be positive".into(),
        ));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let known = rand::seq::index::sample(&mut rng, n, known_count(n, fraction)).into_vec();
    Ok(Mask::from_known(n, known))
}

/// `∂^α f(x)` from the problem's analytic derivatives.
pub fn derivative(problem: &Problem, x: &DVector<f64>, alpha: &MultiIndex) -> f64 {
    match alpha.order() {
        Order::Zero => problem.f(x),
        Order::First(k) => problem.grad(x)[k],
        Order::Second(k, l) => problem.hess(x)[(k, l)],
    }
}

type Key = (Vec<u64>, MultiIndex);

fn key(x: &DVector<f64>, alpha: &MultiIndex) -> Key {
    (x.iter().map(|v| v.to_bits()).collect(), alpha.clone())
}

/// Cache of oracle answers keyed by exact `(x, α)`.
#[derive(Debug, Clone, Default)]
pub struct QueryLedger {
    cache: HashMap<Key, f64>,
    log: Vec<Datum>,
}

impl QueryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of distinct `(x, α)` pairs ever computed.
    pub fn distinct_count(&self) -> usize {
        self.cache.len()
    }

    /// Distinct queries divided by `n + 1`.
    pub fn units(&self, n: usize) -> f64 {
        self.distinct_count() as f64 / (n + 1) as f64
    }

    /// Every request in order, repeats included.
    pub fn log(&self) -> &[Datum] {
        &self.log
    }

    pub fn cached(&self, x: &DVector<f64>, alpha: &MultiIndex) -> Option<f64> {
        self.cache.get(&key(x, alpha)).copied()
    }
}

/// Distinct `(x, α)` pairs in a request log.
pub fn recount(log: &[Datum]) -> usize {
    log.iter()
        .map(|d| key(&d.point, &d.index))
        .collect::<std::collections::HashSet<_>>()
        .len()
}

pub fn query(
    ledger: &mut QueryLedger,
    problem: &Problem,
    mask: &Mask,
    x: &DVector<f64>,
    alpha: &MultiIndex,
) -> Result<f64> {
    if !mask.available.contains(alpha) {
        return Err(Error::Unavailable {
            alpha: alpha.clone(),
        });
    }
    ledger.log.push(Datum::new(x.clone(), alpha.clone()));
    let v = *ledger
        .cache
        .entry(key(x, alpha))
        .or_insert_with(|| derivative(problem, x, alpha));
    Ok(v)
}

/// Every available condition at `x`.
pub fn hermite_expand(x: &DVector<f64>, available: &AvailableSet) -> Vec<Datum> {
    available
        .iter()
        .map(|a| Datum::new(x.clone(), a.clone()))
        .collect()
}

/// A problem, a mask and a private ledger.
#[derive(Debug, Clone)]
pub struct Oracle {
    pub problem: Problem,
    pub mask: Mask,
    pub ledger: QueryLedger,
}

impl Oracle {
    pub fn new(problem: Problem, mask: Mask) -> Result<Self> {
        if mask.dim() != problem.n {
            return Err(Error::DimensionMismatch {
                expected: problem.n,
                found: mask.dim(),
            });
        }
        Ok(Self {
            problem,
            mask,
            ledger: QueryLedger::new(),
        })
    }

    pub fn query(&mut self, x: &DVector<f64>, alpha: &MultiIndex) -> Result<f64> {
        query(&mut self.ledger, &self.problem, &self.mask, x, alpha)
    }

    pub fn query_datum(&mut self, d: &Datum) -> Result<f64> {
        self.query(&d.point, &d.index)
    }

    pub fn units(&self) -> f64 {
        self.ledger.units(self.problem.n)
    }
}

//! Greedy pivot-polynomial completion of interpolation data to a poised set,
//! and one-condition geometry improvement.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use crate::basis::{basis_len, AvailableSet, MultiIndex, Quadratic};
use crate::data::{DataSet, Datum};
use crate::error::{Error, Result};
use crate::interp::{self, POISED_RCOND};
use crate::linalg;

pub const DEFAULT_XI_ACC: f64 = 1e-4;
pub const DEFAULT_XI_IMP: f64 = 2.0;

/// Lower bound on the normalization radius relative to `Δ`. History
/// clustered at the center would otherwise blow up every pivot value.
pub const MIN_SCALE_RATIO: f64 = 0.1;

/// Positive weight `w(y, α)`; candidate values are divided by it.
pub type WeightFn = Arc<dyn Fn(&DVector<f64>, &MultiIndex) -> f64 + Send + Sync>;

/// How each pivot polynomial is paired with a multi-index.
#[derive(Debug, Clone, Default, PartialEq)]
pub enum AlphaSelection {
    /// Search all of `A` for every pivot.
    #[default]
    PerPivot,
    /// Pivot `i` (for `i = 1..=q`) may only use `schedule[i - 1]`.
    Fixed(Vec<MultiIndex>),
}

#[derive(Clone, Default)]
pub struct CompletionOptions {
    pub weight: Option<WeightFn>,
    pub selection: AlphaSelection,
}

impl fmt::Debug for CompletionOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompletionOptions")
            .field("weight", &self.weight.as_ref().map(|_| "<fn>"))
            .field("selection", &self.selection)
            .finish()
    }
}

impl CompletionOptions {
    fn weight(&self, y: &DVector<f64>, alpha: &MultiIndex) -> f64 {
        self.weight.as_ref().map_or(1.0, |w| w(y, alpha))
    }
}

/// Where a selected condition came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    /// Position in the input history.
    History(usize),
    /// The center, absent from the history.
    Seed,
    /// Generated by maximizing over the trust region.
    Geometry,
}

#[derive(Debug, Clone)]
pub struct CompletionResult {
    /// Exactly `q + 1` conditions, `(y⁰, 0)` first.
    pub data: DataSet,
    pub sources: Vec<Source>,
    /// Signed `∂^{βⁱ} uᵢ(ẑⁱ)`.
    pub pivot_values: Vec<f64>,
    /// Pivot polynomials after elimination, in the normalized frame.
    pub pivots: Vec<Quadratic>,
    /// Conditions not present in the history.
    pub new_evals: Vec<Datum>,
    /// Normalization radius used throughout the run.
    pub scale: f64,
}

impl CompletionResult {
    pub fn final_pivot(&self) -> &Quadratic {
        self.pivots.last().expect("nonempty pivot basis")
    }

    /// `(y - y⁰) / scale`.
    pub fn normalize(&self, y: &DVector<f64>) -> DVector<f64> {
        (y - self.data.center()) / self.scale
    }

    /// Smallest `|pivot value|`.
    pub fn min_pivot(&self) -> f64 {
        self.pivot_values
            .iter()
            .map(|v| v.abs())
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone)]
pub enum Improvement {
    Improved(CompletionResult),
    /// No single swap beats the last pivot by the factor `ξ_imp`.
    NoImprovement(CompletionResult),
}

impl Improvement {
    pub fn result(&self) -> &CompletionResult {
        match self {
            Improvement::Improved(r) | Improvement::NoImprovement(r) => r,
        }
    }

    pub fn into_result(self) -> CompletionResult {
        match self {
            Improvement::Improved(r) | Improvement::NoImprovement(r) => r,
        }
    }

    pub fn improved(&self) -> bool {
        matches!(self, Improvement::Improved(_))
    }
}

fn check_inputs(
    center: &DVector<f64>,
    delta: f64,
    xi_acc: f64,
    available: &AvailableSet,
) -> Result<()> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParams(format!(
            "trust radius must be positive, got {delta}"
        )));
    }
    if !(xi_acc > 0.0) {
        return Err(Error::InvalidParams(format!(
            "xi_acc must be positive, got {xi_acc}"
        )));
    }
    if available.dim() != center.len() {
        return Err(Error::DimensionMismatch {
            expected: center.len(),
            found: available.dim(),
        });
    }
    Ok(())
}

/// Completes `history` to `q + 1` conditions around `center`, picking from
/// the history when a pivot exceeds `ξ_acc` and from `B(y⁰, Δ) × A`
/// otherwise.
pub fn complete(
    history: &[Datum],
    center: &DVector<f64>,
    delta: f64,
    xi_acc: f64,
    available: &AvailableSet,
    opts: &CompletionOptions,
) -> Result<CompletionResult> {
    check_inputs(center, delta, xi_acc, available)?;
    let n = center.len();
    let q1 = basis_len(n);
    if let AlphaSelection::Fixed(s) = &opts.selection {
        if s.len() != q1 - 1 {
            return Err(Error::DimensionMismatch {
                expected: q1 - 1,
                found: s.len(),
            });
        }
    }
    for d in history {
        if d.point.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: d.point.len(),
            });
        }
    }

    let seed = Datum::value(center.clone());
    let seed_source = history
        .iter()
        .position(|d| d.same_as(&seed))
        .map_or(Source::Seed, Source::History);

    // Lines 1-2: remaining candidates, with their original positions.
    let mut pool: Vec<(usize, &Datum)> = history
        .iter()
        .enumerate()
        .filter(|(i, d)| {
            Source::History(*i) != seed_source && interp::in_ball(&d.point, center, delta)
        })
        .collect();

    let scale = pool
        .iter()
        .map(|(_, d)| (&d.point - center).norm())
        .fold(MIN_SCALE_RATIO * delta, f64::max);
    let ball = delta / scale;

    let mut pivots: Vec<Quadratic> = (0..q1).map(|j| Quadratic::basis_function(n, j)).collect();
    let mut items = Vec::with_capacity(q1);
    let mut sources = Vec::with_capacity(q1);
    let mut values = Vec::with_capacity(q1);
    let mut new_evals = Vec::new();

    let mut select = |i: usize,
                      datum: Datum,
                      zhat: DVector<f64>,
                      source: Source,
                      pivots: &mut Vec<Quadratic>| {
        let (head, tail) = pivots.split_at_mut(i + 1);
        let ui = &head[i];
        let pivot = ui.derivative(&datum.index, &zhat);
        for uj in tail.iter_mut() {
            let factor = uj.derivative(&datum.index, &zhat) / pivot;
            if factor != 0.0 {
                uj.axpy(factor, ui);
            }
        }
        if source == Source::Seed || source == Source::Geometry {
            new_evals.push(datum.clone());
        }
        values.push(pivot);
        sources.push(source);
        items.push(datum);
    };

    select(0, seed, DVector::zeros(n), seed_source, &mut pivots);

    for i in 1..q1 {
        let allowed = |a: &MultiIndex| match &opts.selection {
            AlphaSelection::PerPivot => true,
            AlphaSelection::Fixed(s) => *a == s[i - 1],
        };
        let ui = &pivots[i];

        // Lines 4-5
        let mut best: Option<(usize, f64)> = None;
        for (slot, (_, d)) in pool.iter().enumerate() {
            if !allowed(&d.index) {
                continue;
            }
            let v = ui
                .derivative(&d.index, &((&d.point - center) / scale))
                .abs()
                / opts.weight(&d.point, &d.index);
            let better = match best {
                None => true,
                Some((b, bv)) => {
                    v > bv || (v == bv && d.index.total_order() < pool[b].1.index.total_order())
                }
            };
            if better {
                best = Some((slot, v));
            }
        }

        match best {
            Some((slot, v)) if v > xi_acc => {
                let (pos, d) = pool.remove(slot);
                let zhat = (&d.point - center) / scale;
                select(i, d.clone(), zhat, Source::History(pos), &mut pivots);
            }
            _ => {
                // Lines 8-12
                let mut found: Option<(MultiIndex, DVector<f64>, f64)> = None;
                for alpha in available.iter().filter(|a| allowed(a)) {
                    let ext = linalg::max_abs_derivative_ball(ui, alpha, ball);
                    let z = center + &ext.point * scale;
                    let v = ext.value / opts.weight(&z, alpha);
                    if found.as_ref().is_none_or(|(_, _, bv)| v > *bv) {
                        found = Some((alpha.clone(), ext.point, v));
                    }
                }
                let best = found.as_ref().map_or(0.0, |f| f.2);
                let Some((alpha, zhat, _)) = found.filter(|f| f.2 >= xi_acc) else {
                    return Err(Error::CompletionFailed {
                        pivot: i,
                        best,
                        threshold: xi_acc,
                    });
                };
                let datum = Datum::new(center + &zhat * scale, alpha);
                select(i, datum, zhat, Source::Geometry, &mut pivots);
            }
        }
    }

    Ok(CompletionResult {
        data: DataSet::new(items)?,
        sources,
        pivot_values: values,
        pivots,
        new_evals,
        scale,
    })
}

/// Runs [`complete`] and then tries to replace the last pivoted condition
/// by the maximizer of `|∂^α u_q|` over `B(y⁰, Δ) × A`.
pub fn improve(
    history: &[Datum],
    center: &DVector<f64>,
    delta: f64,
    xi_acc: f64,
    xi_imp: f64,
    available: &AvailableSet,
    opts: &CompletionOptions,
) -> Result<Improvement> {
    if !(xi_imp > 1.0) {
        return Err(Error::InvalidParams(format!(
            "xi_imp must exceed 1, got {xi_imp}"
        )));
    }
    let mut res = complete(history, center, delta, xi_acc, available, opts)?;
    let q = res.pivots.len() - 1;
    let uq = res.final_pivot().clone();
    let (alpha, ext) = linalg::max_abs_over_available(&uq, available, delta / res.scale);
    if !(ext.value > xi_imp * res.pivot_values[q].abs()) {
        return Ok(Improvement::NoImprovement(res));
    }

    let datum = Datum::new(center + &ext.point * res.scale, alpha);
    let mut items = res.data.items().to_vec();
    let old = std::mem::replace(&mut items[q], datum.clone());
    let data = DataSet::new(items)?;
    let polys = interp::birkhoff_polynomials(&data).map_err(|_| Error::RecertificationFailed)?;
    if polys.rcond < POISED_RCOND {
        return Err(Error::RecertificationFailed);
    }

    res.new_evals.retain(|d| !d.same_as(&old));
    if !history.iter().any(|d| d.same_as(&datum)) {
        res.new_evals.push(datum.clone());
    }
    res.pivot_values[q] = uq.derivative(&datum.index, &ext.point);
    res.sources[q] = Source::Geometry;
    res.data = data;
    Ok(Improvement::Improved(res))
}

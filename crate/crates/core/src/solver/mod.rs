//! Derivative-free trust-region method driven by Birkhoff interpolation
//! models, plus a Hermite least-squares baseline.

mod hermite;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::basis::{basis_len, AvailableSet};
use crate::data::{same_point, DataSet, Datum, QuadraticModel};
use crate::error::{Error, Result};
use crate::interp;
use crate::linalg;
use crate::oracle::{Mask, Oracle, Problem, QueryLedger};
use crate::pivot::{self, CompletionOptions, CompletionResult, Improvement};

pub use hermite::HermiteBuilder;

/// How `Δ̃` is generated in the criticality step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalityRadius {
    /// `Δ(Y)` of the improved data.
    #[default]
    DataRadius,
    /// Keep the current radius.
    Current,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    pub eta: f64,
    pub gamma_dec: f64,
    pub gamma_inc: f64,
    pub eps_c: f64,
    pub beta: f64,
    pub mu: f64,
    pub delta0: f64,
    pub delta_max: f64,
    pub xi_acc: f64,
    pub xi_imp: f64,
    /// Maximum distinct oracle queries divided by `n + 1`.
    pub budget: Option<f64>,
    pub max_iters: usize,
    pub stop_sigma: f64,
    pub stop_delta: f64,
    /// Expand with `max(γ_inc Δ, Δ_max)` as literally written.
    pub literal_expand: bool,
    pub criticality_radius: CriticalityRadius,
    /// Halvings of `ξ_acc` tried when completion fails.
    pub max_retries: u32,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            eta: 0.1,
            gamma_dec: 0.5,
            gamma_inc: 2.0,
            eps_c: 1e-2,
            beta: 1.0,
            mu: 2.0,
            delta0: 1.0,
            delta_max: 1e3,
            xi_acc: pivot::DEFAULT_XI_ACC,
            xi_imp: pivot::DEFAULT_XI_IMP,
            budget: None,
            max_iters: 10_000,
            stop_sigma: 1e-9,
            stop_delta: 1e-13,
            literal_expand: false,
            criticality_radius: CriticalityRadius::DataRadius,
            max_retries: 10,
        }
    }
}

impl SolverParams {
    /// Defaults with `Δ₀` set and `Δ_max = 10³ Δ₀`.
    pub fn with_delta0(delta0: f64) -> Self {
        Self {
            delta0,
            delta_max: 1e3 * delta0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if !(0.0..1.0).contains(&self.eta) {
            return bad("need 0 <= eta < 1");
        }
        if !(0.0 < self.gamma_dec && self.gamma_dec < 1.0 && 1.0 < self.gamma_inc) {
            return bad("need 0 < gamma_dec < 1 < gamma_inc");
        }
        if !(self.eps_c > 0.0) {
            return bad("need eps_c > 0");
        }
        if !(self.mu > self.beta && self.beta > 0.0) {
            return bad("need mu > beta > 0");
        }
        if !(0.0 < self.delta0 && self.delta0 < self.delta_max) {
            return bad("need 0 < delta0 < delta_max");
        }
        if !(self.xi_acc > 0.0) || !(self.xi_imp > 1.0) {
            return bad("need xi_acc > 0 and xi_imp > 1");
        }
        if self.budget.is_some_and(|b| !(b > 0.0)) {
            return bad("budget must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    SigmaSmall,
    DeltaSmall,
    Budget,
    Unrecoverable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceEvent {
    Accept,
    Reject,
    /// Stopped after a criticality step.
    Criticality,
    Failure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub x: Vec<f64>,
    pub f: f64,
    pub delta: f64,
    pub sigma: f64,
    pub rho: Option<f64>,
    pub step_norm: f64,
    pub model_digest: String,
    /// Ledger distinct count at the end of the iteration.
    pub queries: usize,
    pub units: f64,
    pub event: TraceEvent,
    pub criticality: bool,
    /// Largest violation of the interpolation conditions by the model.
    pub interp_residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveResult {
    pub x_final: Vec<f64>,
    pub f_final: f64,
    pub trace: Vec<TraceRow>,
    pub termination: Termination,
    pub queries: usize,
    pub units: f64,
    /// Present when the run stopped on a completion failure.
    pub diagnostic: Option<String>,
    #[serde(skip)]
    pub ledger: QueryLedger,
}

/// `‖∇f(x)‖ <= τ` with the true gradient.
pub fn check_stationarity(problem: &Problem, x: &DVector<f64>, tau: f64) -> bool {
    tau.is_infinite() || problem.grad(x).norm() <= tau
}

/// FNV-1a over the coefficient bit patterns.
pub fn digest(coeffs: &[f64]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in coeffs {
        for b in v.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    format!("{h:016x}")
}

/// `max(‖g‖, -λ_min(H))`.
pub fn criticality_measure(model: &QuadraticModel) -> f64 {
    model.g().norm().max(-linalg::eig_min_symmetric(&model.h()))
}

/// A model together with the conditions it was fitted to.
#[derive(Debug, Clone)]
pub struct Built {
    pub model: QuadraticModel,
    pub working: Vec<Datum>,
    pub interp_residual: f64,
}

impl Built {
    pub fn data_radius(&self) -> f64 {
        let c = &self.model.center;
        self.working
            .iter()
            .map(|d| (&d.point - c).norm())
            .fold(0.0, f64::max)
    }
}

/// Produces interpolation models from the history `D̄`.
pub trait ModelBuilder {
    /// Builds a model centered at `x` and appends newly queried conditions
    /// to `history`.
    fn build(
        &mut self,
        oracle: &mut Oracle,
        history: &mut Vec<Datum>,
        x: &DVector<f64>,
        delta: f64,
        params: &SolverParams,
    ) -> Result<Built>;

    /// One geometry improvement. The flag is false when no swap was possible.
    fn improve(
        &mut self,
        oracle: &mut Oracle,
        history: &mut Vec<Datum>,
        x: &DVector<f64>,
        delta: f64,
        params: &SolverParams,
    ) -> Result<(Built, bool)>;
}

fn push_unique(history: &mut Vec<Datum>, d: Datum) {
    if !history.iter().any(|h| h.same_as(&d)) {
        history.push(d);
    }
}

/// Retries `f` with `ξ_acc` halved after each completion failure.
pub(crate) fn with_retries<T>(
    params: &SolverParams,
    mut f: impl FnMut(f64) -> Result<T>,
) -> Result<T> {
    let mut xi = params.xi_acc;
    let mut last = None;
    for _ in 0..=params.max_retries {
        match f(xi) {
            Err(e @ Error::CompletionFailed { .. }) => {
                last = Some(e);
                xi *= 0.5;
            }
            other => return other,
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Interpolation model from an exactly determined data set.
pub(crate) fn fit(oracle: &mut Oracle, data: &DataSet) -> Result<Built> {
    let rhs = DVector::from_iterator(
        data.len(),
        data.items()
            .iter()
            .map(|d| oracle.query_datum(d))
            .collect::<Result<Vec<_>>>()?,
    );
    let model = interp::solve_model(data, &rhs)?;
    let interp_residual = interp::interpolation_residual(&model, data, &rhs);
    Ok(Built {
        model,
        working: data.items().to_vec(),
        interp_residual,
    })
}

/// Greedy pivot completion over all available conditions.
#[derive(Debug, Clone, Default)]
pub struct BirkhoffBuilder {
    pub options: CompletionOptions,
}

impl BirkhoffBuilder {
    fn finish(
        &self,
        oracle: &mut Oracle,
        history: &mut Vec<Datum>,
        res: &CompletionResult,
    ) -> Result<Built> {
        for d in &res.new_evals {
            push_unique(history, d.clone());
        }
        fit(oracle, &res.data)
    }
}

impl ModelBuilder for BirkhoffBuilder {
    fn build(
        &mut self,
        oracle: &mut Oracle,
        history: &mut Vec<Datum>,
        x: &DVector<f64>,
        delta: f64,
        params: &SolverParams,
    ) -> Result<Built> {
        let a = oracle.mask.available.clone();
        let res = with_retries(params, |xi| {
            pivot::complete(history, x, delta, xi, &a, &self.options)
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
        let a = oracle.mask.available.clone();
        let imp = with_retries(params, |xi| {
            match pivot::improve(history, x, delta, xi, params.xi_imp, &a, &self.options) {
                Err(Error::RecertificationFailed) => {
                    pivot::complete(history, x, delta, xi, &a, &self.options)
                        .map(Improvement::NoImprovement)
                }
                other => other,
            }
        })?;
        let improved = imp.improved();
        let built = self.finish(oracle, history, imp.result())?;
        Ok((built, improved))
    }
}

/// Keeps the `50(q+1)` most recent data plus everything within `2Δ`.
fn prune(history: &mut Vec<Datum>, x: &DVector<f64>, delta: f64) {
    let n = x.len();
    let keep_recent = 50 * basis_len(n);
    if history.len() <= keep_recent {
        return;
    }
    let cut = history.len() - keep_recent;
    let mut i = 0;
    history.retain(|d| {
        i += 1;
        i > cut || (&d.point - x).norm() <= 2.0 * delta
    });
}

/// Algorithm driver shared by both model builders.
pub fn run<B: ModelBuilder>(
    builder: &mut B,
    problem: &Problem,
    mask: &Mask,
    x0: &DVector<f64>,
    params: &SolverParams,
) -> Result<SolveResult> {
    params.validate()?;
    if x0.len() != problem.n || x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParams(
            "x0 must be finite with the problem's dimension".into(),
        ));
    }
    let mut oracle = Oracle::new(problem.clone(), mask.clone())?;
    let n = problem.n;
    let zero = crate::basis::MultiIndex::zero(n);

    let mut x = x0.clone();
    let mut fx = oracle.query(&x, &zero)?;
    let mut delta = params.delta0;
    let mut history = vec![Datum::value(x.clone())];
    let mut trace = Vec::new();
    let mut diagnostic = None;

    let over_budget = |o: &Oracle| params.budget.is_some_and(|b| o.units() >= b);

    let termination = 'outer: loop {
        let k = trace.len();
        if k >= params.max_iters || over_budget(&oracle) {
            break Termination::Budget;
        }
        if delta <= params.stop_delta {
            break Termination::DeltaSmall;
        }

        let row = |x: &DVector<f64>, f, delta, sigma, built: &Built, o: &Oracle| TraceRow {
            k,
            x: x.iter().copied().collect(),
            f,
            delta,
            sigma,
            rho: None,
            step_norm: 0.0,
            model_digest: digest(built.model.coeffs().as_slice()),
            queries: o.ledger.distinct_count(),
            units: o.units(),
            event: TraceEvent::Reject,
            criticality: false,
            interp_residual: built.interp_residual,
        };

        let mut built = match builder.build(&mut oracle, &mut history, &x, delta, params) {
            Ok(b) => b,
            Err(e @ Error::CompletionFailed { .. }) => {
                diagnostic = Some(e.to_string());
                break Termination::Unrecoverable;
            }
            Err(e) => return Err(e),
        };
        let mut sigma = criticality_measure(&built.model);

        // criticality step; also the certificate for the stationarity stop
        let critical = sigma <= params.eps_c && delta > params.mu * sigma;
        if critical || sigma <= params.stop_sigma {
            let (b, improved) = match builder.improve(&mut oracle, &mut history, &x, delta, params)
            {
                Ok(r) => r,
                Err(e @ Error::CompletionFailed { .. }) => {
                    diagnostic = Some(e.to_string());
                    break Termination::Unrecoverable;
                }
                Err(e) => return Err(e),
            };
            built = b;
            sigma = criticality_measure(&built.model);
            if critical {
                let tilde = match params.criticality_radius {
                    CriticalityRadius::DataRadius => built.data_radius(),
                    CriticalityRadius::Current => delta,
                };
                delta = tilde.max(params.beta * sigma).min(delta);
            }
            if sigma <= params.stop_sigma && !improved {
                let mut r = row(&x, fx, delta, sigma, &built, &oracle);
                r.event = TraceEvent::Criticality;
                r.criticality = critical;
                trace.push(r);
                break Termination::SigmaSmall;
            }
            if delta <= params.stop_delta {
                let mut r = row(&x, fx, delta, sigma, &built, &oracle);
                r.criticality = critical;
                trace.push(r);
                break Termination::DeltaSmall;
            }
        }

        let step = linalg::min_quadratic_ball(&built.model.g(), &built.model.h(), delta);
        let s_norm = step.step.norm();
        let xt = &x + &step.step;
        let ft = oracle.query(&xt, &zero)?;
        let predicted = -step.value;
        let actual = fx - ft;
        let mut force_shrink = false;
        let rho = if predicted <= 1e-14 * (1.0 + fx.abs()) {
            if actual >= 0.0 && s_norm == 0.0 {
                force_shrink = true;
            }
            f64::NEG_INFINITY
        } else {
            actual / predicted
        };
        push_unique(&mut history, Datum::value(xt.clone()));

        let accepted = rho >= params.eta;
        let mut r = row(&x, fx, delta, sigma, &built, &oracle);
        r.rho = Some(rho).filter(|v| v.is_finite());
        r.step_norm = s_norm;
        r.criticality = critical;
        if accepted {
            x = xt;
            fx = ft;
            r.event = TraceEvent::Accept;
        } else if let Err(e) = builder.improve(&mut oracle, &mut history, &x, delta, params) {
            match e {
                Error::CompletionFailed { .. } => {
                    diagnostic = Some(e.to_string());
                    r.event = TraceEvent::Failure;
                    r.queries = oracle.ledger.distinct_count();
                    r.units = oracle.units();
                    trace.push(r);
                    break 'outer Termination::Unrecoverable;
                }
                e => return Err(e),
            }
        }

        let old_delta = delta;
        if accepted && s_norm >= old_delta * (1.0 - 1e-10) {
            delta = if params.literal_expand {
                (params.gamma_inc * old_delta).max(params.delta_max)
            } else {
                (params.gamma_inc * old_delta).min(params.delta_max)
            };
        } else if force_shrink
            || (!accepted
                && built
                    .working
                    .iter()
                    .all(|d| interp::in_ball(&d.point, &built.model.center, old_delta)))
        {
            delta = params.gamma_dec * old_delta;
        }

        r.queries = oracle.ledger.distinct_count();
        r.units = oracle.units();
        trace.push(r);
        prune(&mut history, &x, delta);
        debug_assert!(history
            .iter()
            .any(|d| d.index.is_zero() && same_point(&d.point, &x)));
    };

    Ok(SolveResult {
        x_final: x.iter().copied().collect(),
        f_final: fx,
        trace,
        termination,
        queries: oracle.ledger.distinct_count(),
        units: oracle.units(),
        diagnostic,
        ledger: oracle.ledger,
    })
}

/// Trust-region method with Birkhoff models.
pub fn solve(
    problem: &Problem,
    mask: &Mask,
    x0: &DVector<f64>,
    params: &SolverParams,
) -> Result<SolveResult> {
    run(&mut BirkhoffBuilder::default(), problem, mask, x0, params)
}

/// Baseline that queries every available derivative at each chosen point and
/// fits by least squares.
pub fn hermite_solve(
    problem: &Problem,
    mask: &Mask,
    x0: &DVector<f64>,
    params: &SolverParams,
) -> Result<SolveResult> {
    run(&mut HermiteBuilder::default(), problem, mask, x0, params)
}

/// Available set for function values only.
pub(crate) fn lagrange_set(n: usize) -> AvailableSet {
    AvailableSet::lagrange(n)
}

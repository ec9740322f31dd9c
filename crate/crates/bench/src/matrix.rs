//! Runs a benchmark matrix on a worker pool.

use birkhoff::oracle::{make_mask, problem_by_name};
use birkhoff::solver::{hermite_solve, solve, SolveResult, SolverParams, Termination};
use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RunConfig, SolverKind};
use crate::{BenchError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunKey {
    pub problem: String,
    pub fraction: f64,
    pub seed: u64,
    pub solver: SolverKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    #[serde(flatten)]
    pub key: RunKey,
    pub n: usize,
    pub known: Vec<usize>,
    pub termination: Option<Termination>,
    pub units: f64,
    pub f0: f64,
    pub f_final: f64,
    /// `(units, ‖∇f(x_k)‖)` per trace row.
    #[serde(skip)]
    pub progress: Vec<(f64, f64)>,
    pub error: Option<String>,
}

impl RunRecord {
    /// Units spent when `‖∇f‖ <= tau` first held, if within `budget`.
    pub fn units_to_solve(&self, tau: f64, budget: f64) -> Option<f64> {
        self.progress
            .iter()
            .find(|&&(_, g)| g <= tau)
            .map(|&(u, _)| u)
            .filter(|&u| u <= budget)
    }
}

/// Keys in `(problem, fraction, seed, solver)` order.
pub fn keys(config: &RunConfig) -> Vec<RunKey> {
    let mut out = Vec::new();
    for problem in config.problem_names() {
        for &fraction in &config.fractions {
            for &seed in &config.seeds {
                for &solver in &config.solvers {
                    out.push(RunKey {
                        problem: problem.clone(),
                        fraction,
                        seed,
                        solver,
                    });
                }
            }
        }
    }
    out
}

pub fn run_one(key: &RunKey, params: &SolverParams) -> Result<(RunRecord, SolveResult)> {
    let p = problem_by_name(&key.problem)
        .ok_or_else(|| BenchError::Usage(format!("unknown problem `{}`", key.problem)))?;
    let mask = make_mask(p.n, key.fraction, key.seed)?;
    let res = match key.solver {
        SolverKind::Birkhoff => solve(&p, &mask, &p.x0, params)?,
        SolverKind::Hermite => hermite_solve(&p, &mask, &p.x0, params)?,
    };
    let progress = res
        .trace
        .iter()
        .map(|r| (r.units, p.grad(&DVector::from_vec(r.x.clone())).norm()))
        .collect();
    let record = RunRecord {
        key: key.clone(),
        n: p.n,
        known: mask.known.clone(),
        termination: Some(res.termination),
        units: res.units,
        f0: p.f(&p.x0),
        f_final: res.f_final,
        progress,
        error: None,
    };
    Ok((record, res))
}

/// Every run of the matrix, in key order. Individual failures are recorded
/// rather than propagated.
pub fn run_matrix(config: &RunConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let params = SolverParams {
        budget: Some(config.budget),
        ..config.params.clone()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| BenchError::Usage(format!("cannot build worker pool: {e}")))?;
    let keys = keys(config);
    let records = pool.install(|| {
        keys.par_iter()
            .map(|k| match run_one(k, &params) {
                Ok((r, _)) => r,
                Err(e) => RunRecord {
                    key: k.clone(),
                    n: 0,
                    known: Vec::new(),
                    termination: None,
                    units: 0.0,
                    f0: f64::NAN,
                    f_final: f64::NAN,
                    progress: Vec::new(),
                    error: Some(e.to_string()),
                },
            })
            .collect()
    });
    Ok(records)
}

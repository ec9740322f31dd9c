//! TOML run and heatmap configurations.

use std::path::Path;

use birkhoff::basis::{AvailableSet, MultiIndex};
use birkhoff::oracle::problem_suite;
use birkhoff::solver::SolverParams;
use birkhoff::Datum;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::{BenchError, Result};

#[derive(
    Debug,
    Clone,
    Copy,
    PartialEq,
    Eq,
    PartialOrd,
    Ord,
    Hash,
    Serialize,
    Deserialize,
    clap::ValueEnum,
)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Birkhoff,
    Hermite,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Birkhoff => "birkhoff",
            SolverKind::Hermite => "hermite",
        }
    }
}

/// A benchmark matrix: every problem × fraction × seed × solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Empty means the whole suite.
    pub problems: Vec<String>,
    pub fractions: Vec<f64>,
    pub seeds: Vec<u64>,
    pub solvers: Vec<SolverKind>,
    pub taus: Vec<f64>,
    /// Budget in units of `n + 1` distinct queries.
    pub budget: f64,
    /// Worker threads; 0 uses every logical core. Not echoed into outputs.
    #[serde(skip_serializing)]
    pub threads: usize,
    pub params: SolverParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problems: Vec::new(),
            fractions: vec![0.25, 0.5, 0.75],
            seeds: vec![1, 2, 3],
            solvers: vec![SolverKind::Birkhoff],
            taus: vec![1e-2],
            budget: 200.0,
            threads: 0,
            params: SolverParams::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| BenchError::Usage(format!("bad run config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn problem_names(&self) -> Vec<String> {
        if self.problems.is_empty() {
            problem_suite().into_iter().map(|p| p.name).collect()
        } else {
            self.problems.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |m: &str| Err(BenchError::Usage(m.into()));
        if self.fractions.is_empty()
            || self.seeds.is_empty()
            || self.solvers.is_empty()
            || self.taus.is_empty()
        {
            return usage("fractions, seeds, solvers and taus must be nonempty");
        }
        if self.fractions.iter().any(|&f| !(f > 0.0 && f <= 1.0)) {
            return usage("fractions must lie in (0, 1]");
        }
        if self.taus.iter().any(|&t| !(t > 0.0)) {
            return usage("taus must be positive");
        }
        if !(self.budget >= 0.0) {
            return usage("budget must be nonnegative");
        }
        for name in self.problem_names() {
            birkhoff::oracle::problem_by_name(&name)
                .ok_or_else(|| BenchError::Usage(format!("unknown problem `{name}`")))?;
        }
        self.params
            .validate()
            .map_err(|e| BenchError::Usage(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionSpec {
    pub point: Vec<f64>,
    pub alpha: Vec<u8>,
}

/// Base data and the indices placed at each grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatmapConfig {
    pub radius: f64,
    pub resolution: usize,
    /// Zero-based coordinates with known derivatives; `A` is built from them.
    pub known: Vec<usize>,
    /// First entry is the center `(y⁰, 0)`.
    pub base: Vec<ConditionSpec>,
    pub additions: Vec<Vec<u8>>,
}

impl HeatmapConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| BenchError::Usage(format!("bad heatmap config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn base_data(&self) -> Vec<Datum> {
        self.base
            .iter()
            .map(|c| {
                Datum::new(
                    DVector::from_vec(c.point.clone()),
                    MultiIndex::new(c.alpha.clone()),
                )
            })
            .collect()
    }

    pub fn addition_indices(&self) -> Vec<MultiIndex> {
        self.additions
            .iter()
            .cloned()
            .map(MultiIndex::new)
            .collect()
    }

    pub fn available(&self) -> AvailableSet {
        let n = self.base.first().map_or(2, |c| c.point.len());
        AvailableSet::from_known(n, &self.known)
    }
}

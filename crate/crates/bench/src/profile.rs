//! Data profiles: fraction of runs solved against normalized units.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{RunConfig, SolverKind};
use crate::matrix::RunRecord;
use crate::{Result, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub normalized_units: f64,
    pub fraction_solved: f64,
}

/// A right-continuous step function starting at `(0, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub solver: SolverKind,
    pub fraction: f64,
    pub tau: f64,
    pub runs: usize,
    pub solved: usize,
    /// Median units-to-solve with unsolved runs counted as `+∞`; `None`
    /// when that median is infinite.
    pub median_units: Option<f64>,
    pub points: Vec<ProfilePoint>,
}

impl Curve {
    /// Fraction solved within `units`.
    pub fn value_at(&self, units: f64) -> f64 {
        self.points
            .iter()
            .take_while(|p| p.normalized_units <= units)
            .last()
            .map_or(0.0, |p| p.fraction_solved)
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m == 0 {
        f64::INFINITY
    } else if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

pub fn curve(
    records: &[&RunRecord],
    solver: SolverKind,
    fraction: f64,
    tau: f64,
    budget: f64,
) -> Curve {
    let costs: Vec<f64> = records
        .iter()
        .map(|r| r.units_to_solve(tau, budget).unwrap_or(f64::INFINITY))
        .collect();
    let runs = costs.len();
    let mut solved: Vec<f64> = costs.iter().copied().filter(|c| c.is_finite()).collect();
    solved.sort_by(f64::total_cmp);
    let mut points = vec![ProfilePoint {
        normalized_units: 0.0,
        fraction_solved: 0.0,
    }];
    for (i, &u) in solved.iter().enumerate() {
        let frac = (i + 1) as f64 / runs as f64;
        match points.last_mut() {
            Some(last) if last.normalized_units == u => last.fraction_solved = frac,
            _ => points.push(ProfilePoint {
                normalized_units: u,
                fraction_solved: frac,
            }),
        }
    }
    let med = median(costs);
    Curve {
        solver,
        fraction,
        tau,
        runs,
        solved: solved.len(),
        median_units: med.is_finite().then_some(med),
        points,
    }
}

/// One curve per `(solver, fraction, tau)`, in config order.
pub fn curves(config: &RunConfig, records: &[RunRecord]) -> Vec<Curve> {
    let mut out = Vec::new();
    for &solver in &config.solvers {
        for &fraction in &config.fractions {
            let group: Vec<&RunRecord> = records
                .iter()
                .filter(|r| r.key.solver == solver && r.key.fraction == fraction)
                .collect();
            for &tau in &config.taus {
                out.push(curve(&group, solver, fraction, tau, config.budget));
            }
        }
    }
    out
}

pub fn curve_csv(c: &Curve, problems: usize, seeds: usize) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "# schema bdfo-profile/{SCHEMA_VERSION} solver={} fraction={} tau={} runs={} problems={problems} seeds={seeds} suite=native-analytic (stands in for the 89-problem CUTEst set)",
        c.solver.name(),
        c.fraction,
        c.tau,
        c.runs
    )
    .unwrap();
    s.push_str("normalized_units,fraction_solved\n");
    for p in &c.points {
        writeln!(s, "{},{}", p.normalized_units, p.fraction_solved).unwrap();
    }
    s
}

#[derive(Serialize)]
struct ProfileDoc<'a> {
    schema_version: u32,
    config: &'a RunConfig,
    curves: &'a [Curve],
    runs: &'a [RunRecord],
}

pub fn curve_file_name(c: &Curve) -> String {
    format!(
        "profile_{}_f{}_tau{:e}.csv",
        c.solver.name(),
        c.fraction,
        c.tau
    )
}

/// Writes one CSV per curve and `profile.json`; returns the paths written.
pub fn write_profile(
    dir: &Path,
    config: &RunConfig,
    records: &[RunRecord],
    curves: &[Curve],
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let problems = config.problem_names().len();
    let mut written = Vec::new();
    for c in curves {
        let path = dir.join(curve_file_name(c));
        std::fs::write(&path, curve_csv(c, problems, config.seeds.len()))?;
        written.push(path);
    }
    let doc = ProfileDoc {
        schema_version: SCHEMA_VERSION,
        config,
        curves,
        runs: records,
    };
    let path = dir.join("profile.json");
    std::fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n")?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::RunKey;

    fn record(progress: Vec<(f64, f64)>) -> RunRecord {
        RunRecord {
            key: RunKey {
                problem: "p".into(),
                fraction: 0.5,
                seed: 1,
                solver: SolverKind::Birkhoff,
            },
            n: 2,
            known: vec![0],
            termination: None,
            units: progress.last().map_or(0.0, |p| p.0),
            f0: 1.0,
            f_final: 0.0,
            progress,
            error: None,
        }
    }

    #[test]
    fn single_run_jumps_at_its_cost() {
        let r = record(vec![(1.0, 5.0), (4.0, 1.0), (10.0, 1e-3), (12.0, 1e-6)]);
        let c = curve(&[&r], SolverKind::Birkhoff, 0.5, 1e-2, 100.0);
        assert_eq!(c.points.len(), 2);
        assert_eq!(c.points[1].normalized_units, 10.0);
        assert_eq!(c.value_at(9.999), 0.0);
        assert_eq!(c.value_at(10.0), 1.0);
        assert_eq!(c.median_units, Some(10.0));
    }

    #[test]
    fn zero_budget_is_flat() {
        let r = record(vec![(1.0, 1e-5)]);
        let c = curve(&[&r, &r], SolverKind::Birkhoff, 0.5, 1e-2, 0.0);
        assert!(c.points.iter().all(|p| p.fraction_solved == 0.0));
        assert_eq!(c.median_units, None);
    }

    #[test]
    fn curves_are_monotone() {
        let rs: Vec<RunRecord> = (0..7)
            .map(|i| {
                record(vec![
                    (i as f64, 1.0),
                    ((3 * i % 5) as f64 + 7.0, if i % 3 == 0 { 1.0 } else { 0.0 }),
                ])
            })
            .collect();
        let refs: Vec<&RunRecord> = rs.iter().collect();
        let c = curve(&refs, SolverKind::Hermite, 0.25, 1e-2, 1e9);
        for w in c.points.windows(2) {
            assert!(w[0].normalized_units < w[1].normalized_units);
            assert!(w[0].fraction_solved <= w[1].fraction_solved);
        }
        assert_eq!(
            c.points.last().unwrap().fraction_solved,
            c.solved as f64 / 7.0
        );
    }
}

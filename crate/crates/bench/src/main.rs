use std::path::PathBuf;
use std::process::ExitCode;

use birkhoff::bounds::{error_scan, ScanOptions};
use birkhoff::oracle::{make_mask, problem_by_name, problem_suite};
use birkhoff::poise::heatmap_grid;
use birkhoff::solver::{hermite_solve, solve, SolveResult, SolverParams, Termination};
use birkhoff_bench::config::{HeatmapConfig, RunConfig, SolverKind};
use birkhoff_bench::files::{
    errscan_csv, heatmap_csv, heatmap_json, parse_geometry, scan_function,
};
use birkhoff_bench::matrix::run_matrix;
use birkhoff_bench::profile::{curves, write_profile};
use birkhoff_bench::{env_seed, BenchError, Result, SCHEMA_VERSION};
use clap::{Parser, Subcommand};
use nalgebra::DVector;
use serde::Serialize;

const EXIT_USAGE: u8 = 64;
const EXIT_UNRECOVERABLE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "bdfo",
    version,
    about = "Birkhoff-interpolation trust-region solver and benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solve and print the result as JSON.
    Solve {
        #[arg(long)]
        problem: String,
        /// Fraction of coordinates with known derivatives.
        #[arg(long, default_value_t = 1.0)]
        fraction: f64,
        /// Mask seed; defaults to BDFO_SEED or 1.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = SolverKind::Birkhoff)]
        solver: SolverKind,
        /// Budget in units of n+1 distinct queries.
        #[arg(long)]
        budget: Option<f64>,
        /// TOML file of solver parameters.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a benchmark matrix and write data-profile curves.
    Profile {
        /// TOML run configuration; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',')]
        problems: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',')]
        fractions: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long, value_delimiter = ',', value_enum)]
        solvers: Option<Vec<SolverKind>>,
        #[arg(long, value_delimiter = ',')]
        taus: Option<Vec<f64>>,
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Λ over a grid of candidate points (two-dimensional configurations).
    Heatmap {
        #[arg(long)]
        config: PathBuf,
        /// Output prefix; writes PREFIX.csv and PREFIX.json.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Maximal model errors against the fully-quadratic bounds.
    Errscan {
        /// exp1, quadratic or cubic.
        #[arg(long)]
        function: String,
        #[arg(long)]
        geometry: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        deltas: Vec<f64>,
        /// Ball center; defaults to the origin.
        #[arg(long, value_delimiter = ',')]
        center: Option<Vec<f64>>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the problem suite.
    ListProblems,
}

#[derive(Serialize)]
struct SolveDoc<'a> {
    schema_version: u32,
    problem: &'a str,
    n: usize,
    fraction: f64,
    seed: u64,
    solver: SolverKind,
    known: &'a [usize],
    result: &'a SolveResult,
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn usage<T: ToString>(e: T) -> BenchError {
    BenchError::Usage(e.to_string())
}

fn cmd_solve(
    problem: &str,
    fraction: f64,
    seed: Option<u64>,
    solver: SolverKind,
    budget: Option<f64>,
    params: Option<PathBuf>,
    out: &Option<PathBuf>,
) -> Result<Termination> {
    let p =
        problem_by_name(problem).ok_or_else(|| usage(format!("unknown problem `{problem}`")))?;
    let seed = seed.map_or_else(env_seed, Ok)?;
    let mut params: SolverParams = match params {
        Some(path) => toml::from_str(&std::fs::read_to_string(path)?).map_err(usage)?,
        None => SolverParams::default(),
    };
    if budget.is_some() {
        params.budget = budget;
    }
    params.validate().map_err(usage)?;
    let mask = make_mask(p.n, fraction, seed).map_err(usage)?;
    let res = match solver {
        SolverKind::Birkhoff => solve(&p, &mask, &p.x0, &params)?,
        SolverKind::Hermite => hermite_solve(&p, &mask, &p.x0, &params)?,
    };
    let doc = SolveDoc {
        schema_version: SCHEMA_VERSION,
        problem,
        n: p.n,
        fraction,
        seed,
        solver,
        known: &mask.known,
        result: &res,
    };
    emit(out, &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    Ok(res.termination)
}

fn run(cli: Cli) -> Result<Option<Termination>> {
    match cli.command {
        Command::Solve {
            problem,
            fraction,
            seed,
            solver,
            budget,
            params,
            out,
        } => cmd_solve(&problem, fraction, seed, solver, budget, params, &out).map(Some),
        Command::Profile {
            config,
            out,
            problems,
            fractions,
            seeds,
            solvers,
            taus,
            budget,
            threads,
        } => {
            let mut cfg = match config {
                Some(p) => RunConfig::load(&p)?,
                None => RunConfig {
                    seeds: (0..3)
                        .map(|i| env_seed().map(|s| s + i))
                        .collect::<Result<_>>()?,
                    ..Default::default()
                },
            };
            cfg.problems = problems.unwrap_or(cfg.problems);
            cfg.fractions = fractions.unwrap_or(cfg.fractions);
            cfg.seeds = seeds.unwrap_or(cfg.seeds);
            cfg.solvers = solvers.unwrap_or(cfg.solvers);
            cfg.taus = taus.unwrap_or(cfg.taus);
            cfg.budget = budget.unwrap_or(cfg.budget);
            cfg.threads = threads.unwrap_or(cfg.threads);
            let records = run_matrix(&cfg)?;
            let cs = curves(&cfg, &records);
            for path in write_profile(&out, &cfg, &records, &cs)? {
                eprintln!("wrote {}", path.display());
            }
            for c in &cs {
                let med = c.median_units.map_or("inf".to_string(), |m| m.to_string());
                println!(
                    "{} fraction={} tau={} solved={}/{} median_units={med}",
                    c.solver.name(),
                    c.fraction,
                    c.tau,
                    c.solved,
                    c.runs
                );
            }
            Ok(None)
        }
        Command::Heatmap {
            config,
            out,
            resolution,
            radius,
        } => {
            let cfg = HeatmapConfig::load(&config)?;
            let grid = heatmap_grid(
                &cfg.base_data(),
                &cfg.addition_indices(),
                &cfg.available(),
                radius.unwrap_or(cfg.radius),
                resolution.unwrap_or(cfg.resolution),
            )
            .map_err(usage)?;
            std::fs::write(out.with_extension("csv"), heatmap_csv(&grid))?;
            std::fs::write(out.with_extension("json"), heatmap_json(&grid)?)?;
            Ok(None)
        }
        Command::Errscan {
            function,
            geometry,
            deltas,
            center,
            samples,
            seed,
            out,
        } => {
            let template = parse_geometry(&std::fs::read_to_string(geometry)?)?;
            let n = template[0].point.len();
            let f = scan_function(&function, n)?;
            let center = DVector::from_vec(center.unwrap_or_else(|| vec![0.0; n]));
            if center.len() != n {
                return Err(usage("center dimension differs from the geometry"));
            }
            if !deltas.iter().all(|&d| d > 0.0) {
                return Err(usage("deltas must be positive"));
            }
            let opts = ScanOptions {
                samples,
                seed: seed.map_or_else(env_seed, Ok)?,
                ..Default::default()
            };
            let rows = error_scan(f.as_ref(), &template, &center, &deltas, &opts).map_err(usage)?;
            emit(&out, &errscan_csv(&function, &rows))?;
            Ok(None)
        }
        Command::ListProblems => {
            for p in problem_suite() {
                println!("{}\t{}", p.name, p.n);
            }
            Ok(None)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Some(Termination::Unrecoverable)) => ExitCode::from(EXIT_UNRECOVERABLE),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bdfo: {e}");
            match e {
                BenchError::Usage(_) => ExitCode::from(EXIT_USAGE),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

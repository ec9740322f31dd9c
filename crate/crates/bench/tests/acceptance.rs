//! One PASS/FAIL line per acceptance criterion. Tolerances are pinned below.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use birkhoff::basis::{basis_len, AvailableSet, MultiIndex};
use birkhoff::bounds::{error_scan, error_system, rate_ratios, ExpFirst, ScanOptions};
use birkhoff::instances::{random_available, random_history, random_poised, random_rhs};
use birkhoff::interp::{
    self, birkhoff_polynomials, build_normalized, model_from_polynomials, solve_model,
};
use birkhoff::oracle::{problem_by_name, recount, rotated_quadratic2, Mask, Oracle};
use birkhoff::pivot::{self, AlphaSelection, CompletionOptions};
use birkhoff::poise::{converse_constant, lambda_poisedness, poisedness_report};
use birkhoff::solver::{check_stationarity, solve, SolverParams, Termination, TraceEvent};
use birkhoff::{DataSet, Datum};
use birkhoff_bench::config::{RunConfig, SolverKind};
use birkhoff_bench::files::parse_geometry;
use birkhoff_bench::matrix::run_matrix;
use birkhoff_bench::profile::{curves, write_profile};
use nalgebra::{dvector, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INTERP_REL_TOL: f64 = 1e-8;
const TWO_PATH_REL_TOL: f64 = 1e-8;
const LAGRANGE_COEF_TOL: f64 = 1e-10;
const SANDWICH_REL_SLACK: f64 = 1e-10;
const WORKED_TOL: f64 = 1e-10;
const XI_ACC: f64 = 1e-4;
const RATE_F: (f64, f64) = (5.5, 10.5);
const RATE_G: (f64, f64) = (2.8, 5.5);
const RATE_H: (f64, f64) = (1.5, 2.8);
const EMBED_TOL: f64 = 1e-10;
const QUAD_X_TOL: f64 = 1e-6;
const QUAD_UNITS: f64 = 30.0;
const ROSEN_GRAD_TOL: f64 = 1e-4;
const ROSEN_UNITS: f64 = 500.0;
const PROFILE_TAU: f64 = 1e-2;
const PROFILE_BUDGET: f64 = 200.0;

const INTERP_TIME: Duration = Duration::from_secs(5);
const RATES_TIME: Duration = Duration::from_secs(30);
const HARNESS_TIME: Duration = Duration::from_secs(600);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn instances(seed: u64, count: usize) -> Vec<(DataSet, AvailableSet)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = 1 + i % 3;
            let a = random_available(&mut rng, n);
            (random_poised(&mut rng, n, &a), a)
        })
        .collect()
}

fn c1_c2() -> (Outcome, Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let start = Instant::now();
    let mut worst_res: f64 = 0.0;
    let mut worst_two: f64 = 0.0;
    for (d, _) in instances(100, 200) {
        let rhs = random_rhs(&mut rng, d.len());
        let m = match solve_model(&d, &rhs) {
            Ok(m) => m,
            Err(_) => {
                return (
                    outcome(false, "solve failed".into()),
                    outcome(false, "solve failed".into()),
                )
            }
        };
        worst_res =
            worst_res.max(interp::interpolation_residual(&m, &d, &rhs) / (1.0 + rhs.amax()));
        let p = birkhoff_polynomials(&d).expect("poised");
        let m2 = model_from_polynomials(&d, &rhs, &p).expect("sizes");
        worst_two = worst_two.max((m2.coeffs() - m.coeffs()).norm() / (1.0 + m.coeffs().norm()));
    }
    let t = start.elapsed();
    (
        outcome(
            worst_res <= INTERP_REL_TOL && t < INTERP_TIME,
            format!(
                "200 instances, worst relative residual {worst_res:.2e}, {:.2}s",
                t.as_secs_f64()
            ),
        ),
        outcome(
            worst_two <= TWO_PATH_REL_TOL,
            format!("worst relative coefficient gap {worst_two:.2e}"),
        ),
    )
}

fn c3() -> Outcome {
    let d = DataSet::new(vec![
        Datum::value(dvector![0.0]),
        Datum::value(dvector![1.0]),
        Datum::value(dvector![-1.0]),
    ])
    .unwrap();
    let p = birkhoff_polynomials(&d).unwrap();
    // 1 - x², x(x+1)/2, x(x-1)/2 in the basis [1, x, ½x²]
    let expect = [[1.0, 0.0, -2.0], [0.0, 0.5, 1.0], [0.0, -0.5, 1.0]];
    let gap = p
        .polys
        .iter()
        .zip(expect)
        .map(|(u, e)| (u.coeffs() - DVector::from_row_slice(&e)).amax())
        .fold(0.0, f64::max);
    outcome(
        gap <= LAGRANGE_COEF_TOL,
        format!("max coefficient gap {gap:.2e}"),
    )
}

fn c4() -> Outcome {
    let mut certified = 0;
    let mut violations = Vec::new();
    for (i, (d, a)) in instances(200, 100).into_iter().enumerate() {
        let n = d.dim();
        let region = interp::normalization_scale(&d);
        let r = poisedness_report(&d, &a, region).unwrap();
        let q1 = basis_len(n) as f64;
        let c = converse_constant(n);
        let slack = 1.0 + SANDWICH_REL_SLACK;
        if r.inv_norm > c * r.lambda * slack {
            violations.push(format!("#{i} converse"));
        }
        if r.certified_by_forward {
            certified += 1;
            // the exact Λ must confirm the certificate
            let exact = lambda_poisedness(&d, &a, region).unwrap();
            if exact > r.lambda * slack {
                violations.push(format!("#{i} forward"));
            }
        }
        if r.lambda > q1.sqrt() * r.inv_norm * slack {
            violations.push(format!("#{i} forward bound"));
        }
        if r.det_abs < (c * r.lambda).powf(-q1) / slack {
            violations.push(format!("#{i} determinant"));
        }
    }
    outcome(
        violations.is_empty(),
        format!("100 instances, {certified} forward-certified, violations {violations:?}"),
    )
}

fn c5() -> Outcome {
    let d = DataSet::new(vec![
        Datum::value(dvector![0.0]),
        Datum::value(dvector![1.0]),
        Datum::new(dvector![1.0], MultiIndex::new(vec![1])),
    ])
    .unwrap();
    let sys = build_normalized(&d).unwrap();
    let expect = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 1.0, 1.0, 0.5, 0.0, 1.0, 1.0]);
    let m_gap = (&sys.mhat - expect).amax();
    let det = sys.mhat.determinant();
    let lam = lambda_poisedness(&d, &AvailableSet::full(1), 1.0).unwrap();
    let m = solve_model(&d, &dvector![0.0, 1.0, 2.0]).unwrap();
    let model_gap = (m.c().abs())
        .max(m.g()[0].abs())
        .max((m.h()[(0, 0)] - 2.0).abs());
    let pass = m_gap <= WORKED_TOL
        && (det - 0.5).abs() <= WORKED_TOL
        && (lam - 4.0).abs() <= WORKED_TOL
        && model_gap <= WORKED_TOL;
    outcome(
        pass,
        format!("M gap {m_gap:.1e}, det {det}, Λ {lam}, model gap {model_gap:.1e}"),
    )
}

fn c6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(300);
    let mut failures = Vec::new();
    let mut min_pivot = f64::INFINITY;
    for n in 1..=3 {
        for t in 0..100 {
            let a = random_available(&mut rng, n);
            let center = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            let delta = 10f64.powf(rng.gen_range(-2.0..0.5));
            let len = rng.gen_range(0..3 * basis_len(n));
            let mut hist = random_history(&mut rng, &center, 2.0 * delta, len, &a);
            if rng.gen_bool(0.5) {
                hist.insert(0, Datum::value(center.clone()));
            }
            match pivot::complete(
                &hist,
                &center,
                delta,
                XI_ACC,
                &a,
                &CompletionOptions::default(),
            ) {
                Ok(r) if r.min_pivot() >= XI_ACC && birkhoff_polynomials(&r.data).is_ok() => {
                    min_pivot = min_pivot.min(r.min_pivot());
                }
                Ok(_) => failures.push(format!("n={n} #{t} weak")),
                Err(e) => failures.push(format!("n={n} #{t} {e}")),
            }
        }
    }
    let e1 = MultiIndex::new(vec![1, 0]);
    let zero = MultiIndex::zero(2);
    let a = AvailableSet::new(2, [e1.clone()]).unwrap();
    let hist = vec![Datum::value(dvector![0.0, 0.0])];
    let forced = CompletionOptions {
        selection: AlphaSelection::Fixed(vec![e1.clone(), e1.clone(), zero.clone(), zero, e1]),
        ..Default::default()
    };
    let forced_fails =
        pivot::complete(&hist, &dvector![0.0, 0.0], 1.0, XI_ACC, &a, &forced).is_err();
    let default_ok = pivot::complete(
        &hist,
        &dvector![0.0, 0.0],
        1.0,
        XI_ACC,
        &a,
        &CompletionOptions::default(),
    )
    .is_ok_and(|r| r.min_pivot() >= XI_ACC);
    outcome(
        failures.is_empty() && forced_fails && default_ok,
        format!(
            "300 histories, smallest pivot {min_pivot:.2e}, failures {failures:?}; fixed schedule fails: {forced_fails}, per-pivot succeeds: {default_ok}"
        ),
    )
}

fn template() -> Vec<Datum> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/template2.geom");
    parse_geometry(&std::fs::read_to_string(path).expect("template file")).expect("valid template")
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn c7() -> Outcome {
    let start = Instant::now();
    let deltas: Vec<f64> = (0..6).map(|k| 0.1 / 2f64.powi(k)).collect();
    let opts = ScanOptions {
        samples: 10_000,
        seed: 7,
        ..Default::default()
    };
    let rows = match error_scan(
        &ExpFirst { n: 2 },
        &template(),
        &dvector![0.3, -0.2],
        &deltas,
        &opts,
    ) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("scan failed: {e}")),
    };
    let t = start.elapsed();
    let [rf, rg, rh] = rate_ratios(&rows);
    let (mf, mg, mh) = (median(rf), median(rg), median(rh));
    let within = |v: f64, (lo, hi): (f64, f64)| (lo..=hi).contains(&v);
    let dominated = rows.iter().all(|r| r.dominated(0.0));
    outcome(
        within(mf, RATE_F)
            && within(mg, RATE_G)
            && within(mh, RATE_H)
            && dominated
            && t < RATES_TIME,
        format!(
            "median ratios f {mf:.3}, g {mg:.3}, H {mh:.3}; bounds dominate: {dominated}; {:.2}s",
            t.as_secs_f64()
        ),
    )
}

fn c8() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut worst_embed: f64 = 0.0;
    let mut ok = true;
    for (d, _) in instances(400, 50) {
        match error_system(&d) {
            Ok(es) => {
                worst = worst.max(es.q_inv_norm - es.m_inv_norm);
                worst_embed = worst_embed.max(es.embedding_residual);
                ok &= es.q_inv_norm <= es.m_inv_norm + EMBED_TOL * es.m_inv_norm.max(1.0);
                ok &= es.embedding_residual <= EMBED_TOL;
            }
            Err(_) => ok = false,
        }
    }
    outcome(
        ok,
        format!("50 instances, max ‖Q̂⁻¹‖-‖M̂⁻¹‖ = {worst:.2e}, block residual {worst_embed:.1e}"),
    )
}

fn c9() -> Outcome {
    let p = problem_by_name("quadratic2").unwrap();
    let xstar = rotated_quadratic2(10.0, std::f64::consts::PI / 6.0, [1.0, -2.0]).minimizer();
    let res = match solve(&p, &Mask::full(2), &p.x0, &SolverParams::default()) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let err = (DVector::from_vec(res.x_final.clone()) - xstar).norm();
    outcome(
        res.termination == Termination::SigmaSmall && err <= QUAD_X_TOL && res.units <= QUAD_UNITS,
        format!(
            "{:?}, ‖x-x*‖ {err:.2e}, {} units",
            res.termination, res.units
        ),
    )
}

fn c10() -> Outcome {
    let p = problem_by_name("rosenbrock2").unwrap();
    // K = {1}: only the first coordinate's derivatives are known
    let mask = Mask::from_known(2, vec![0]);
    let params = SolverParams {
        budget: Some(ROSEN_UNITS),
        ..Default::default()
    };
    let res = match solve(&p, &mask, &p.x0, &params) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let hit = res
        .trace
        .iter()
        .find(|r| check_stationarity(&p, &DVector::from_vec(r.x.clone()), ROSEN_GRAD_TOL))
        .map(|r| r.units);
    let mut best = f64::INFINITY;
    let mut monotone = true;
    for r in &res.trace {
        if r.event == TraceEvent::Accept {
            monotone &= r.f <= best;
        }
        best = best.min(r.f);
    }
    let capped = res.trace.iter().all(|r| r.delta <= params.delta_max);
    outcome(
        hit.is_some_and(|u| u <= ROSEN_UNITS) && monotone && capped,
        format!("‖∇f‖ <= 1e-4 after {hit:?} units; monotone {monotone}; Δ <= Δmax {capped}"),
    )
}

fn c11() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for name in ["beale2", "wood4", "rosenbrock2"] {
        let p = problem_by_name(name).unwrap();
        let mask = birkhoff::oracle::make_mask(p.n, 0.5, 5).unwrap();
        let params = SolverParams {
            budget: Some(50.0),
            ..Default::default()
        };
        let res = solve(&p, &mask, &p.x0, &params).unwrap();
        let replay = recount(res.ledger.log()) as f64 / (p.n + 1) as f64;
        ok &= replay == res.units && res.ledger.log().len() >= res.queries;
        detail.push(format!("{name} {replay}={}", res.units));
    }
    let p = problem_by_name("sphere5").unwrap();
    let mut o = Oracle::new(p.clone(), Mask::full(5)).unwrap();
    for _ in 0..5 {
        o.query(&p.x0, &MultiIndex::zero(5)).unwrap();
        o.query(&p.x0, &MultiIndex::first(5, 1)).unwrap();
    }
    let dup_ok = o.ledger.distinct_count() == 2 && o.ledger.log().len() == 10;
    outcome(
        ok && dup_ok,
        format!(
            "{}; 10 requests of 2 pairs counted {}",
            detail.join(", "),
            o.ledger.distinct_count()
        ),
    )
}

fn profile_config() -> RunConfig {
    RunConfig {
        fractions: vec![0.25, 0.5, 0.75],
        seeds: vec![1, 2, 3],
        solvers: vec![SolverKind::Birkhoff, SolverKind::Hermite],
        taus: vec![PROFILE_TAU],
        budget: PROFILE_BUDGET,
        ..Default::default()
    }
}

type Medians = BTreeMap<String, Option<f64>>;

fn run_profile(dir: &Path) -> Result<(Vec<PathBuf>, Medians), String> {
    let cfg = profile_config();
    let records = run_matrix(&cfg).map_err(|e| e.to_string())?;
    let cs = curves(&cfg, &records);
    let files = write_profile(dir, &cfg, &records, &cs).map_err(|e| e.to_string())?;
    let medians = cs
        .iter()
        .filter(|c| c.solver == SolverKind::Birkhoff)
        .map(|c| (format!("{}", c.fraction), c.median_units))
        .collect();
    Ok((files, medians))
}

fn valid_profile_csv(path: &Path) -> bool {
    let Ok(text) = std::fs::read_to_string(path) else {
        return false;
    };
    let mut lines = text.lines();
    if !lines
        .next()
        .is_some_and(|l| l.starts_with("# schema bdfo-profile/"))
    {
        return false;
    }
    if lines.next() != Some("normalized_units,fraction_solved") {
        return false;
    }
    let pts: Vec<(f64, f64)> = lines
        .filter_map(|l| {
            l.split_once(',')
                .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
        })
        .collect();
    pts.first() == Some(&(0.0, 0.0))
        && pts.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1)
        && pts.iter().all(|p| (0.0..=1.0).contains(&p.1))
}

fn c12_c13() -> (Outcome, Outcome) {
    let base = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance-profile");
    let _ = std::fs::remove_dir_all(&base);
    let start = Instant::now();
    let first = run_profile(&base.join("run1"));
    let t = start.elapsed();
    let (files, medians) = match first {
        Ok(x) => x,
        Err(e) => return (outcome(false, e.clone()), outcome(false, e)),
    };
    let csvs: Vec<&PathBuf> = files
        .iter()
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    let valid = csvs.len() == 6 && csvs.iter().all(|p| valid_profile_csv(p));
    let seq: Vec<f64> = medians
        .values()
        .map(|m| m.unwrap_or(f64::INFINITY))
        .collect();
    let nonincreasing = seq.windows(2).all(|w| w[1] <= w[0]);
    let c12 = outcome(
        valid && t < HARNESS_TIME,
        format!(
            "{} curves valid: {valid}, {:.1}s; soft check (reported, not asserted) median birkhoff units by fraction {medians:?} nonincreasing: {nonincreasing}",
            csvs.len(),
            t.as_secs_f64()
        ),
    );
    let c13 = match run_profile(&base.join("run2")) {
        Ok((files2, _)) => {
            let same = files.len() == files2.len()
                && files
                    .iter()
                    .zip(&files2)
                    .all(|(a, b)| std::fs::read(a).ok() == std::fs::read(b).ok());
            outcome(
                same,
                format!("{} files compared byte for byte", files.len()),
            )
        }
        Err(e) => outcome(false, e),
    };
    (c12, c13)
}

fn main() {
    let (c1, c2) = c1_c2();
    let (c12, c13) = c12_c13();
    let results = [
        ("interpolation correctness", c1),
        ("two-path equality", c2),
        ("Lagrange specialization", c3()),
        ("poisedness sandwich and determinant bound", c4()),
        ("worked example", c5()),
        ("completion termination", c6()),
        ("fully-quadratic rates", c7()),
        ("block embedding", c8()),
        ("quadratic exactness", c9()),
        ("partial-derivative rosenbrock", c10()),
        ("query accounting", c11()),
        ("surrogate benchmark", c12),
        ("determinism", c13),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!(
            "criterion {:>2} {}: {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

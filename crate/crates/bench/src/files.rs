//! Heatmap and error-scan file formats, and the geometry-file parser.

use std::fmt::Write as _;

use birkhoff::basis::MultiIndex;
use birkhoff::bounds::{CubicSum, ErrorScanRow, ExpFirst, QuadraticFn, SmoothFunction};
use birkhoff::poise::{CellStatus, HeatmapGrid};
use birkhoff::Datum;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::{BenchError, Result, SCHEMA_VERSION};

/// Stored in place of `+∞` for masked heatmap cells.
pub const MASKED: f64 = f64::MAX;

fn status_name(s: CellStatus) -> &'static str {
    match s {
        CellStatus::Poised => "poised",
        CellStatus::NotPoised => "not_poised",
        CellStatus::Outside => "outside",
    }
}

fn finite_or_masked(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        MASKED
    }
}

pub fn heatmap_csv(g: &HeatmapGrid) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "# schema bdfo-heatmap/{SCHEMA_VERSION} center={:?} radius={} resolution={} masked_value={MASKED:e}",
        g.center, g.radius, g.resolution
    )
    .unwrap();
    s.push_str("row,col,x1,x2,lambda,status\n");
    for (cell, (&v, &st)) in g.values.iter().zip(&g.status).enumerate() {
        let (row, col) = (cell / g.resolution, cell % g.resolution);
        writeln!(
            s,
            "{row},{col},{},{},{:e},{}",
            g.center[0] + g.axis[col],
            g.center[1] + g.axis[row],
            finite_or_masked(v),
            status_name(st)
        )
        .unwrap();
    }
    s
}

#[derive(Serialize)]
struct HeatmapDoc<'a> {
    schema_version: u32,
    center: &'a [f64],
    radius: f64,
    resolution: usize,
    axis: &'a [f64],
    masked_value: f64,
    values: Vec<f64>,
    poised: Vec<bool>,
    status: &'a [CellStatus],
}

pub fn heatmap_json(g: &HeatmapGrid) -> Result<String> {
    let doc = HeatmapDoc {
        schema_version: SCHEMA_VERSION,
        center: &g.center,
        radius: g.radius,
        resolution: g.resolution,
        axis: &g.axis,
        masked_value: MASKED,
        values: g.values.iter().map(|&v| finite_or_masked(v)).collect(),
        poised: g.status.iter().map(|&s| s == CellStatus::Poised).collect(),
        status: &g.status,
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

pub fn errscan_csv(function: &str, rows: &[ErrorScanRow]) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "# schema bdfo-errscan/{SCHEMA_VERSION} function={function}"
    )
    .unwrap();
    s.push_str("delta,err_f,err_g,err_h,bound_f,bound_g,bound_h\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.delta, r.err_f, r.err_g, r.err_h, r.bound_f, r.bound_g, r.bound_h
        )
        .unwrap();
    }
    s
}

/// Parses lines `x1 x2 ... ; a1 a2 ...`. Blank lines and `#` comments are
/// skipped; the first condition must be a function value.
pub fn parse_geometry(text: &str) -> Result<Vec<Datum>> {
    let bad = |line: usize, msg: &str| BenchError::Usage(format!("geometry line {line}: {msg}"));
    let mut out: Vec<Datum> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (pt, al) = line
            .split_once(';')
            .ok_or_else(|| bad(i + 1, "expected `point ; alpha`"))?;
        let point: Vec<f64> = pt
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| bad(i + 1, &format!("bad number `{t}`")))
            })
            .collect::<Result<_>>()?;
        let alpha: Vec<u8> = al
            .split_whitespace()
            .map(|t| {
                t.parse::<u8>()
                    .map_err(|_| bad(i + 1, &format!("bad index `{t}`")))
            })
            .collect::<Result<_>>()?;
        if point.is_empty() || point.len() != alpha.len() {
            return Err(bad(
                i + 1,
                "point and alpha must have the same nonzero length",
            ));
        }
        if point.iter().any(|v| !v.is_finite()) {
            return Err(bad(i + 1, "non-finite coordinate"));
        }
        let alpha = MultiIndex::new(alpha);
        if alpha.total_order() > 2 {
            return Err(bad(i + 1, "total order above two"));
        }
        if out.first().is_some_and(|d| d.point.len() != point.len()) {
            return Err(bad(i + 1, "dimension differs from the first line"));
        }
        if out.is_empty() && !alpha.is_zero() {
            return Err(bad(i + 1, "first condition must be a function value"));
        }
        out.push(Datum::new(DVector::from_vec(point), alpha));
    }
    if out.is_empty() {
        return Err(BenchError::Usage("geometry file has no conditions".into()));
    }
    Ok(out)
}

pub const SCAN_FUNCTIONS: [&str; 3] = ["exp1", "quadratic", "cubic"];

/// Error-scan target by name.
pub fn scan_function(name: &str, n: usize) -> Result<Box<dyn SmoothFunction>> {
    match name {
        "exp1" => Ok(Box::new(ExpFirst { n })),
        "quadratic" => Ok(Box::new(QuadraticFn {
            c: 1.0,
            b: DVector::from_fn(n, |i, _| 0.5 * (i + 1) as f64),
            a: DMatrix::identity(n, n) * 2.0 + DMatrix::from_element(n, n, 0.5),
        })),
        "cubic" => Ok(Box::new(CubicSum { n })),
        _ => Err(BenchError::Usage(format!(
            "unknown scan function `{name}` (expected one of {})",
            SCAN_FUNCTIONS.join(", ")
        ))),
    }
}

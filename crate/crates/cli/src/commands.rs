//! Command implementations. Each returns the text destined for stdout so the
//! binary stays a thin dispatcher.

use std::fmt::Write as _;
use std::path::Path;

use ctlvol::volume::{jordan_limit_check, volume_single_jordan};
use ctlvol::zonotope::{build_generators, build_generators_with, oracle_volume, region_polygon};
use ctlvol::{Convention, Polygon2D, RegionKind};
use rayon::prelude::*;

use crate::format::{sig4, table};
use crate::report::{analyze, region_name, AnalyzeOptions};
use crate::system_file::{fmt17, SystemFile};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Table,
    Csv,
}

fn load(path: &Path) -> Result<(SystemFile, crate::system_file::LoadedSystem), CliError> {
    let file = SystemFile::read(path)?;
    let loaded = file.load()?;
    Ok((file, loaded))
}

pub fn analyze_cmd(
    path: &Path,
    opts: AnalyzeOptions,
    format: OutputFormat,
) -> Result<String, CliError> {
    let (file, loaded) = load(path)?;
    let a = analyze(&loaded, &file, opts)?;
    Ok(match format {
        OutputFormat::Table => a.to_table(),
        _ => pretty(&a.to_json()),
    })
}

pub fn factors_cmd(
    path: &Path,
    opts: AnalyzeOptions,
    format: OutputFormat,
) -> Result<String, CliError> {
    let (file, loaded) = load(path)?;
    // The factor block does not depend on the oracle, so skip it.
    let a = analyze(&loaded, &file, AnalyzeOptions { horizon: 0, ..opts })?;
    Ok(match format {
        OutputFormat::Table => a.factors_table(),
        _ => pretty(&a.factors_value()),
    })
}

/// Writes the boundary of the finite-horizon region to `out` as `x,y` rows
/// and returns a one-line summary.
pub fn region_cmd(
    path: &Path,
    horizon: usize,
    kind: RegionKind,
    convention: Convention,
    out: &Path,
) -> Result<String, CliError> {
    let (_, loaded) = load(path)?;
    let z = build_generators_with(&loaded.system, horizon, kind, convention)?;
    let poly = region_polygon(&z)?;
    std::fs::write(out, polygon_csv(&poly))
        .map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    Ok(format!(
        "wrote {} vertices to {} (area {})\n",
        poly.vertices.len(),
        out.display(),
        sig4(ctlvol::zonotope::polygon_area(&poly)),
    ))
}

pub fn polygon_csv(poly: &Polygon2D) -> String {
    let mut s = String::from("x,y\n");
    for v in &poly.vertices {
        let _ = writeln!(s, "{},{}", fmt17(v[0]), fmt17(v[1]));
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergeRow {
    pub horizon: usize,
    pub oracle: f64,
    pub analytic: f64,
    pub gap: f64,
}

/// Oracle volumes at `step, 2 step, ...` up to `max_horizon`, next to the
/// infinite-horizon value.
pub fn converge_rows(
    path: &Path,
    max_horizon: usize,
    step: usize,
    kind: RegionKind,
    cluster_tol: f64,
) -> Result<Vec<ConvergeRow>, CliError> {
    if step == 0 || max_horizon < step {
        return Err(CliError::Parse("need 1 <= step <= max-horizon".into()));
    }
    let (file, loaded) = load(path)?;
    let opts = AnalyzeOptions {
        horizon: 0,
        region: kind,
        cluster_tol,
    };
    let analytic = analyze(&loaded, &file, opts)?.analytic;
    let n = loaded.system.n();
    let horizons: Vec<usize> = (step..=max_horizon)
        .step_by(step)
        .filter(|&h| h >= n)
        .collect();
    horizons
        .par_iter()
        .map(|&h| {
            let z = build_generators(&loaded.system, h, kind)?;
            let oracle = oracle_volume(&z)?;
            let gap = if analytic == 0.0 {
                oracle.abs()
            } else {
                (analytic - oracle).abs() / analytic.abs()
            };
            Ok(ConvergeRow {
                horizon: h,
                oracle,
                analytic,
                gap,
            })
        })
        .collect()
}

pub fn converge_cmd(
    path: &Path,
    max_horizon: usize,
    step: usize,
    kind: RegionKind,
    cluster_tol: f64,
    format: OutputFormat,
) -> Result<String, CliError> {
    let rows = converge_rows(path, max_horizon, step, kind, cluster_tol)?;
    Ok(match format {
        OutputFormat::Table => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.horizon.to_string(),
                        sig4(r.oracle),
                        sig4(r.analytic),
                        sig4(r.gap),
                    ]
                })
                .collect();
            format!(
                "{} region\n{}",
                region_name(kind),
                table(&["N", "oracle", "analytic", "gap"], &cells)
            )
        }
        _ => {
            let mut s = String::from("N,oracle,analytic,gap\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    r.horizon,
                    fmt17(r.oracle),
                    fmt17(r.analytic),
                    fmt17(r.gap)
                );
            }
            s
        }
    })
}

/// Perturbed-spectrum volumes for each `delta` next to the Jordan limit.
pub fn limit_cmd(
    lambda: f64,
    size: usize,
    deltas: &[f64],
    b_last: f64,
    format: OutputFormat,
) -> Result<String, CliError> {
    let seq = jordan_limit_check(lambda, size, b_last, deltas)?;
    let limit = volume_single_jordan(lambda, size, b_last)?;
    Ok(match format {
        OutputFormat::Table => {
            let cells: Vec<Vec<String>> = seq
                .iter()
                .map(|&(d, v)| vec![sig4(d), sig4(v), sig4(limit)])
                .collect();
            table(&["delta", "volume", "jordan_volume"], &cells)
        }
        _ => {
            let mut s = String::from("delta,volume,jordan_volume\n");
            for &(d, v) in &seq {
                let _ = writeln!(s, "{},{},{}", fmt17(d), fmt17(v), fmt17(limit));
            }
            s
        }
    })
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable value");
    s.push('\n');
    s
}

//! Job execution: computes the requested data, formats it and writes it
//! together with a metadata sidecar.

use std::path::PathBuf;

use num_complex::Complex64;
use oms_core::model::{validate_params, AngularRate};
use oms_core::response::{self, TransmissionPoint};
use oms_core::steady_state::{self, pin_effective_targets, BranchPolicy};
use oms_core::sweep::{self, SweepAxis, SweepGrid, SweepParam};
use oms_core::time_domain::{cross_check_with, ComparisonReport, CrossCheckOptions};
use oms_core::{Convention, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{to_toml, JobKind, JobSpec, OutputFormat, XGrid};
use crate::error::CliError;
use crate::output::{num, sha256_hex, write_all_or_nothing, Csv};

pub const TOOL_NAME: &str = "oms";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Range of |x|/ω_m1 the verify job draws from.
pub const VERIFY_X_RANGE: (f64, f64) = (0.02, 0.2);

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    /// Data file first, then the sidecar.
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

/// Computed artifact before it is written.
struct Product {
    name: String,
    bytes: Vec<u8>,
    details: Value,
    /// Worst oracle deviation and tolerance, for verify jobs.
    verification: Option<(f64, f64)>,
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    job: JobKind,
    preset: Option<&'a str>,
    data_file: &'a str,
    data_sha256: String,
    format: &'static str,
    convention: Convention,
    branch: BranchPolicy,
    omega_m1_rad_per_s: f64,
    x_grid_rad_per_s: XGrid,
    axis1: Option<SweepAxis>,
    axis2: Option<SweepAxis>,
    phi_rel_mapping: Option<&'static str>,
    params: &'a SystemParams,
    effective_targets_rad_per_s: Option<[f64; 3]>,
    /// Bare detunings actually used, recomputed from the targets if set.
    bare_detunings_rad_per_s: [f64; 3],
    warnings: &'a [String],
    details: Value,
    /// Resolved config that reproduces this file.
    config: String,
}

fn solver(e: impl std::fmt::Display) -> CliError {
    CliError::Solver(e.to_string())
}

fn over(v: f64, w: f64) -> String {
    num(v / w)
}

fn phi_rel_mapping(axes: &[Option<SweepAxis>]) -> Option<&'static str> {
    axes.iter().flatten().find_map(|a| match a.param {
        SweepParam::PhiRel => Some("phi_p1 = phi_p2 = phi_rel/2, drive phases 0"),
        SweepParam::PhiRelP1 => Some("phi_p1 += phi_rel"),
        SweepParam::PhiRelP2 => Some("phi_p2 += phi_rel"),
        _ => None,
    })
}

pub fn run_job(job: &JobSpec) -> Result<RunOutcome, CliError> {
    let report = validate_params(&job.params);
    if !report.is_ok() {
        let msgs: Vec<String> = report.errors.iter().map(|e| e.to_string()).collect();
        return Err(crate::config::ConfigError::Validation(msgs).into());
    }
    let warnings: Vec<String> = report.warnings.iter().map(|w| w.to_string()).collect();

    let product = match job.kind {
        JobKind::SteadyState => steady_state_job(job)?,
        JobKind::Spectrum => spectrum_job(job)?,
        JobKind::Sweep1d | JobKind::Sweep2d => sweep_job(job)?,
        JobKind::Verify => verify_job(job)?,
    };

    let pinned = pin_effective_targets(&job.params);
    let meta = Metadata {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        job: job.kind,
        preset: job.preset.as_deref(),
        data_file: &product.name,
        data_sha256: sha256_hex(&product.bytes),
        format: if job.kind == JobKind::Verify {
            "json"
        } else {
            job.format.extension()
        },
        convention: job.params.convention,
        branch: job.params.branch,
        omega_m1_rad_per_s: job.omega_m1(),
        x_grid_rad_per_s: job.x_grid,
        axis1: job.axis1,
        axis2: job.axis2,
        phi_rel_mapping: phi_rel_mapping(&[job.axis1, job.axis2]),
        params: &job.params,
        effective_targets_rad_per_s: job.params.effective_targets.map(|t| t.map(|r| r.get())),
        bare_detunings_rad_per_s: [0, 1, 2].map(|i| pinned.delta_a(i)),
        warnings: &warnings,
        details: product.details,
        config: to_toml(job),
    };
    let mut meta_bytes = serde_json::to_vec_pretty(&meta).map_err(solver)?;
    meta_bytes.push(b'\n');
    let meta_name = format!("{}.meta.json", product.name);
    let files = write_all_or_nothing(
        &job.output_dir,
        &[(product.name, product.bytes), (meta_name, meta_bytes)],
    )?;

    if let Some((worst, tolerance)) = product.verification {
        if !(worst <= tolerance) {
            return Err(CliError::Verification { worst, tolerance });
        }
    }
    Ok(RunOutcome { files, warnings })
}

fn json_bytes(v: &impl Serialize) -> Result<Vec<u8>, CliError> {
    let mut b = serde_json::to_vec_pretty(v).map_err(solver)?;
    b.push(b'\n');
    Ok(b)
}

fn complex_pair(z: Complex64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

fn steady_state_job(job: &JobSpec) -> Result<Product, CliError> {
    let w = job.omega_m1();
    let pinned = pin_effective_targets(&job.params);
    let roots = steady_state::steady_state(&pinned, BranchPolicy::AllRoots).map_err(solver)?;
    let selected = steady_state::operating_point(&pinned).map_err(solver)?;
    let bytes = match job.format {
        OutputFormat::Csv => {
            let mut header: Vec<String> = ["selected", "branch_index", "root_count", "middle_branch", "intensity"]
                .map(String::from)
                .to_vec();
            for m in oms_core::time_domain::MODE_NAMES {
                header.push(format!("{m}_re"));
                header.push(format!("{m}_im"));
            }
            for i in 1..=3 {
                header.push(format!("delta_{i}_over_omega_m1"));
            }
            for i in 1..=3 {
                header.push(format!("delta_a{i}_over_omega_m1"));
            }
            header.push("residual".into());
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let mut csv = Csv::new(&header);
            for r in &roots {
                let mut row = vec![
                    (r.branch_index == selected.branch_index).to_string(),
                    r.branch_index.to_string(),
                    r.root_count.to_string(),
                    r.middle_branch.to_string(),
                    num(r.intensity),
                ];
                for z in r.a.iter().chain(&r.b) {
                    row.extend(complex_pair(*z));
                }
                row.extend(r.delta.iter().map(|d| over(d.get(), w)));
                row.extend(r.delta_a.iter().map(|d| over(d.get(), w)));
                row.push(num(r.residual));
                csv.row(&row);
            }
            csv.into_bytes()
        }
        OutputFormat::Json => json_bytes(&json!({
            "selected_branch": selected.branch_index,
            "roots": roots,
        }))?,
    };
    Ok(Product {
        name: format!("steady_state.{}", job.format.extension()),
        bytes,
        details: json!({ "selected_branch": selected.branch_index, "root_count": roots.len() }),
        verification: None,
    })
}

/// Spectrum rows `x/ω_m1, Δ_p/ω_m1, T_12, T_21`.
pub const SPECTRUM_HEADER: [&str; 4] = ["x_over_omega_m1", "delta_p_over_omega_m1", "T_12", "T_21"];

fn spectrum_job(job: &JobSpec) -> Result<Product, CliError> {
    let w = job.omega_m1();
    let points = response::spectrum(&job.params, &job.x_grid.values()).map_err(solver)?;
    let bytes = match job.format {
        OutputFormat::Csv => {
            let mut csv = Csv::new(&SPECTRUM_HEADER);
            for t in &points {
                csv.row(&[over(t.x.get(), w), over(t.delta_p.get(), w), num(t.t_12), num(t.t_21)]);
            }
            csv.into_bytes()
        }
        OutputFormat::Json => {
            let rows: Vec<Value> = points.iter().map(|t| point_json(t, w)).collect();
            json_bytes(&rows)?
        }
    };
    Ok(Product {
        name: format!("spectrum.{}", job.format.extension()),
        bytes,
        details: json!({ "points": points.len() }),
        verification: None,
    })
}

fn point_json(t: &TransmissionPoint, w: f64) -> Value {
    json!({
        "x_over_omega_m1": t.x.get() / w,
        "delta_p_over_omega_m1": t.delta_p.get() / w,
        "T_12": t.t_12,
        "T_21": t.t_21,
        "eps_out_1": [t.eps_out[0].re, t.eps_out[0].im],
        "eps_out_2": [t.eps_out[1].re, t.eps_out[1].im],
    })
}

fn axis_column(a: &SweepAxis) -> String {
    if a.param.is_rate() {
        format!("{}_over_omega_m1", a.param)
    } else {
        format!("{}_rad", a.param)
    }
}

fn axis_value(a: &SweepAxis, v: f64, w: f64) -> f64 {
    if a.param.is_rate() {
        v / w
    } else {
        v
    }
}

fn sweep_job(job: &JobSpec) -> Result<Product, CliError> {
    let w = job.omega_m1();
    let axis1 = job.axis1.ok_or_else(|| CliError::Usage("sweep job without axis1".into()))?;
    let xs = job.x_grid.values();
    let grid: SweepGrid = match job.axis2 {
        None => sweep::sweep_1d(&job.params, axis1, &xs),
        Some(axis2) => sweep::sweep_2d(&job.params, axis1, axis2, &xs),
    }
    .map_err(|e| CliError::Usage(e.to_string()))?;
    if grid.data.iter().all(|d| d.is_err()) {
        let first = grid.data.iter().find_map(|d| d.as_ref().err()).cloned().unwrap_or_default();
        return Err(CliError::Solver(format!("every sweep point failed; first failure: {first}")));
    }

    let failures: Vec<Value> = grid
        .data
        .iter()
        .enumerate()
        .filter_map(|(k, d)| {
            d.as_ref().err().map(|e| {
                json!({ "cell": k / grid.n_x(), "x_index": k % grid.n_x(), "message": e })
            })
        })
        .collect();
    let cells: Vec<Value> = grid
        .cells
        .iter()
        .map(|c| {
            json!({
                "axis1_value": axis_value(&axis1, c.axis1_value, w),
                "axis2_value": job.axis2.zip(c.axis2_value).map(|(a, v)| axis_value(&a, v, w)),
                "steady": match &c.steady {
                    Ok(s) => json!(s),
                    Err(e) => json!({ "error": e }),
                },
                "branch_switch": c.branch_switch,
            })
        })
        .collect();

    let bytes = match job.format {
        OutputFormat::Csv => {
            let mut header = vec![axis_column(&axis1)];
            if let Some(a) = &job.axis2 {
                header.push(axis_column(a));
            }
            header.extend(SPECTRUM_HEADER.iter().map(|s| s.to_string()));
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let mut csv = Csv::new(&header);
            for (k, cell) in grid.cells.iter().enumerate() {
                let mut lead = vec![num(axis_value(&axis1, cell.axis1_value, w))];
                if let (Some(a), Some(v)) = (&job.axis2, cell.axis2_value) {
                    lead.push(num(axis_value(a, v, w)));
                }
                for (ix, d) in grid.row(k).iter().enumerate() {
                    let mut row = lead.clone();
                    let x = xs[ix];
                    row.push(over(x, w));
                    row.push(over(x + w, w));
                    match d {
                        Ok(t) => row.extend([num(t.t_12), num(t.t_21)]),
                        Err(_) => row.extend(["nan".to_string(), "nan".to_string()]),
                    }
                    csv.row(&row);
                }
            }
            csv.into_bytes()
        }
        OutputFormat::Json => {
            let rows: Vec<Value> = grid
                .cells
                .iter()
                .enumerate()
                .map(|(k, _)| {
                    let row = grid.row(k);
                    json!({
                        "T_12": row.iter().map(|d| d.as_ref().ok().map(|t| t.t_12)).collect::<Vec<_>>(),
                        "T_21": row.iter().map(|d| d.as_ref().ok().map(|t| t.t_21)).collect::<Vec<_>>(),
                    })
                })
                .collect();
            json_bytes(&json!({
                "x_over_omega_m1": xs.iter().map(|x| x / w).collect::<Vec<_>>(),
                "axis1": { "param": axis1.param, "values": grid.cells.iter().map(|c| axis_value(&axis1, c.axis1_value, w)).collect::<Vec<_>>() },
                "cells": rows,
            }))?
        }
    };
    Ok(Product {
        name: format!("sweep.{}", job.format.extension()),
        bytes,
        details: json!({
            "cells": cells,
            "any_branch_switch": grid.any_branch_switch(),
            "failures": failures,
        }),
        verification: None,
    })
}

/// Deterministic draw of `n` offsets with |x|/ω_m1 in [`VERIFY_X_RANGE`].
pub fn verify_offsets(seed: u64, n: usize, omega_m1: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mag = rng.gen_range(VERIFY_X_RANGE.0..VERIFY_X_RANGE.1);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            sign * mag * omega_m1
        })
        .collect()
}

#[derive(Serialize)]
struct VerifyReport {
    convention: Convention,
    seed: u64,
    tolerance: f64,
    worst_relative_deviation: f64,
    passed: bool,
    points: Vec<ComparisonReport>,
}

fn verify_job(job: &JobSpec) -> Result<Product, CliError> {
    let mut p = job.params.clone();
    p.convention = job.verify.convention;
    let (pinned, _) = response::operating_point(&p).map_err(solver)?;
    let mut opts = CrossCheckOptions::new(&pinned);
    opts.tolerance = job.verify.tolerance;
    let xs = verify_offsets(job.verify.seed, job.verify.points, job.omega_m1());
    let points: Vec<ComparisonReport> = xs
        .par_iter()
        .map(|&x| cross_check_with(&p, AngularRate(x), &opts))
        .collect::<Result<_, _>>()
        .map_err(solver)?;
    let worst = points
        .iter()
        .flat_map(|r| r.relative_deviation.iter().flatten().copied())
        .fold(0.0, f64::max);
    let report = VerifyReport {
        convention: p.convention,
        seed: job.verify.seed,
        tolerance: job.verify.tolerance,
        worst_relative_deviation: worst,
        passed: points.iter().all(|r| r.passed),
        points,
    };
    Ok(Product {
        name: "verify.json".into(),
        bytes: json_bytes(&report)?,
        details: json!({ "points": xs.len(), "passed": report.passed }),
        verification: Some((worst, job.verify.tolerance)),
    })
}

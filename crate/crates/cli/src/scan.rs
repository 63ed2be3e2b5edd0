use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;
use sn_bound::shoot::{ladder_outcomes, BoundState};
use sn_bound::{Error, ProblemParams};

use crate::args::ScanArgs;
use crate::output::{create_dir, num, run_id, tolerances_json, write_csv, Manifest};
use crate::{CliError, EXIT_OK, EXIT_SCAN_INCOMPLETE};

/// Fraction of grid points that must succeed for exit code 0.
pub const SUCCESS_QUOTA: f64 = 0.9;

struct Row {
    m: f64,
    n: usize,
    alpha: Option<f64>,
    status: &'static str,
    message: Option<String>,
}

fn error_status(e: &Error) -> &'static str {
    match e {
        Error::Ladder { source, .. } => error_status(source),
        Error::ScanExhausted { .. } => "scan_exhausted",
        Error::InconsistentVerdict { .. } => "inconsistent_verdict",
        Error::StepSizeUnderflow { .. } => "step_size_underflow",
        Error::InvalidParameter(_) => "invalid_parameter",
        _ => "failed",
    }
}

/// Rows of one ladder. A success whose diagnostics fail, or whose alpha does
/// not lie below the previous successful one, is marked as such.
fn ladder_rows(m: f64, outcomes: Vec<Result<BoundState, Error>>) -> Vec<Row> {
    let mut prev: Option<f64> = None;
    outcomes
        .into_iter()
        .enumerate()
        .map(|(n, res)| match res {
            Ok(b) => {
                let status = if prev.is_some_and(|a| b.alpha >= a) {
                    "not_decreasing"
                } else if !b.diagnostics.all_pass() {
                    "diagnostics_failed"
                } else {
                    "ok"
                };
                prev = Some(b.alpha);
                let message = (status == "diagnostics_failed").then(|| b.diagnostics.failed_names().join(","));
                Row {
                    m,
                    n,
                    alpha: Some(b.alpha),
                    status,
                    message,
                }
            }
            Err(e) => Row {
                m,
                n,
                alpha: None,
                status: error_status(&e),
                message: Some(e.to_string()),
            },
        })
        .collect()
}

pub(crate) fn run(a: &ScanArgs, command_line: &[String]) -> Result<i32, CliError> {
    let start = Instant::now();
    let grid = a.m_grid()?;
    let params: Vec<ProblemParams> = grid
        .iter()
        .map(|&m| ProblemParams::new(a.dim, m).map_err(CliError::from_core_usage))
        .collect::<Result<_, _>>()?;
    let c = a.tolerances.controls();
    for p in &params {
        c.validate(p).map_err(CliError::from_core_usage)?;
    }
    if !(a.bis_tol > 0.0) {
        return Err(CliError::usage(format!(
            "--bis-tol must be positive, got {}",
            a.bis_tol
        )));
    }

    let parameters = json!({
        "dim": a.dim,
        "m_min": a.m_min,
        "m_max": a.m_max,
        "m_step": a.m_step,
        "m_grid": grid,
        "nodes_max": a.nodes_max,
    });
    // The origin offset follows the parameter default for each m.
    let tolerances = tolerances_json(&c, a.bis_tol, None);
    let id = run_id("scan", &parameters, &tolerances);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs as usize)
        .build()
        .map_err(|e| CliError::failure(format!("thread pool: {e}")))?;
    let per_m: Vec<Vec<Row>> = pool.install(|| {
        params
            .par_iter()
            .map(|p| ladder_rows(p.m(), ladder_outcomes(a.nodes_max, p, &c, a.bis_tol)))
            .collect()
    });
    let rows: Vec<Row> = per_m.into_iter().flatten().collect();

    create_dir(&a.out)?;
    let csv_rows = rows.iter().map(|r| {
        vec![
            num(r.m),
            r.n.to_string(),
            r.alpha.map(num).unwrap_or_default(),
            r.status.to_string(),
        ]
    });
    write_csv(&a.out.join("scan.csv"), &id, &["m", "n", "alpha", "status"], csv_rows)?;

    let ok = rows.iter().filter(|r| r.status == "ok").count();
    let jobs = rows
        .iter()
        .map(|r| {
            json!({
                "m": r.m,
                "n": r.n,
                "alpha": r.alpha,
                "status": r.status,
                "message": r.message,
            })
        })
        .collect();
    let manifest = Manifest {
        run_id: id,
        command: "scan".into(),
        command_line: command_line.to_vec(),
        version: sn_bound::VERSION.into(),
        parameters,
        tolerances,
        wall_time_s: start.elapsed().as_secs_f64(),
        outputs: vec!["scan.csv".into(), "manifest.json".into()],
        jobs,
        physical: None,
    };
    manifest.write(&a.out)?;

    let total = rows.len();
    if (ok as f64) >= SUCCESS_QUOTA * total as f64 {
        Ok(EXIT_OK)
    } else {
        eprintln!("only {ok} of {total} grid points succeeded");
        Ok(EXIT_SCAN_INCOMPLETE)
    }
}

use std::io::Write;

use serde_json::json;
use sn_bound::analysis::check_bound_state;
use sn_bound::{launch, profile_from_states, FrictionModel, Termination};

use crate::args::CheckArgs;
use crate::output::read_profile_csv;
use crate::{CliError, EXIT_FAILURE, EXIT_OK};

pub(crate) fn run(a: &CheckArgs) -> Result<i32, CliError> {
    let friction = if a.literal_2d {
        if a.problem.dim != 2 {
            return Err(CliError::usage("--literal-2d applies to --dim 2"));
        }
        FrictionModel::LiteralDisplay
    } else {
        FrictionModel::General
    };
    let p = a.problem.params(friction)?;
    let c = a.tolerances.controls();
    c.validate(&p).map_err(CliError::from_core_usage)?;

    let (source, prof) = match (a.u0, &a.profile) {
        (Some(u0), None) => {
            if !(u0 > 0.0 && u0.is_finite()) {
                return Err(CliError::usage(format!("--u0 must be positive, got {u0}")));
            }
            let (prof, _) = launch(u0, &p, &c).map_err(|e| CliError::stage("integrate", e))?;
            ("u0", prof)
        }
        (None, Some(path)) => {
            let points = read_profile_csv(path)?;
            // Stored profiles are bound states cut at their decaying tail.
            let prof = profile_from_states(&p, &points, Termination::Truncated)
                .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
            ("profile", prof)
        }
        _ => return Err(CliError::usage("give exactly one of --u0 and --profile")),
    };

    let report = check_bound_state(&prof);
    let out = json!({
        "source": source,
        "u0": prof.u0,
        "nodes": prof.zeros.len(),
        "r_end": prof.r_end,
        "termination": prof.termination,
        "all_pass": report.all_pass(),
        "failed": report.failed_names(),
        "checks": report.to_json(),
    });
    // A closed stdout (e.g. a pipe into `head`) is not an error of the check.
    let _ = writeln!(
        std::io::stdout().lock(),
        "{}",
        serde_json::to_string_pretty(&out).expect("serializable")
    );
    if report.all_pass() {
        Ok(EXIT_OK)
    } else {
        eprintln!("failed checks: {}", report.failed_names().join(", "));
        Ok(EXIT_FAILURE)
    }
}

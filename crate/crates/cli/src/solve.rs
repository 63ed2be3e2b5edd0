use std::time::Instant;

use serde_json::{json, Value};
use sn_bound::physical::physical_solution;
use sn_bound::shoot::{bracket_alpha, refine_alpha};
use sn_bound::FrictionModel;

use crate::args::SolveArgs;
use crate::output::{
    create_dir, num, params_json, run_id, tolerances_json, write_csv, write_json, Manifest, PROFILE_COLUMNS,
};
use crate::{CliError, EXIT_FAILURE, EXIT_OK};

pub(crate) fn run(a: &SolveArgs, command_line: &[String]) -> Result<i32, CliError> {
    let start = Instant::now();
    let p = a.problem.params(FrictionModel::General)?;
    let c = a.tolerances.controls();
    c.validate(&p).map_err(CliError::from_core_usage)?;
    if !(a.bis_tol > 0.0) {
        return Err(CliError::usage(format!(
            "--bis-tol must be positive, got {}",
            a.bis_tol
        )));
    }
    if p.dim() == 1 && a.omega_rot != 0.0 {
        return Err(CliError::usage("--omega-rot applies to --dim 2"));
    }

    let mut parameters = params_json(&p);
    parameters["nodes"] = json!(a.nodes);
    if let Some(parity) = a.problem.parity {
        parameters["parity"] = json!(parity);
    }
    if let (Some(g), Some(s)) = (a.gamma, a.sigma) {
        parameters["gamma"] = json!(g);
        parameters["sigma"] = json!(s);
        parameters["omega_rot"] = json!(a.omega_rot);
    }
    let tolerances = tolerances_json(&c, a.bis_tol, Some(c.eps_for(&p)));
    let id = run_id("solve", &parameters, &tolerances);

    let bracket = bracket_alpha(a.nodes, &p, &c).map_err(|e| CliError::stage("bracket", e))?;
    let state = refine_alpha(&bracket, a.nodes, &p, &c, a.bis_tol).map_err(|e| CliError::stage("refine", e))?;

    // Physical variables before any file is written, so that a failed mapping
    // leaves no partial output set.
    let physical = match (a.gamma, a.sigma) {
        (Some(g), Some(s)) => {
            Some(physical_solution(&state.profile, g, s, a.omega_rot).map_err(|e| CliError::stage("physical", e))?)
        }
        _ => None,
    };

    create_dir(&a.out)?;
    let mut outputs = vec!["profile.csv".to_string(), "diagnostics.json".to_string()];
    let rows = state.profile.samples.iter().map(|s| {
        let st = s.state;
        vec![num(s.r), num(st.u), num(st.du), num(st.v), num(st.dv)]
    });
    write_csv(&a.out.join("profile.csv"), &id, &PROFILE_COLUMNS, rows)?;

    let report = &state.diagnostics;
    let diagnostics = json!({
        "run_id": id,
        "all_pass": report.all_pass(),
        "failed": report.failed_names(),
        "checks": report.to_json(),
    });
    write_json(&a.out.join("diagnostics.json"), &diagnostics)?;

    let physical_summary: Option<Value> = match &physical {
        Some(sol) => {
            let rows = sol
                .r
                .iter()
                .zip(&sol.phi)
                .zip(&sol.v)
                .map(|((r, phi), v)| vec![num(*r), num(*phi), num(*v)]);
            write_csv(&a.out.join("physical.csv"), &id, &["r", "phi", "v"], rows)?;
            outputs.push("physical.csv".into());
            let sm = sol.summary();
            Some(json!({
                "omega": sm.omega,
                "E": sm.energy,
                "N": sm.charge,
                "v_origin": sm.v_origin,
                "gamma": sm.gamma,
                "sigma": sm.sigma,
                "omega_rot": sm.omega_rot,
            }))
        }
        None => None,
    };

    let tail = state.profile.last();
    let job = json!({
        "nodes": a.nodes,
        "alpha": state.alpha,
        "bracket": [state.bracket.0, state.bracket.1],
        "zeros": state.profile.zeros.len(),
        "r_end": state.profile.r_end,
        "termination": state.profile.termination,
        "tail_u": tail.state.u,
        "status": if report.all_pass() { "ok" } else { "diagnostics_failed" },
    });
    outputs.push("manifest.json".into());
    let manifest = Manifest {
        run_id: id,
        command: "solve".into(),
        command_line: command_line.to_vec(),
        version: sn_bound::VERSION.into(),
        parameters,
        tolerances,
        wall_time_s: start.elapsed().as_secs_f64(),
        outputs,
        jobs: vec![job],
        physical: physical_summary,
    };
    manifest.write(&a.out)?;

    if report.all_pass() {
        Ok(EXIT_OK)
    } else {
        eprintln!("diagnostics failed: {}", report.failed_names().join(", "));
        Ok(EXIT_FAILURE)
    }
}

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use sn_bound::{IntegrationControls, ProblemParams, ShootState};

use crate::CliError;

/// Seventeen significant digits, enough to round-trip any binary64 value.
pub(crate) fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Run identifier shared by every file of one invocation: a digest of the
/// command, the library version and every knob that affects the results.
/// Output paths and timings do not enter it, so reruns reproduce it.
pub fn run_id(command: &str, parameters: &Value, tolerances: &Value) -> String {
    let key = json!({
        "command": command,
        "version": sn_bound::VERSION,
        "parameters": parameters,
        "tolerances": tolerances,
    });
    let digest = Sha256::digest(key.to_string().as_bytes());
    digest[..16].iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub run_id: String,
    pub command: String,
    pub command_line: Vec<String>,
    pub version: String,
    pub parameters: Value,
    pub tolerances: Value,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
    pub jobs: Vec<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub physical: Option<Value>,
}

impl Manifest {
    pub(crate) fn write(&self, dir: &Path) -> Result<(), CliError> {
        write_json(
            &dir.join("manifest.json"),
            &serde_json::to_value(self).expect("serializable"),
        )
    }
}

pub(crate) fn tolerances_json(c: &IntegrationControls, bis_tol: f64, eps_origin: Option<f64>) -> Value {
    json!({
        "rel_tol": c.rel_tol,
        "abs_tol": c.abs_tol,
        "r_max": c.r_max,
        "escape_factor": c.escape_factor,
        "eps_origin": eps_origin,
        "max_steps": c.max_steps,
        "bis_tol": bis_tol,
    })
}

pub(crate) fn params_json(p: &ProblemParams) -> Value {
    json!({
        "dim": p.dim(),
        "m": p.m(),
        "friction": p.friction(),
    })
}

pub(crate) fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub(crate) fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// CSV preceded by a `# run_id:` comment line.
pub(crate) fn write_csv<I>(path: &Path, run_id: &str, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let err = |e: &dyn std::fmt::Display| CliError::io(path, e);
    let file = File::create(path).map_err(|e| err(&e))?;
    let mut buf = BufWriter::new(file);
    writeln!(buf, "# run_id: {run_id}").map_err(|e| err(&e))?;
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(header).map_err(|e| err(&e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| err(&e))?;
    }
    w.flush().map_err(|e| err(&e))
}

pub const PROFILE_COLUMNS: [&str; 5] = ["r", "u", "du", "V", "dV"];

/// Reads a profile CSV (`r,u,du,V,dV`, `#` comment lines allowed). Errors
/// name the file, line and column.
pub fn read_profile_csv(path: &Path) -> Result<Vec<(f64, ShootState)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    // Comment lines are blanked rather than removed so that byte offsets map
    // back to the lines of the file.
    let text: String = text
        .lines()
        .map(|l| if l.trim_start().starts_with('#') { "" } else { l })
        .flat_map(|l| [l, "\n"])
        .collect();
    let line_of = |pos: Option<&csv::Position>| {
        pos.map(|p| {
            text.as_bytes()[..p.byte() as usize]
                .iter()
                .filter(|&&b| b == b'\n')
                .count()
                + 1
        })
    };
    let at = |line: Option<usize>, msg: String| match line {
        Some(l) => CliError::usage(format!("{}:{l}: {msg}", path.display())),
        None => CliError::usage(format!("{}: {msg}", path.display())),
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| at(line_of(e.position()), e.to_string()))?
        .clone();
    let names: Vec<&str> = headers.iter().collect();
    if names != PROFILE_COLUMNS {
        let header_line = text.lines().position(|l| !l.trim().is_empty()).map(|i| i + 1);
        return Err(at(
            header_line,
            format!(
                "expected header {}, found {}",
                PROFILE_COLUMNS.join(","),
                names.join(",")
            ),
        ));
    }
    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| at(line_of(e.position()), e.to_string()))?;
        let line = line_of(rec.position());
        let mut vals = [0.0; 5];
        for (k, (field, name)) in rec.iter().zip(PROFILE_COLUMNS).enumerate() {
            vals[k] = field
                .parse::<f64>()
                .map_err(|e| at(line, format!("column {name}: {e} ({field:?})")))?;
        }
        points.push((vals[0], ShootState::new(vals[1], vals[2], vals[3], vals[4])));
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [
            0.1,
            1.0 / 3.0,
            -2.5e-300,
            6.02214076e23,
            f64::MIN_POSITIVE,
            1.2134344293422146,
        ] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn run_id_depends_on_knobs_only() {
        let p = json!({"dim": 2, "m": 0.0});
        let t = json!({"rel_tol": 1e-10});
        let a = run_id("solve", &p, &t);
        assert_eq!(a, run_id("solve", &p, &t));
        assert_eq!(a.len(), 32);
        assert_ne!(a, run_id("scan", &p, &t));
        assert_ne!(a, run_id("solve", &p, &json!({"rel_tol": 1e-11})));
    }

    #[test]
    fn profile_csv_errors_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        std::fs::write(&path, "# run_id: x\nr,u,du,V\n1,2,3,4\n").unwrap();
        let e = read_profile_csv(&path).unwrap_err();
        assert!(e.message.contains(":2: expected header"), "{}", e.message);
        std::fs::write(&path, "# a\n# b\nr,u,du,V,dV\n1,2,3,4,5\n2,2,3,4\n").unwrap();
        let e = read_profile_csv(&path).unwrap_err();
        assert!(e.message.contains("p.csv:5:"), "{}", e.message);
        std::fs::write(&path, "r,u,du,V,dV\n 1, 2,3,4,5\n").unwrap();
        let pts = read_profile_csv(&path).unwrap();
        assert_eq!(pts[0].0, 1.0);
        assert_eq!(pts[0].1.dv, 5.0);
    }
}

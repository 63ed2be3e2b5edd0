use std::collections::BTreeMap;

use super::decay::decay_check;
use super::report::{CheckResult, DiagnosticsReport};
use crate::profile::Profile;

/// Names of the structural checks, in report order.
pub const CHECK_NAMES: [&str; 7] = [
    "v_increasing",
    "simple_zeros",
    "zeros_beyond_a",
    "u_lower_bound",
    "v_lower_bound",
    "lyapunov",
    "v_log_slope",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CheckTolerances {
    pub relative: f64,
    pub overrides: BTreeMap<String, f64>,
}

impl Default for CheckTolerances {
    fn default() -> Self {
        Self {
            relative: 1e-8,
            overrides: BTreeMap::new(),
        }
    }
}

impl CheckTolerances {
    pub fn with(mut self, name: &str, tol: f64) -> Self {
        self.overrides.insert(name.to_string(), tol);
        self
    }

    pub fn for_check(&self, name: &str) -> f64 {
        self.overrides.get(name).copied().unwrap_or(self.relative)
    }
}

/// Running maximum of a normalized violation.
struct Worst {
    value: f64,
    r: f64,
}

impl Worst {
    fn new() -> Self {
        Self {
            value: f64::NEG_INFINITY,
            r: 0.0,
        }
    }

    fn see(&mut self, value: f64, r: f64) {
        if value > self.value {
            self.value = value;
            self.r = r;
        }
    }

    fn finish(self, name: &str, tol: f64) -> CheckResult {
        let value = if self.value.is_finite() { self.value } else { 0.0 };
        CheckResult {
            name: name.into(),
            pass: value <= tol,
            applicable: true,
            worst: value,
            r_worst: self.r,
            tolerance: tol,
        }
    }
}

/// End (exclusive) of the leading range where `u > 0` and `u' < 0`.
fn positive_decreasing_end(prof: &Profile) -> usize {
    prof.samples
        .iter()
        .position(|s| !(s.state.u > 0.0 && s.state.du < 0.0))
        .unwrap_or(prof.samples.len())
}

/// Runs the seven structural checks with default tolerances.
pub fn check_profile(prof: &Profile) -> DiagnosticsReport {
    check_profile_with(prof, &CheckTolerances::default())
}

/// Structural checks plus the decay-ratio entry, as attached to bound states.
pub fn check_bound_state(prof: &Profile) -> DiagnosticsReport {
    let mut report = check_profile(prof);
    report.push(decay_check(prof));
    report
}

pub fn check_profile_with(prof: &Profile, tols: &CheckTolerances) -> DiagnosticsReport {
    let mut report = DiagnosticsReport::default();
    let p = &prof.params;
    let u0 = prof.u0;
    let s = &prof.samples;
    let m1 = p.m() + 1.0;
    let r0 = p.r0();

    // (1) V strictly increasing, V' > 0.
    {
        let name = CHECK_NAMES[0];
        let mut w = Worst::new();
        let dv_scale = s
            .iter()
            .map(|x| x.state.dv.abs())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        for x in s {
            w.see(-x.state.dv / dv_scale, x.r);
        }
        for pair in s.windows(2) {
            let (a, b) = (pair[0].state.v, pair[1].state.v);
            let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
            w.see((a - b) / scale, pair[1].r);
        }
        report.push(w.finish(name, tols.for_check(name)));
    }

    // (2) every zero is simple: |u'| bounded away from 0 and u changes sign.
    {
        let name = CHECK_NAMES[1];
        let tol = tols.for_check(name);
        let du_scale = s
            .iter()
            .map(|x| x.state.du.abs())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let mut w = Worst::new();
        for &z in &prof.zeros {
            let Some(i) = prof.index_at_or_before(z) else { continue };
            let Some(st) = prof.state_at(z) else { continue };
            let before = s[i].state.u;
            let after = s.get(i + 1).map_or(0.0, |x| x.state.u);
            let sign_change = before * after < 0.0 || before == 0.0 && i > 0;
            let slope = st.du.abs() / du_scale;
            // Violation is positive when the slope is within tolerance of 0.
            let v = if sign_change { 2.0 * tol - slope } else { 1.0 };
            w.see(v, z);
        }
        let mut res = w.finish(name, tol);
        if prof.zeros.is_empty() {
            res.worst = 0.0;
        }
        res.pass = res.worst < tol;
        report.push(res);
    }

    // (3) at most one zero beyond the V = 1 radius.
    {
        let name = CHECK_NAMES[2];
        let (count, r) = match prof.v_one_radius {
            Some(a) => {
                let beyond: Vec<f64> = prof.zeros.iter().copied().filter(|&z| z > a).collect();
                (beyond.len(), beyond.last().copied().unwrap_or(a))
            }
            None => (0, prof.r_end),
        };
        report.push(CheckResult {
            name: name.into(),
            pass: count <= 1,
            applicable: true,
            worst: count as f64 - 1.0,
            r_worst: r,
            tolerance: 0.0,
        });
    }

    let end = positive_decreasing_end(prof);

    // (4) u >= u0 (1 - r²/r0²) while u > 0, u' < 0.
    {
        let name = CHECK_NAMES[3];
        let mut w = Worst::new();
        for x in &s[..end] {
            let bound = u0 * (1.0 - x.r * x.r / (r0 * r0));
            w.see((bound - x.state.u) / u0, x.r);
        }
        report.push(w.finish(name, tols.for_check(name)));
    }

    // (5) V >= u² r^{2(m+1)} / (r0² (m+1)) on the same range.
    {
        let name = CHECK_NAMES[4];
        let mut w = Worst::new();
        for x in &s[..end] {
            let bound = x.state.u * x.state.u * x.r.powf(2.0 * m1) / (r0 * r0 * m1);
            let scale = bound.max(x.state.v).max(f64::MIN_POSITIVE);
            w.see((bound - x.state.v) / scale, x.r);
        }
        report.push(w.finish(name, tols.for_check(name)));
    }

    // (6) F = u²(1 - V) + u'² nonincreasing while V <= 1/2, hence u² <= 2 u0².
    {
        let name = CHECK_NAMES[5];
        let mut w = Worst::new();
        let u02 = u0 * u0;
        let b = prof.v_half_radius.unwrap_or(f64::INFINITY);
        let lyap = |st: &crate::system::ShootState| st.u * st.u * (1.0 - st.v) + st.du * st.du;
        let upto = s.partition_point(|x| x.r <= b && x.state.v <= 0.5);
        for x in &s[..upto] {
            w.see((x.state.u * x.state.u - 2.0 * u02) / (2.0 * u02), x.r);
        }
        for pair in s[..upto].windows(2) {
            w.see((lyap(&pair[1].state) - lyap(&pair[0].state)) / u02, pair[1].r);
        }
        report.push(w.finish(name, tols.for_check(name)));
    }

    // (7) V'/V <= 2(m+1)/r, i.e. y = 2(m+1)V - rV' >= 0, while u > 0, u' < 0.
    {
        let name = CHECK_NAMES[6];
        let mut w = Worst::new();
        for x in &s[..end] {
            let lhs = x.r * x.state.dv;
            let rhs = 2.0 * m1 * x.state.v;
            let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
            w.see((lhs - rhs) / scale, x.r);
        }
        report.push(w.finish(name, tols.for_check(name)));
    }

    report
}

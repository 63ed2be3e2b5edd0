use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::Profile;

/// `w r^{2m+d-1}` for `w = u_b' u_a - u_a' u_b`, sampled on the radii of the
/// lower profile where both solutions stay positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WronskianTrace {
    pub radii: Vec<f64>,
    pub weighted: Vec<f64>,
    /// Smallest increment of `w r^{2m+d-1}` between consecutive radii.
    pub min_increment: f64,
    /// `w r^{2m+d-1} >= -tol` everywhere and nondecreasing up to `tol`.
    pub nondecreasing: bool,
    /// Smallest `u_b - u_a` over the range.
    pub min_gap: f64,
    /// `u_b > u_a` on every compared radius.
    pub no_crossing: bool,
    /// `V_b > V_a` on every compared radius.
    pub potential_ordered: bool,
}

/// Default absolute slack for the monotonicity verdict: ten times the
/// default integrator tolerance.
pub const WRONSKIAN_SLACK: f64 = 1e-9;

pub fn wronskian_scan(a: &Profile, b: &Profile) -> Result<WronskianTrace> {
    wronskian_scan_with_tol(a, b, WRONSKIAN_SLACK)
}

/// Compares `a` (smaller `u0`) with `b`. The slack is relative to the
/// largest `|w r^{2m+d-1}|` on the range.
pub fn wronskian_scan_with_tol(a: &Profile, b: &Profile, slack: f64) -> Result<WronskianTrace> {
    if a.params != b.params {
        return Err(Error::InvalidParameter("profiles have different parameters".into()));
    }
    if !(a.u0 <= b.u0) {
        return Err(Error::InvalidParameter(format!(
            "expected u0_a <= u0_b, got {} > {}",
            a.u0, b.u0
        )));
    }
    let c = a.params.c_u();
    let r_hi = a.r_end.min(b.r_end);
    let mut radii = Vec::new();
    let mut weighted = Vec::new();
    let mut min_gap = f64::INFINITY;
    let mut potential_ordered = true;
    for s in &a.samples {
        if s.r > r_hi || s.state.u < 0.0 {
            break;
        }
        let Some(sb) = b.state_at(s.r) else { break };
        if sb.u <= 0.0 {
            break;
        }
        let sa = s.state;
        let w = sb.du * sa.u - sa.du * sb.u;
        radii.push(s.r);
        weighted.push(w * s.r.powf(c));
        min_gap = min_gap.min(sb.u - sa.u);
        if a.u0 < b.u0 {
            potential_ordered &= sb.v > sa.v;
        }
    }
    if radii.len() < 10 {
        return Err(Error::RangeMismatch(radii.len()));
    }
    let scale = weighted
        .iter()
        .map(|x| x.abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let tol = slack * scale.max(1.0);
    let min_increment = weighted.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let min_value = weighted.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(WronskianTrace {
        nondecreasing: min_increment >= -tol && min_value >= -tol,
        no_crossing: min_gap > 0.0,
        min_increment,
        min_gap,
        potential_ordered,
        radii,
        weighted,
    })
}

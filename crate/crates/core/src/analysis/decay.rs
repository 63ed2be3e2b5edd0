use serde::{Deserialize, Serialize};

use super::report::CheckResult;
use crate::error::{Error, Result};
use crate::profile::{Profile, Termination};
use crate::shoot::decay_z;

/// Acceptable band around 1 for the final decay ratio of a bound state.
pub const DECAY_BAND: f64 = 0.1;

/// Exponent used for the surrogate `u(r) exp(kappa ∫ V^{1/2})`.
pub const DECAY_KAPPA: f64 = 0.9;

/// `z(r) = -(u'/u) V^{-1/2}` over the trailing 20% of a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayTrace {
    pub radii: Vec<f64>,
    pub z: Vec<f64>,
    pub final_z: f64,
    /// `|final_z - 1|`.
    pub delta: f64,
    /// Max of `|u| exp(kappa ∫ V^{1/2})` over the tail, divided by its value
    /// at the start of the tail.
    pub surrogate_growth: f64,
    /// True when `u` and `u'` have opposite signs throughout the tail.
    pub decaying: bool,
}

impl DecayTrace {
    pub fn is_bound_state_tail(&self) -> bool {
        self.decaying && self.delta <= DECAY_BAND
    }
}

pub fn decay_ratio(prof: &Profile) -> Result<DecayTrace> {
    let s = &prof.samples;
    if s.is_empty() {
        return Err(Error::TailTooShort(0));
    }
    let r_start = prof.first().r;
    let cut = prof.r_end - 0.2 * (prof.r_end - r_start);

    // ∫ V^{1/2} by trapezoid over all samples.
    let mut phase = Vec::with_capacity(s.len());
    let mut acc = 0.0;
    phase.push(0.0);
    for w in s.windows(2) {
        acc += 0.5 * (w[1].r - w[0].r) * (w[0].state.v.max(0.0).sqrt() + w[1].state.v.max(0.0).sqrt());
        phase.push(acc);
    }

    let mut radii = Vec::new();
    let mut z = Vec::new();
    let mut surrogate = Vec::new();
    let mut decaying = true;
    for (x, ph) in s.iter().zip(&phase) {
        let st = x.state;
        if x.r < cut || st.u == 0.0 || st.v <= 1.0 {
            continue;
        }
        radii.push(x.r);
        z.push(decay_z(st.u, st.du, st.v));
        surrogate.push(st.u.abs().ln() + DECAY_KAPPA * ph);
        decaying &= st.is_decaying();
    }
    if radii.len() < 10 {
        return Err(Error::TailTooShort(radii.len()));
    }
    let final_z = *z.last().expect("nonempty");
    let peak = surrogate.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(DecayTrace {
        final_z,
        delta: (final_z - 1.0).abs(),
        surrogate_growth: (peak - surrogate[0]).exp(),
        decaying,
        radii,
        z,
    })
}

/// Report entry for the decay law. Escaped profiles are not bound states,
/// so the entry is marked not applicable for them.
pub(crate) fn decay_check(prof: &Profile) -> CheckResult {
    let name = "decay";
    if prof.termination == Termination::Escaped {
        return CheckResult::not_applicable(name, DECAY_BAND);
    }
    match decay_ratio(prof) {
        Ok(trace) => CheckResult {
            name: name.into(),
            pass: trace.is_bound_state_tail(),
            applicable: true,
            worst: trace.delta,
            r_worst: *trace.radii.last().expect("nonempty"),
            tolerance: DECAY_BAND,
        },
        Err(_) => CheckResult {
            name: name.into(),
            pass: false,
            applicable: true,
            worst: f64::MAX,
            r_worst: prof.r_end,
            tolerance: DECAY_BAND,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Sample;
    use crate::system::{rhs_unchecked, ProblemParams, ShootState};

    fn profile(states: impl Fn(f64) -> ShootState, r_end: f64, n: usize, termination: Termination) -> Profile {
        let p = ProblemParams::new(1, 0.0).unwrap();
        let samples: Vec<Sample> = (0..=n)
            .map(|i| {
                let r = 1.0 + (r_end - 1.0) * i as f64 / n as f64;
                let state = states(r);
                Sample {
                    r,
                    state,
                    deriv: rhs_unchecked(r, &state, &p),
                }
            })
            .collect();
        Profile {
            params: p,
            u0: 1.0,
            r_end: samples.last().unwrap().r,
            samples,
            zeros: vec![],
            termination,
            v_one_radius: None,
            v_half_radius: None,
        }
    }

    #[test]
    fn exponential_tail_has_unit_ratio() {
        // u = exp(-k r) with V = k^2 gives z = 1 exactly.
        let k: f64 = 2.0;
        let prof = profile(
            |r| ShootState::new((-k * r).exp(), -k * (-k * r).exp(), k * k, 1e-9),
            10.0,
            200,
            Termination::Truncated,
        );
        let t = decay_ratio(&prof).unwrap();
        assert!(t.delta < 1e-14);
        assert!(t.decaying && t.is_bound_state_tail());
        assert!(t.surrogate_growth <= 1.0 + 1e-12);
        assert!(decay_check(&prof).pass);
    }

    #[test]
    fn growing_tail_is_rejected() {
        let k: f64 = 2.0;
        let prof = profile(
            |r| ShootState::new((k * r).exp(), k * (k * r).exp(), k * k, 1e-9),
            10.0,
            200,
            Termination::ReachedRmax,
        );
        let t = decay_ratio(&prof).unwrap();
        assert!(!t.decaying);
        assert!(!decay_check(&prof).pass);
    }

    #[test]
    fn escaped_profiles_are_not_applicable() {
        let prof = profile(|r| ShootState::new(r, 1.0, 2.0, 1.0), 5.0, 50, Termination::Escaped);
        let c = decay_check(&prof);
        assert!(c.pass && !c.applicable);
    }

    #[test]
    fn short_tail_is_an_error() {
        let prof = profile(
            |r| ShootState::new((-r).exp(), -(-r).exp(), 1.0 + 1e-3 * r, 1e-3),
            3.0,
            20,
            Termination::Truncated,
        );
        assert!(matches!(decay_ratio(&prof), Err(Error::TailTooShort(_))));
        let c = decay_check(&prof);
        assert!(!c.pass && c.applicable);
    }
}

use serde::{Deserialize, Serialize};

use crate::system::{ProblemParams, ShootState};

/// One accepted point of a trajectory together with its derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub r: f64,
    pub state: ShootState,
    /// `(u', u'', V', V'')` at `r`.
    pub deriv: ShootState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The escape predicate held; classification is final.
    Escaped,
    /// The horizon was reached without escape.
    ReachedRmax,
    /// The step budget ran out before escape or the horizon.
    StepLimit,
    /// Cut at the decaying tail of a bound state.
    Truncated,
}

/// A sampled trajectory of the rescaled system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub params: ProblemParams,
    pub u0: f64,
    pub samples: Vec<Sample>,
    /// Simple zeros of `u`, increasing.
    pub zeros: Vec<f64>,
    pub r_end: f64,
    pub termination: Termination,
    /// Radius where `V = 1`, if reached.
    pub v_one_radius: Option<f64>,
    /// Radius where `V = 1/2`, if reached.
    pub v_half_radius: Option<f64>,
}

impl Profile {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.r)
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("profile has samples")
    }

    /// Number of zeros strictly before `r`.
    pub fn zeros_before(&self, r: f64) -> usize {
        self.zeros.iter().filter(|&&z| z < r).count()
    }

    /// Index of the last sample with radius `<= r`.
    pub fn index_at_or_before(&self, r: f64) -> Option<usize> {
        let k = self.samples.partition_point(|s| s.r <= r);
        k.checked_sub(1)
    }

    /// State at `r` by cubic Hermite interpolation of `(u, u')` and `(V, V')`
    /// between the bracketing samples. Exact at sample radii.
    pub fn state_at(&self, r: f64) -> Option<ShootState> {
        let i = self.index_at_or_before(r)?;
        let s0 = &self.samples[i];
        if s0.r == r {
            return Some(s0.state);
        }
        let s1 = self.samples.get(i + 1)?;
        Some(hermite_state(s0, s1, r))
    }

    /// Drops every sample beyond index `last` and zeros past its radius.
    pub fn truncate_at(&mut self, last: usize) {
        self.samples.truncate(last + 1);
        let r_end = self.last().r;
        self.r_end = r_end;
        self.zeros.retain(|&z| z <= r_end);
        if self.v_one_radius.is_some_and(|a| a > r_end) {
            self.v_one_radius = None;
        }
        if self.v_half_radius.is_some_and(|b| b > r_end) {
            self.v_half_radius = None;
        }
        self.termination = Termination::Truncated;
    }
}

pub(crate) fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> (f64, f64) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let value = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
    let dh00 = (6.0 * t2 - 6.0 * t) / h;
    let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    let dh01 = (-6.0 * t2 + 6.0 * t) / h;
    let dh11 = 3.0 * t2 - 2.0 * t;
    let slope = dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1;
    (value, slope)
}

pub(crate) fn hermite_state(s0: &Sample, s1: &Sample, r: f64) -> ShootState {
    let (u, du) = hermite(s0.r, s1.r, s0.state.u, s1.state.u, s0.deriv.u, s1.deriv.u, r);
    let (v, dv) = hermite(s0.r, s1.r, s0.state.v, s1.state.v, s0.deriv.v, s1.deriv.v, r);
    ShootState::new(u, du, v, dv)
}

//! Continuation of a bound-state tail beyond the radius where forward
//! integration can still follow the decaying branch.
//!
//! Past the junction `u` is small, so `V` is extended at constant charge
//! `Q = V' r^{c_v}` and the decaying solution of the linear equation
//! `u'' + (c_u/r) u' = (V - 1) u` is obtained from the Riccati variable
//! `w = u'/u`, integrated inward from a far radius where it is started on its
//! WKB value. Inward integration is stable for the decaying branch. `V` is
//! then re-integrated with the continued `u` as source and `u` recomputed.

use crate::physical::quadrature::cumulative;
use crate::profile::{hermite, Profile, Sample};
use crate::shoot::decay_z;
use crate::system::{rhs_unchecked, ShootState};

/// Grid spacing of the continued tail.
pub const TAIL_STEP: f64 = 0.02;

/// Longest continuation considered, measured from the junction.
pub const TAIL_MAX_EXTENT: f64 = 5000.0;

const TARGET_U: f64 = 1e-8;
const TARGET_BAND: f64 = 0.1;
// Smallest |u| / u0 the continuation tries to represent.
const FLOOR_U: f64 = 1e-290;

struct Extension {
    r_t: f64,
    v_t: f64,
    q: f64,
    c_v: f64,
}

impl Extension {
    fn v(&self, r: f64) -> f64 {
        let g = if (self.c_v - 1.0).abs() < 1e-12 {
            (r / self.r_t).ln()
        } else {
            let e = 1.0 - self.c_v;
            (r.powf(e) - self.r_t.powf(e)) / e
        };
        self.v_t + self.q * g
    }

    fn dv(&self, r: f64) -> f64 {
        self.q * r.powf(-self.c_v)
    }
}

/// Stopping rule of the continuation: `|u| < 1e-8 u0`, `r^m |u|` below
/// `1e-8` of its peak so that the physical profile has decayed as well, and
/// `z` within 10% of 1.
struct Target {
    ln_u: f64,
    ln_weighted: f64,
    m: f64,
}

impl Target {
    fn small(&self, ln_u: f64, r: f64) -> bool {
        ln_u < self.ln_u && ln_u + self.m * r.ln() < self.ln_weighted
    }
}

/// Radius where the WKB estimate first meets the stopping rule, or the
/// limit of the continuation.
fn target_radius(ext: &Extension, ln_u_t: f64, target: &Target, ln_floor: f64) -> f64 {
    let mut r = ext.r_t;
    let mut phase = 0.0;
    let mut root_prev = (ext.v(r) - 1.0).max(0.0).sqrt();
    while r < ext.r_t + TAIL_MAX_EXTENT {
        let r1 = r + TAIL_STEP;
        let v1 = ext.v(r1);
        let root = (v1 - 1.0).max(0.0).sqrt();
        phase += 0.5 * TAIL_STEP * (root + root_prev);
        root_prev = root;
        r = r1;
        let ln_u = ln_u_t - phase;
        if ln_u < ln_floor {
            break;
        }
        let z = ((v1 - 1.0) / v1).max(0.0).sqrt();
        if target.small(ln_u, r) && z >= 1.0 - 0.8 * TARGET_BAND {
            break;
        }
    }
    r
}

/// Potential on the continuation grid, with values and slopes at the nodes
/// and cubic Hermite interpolation between them.
struct GridPotential {
    r_t: f64,
    v: Vec<f64>,
    dv: Vec<f64>,
}

impl GridPotential {
    fn at(&self, r: f64) -> f64 {
        let x = (r - self.r_t) / TAIL_STEP;
        let k = (x.floor().max(0.0) as usize).min(self.v.len() - 2);
        let r0 = self.r_t + k as f64 * TAIL_STEP;
        hermite(
            r0,
            r0 + TAIL_STEP,
            self.v[k],
            self.v[k + 1],
            self.dv[k],
            self.dv[k + 1],
            r,
        )
        .0
    }
}

/// Inward RK4 for `w = u'/u` and `phi = ln |u|` from a WKB start at the last
/// node.
fn inward_riccati(pot: &GridPotential, c_u: f64) -> (Vec<f64>, Vec<f64>) {
    let steps = pot.v.len() - 1;
    let r_far = pot.r_t + steps as f64 * TAIL_STEP;
    let vm = pot.v[steps] - 1.0;
    let mut w = -vm.sqrt() - 0.5 * c_u / r_far - 0.25 * pot.dv[steps] / vm;
    let mut phi = 0.0;
    let mut ws = vec![0.0; steps + 1];
    let mut phis = vec![0.0; steps + 1];
    ws[steps] = w;
    let f = |r: f64, w: f64| pot.at(r) - 1.0 - w * w - c_u / r * w;
    let h = -TAIL_STEP;
    for k in (0..steps).rev() {
        let r = pot.r_t + (k + 1) as f64 * TAIL_STEP;
        let k1 = f(r, w);
        let w2 = w + 0.5 * h * k1;
        let k2 = f(r + 0.5 * h, w2);
        let w3 = w + 0.5 * h * k2;
        let k3 = f(r + 0.5 * h, w3);
        let w4 = w + h * k3;
        let k4 = f(r + h, w4);
        phi += h / 6.0 * (w + 2.0 * w2 + 2.0 * w3 + w4);
        w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        ws[k] = w;
        phis[k] = phi;
    }
    (ws, phis)
}

/// Number of times `V` is re-integrated from the continued `u`.
const SOURCE_PASSES: usize = 2;

/// Appends the continued tail to `prof`, whose last sample must lie on the
/// decaying branch with `V > 1`, up to the first sample meeting the stopping
/// rule.
pub(crate) fn continue_tail(prof: &mut Profile) {
    let p = prof.params;
    let last = *prof.last();
    let st = last.state;
    if !(st.v > 1.0 && st.is_decaying() && st.dv > 0.0) {
        return;
    }
    let (c_u, c_v, m) = (p.c_u(), p.c_v(), p.m());
    let r_t = last.r;
    let ext = Extension {
        r_t,
        v_t: st.v,
        q: st.dv * r_t.powf(c_v),
        c_v,
    };
    let peak_weighted = prof
        .samples
        .iter()
        .map(|s| s.r.powf(m) * s.state.u.abs())
        .fold(0.0, f64::max);
    let target = Target {
        ln_u: (TARGET_U * prof.u0).ln(),
        ln_weighted: (TARGET_U * peak_weighted).ln(),
        m,
    };
    let ln_floor = (FLOOR_U * prof.u0).ln();
    let r_target = target_radius(&ext, st.u.abs().ln(), &target, ln_floor);
    let span = 1.25 * (r_target - r_t) + 10.0;
    let steps = (span / TAIL_STEP).ceil() as usize;
    let usable = (((r_target - r_t) / TAIL_STEP).ceil() as usize + 1).min(steps);
    let radii: Vec<f64> = (0..=steps).map(|k| r_t + k as f64 * TAIL_STEP).collect();

    let mut pot = GridPotential {
        r_t,
        v: radii.iter().map(|&r| ext.v(r)).collect(),
        dv: radii.iter().map(|&r| ext.dv(r)).collect(),
    };
    let (mut ws, mut phis) = inward_riccati(&pot, c_u);
    for _ in 0..SOURCE_PASSES {
        // (r^{c_v} V')' = r^{c_v + 2m} u^2 with the continued u.
        let src: Vec<f64> = radii
            .iter()
            .zip(&phis)
            .map(|(&r, &ph)| {
                let u = st.u * (ph - phis[0]).exp();
                r.powf(c_v + 2.0 * m) * u * u
            })
            .collect();
        let flux = cumulative(&radii, &src);
        pot.dv = radii
            .iter()
            .zip(&flux)
            .map(|(&r, &q)| (ext.q + q) * r.powf(-c_v))
            .collect();
        pot.v = cumulative(&radii, &pot.dv).into_iter().map(|x| ext.v_t + x).collect();
        (ws, phis) = inward_riccati(&pot, c_u);
    }

    let floor = FLOOR_U * prof.u0;
    for k in 1..=usable {
        let r = radii[k];
        let ln_u = st.u.abs().ln() + phis[k] - phis[0];
        let u = st.u * (phis[k] - phis[0]).exp();
        if !(u.abs() > floor) {
            break;
        }
        let state = ShootState::new(u, ws[k] * u, pot.v[k], pot.dv[k]);
        let deriv = rhs_unchecked(r, &state, &p);
        prof.samples.push(Sample { r, state, deriv });
        if target.small(ln_u, r) && (decay_z(u, state.du, state.v) - 1.0).abs() <= TARGET_BAND {
            break;
        }
    }
    prof.r_end = prof.last().r;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Termination;
    use crate::system::ProblemParams;

    fn stub(p: ProblemParams, r_t: f64, state: ShootState) -> Profile {
        Profile {
            params: p,
            u0: 1.0,
            samples: vec![Sample {
                r: r_t,
                state,
                deriv: rhs_unchecked(r_t, &state, &p),
            }],
            zeros: vec![],
            r_end: r_t,
            termination: Termination::Truncated,
            v_one_radius: None,
            v_half_radius: None,
        }
    }

    #[test]
    fn constant_potential_tail_is_exponential() {
        // d = 1, parity 0, Q -> 0 and |u| small enough that the source is
        // negligible: u'' = (V - 1) u with V fixed, decaying solution
        // exp(-k r), k = sqrt(V - 1).
        let p = ProblemParams::new(1, 0.0).unwrap();
        let (v, k) = (10.0, 3.0);
        let r_t = 10.0;
        let u_t = 1e-9;
        let state = ShootState::new(u_t, -k * u_t, v, 1e-300);
        let mut prof = stub(p, r_t, state);
        prof.u0 = 1e-4;
        continue_tail(&mut prof);
        assert!(prof.len() > 100);
        for s in prof.samples.iter().skip(1) {
            let exact = u_t * (-k * (s.r - r_t)).exp();
            assert!((s.state.u / exact - 1.0).abs() < 1e-8, "r = {}", s.r);
        }
        assert!(prof.last().state.u.abs() < 1e-8 * u_t);
    }

    #[test]
    fn logarithmic_potential_reaches_band() {
        let p = ProblemParams::new(2, 0.0).unwrap();
        let r_t = 30.0;
        let (v_t, q) = (1.6, 1.5);
        let w = -(v_t - 1.0f64).sqrt();
        let state = ShootState::new(1e-3, w * 1e-3, v_t, q / r_t);
        let mut prof = stub(p, r_t, state);
        continue_tail(&mut prof);
        let end = prof.last().state;
        assert!(end.u.abs() < 1e-8);
        assert!((decay_z(end.u, end.du, end.v) - 1.0).abs() <= TARGET_BAND);
        // The continued solution satisfies the linear equation.
        for win in prof.samples.windows(5).step_by(97) {
            let u: Vec<f64> = win.iter().map(|s| s.state.u).collect();
            let b = &win[2];
            let h = b.r - win[1].r;
            let upp = (-u[0] + 16.0 * u[1] - 30.0 * u[2] + 16.0 * u[3] - u[4]) / (12.0 * h * h);
            let up = (u[0] - 8.0 * u[1] + 8.0 * u[3] - u[4]) / (12.0 * h);
            let res = upp + up / b.r - (b.state.v - 1.0) * b.state.u;
            assert!(res.abs() < 1e-6 * b.state.u.abs(), "r = {}", b.r);
        }
    }
}

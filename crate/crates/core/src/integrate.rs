//! Adaptive Dormand–Prince 5(4) integration of radial trajectories with
//! event location and escape detection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{hermite_state, Profile, Sample, Termination};
use crate::system::{origin_series, rhs, rhs_unchecked, ProblemParams, ShootState};

/// Horizon past the `V = 1` radius used when no explicit `r_max` is set.
/// The decay scale is `V^{-1/2}` and `V >= 1` there, so this spans many
/// e-foldings.
pub const TAIL_HORIZON: f64 = 158.113_883_008_418_97; // min(200, 50 / sqrt(0.1))

/// Anything that can supply the derivative of a [`ShootState`].
pub trait RadialSystem {
    fn params(&self) -> &ProblemParams;

    /// `(u', u'', V', V'')` at `r > 0`.
    fn derivative(&self, r: f64, s: &ShootState) -> ShootState;

    /// Whether `V` evolves, so that the `V = 1/2` and `V = 1` events and the
    /// escape predicate are meaningful.
    fn tracks_potential(&self) -> bool {
        true
    }
}

impl RadialSystem for ProblemParams {
    fn params(&self) -> &ProblemParams {
        self
    }

    #[inline]
    fn derivative(&self, r: f64, s: &ShootState) -> ShootState {
        rhs_unchecked(r, s, self)
    }
}

/// Linear comparison problem with the potential frozen at a constant level:
/// `u'' + ((2m+d-1)/r) u' = (level - 1) u`.
#[derive(Debug, Clone, Copy)]
pub struct FrozenPotential {
    pub params: ProblemParams,
    pub level: f64,
}

impl RadialSystem for FrozenPotential {
    fn params(&self) -> &ProblemParams {
        &self.params
    }

    fn derivative(&self, r: f64, s: &ShootState) -> ShootState {
        ShootState::new(s.du, (self.level - 1.0) * s.u - self.params.c_u() * s.du / r, 0.0, 0.0)
    }

    fn tracks_potential(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationControls {
    pub rel_tol: f64,
    /// Absolute tolerance per component, scaled by the largest magnitude the
    /// component has reached so far.
    pub abs_tol: f64,
    /// Absolute horizon. `None` means `a + TAIL_HORIZON` with `V(a) = 1`.
    pub r_max: Option<f64>,
    /// Escape requires `|u| > escape_factor * u0`.
    pub escape_factor: f64,
    /// Start offset from the origin. `None` picks the parameter default.
    pub eps_origin: Option<f64>,
    pub max_steps: usize,
    /// Upper bound on a single step; infinite by default.
    pub max_step: f64,
}

impl Default for IntegrationControls {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            r_max: None,
            escape_factor: 10.0,
            eps_origin: None,
            max_steps: 2_000_000,
            max_step: f64::INFINITY,
        }
    }
}

impl IntegrationControls {
    pub fn validate(&self, p: &ProblemParams) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad(format!(
                "tolerances must be positive (rel {}, abs {})",
                self.rel_tol, self.abs_tol
            ));
        }
        if !(self.escape_factor >= 2.0) {
            return bad(format!("escape factor must be >= 2, got {}", self.escape_factor));
        }
        let eps = self.eps_for(p);
        if !(eps > 0.0) {
            return bad(format!("origin offset must be positive, got {eps}"));
        }
        if let Some(r_max) = self.r_max {
            if !(r_max > eps) {
                return bad(format!("r_max {r_max} must exceed the origin offset {eps}"));
            }
        }
        if !(self.max_step > 0.0) {
            return bad(format!("max_step must be positive, got {}", self.max_step));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive".into());
        }
        Ok(())
    }

    pub fn eps_for(&self, p: &ProblemParams) -> f64 {
        self.eps_origin.unwrap_or_else(|| p.default_eps_origin())
    }

    /// Same controls with both tolerances halved.
    pub fn halved(&self) -> Self {
        Self {
            rel_tol: self.rel_tol / 2.0,
            abs_tol: self.abs_tol / 2.0,
            ..*self
        }
    }

    pub fn larger_tol(&self) -> f64 {
        self.rel_tol.max(self.abs_tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    UZero,
    VReachesOne,
    VReachesHalf,
    Escape,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub kind: EventKind,
    pub r: f64,
    pub state: ShootState,
}

/// True once the trajectory is in the monotone divergent regime:
/// `V > 1`, `u u' > 0` and `|u| > escape_factor * u0`.
pub fn escape_predicate(s: &ShootState, u0: f64, c: &IntegrationControls) -> bool {
    s.v > 1.0 && s.u * s.du > 0.0 && s.u.abs() > c.escape_factor * u0
}

/// Options that are not part of the numerical controls.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions<'g> {
    /// Stop as soon as the escape predicate holds.
    pub stop_on_escape: bool,
    /// Radii the integrator must land on exactly (increasing).
    pub grid: Option<&'g [f64]>,
}

/// Integrates from an origin-series start at `c.eps_for(p)` until escape or
/// the horizon.
pub fn integrate(start: ShootState, p: &ProblemParams, c: &IntegrationControls) -> Result<(Profile, Vec<EventRecord>)> {
    let eps = c.eps_for(p);
    let u0 = recover_u0(&start, p, eps);
    run(
        p,
        u0,
        eps,
        start,
        c,
        RunOptions {
            stop_on_escape: true,
            grid: None,
        },
    )
}

/// Origin series followed by [`integrate`].
pub fn launch(u0: f64, p: &ProblemParams, c: &IntegrationControls) -> Result<(Profile, Vec<EventRecord>)> {
    launch_with(
        u0,
        p,
        c,
        RunOptions {
            stop_on_escape: true,
            grid: None,
        },
    )
}

pub fn launch_with(
    u0: f64,
    p: &ProblemParams,
    c: &IntegrationControls,
    opts: RunOptions<'_>,
) -> Result<(Profile, Vec<EventRecord>)> {
    c.validate(p)?;
    let eps = c.eps_for(p);
    let start = origin_series(u0, p, eps)?;
    run(p, u0, eps, start, c, opts)
}

fn recover_u0(start: &ShootState, p: &ProblemParams, eps: f64) -> f64 {
    start.u / (1.0 - eps * eps / (2.0 * p.origin_denominator()))
}

/// Integrates the frozen-potential comparison problem from the origin out to
/// `r_end`.
pub fn integrate_frozen(
    u0: f64,
    sys: &FrozenPotential,
    r_end: f64,
    c: &IntegrationControls,
) -> Result<(Profile, Vec<EventRecord>)> {
    let c = IntegrationControls {
        r_max: Some(r_end),
        ..*c
    };
    c.validate(&sys.params)?;
    let eps = c.eps_for(&sys.params);
    let k = sys.params.origin_denominator();
    let curvature = (sys.level - 1.0) * u0 / k;
    let start = ShootState::new(u0 + 0.5 * curvature * eps * eps, curvature * eps, 0.0, 0.0);
    run(sys, u0, eps, start, &c, RunOptions::default())
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type Vec4 = [f64; 4];

#[inline]
fn combo(y: &Vec4, h: f64, terms: &[(f64, &Vec4)]) -> Vec4 {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

struct Step {
    y: Vec4,
    err: Vec4,
    f_end: Vec4,
}

fn eval<S: RadialSystem + ?Sized>(sys: &S, r: f64, y: &Vec4) -> Vec4 {
    sys.derivative(r, &ShootState::from_array(*y)).to_array()
}

fn dopri_step<S: RadialSystem + ?Sized>(sys: &S, r: f64, y: &Vec4, k1: &Vec4, h: f64) -> Step {
    let k2 = eval(sys, r + C2 * h, &combo(y, h, &[(A21, k1)]));
    let k3 = eval(sys, r + C3 * h, &combo(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = eval(sys, r + C4 * h, &combo(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = eval(
        sys,
        r + C5 * h,
        &combo(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = eval(
        sys,
        r + h,
        &combo(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    );
    let y5 = combo(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = eval(sys, r + h, &y5);
    let mut err = [0.0; 4];
    for i in 0..4 {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Step { y: y5, err, f_end: k7 }
}

fn error_norm(y0: &Vec4, y1: &Vec4, err: &Vec4, peak: &Vec4, c: &IntegrationControls) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        let sc = c.abs_tol * peak[i].max(f64::MIN_POSITIVE) + c.rel_tol * y0[i].abs().max(y1[i].abs());
        let e = err[i] / sc;
        acc += e * e;
    }
    let n = (acc / 4.0).sqrt();
    if n.is_finite() {
        n
    } else {
        f64::INFINITY
    }
}

/// Radius accuracy demanded of located events.
pub fn event_tolerance(r: f64) -> f64 {
    1e-12 * r.abs().max(1.0)
}

/// Locates the root of `g` along the accepted step `s0 -> s1` by a Hermite
/// estimate followed by Illinois iteration on partial steps from `s0`.
pub(crate) fn locate_event<S, G>(sys: &S, s0: &Sample, s1: &Sample, g: G) -> (f64, ShootState)
where
    S: RadialSystem + ?Sized,
    G: Fn(&ShootState) -> f64,
{
    let y0 = s0.state.to_array();
    let k1 = s0.deriv.to_array();
    let state_at = |r: f64| -> ShootState {
        if r <= s0.r {
            s0.state
        } else if r >= s1.r {
            s1.state
        } else {
            ShootState::from_array(dopri_step(sys, s0.r, &y0, &k1, r - s0.r).y)
        }
    };

    let (mut a, mut b) = (s0.r, s1.r);
    let mut ga = g(&s0.state);
    let mut gb = g(&s1.state);
    if ga == 0.0 {
        return (a, s0.state);
    }
    if gb == 0.0 {
        return (b, s1.state);
    }

    // Hermite estimate.
    let (mut ha, mut hb) = (a, b);
    let hga = ga;
    for _ in 0..60 {
        let mid = 0.5 * (ha + hb);
        let gm = g(&hermite_state(s0, s1, mid));
        if (gm > 0.0) == (hga > 0.0) {
            ha = mid;
        } else {
            hb = mid;
        }
    }
    let guess = 0.5 * (ha + hb);
    if guess > a && guess < b {
        let st = state_at(guess);
        let gg = g(&st);
        if gg == 0.0 {
            return (guess, st);
        }
        if (gg > 0.0) == (ga > 0.0) {
            a = guess;
            ga = gg;
        } else {
            b = guess;
            gb = gg;
        }
    }

    let tol = event_tolerance(b);
    let mut side = 0i8;
    let mut iter = 0;
    while b - a > tol && iter < 200 {
        iter += 1;
        let mut c = (a * gb - b * ga) / (gb - ga);
        if iter % 4 == 0 || !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let st = state_at(c);
        let gc = g(&st);
        if gc == 0.0 {
            return (c, st);
        }
        if (gc > 0.0) == (gb > 0.0) {
            b = c;
            gb = gc;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            ga = gc;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        }
    }
    let r = if ga.abs() < gb.abs() { a } else { b };
    (r, state_at(r))
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Events inside the accepted step `s0 -> s1`, in increasing radius.
pub(crate) fn step_events<S: RadialSystem + ?Sized>(sys: &S, s0: &Sample, s1: &Sample) -> Vec<EventRecord> {
    let mut out = Vec::new();
    let (a, b) = (sign(s0.state.u), sign(s1.state.u));
    if a != 0 && a != b {
        let (r, state) = locate_event(sys, s0, s1, |s| s.u);
        out.push(EventRecord {
            kind: EventKind::UZero,
            r,
            state,
        });
    }
    if sys.tracks_potential() {
        for (kind, level) in [(EventKind::VReachesHalf, 0.5), (EventKind::VReachesOne, 1.0)] {
            if s0.state.v < level && s1.state.v >= level {
                let (r, state) = locate_event(sys, s0, s1, |s| s.v - level);
                out.push(EventRecord { kind, r, state });
            }
        }
    }
    out.sort_by(|x, y| x.r.total_cmp(&y.r));
    out
}

/// Core driver shared by every public entry point.
pub(crate) fn run<S: RadialSystem + ?Sized>(
    sys: &S,
    u0: f64,
    r_start: f64,
    start: ShootState,
    c: &IntegrationControls,
    opts: RunOptions<'_>,
) -> Result<(Profile, Vec<EventRecord>)> {
    const SAFE: f64 = 0.9;
    const BETA: f64 = 0.04;
    const EXPO1: f64 = 0.2 - BETA * 0.75;
    const FACC1: f64 = 5.0;
    const FACC2: f64 = 0.1;

    let params = *sys.params();
    let tracks_v = sys.tracks_potential();
    if c.r_max.is_none() && !tracks_v {
        return Err(Error::InvalidParameter(
            "an explicit r_max is required when the potential is frozen".into(),
        ));
    }

    let mut r = r_start;
    let mut y = start.to_array();
    let mut f = eval(sys, r, &y);
    let mut peak = y.map(f64::abs);
    let mut samples = vec![Sample {
        r,
        state: start,
        deriv: ShootState::from_array(f),
    }];
    let mut events: Vec<EventRecord> = Vec::new();
    let mut zeros = Vec::new();
    let mut v_one = None;
    let mut v_half = None;
    let mut horizon = c.r_max.unwrap_or(f64::INFINITY);
    let grid = opts.grid.unwrap_or(&[]);
    let mut grid_idx = grid.partition_point(|&g| g <= r);

    let mut h = (0.5 * r_start).min(c.max_step);
    let mut facold: f64 = 1e-4;
    let mut steps = 0usize;
    let termination;

    loop {
        if steps >= c.max_steps {
            termination = Termination::StepLimit;
            break;
        }
        steps += 1;

        let mut limit = horizon;
        if let Some(&g) = grid.get(grid_idx) {
            limit = limit.min(g);
        }
        let mut h_try = h.min(c.max_step);
        let mut landing = false;
        if r + h_try >= limit {
            h_try = limit - r;
            landing = true;
        }
        if h_try < 1e-14 * r.abs().max(1.0) {
            let st = ShootState::from_array(y);
            if tracks_v && escape_predicate(&st, u0, c) {
                events.push(EventRecord {
                    kind: EventKind::Escape,
                    r,
                    state: st,
                });
                termination = Termination::Escaped;
                break;
            }
            return Err(Error::StepSizeUnderflow { r, h: h_try });
        }

        let step = dopri_step(sys, r, &y, &f, h_try);
        let err = error_norm(&y, &step.y, &step.err, &peak, c);
        let fac11 = err.powf(EXPO1);
        if err > 1.0 {
            h = if err.is_finite() {
                h_try / FACC1.min(fac11 / SAFE)
            } else {
                0.2 * h_try
            };
            continue;
        }
        let mut fac = fac11 / facold.powf(BETA);
        fac = FACC2.max(FACC1.min(fac / SAFE));
        let h_next = h_try / fac;
        facold = err.max(1e-4);

        let r_new = if landing { limit } else { r + h_try };
        let prev = *samples.last().expect("nonempty");
        let next = Sample {
            r: r_new,
            state: ShootState::from_array(step.y),
            deriv: ShootState::from_array(step.f_end),
        };
        for ev in step_events(sys, &prev, &next) {
            match ev.kind {
                EventKind::UZero => zeros.push(ev.r),
                EventKind::VReachesOne => {
                    v_one = Some(ev.r);
                    if c.r_max.is_none() {
                        horizon = ev.r + TAIL_HORIZON;
                    }
                }
                EventKind::VReachesHalf => v_half = Some(ev.r),
                EventKind::Escape => {}
            }
            events.push(ev);
        }
        samples.push(next);
        r = r_new;
        y = step.y;
        for (pk, yi) in peak.iter_mut().zip(y) {
            *pk = pk.max(yi.abs());
        }
        f = step.f_end;
        h = if landing { h_next.max(h_try) } else { h_next };
        while grid_idx < grid.len() && grid[grid_idx] <= r {
            grid_idx += 1;
        }

        if tracks_v && opts.stop_on_escape && escape_predicate(&next.state, u0, c) {
            events.push(EventRecord {
                kind: EventKind::Escape,
                r,
                state: next.state,
            });
            termination = Termination::Escaped;
            break;
        }
        if r >= horizon {
            termination = Termination::ReachedRmax;
            break;
        }
    }

    let r_end = r;
    Ok((
        Profile {
            params,
            u0,
            samples,
            zeros,
            r_end,
            termination,
            v_one_radius: v_one,
            v_half_radius: v_half,
        },
        events,
    ))
}

/// Rebuilds a profile from stored states: derivatives from the system, `u0`
/// from the origin expansion at the first radius, zeros and the `V = 1/2`,
/// `V = 1` radii by event location between consecutive samples.
pub fn profile_from_states(
    p: &ProblemParams,
    points: &[(f64, ShootState)],
    termination: Termination,
) -> Result<Profile> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "a profile needs at least 2 samples, got {}",
            points.len()
        )));
    }
    let mut samples = Vec::with_capacity(points.len());
    for (i, &(r, state)) in points.iter().enumerate() {
        if i > 0 && !(r > points[i - 1].0) {
            return Err(Error::InvalidParameter(format!(
                "radii must increase strictly: sample {i} at r = {r}"
            )));
        }
        if !state.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite state at r = {r}")));
        }
        let deriv = rhs(r, &state, p)?;
        samples.push(Sample { r, state, deriv });
    }
    let u0 = recover_u0(&samples[0].state, p, samples[0].r);
    let mut prof = Profile {
        params: *p,
        u0,
        r_end: samples[samples.len() - 1].r,
        samples,
        zeros: Vec::new(),
        termination,
        v_one_radius: None,
        v_half_radius: None,
    };
    for ev in relocate_events(p, &prof) {
        match ev.kind {
            EventKind::UZero => prof.zeros.push(ev.r),
            EventKind::VReachesOne => prof.v_one_radius = Some(ev.r),
            EventKind::VReachesHalf => prof.v_half_radius = Some(ev.r),
            EventKind::Escape => {}
        }
    }
    Ok(prof)
}

/// Re-runs event location over the stored samples of `prof`.
pub fn relocate_events<S: RadialSystem + ?Sized>(sys: &S, prof: &Profile) -> Vec<EventRecord> {
    prof.samples
        .windows(2)
        .flat_map(|w| step_events(sys, &w[0], &w[1]))
        .collect()
}

//! Classification of initial values by node count and bisection for the
//! bound-state values `alpha_{m,n}`.

use serde::{Deserialize, Serialize};

use crate::analysis::{check_bound_state, DiagnosticsReport};
use crate::error::{Error, Result};
use crate::integrate::{launch, launch_with, EventKind, IntegrationControls, RunOptions};
use crate::profile::{Profile, Termination};
use crate::system::ProblemParams;
use crate::tail::continue_tail;

/// Relative bisection tolerance used when none is given.
pub const DEFAULT_BIS_TOL: f64 = 1e-12;

/// Largest step allowed when integrating the emitted bound-state profile.
pub const OUTPUT_MAX_STEP: f64 = 0.02;

const SCAN_LIMIT: usize = 200;

/// `|u| / u0` at which the forward trajectory hands over to the inward tail
/// continuation.
pub const TAIL_JUNCTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Escaped with `u > 0`.
    EscapedPositive,
    /// Escaped with `u < 0`.
    EscapedNegative,
    /// Horizon reached without escape.
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub u0: f64,
    pub nodes: usize,
    pub verdict: Verdict,
    pub r_escape: Option<f64>,
}

impl Classification {
    pub fn escaped(&self) -> bool {
        self.verdict != Verdict::Undecided
    }

    fn side(&self, n: usize) -> Side {
        if self.nodes > n {
            Side::Below
        } else if self.escaped() {
            Side::Above
        } else {
            Side::Unknown
        }
    }
}

/// Position of `u0` relative to `alpha_{m,n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    /// At most `n` zeros and escaped: `u0 > alpha_n`.
    Above,
    /// More than `n` zeros: `u0 < alpha_n`.
    Below,
    Unknown,
}

pub fn classify(u0: f64, p: &ProblemParams, c: &IntegrationControls) -> Result<Classification> {
    classify_run(u0, p, c).map(|(cl, _)| cl)
}

fn classify_run(u0: f64, p: &ProblemParams, c: &IntegrationControls) -> Result<(Classification, Termination)> {
    let (prof, events) = launch(u0, p, c)?;
    let escape = events.iter().rev().find(|e| e.kind == EventKind::Escape);
    let (verdict, r_escape) = match escape {
        Some(e) if e.state.u > 0.0 => (Verdict::EscapedPositive, Some(e.r)),
        Some(e) => (Verdict::EscapedNegative, Some(e.r)),
        None => (Verdict::Undecided, None),
    };
    let nodes = match r_escape {
        Some(r) => prof.zeros_before(r),
        None => prof.zeros.len(),
    };
    let cl = Classification {
        u0,
        nodes,
        verdict,
        r_escape,
    };
    Ok((cl, prof.termination))
}

/// Classifies for index `n`, enlarging the horizon when the verdict is
/// undecided with too few zeros. A larger horizon cannot help once the step
/// budget is spent.
fn classify_side(u0: f64, n: usize, p: &ProblemParams, c: &IntegrationControls) -> Result<(Classification, Side)> {
    let (mut cl, mut term) = classify_run(u0, p, c)?;
    let mut side = cl.side(n);
    let mut controls = *c;
    let mut tries = 0;
    while side == Side::Unknown && term == Termination::ReachedRmax && tries < 3 {
        tries += 1;
        let base = controls.r_max.unwrap_or(f64::NAN);
        controls.r_max = if base.is_nan() {
            // Default horizon is relative to V = 1; fall back to an explicit one.
            let (prof, _) = launch(u0, p, &controls)?;
            Some(2.0 * prof.r_end)
        } else {
            Some(2.0 * base)
        };
        (cl, term) = classify_run(u0, p, &controls)?;
        side = cl.side(n);
    }
    Ok((cl, side))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub lo_class: Classification,
    pub hi_class: Classification,
}

/// Geometric scan from `u0 = 1` for an interval `[lo, hi]` with
/// `classify(hi)` escaping with at most `n` zeros and `classify(lo)` having
/// more than `n`.
pub fn bracket_alpha(n: usize, p: &ProblemParams, c: &IntegrationControls) -> Result<Bracket> {
    bracket_from(1.0, n, p, c)
}

fn bracket_from(seed: f64, n: usize, p: &ProblemParams, c: &IntegrationControls) -> Result<Bracket> {
    c.validate(p)?;
    let (first, side) = classify_side(seed, n, p, c)?;
    let (mut above, mut below) = (None, None);
    match side {
        Side::Above => above = Some(first),
        Side::Below => below = Some(first),
        Side::Unknown => {
            return Err(Error::ScanExhausted {
                steps: 0,
                last_u0: seed,
            })
        }
    }
    let mut u = seed;
    for step in 1..=SCAN_LIMIT {
        match (above, below) {
            (Some(hi), Some(lo)) => {
                return Ok(Bracket {
                    lo: lo.u0,
                    hi: hi.u0,
                    lo_class: lo,
                    hi_class: hi,
                })
            }
            (Some(_), None) => u *= 0.5,
            (None, Some(_)) => u *= 2.0,
            (None, None) => unreachable!(),
        }
        let (cl, side) = classify_side(u, n, p, c)?;
        match side {
            Side::Above => above = Some(cl),
            Side::Below => below = Some(cl),
            Side::Unknown => {
                return Err(Error::ScanExhausted {
                    steps: step,
                    last_u0: u,
                })
            }
        }
    }
    Err(Error::ScanExhausted {
        steps: SCAN_LIMIT,
        last_u0: u,
    })
}

/// A converged bound state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundState {
    pub params: ProblemParams,
    pub n: usize,
    pub alpha: f64,
    pub bracket: (f64, f64),
    pub profile: Profile,
    pub diagnostics: DiagnosticsReport,
}

/// Bisects `bracket` on the above/below verdict until
/// `hi - lo <= bis_tol * hi`, then integrates and truncates the profile at
/// the midpoint.
pub fn refine_alpha(
    bracket: &Bracket,
    n: usize,
    p: &ProblemParams,
    c: &IntegrationControls,
    bis_tol: f64,
) -> Result<BoundState> {
    if !(bis_tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bisection tolerance must be positive, got {bis_tol}"
        )));
    }
    let mut lo = bracket.lo_class;
    let mut hi = bracket.hi_class;
    if !(lo.u0 > 0.0 && lo.u0 < hi.u0) || lo.side(n) != Side::Below || hi.side(n) != Side::Above {
        return Err(Error::InvalidParameter(format!(
            "invalid bracket [{}, {}] for n = {n}",
            lo.u0, hi.u0
        )));
    }
    while hi.u0 - lo.u0 > bis_tol * hi.u0 {
        let mid = 0.5 * (lo.u0 + hi.u0);
        if mid <= lo.u0 || mid >= hi.u0 {
            break;
        }
        let (cl, side) = classify_side(mid, n, p, c)?;
        if cl.nodes < hi.nodes || cl.nodes > lo.nodes {
            return Err(Error::InconsistentVerdict {
                u0: mid,
                nodes: cl.nodes,
                expected: format!("between {} and {}", hi.nodes, lo.nodes),
            });
        }
        match side {
            Side::Above => hi = cl,
            Side::Below => lo = cl,
            Side::Unknown => {
                return Err(Error::InconsistentVerdict {
                    u0: mid,
                    nodes: cl.nodes,
                    expected: "an escaping trajectory".into(),
                })
            }
        }
    }
    for (cl, want) in [(&hi, n), (&lo, n + 1)] {
        if cl.nodes != want {
            return Err(Error::InconsistentVerdict {
                u0: cl.u0,
                nodes: cl.nodes,
                expected: want.to_string(),
            });
        }
    }

    let alpha = 0.5 * (lo.u0 + hi.u0);
    let profile = bound_state_profile(alpha, n, p, c)?;
    let diagnostics = check_bound_state(&profile);
    Ok(BoundState {
        params: *p,
        n,
        alpha,
        bracket: (lo.u0, hi.u0),
        profile,
        diagnostics,
    })
}

/// Integrates at `alpha` with bounded steps and cuts the trajectory at its
/// decaying tail.
pub fn bound_state_profile(alpha: f64, n: usize, p: &ProblemParams, c: &IntegrationControls) -> Result<Profile> {
    let controls = IntegrationControls {
        max_step: c.max_step.min(OUTPUT_MAX_STEP),
        ..*c
    };
    let (mut prof, _) = launch_with(
        alpha,
        p,
        &controls,
        RunOptions {
            stop_on_escape: true,
            grid: None,
        },
    )?;
    if let Some(junction) = tail_junction_index(&prof, n) {
        prof.truncate_at(junction);
        continue_tail(&mut prof);
    } else if let Some(last) = tail_cut_index(&prof, n) {
        prof.truncate_at(last);
    }
    Ok(prof)
}

/// First sample of the final lobe where `|u| < 1e-3 u0` while the
/// trajectory is still on the decaying branch.
fn tail_junction_index(prof: &Profile, n: usize) -> Option<usize> {
    let (start, div) = final_lobe(prof, n)?;
    let threshold = TAIL_JUNCTION * prof.u0;
    (start..div).find(|&i| {
        let st = prof.samples[i].state;
        st.v > 1.0 && st.u.abs() < threshold && st.is_decaying()
    })
}

/// Decay ratio `-(u'/u) V^{-1/2}` at one state.
pub(crate) fn decay_z(u: f64, du: f64, v: f64) -> f64 {
    -(du / u) / v.sqrt()
}

/// Index at which a near-bound-state trajectory is cut: the first tail
/// sample with `|u| < 1e-8 u0` and `z` within 10% of 1, or failing that the
/// sample before divergence whose `z` is closest to 1.
pub(crate) fn tail_cut_index(prof: &Profile, n: usize) -> Option<usize> {
    let samples = &prof.samples;
    let (start, div) = final_lobe(prof, n)?;
    if div == samples.len() && prof.termination != Termination::Escaped {
        // Still decaying at the horizon; nothing to cut.
        return None;
    }
    let threshold = 1e-8 * prof.u0;
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in samples.iter().enumerate().take(div).skip(start) {
        let st = s.state;
        if st.v <= 1.0 || st.u == 0.0 {
            continue;
        }
        let z = decay_z(st.u, st.du, st.v);
        let miss = (z - 1.0).abs();
        if st.u.abs() < threshold && miss <= 0.1 {
            return Some(i);
        }
        if best.is_none_or(|(_, m)| miss <= m) {
            best = Some((i, miss));
        }
    }
    best.map(|(i, _)| i)
}

/// Sample range `[start, div)` of the lobe after the `n`-th zero, ending
/// where the trajectory leaves the decaying branch.
fn final_lobe(prof: &Profile, n: usize) -> Option<(usize, usize)> {
    let samples = &prof.samples;
    let after = if n == 0 {
        prof.first().r
    } else {
        *prof.zeros.get(n - 1)?
    };
    let start = samples.partition_point(|s| s.r <= after);
    if start >= samples.len() {
        return None;
    }
    let lobe_sign = samples[start].state.u.signum();
    let div = samples
        .iter()
        .enumerate()
        .skip(start)
        .find(|(_, s)| {
            let st = s.state;
            st.u.signum() != lobe_sign || (st.v > 1.0 && st.is_growing())
        })
        .map_or(samples.len(), |(i, _)| i);
    Some((start, div))
}

/// Brackets and refines `alpha_{m,n}` for `n = 0..=n_max`; each bracket
/// search starts from the lower end of the previous one.
pub fn ladder(n_max: usize, p: &ProblemParams, c: &IntegrationControls) -> Result<Vec<BoundState>> {
    ladder_with_tol(n_max, p, c, DEFAULT_BIS_TOL)
}

pub fn ladder_with_tol(
    n_max: usize,
    p: &ProblemParams,
    c: &IntegrationControls,
    bis_tol: f64,
) -> Result<Vec<BoundState>> {
    ladder_steps(n_max, p, c, bis_tol, true).into_iter().collect()
}

/// Every index of the ladder attempted in turn; a failed index does not stop
/// the later ones, whose search starts from the last successful bracket.
pub fn ladder_outcomes(
    n_max: usize,
    p: &ProblemParams,
    c: &IntegrationControls,
    bis_tol: f64,
) -> Vec<Result<BoundState>> {
    ladder_steps(n_max, p, c, bis_tol, false)
}

fn ladder_steps(
    n_max: usize,
    p: &ProblemParams,
    c: &IntegrationControls,
    bis_tol: f64,
    stop_on_error: bool,
) -> Vec<Result<BoundState>> {
    let mut out: Vec<Result<BoundState>> = Vec::with_capacity(n_max + 1);
    let mut seed = 1.0;
    for n in 0..=n_max {
        let wrap = |e: Error| Error::Ladder { n, source: Box::new(e) };
        let state = bracket_from(seed, n, p, c).and_then(|b| refine_alpha(&b, n, p, c, bis_tol));
        let failed = state.is_err();
        if let Ok(s) = &state {
            seed = s.bracket.0;
        }
        out.push(state.map_err(wrap));
        if failed && stop_on_error {
            break;
        }
    }
    out
}

/// Single bound state with index `n`, bracketing from `u0 = 1`.
pub fn solve(n: usize, p: &ProblemParams, c: &IntegrationControls, bis_tol: f64) -> Result<BoundState> {
    let bracket = bracket_alpha(n, p, c)?;
    refine_alpha(&bracket, n, p, c, bis_tol)
}

//! Physical variables `(phi, v, omega)` recovered from a rescaled bound state,
//! with charge, energy and an equation residual.
//!
//! The potential is normalized as `v = G_d * rho` with `rho = phi^2`,
//! `G_1(s) = s/2` and `G_2(s) = ln(s) / (2 pi)`.

pub mod quadrature;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::system::FrictionModel;
use quadrature::{cumulative, origin_piece, origin_piece_log, simpson};

/// Largest `|phi|` at the last sample, relative to `max |phi|`, accepted as a
/// decayed tail.
pub const TAIL_DECAY_LIMIT: f64 = 1e-6;

/// Tolerance for `v(0)` against the Green's normalization.
pub const NORMALIZATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalSolution {
    pub d: u8,
    /// Angular momentum in 2D, parity in 1D.
    pub m: f64,
    pub gamma: f64,
    pub sigma: f64,
    /// Rotation rate; zero in 1D.
    pub omega_rot: f64,
    pub omega: Option<f64>,
    /// `v(0)` from the Green's normalization.
    pub v_origin: Option<f64>,
    pub energy: Option<f64>,
    pub charge: Option<f64>,
    pub r: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    /// Before [`complete`] this is `v - v(0)`.
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
}

/// Scalar part of a [`PhysicalSolution`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalSummary {
    pub d: u8,
    pub m: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub omega_rot: f64,
    pub omega: Option<f64>,
    pub v_origin: Option<f64>,
    pub energy: Option<f64>,
    pub charge: Option<f64>,
}

impl PhysicalSolution {
    pub fn summary(&self) -> PhysicalSummary {
        PhysicalSummary {
            d: self.d,
            m: self.m,
            gamma: self.gamma,
            sigma: self.sigma,
            omega_rot: self.omega_rot,
            omega: self.omega,
            v_origin: self.v_origin,
            energy: self.energy,
            charge: self.charge,
        }
    }

    /// `omega - Omega m [d = 2]`.
    fn effective_frequency(&self) -> Option<f64> {
        let rot = if self.d == 2 { self.omega_rot * self.m } else { 0.0 };
        self.omega.map(|w| w - rot)
    }
}

fn measure(d: u8, r: f64) -> f64 {
    if d == 1 {
        2.0
    } else {
        2.0 * PI * r
    }
}

fn check_dim(d: u8) -> Result<()> {
    if d == 1 || d == 2 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("dimension must be 1 or 2, got {d}")))
    }
}

fn check_tail(phi: &[f64]) -> Result<()> {
    let peak = phi.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let Some(last) = phi.last() else {
        return Err(Error::TailTooShort(0));
    };
    if peak == 0.0 {
        return Ok(());
    }
    let ratio = last.abs() / peak;
    if ratio > TAIL_DECAY_LIMIT || !ratio.is_finite() {
        return Err(Error::TailNotDecayed(ratio));
    }
    Ok(())
}

/// Integral over `[0, inf)` of sampled `f`: quadrature on the grid, a power
/// law below the first sample and an exponential beyond the last.
fn half_line(r: &[f64], f: &[f64]) -> f64 {
    origin_piece(r, f) + grid_and_tail(r, f)
}

fn grid_and_tail(r: &[f64], f: &[f64]) -> f64 {
    let n = r.len();
    let mut total = simpson(r, f);
    if n >= 2 {
        let (a, b) = (f[n - 2], f[n - 1]);
        if a != 0.0 && b != 0.0 && a.signum() == b.signum() && b.abs() < a.abs() {
            let kappa = (a / b).ln() / (r[n - 1] - r[n - 2]);
            total += quadrature::exponential_tail(b, kappa);
        }
    }
    total
}

/// Maps a rescaled profile to physical variables. `v` is returned relative
/// to its value at the origin; [`complete`] fixes the constant.
pub fn rescale_to_physical(prof: &Profile, gamma: f64, sigma: f64, omega_rot: f64) -> Result<PhysicalSolution> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    let p = prof.params;
    if !omega_rot.is_finite() || (p.dim() == 1 && omega_rot != 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rotation rate must be finite and zero in 1D, got {omega_rot}"
        )));
    }
    if p.friction() != FrictionModel::General {
        return Err(Error::InvalidParameter(
            "only the general radial system maps to physical variables".into(),
        ));
    }
    let m = p.m();
    let amp = sigma * sigma / gamma.sqrt();
    let vscale = sigma * sigma / gamma;
    let n = prof.len();
    let (mut r, mut phi, mut dphi, mut v, mut dv) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for s in &prof.samples {
        let st = s.state;
        let x = s.r;
        let (w, dw) = if m == 0.0 {
            (1.0, 0.0)
        } else {
            (x.powf(m), m * x.powf(m - 1.0))
        };
        r.push(x / sigma);
        phi.push(amp * w * st.u);
        dphi.push(amp * sigma * (dw * st.u + w * st.du));
        v.push(vscale * st.v);
        dv.push(vscale * sigma * st.dv);
    }
    Ok(PhysicalSolution {
        d: p.dim(),
        m,
        gamma,
        sigma,
        omega_rot,
        omega: None,
        v_origin: None,
        energy: None,
        charge: None,
        r,
        phi,
        dphi,
        v,
        dv,
    })
}

/// `v_G(0) = ∫ G_d(|y|) phi(|y|)^2 dy`.
pub fn greens_potential_origin(r: &[f64], phi: &[f64], d: u8) -> Result<f64> {
    check_dim(d)?;
    check_tail(phi)?;
    if d == 1 {
        let f: Vec<f64> = r.iter().zip(phi).map(|(&s, &p)| s * p * p).collect();
        return Ok(half_line(r, &f));
    }
    let plain: Vec<f64> = r.iter().zip(phi).map(|(&s, &p)| p * p * s).collect();
    let f: Vec<f64> = r.iter().zip(&plain).map(|(&s, &g)| s.ln() * g).collect();
    Ok(origin_piece_log(r, &plain) + grid_and_tail(r, &f))
}

/// `omega = gamma v(0) + sigma^2 + Omega m [d = 2]`.
pub fn extract_frequency(v_g0: f64, gamma: f64, sigma: f64, omega_rot: f64, m: f64, d: u8) -> f64 {
    let rot = if d == 2 { omega_rot * m } else { 0.0 };
    gamma * v_g0 + sigma * sigma + rot
}

/// `N = ∫ phi^2 dx` over the line or the plane.
pub fn charge(r: &[f64], phi: &[f64], d: u8) -> Result<f64> {
    check_dim(d)?;
    check_tail(phi)?;
    let f: Vec<f64> = r.iter().zip(phi).map(|(&s, &p)| p * p * measure(d, s)).collect();
    Ok(half_line(r, &f))
}

/// `∫ v phi^2 dx`.
pub fn interaction(r: &[f64], phi: &[f64], v: &[f64], d: u8) -> Result<f64> {
    check_dim(d)?;
    check_tail(phi)?;
    let f: Vec<f64> = r
        .iter()
        .zip(phi)
        .zip(v)
        .map(|((&s, &p), &w)| w * p * p * measure(d, s))
        .collect();
    Ok(half_line(r, &f))
}

/// Even extrapolation `v(0) = (x1² v0 - x0² v1) / (x1² - x0²)` from the
/// first two samples; radial potentials have `v'(0) = 0`.
fn value_at_origin(r: &[f64], v: &[f64]) -> f64 {
    match (r, v) {
        ([x0, x1, ..], [v0, v1, ..]) => (x1 * x1 * v0 - x0 * x0 * v1) / (x1 * x1 - x0 * x0),
        (_, [v0]) => *v0,
        _ => f64::NAN,
    }
}

/// `E = 1/2 ∫ (phi'^2 + [d = 2] m^2 phi^2 / r^2) dx - gamma/4 ∫ v phi^2 dx`.
/// `v` must satisfy `v(0) = v_G(0)`.
pub fn energy(r: &[f64], phi: &[f64], dphi: &[f64], v: &[f64], gamma: f64, d: u8, m: f64) -> Result<f64> {
    check_dim(d)?;
    check_tail(phi)?;
    let expected = greens_potential_origin(r, phi, d)?;
    let found = value_at_origin(r, v);
    if !((found - expected).abs() <= NORMALIZATION_TOL * expected.abs().max(1.0)) {
        return Err(Error::UnnormalizedPotential { found, expected });
    }
    let centrifugal = if d == 2 { m * m } else { 0.0 };
    let f: Vec<f64> = r
        .iter()
        .zip(phi)
        .zip(dphi)
        .map(|((&s, &p), &dp)| (dp * dp + centrifugal * p * p / (s * s)) * measure(d, s))
        .collect();
    let kinetic = 0.5 * half_line(r, &f);
    Ok(kinetic - 0.25 * gamma * interaction(r, phi, v, d)?)
}

/// `v = G_d * phi^2` and `v'` on the grid of `r`, by integrating
/// `(r^{d-1} v')' = r^{d-1} phi^2` outward from `v(0) = v_G(0)`.
pub fn potential_from_density(r: &[f64], phi: &[f64], d: u8) -> Result<(Vec<f64>, Vec<f64>)> {
    let v0 = greens_potential_origin(r, phi, d)?;
    let w = |s: f64| if d == 1 { 1.0 } else { s };
    let src: Vec<f64> = r.iter().zip(phi).map(|(&s, &p)| p * p * w(s)).collect();
    let head = origin_piece(r, &src);
    let flux = cumulative(r, &src);
    let dv: Vec<f64> = r.iter().zip(&flux).map(|(&s, &q)| (q + head) / w(s)).collect();
    let head_v = origin_piece(r, &dv);
    let v = cumulative(r, &dv).into_iter().map(|x| v0 + head_v + x).collect();
    Ok((v, dv))
}

/// Fills in `v(0)`, `omega`, `charge` and `energy`, shifting `v` so that
/// `v(0) = v_G(0)`.
pub fn complete(mut sol: PhysicalSolution) -> Result<PhysicalSolution> {
    let v_g0 = greens_potential_origin(&sol.r, &sol.phi, sol.d)?;
    if let Some(old) = sol.v_origin {
        for x in &mut sol.v {
            *x -= old;
        }
    }
    for x in &mut sol.v {
        *x += v_g0;
    }
    sol.v_origin = Some(v_g0);
    sol.omega = Some(extract_frequency(
        v_g0,
        sol.gamma,
        sol.sigma,
        sol.omega_rot,
        sol.m,
        sol.d,
    ));
    sol.charge = Some(charge(&sol.r, &sol.phi, sol.d)?);
    sol.energy = Some(energy(&sol.r, &sol.phi, &sol.dphi, &sol.v, sol.gamma, sol.d, sol.m)?);
    Ok(sol)
}

/// [`rescale_to_physical`] followed by [`complete`].
pub fn physical_solution(prof: &Profile, gamma: f64, sigma: f64, omega_rot: f64) -> Result<PhysicalSolution> {
    complete(rescale_to_physical(prof, gamma, sigma, omega_rot)?)
}

/// Finite-difference weights for the first derivative at `x0` from `xs`.
fn first_derivative_weights(x0: f64, xs: &[f64]) -> Vec<f64> {
    // Fornberg's recursion, truncated at order 1.
    let n = xs.len();
    let mut c = vec![[0.0f64; 2]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

/// Largest width of a difference stencil relative to its centre radius.
/// Near the origin the adaptive grid spreads geometrically and `phi ~ r^m`
/// is not smooth for fractional `m`; such stencils are skipped.
pub const STENCIL_SPREAD: f64 = 0.1;

/// Largest residual of the physical equations on interior samples, divided
/// by `max |phi|`. Second derivatives are five-point differences of the
/// sampled first derivatives.
pub fn residual(sol: &PhysicalSolution) -> Result<f64> {
    residual_with_location(sol).map(|(res, _)| res)
}

/// [`residual`] together with the radius where it is attained.
pub fn residual_with_location(sol: &PhysicalSolution) -> Result<(f64, f64)> {
    let Some(w_eff) = sol.effective_frequency() else {
        return Err(Error::InvalidParameter("solution has no frequency yet".into()));
    };
    let n = sol.r.len();
    let peak = sol.phi.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok((0.0, 0.0));
    }
    let (m2, fr) = if sol.d == 2 { (sol.m * sol.m, 1.0) } else { (0.0, 0.0) };
    let mut worst = 0.0f64;
    let mut r_worst = 0.0;
    for i in 2..n.saturating_sub(2) {
        let xs = &sol.r[i - 2..=i + 2];
        if xs[4] - xs[0] > STENCIL_SPREAD * xs[2] {
            continue;
        }
        let wts = first_derivative_weights(sol.r[i], xs);
        let d2 = |f: &[f64]| wts.iter().zip(&f[i - 2..=i + 2]).map(|(a, b)| a * b).sum::<f64>();
        let (r, phi, dphi, v, dv) = (sol.r[i], sol.phi[i], sol.dphi[i], sol.v[i], sol.dv[i]);
        let res_phi = d2(&sol.dphi) + fr * dphi / r - m2 * phi / (r * r) - (sol.gamma * v - w_eff) * phi;
        let res_v = d2(&sol.dv) + fr * dv / r - phi * phi;
        let here = res_phi.abs().max(res_v.abs());
        if here > worst {
            worst = here;
            r_worst = r;
        }
    }
    Ok((worst / peak, r_worst))
}

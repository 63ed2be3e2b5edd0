//! The rescaled radial system
//!
//! ```text
//! u'' + ((2m+d-1)/r) u' = (V-1) u
//! V'' + ((d-1)/r)   V' = u² r^{2m}
//! ```
//!
//! with `u(0) = u0 > 0`, `u'(0) = V(0) = V'(0) = 0`. In one dimension the
//! parity `p ∈ {0, 1}` of the wavefunction plays the role of `m`.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul};

use crate::error::{Error, Result};

/// Which friction coefficients to use in two dimensions.
///
/// `General` is the system obtained from the radial reduction of the
/// two-dimensional equations, `(2m+1)/r` and `1/r`. `LiteralDisplay` uses
/// `2(m+1)/r` and `2/r`, the coefficients printed in the standalone
/// two-dimensional display, and exists only for comparison runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrictionModel {
    #[default]
    General,
    LiteralDisplay,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    d: u8,
    m: f64,
    friction: FrictionModel,
}

impl ProblemParams {
    /// Builds parameters for dimension `d` and angular momentum (d = 2) or
    /// parity (d = 1) `m_or_parity`.
    pub fn new(d: u8, m_or_parity: f64) -> Result<Self> {
        if d != 1 && d != 2 {
            return Err(Error::InvalidParameter(format!("dimension must be 1 or 2, got {d}")));
        }
        if !m_or_parity.is_finite() || m_or_parity < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "m must be finite and nonnegative, got {m_or_parity}"
            )));
        }
        if d == 1 && m_or_parity != 0.0 && m_or_parity != 1.0 {
            return Err(Error::InvalidParameter(format!(
                "in one dimension the parity must be 0 or 1, got {m_or_parity}"
            )));
        }
        Ok(Self {
            d,
            m: m_or_parity,
            friction: FrictionModel::General,
        })
    }

    pub fn with_friction(mut self, friction: FrictionModel) -> Self {
        self.friction = friction;
        self
    }

    pub fn dim(&self) -> u8 {
        self.d
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn friction(&self) -> FrictionModel {
        self.friction
    }

    fn d_f64(&self) -> f64 {
        f64::from(self.d)
    }

    /// Friction coefficient of the u-equation, `2m + d - 1`.
    pub fn c_u(&self) -> f64 {
        match (self.friction, self.d) {
            (FrictionModel::LiteralDisplay, 2) => 2.0 * (self.m + 1.0),
            _ => 2.0 * self.m + self.d_f64() - 1.0,
        }
    }

    /// Friction coefficient of the V-equation, `d - 1`.
    pub fn c_v(&self) -> f64 {
        match (self.friction, self.d) {
            (FrictionModel::LiteralDisplay, 2) => 2.0,
            _ => self.d_f64() - 1.0,
        }
    }

    /// Exponent of `r` in the source term of the V-equation.
    pub fn source_exponent(&self) -> f64 {
        2.0 * self.m
    }

    /// `2m + d`, the denominator of `u''(0) = -u0/(2m+d)`.
    pub fn origin_denominator(&self) -> f64 {
        self.c_u() + 1.0
    }

    /// Radius `r0 = sqrt(2(2m+d))` at which the parabolic lower bound on
    /// `u` vanishes.
    pub fn r0(&self) -> f64 {
        (2.0 * self.origin_denominator()).sqrt()
    }

    /// Lower bound on the radius `b` where `V(b) = 1/2`:
    /// `((m+1)(2m+d) / (2 u0²))^{1/(2(m+1))}`.
    pub fn half_radius_lower_bound(&self, u0: f64) -> f64 {
        let m1 = self.m + 1.0;
        (m1 * self.origin_denominator() / (2.0 * u0 * u0)).powf(1.0 / (2.0 * m1))
    }

    /// Order `(2m+d-2)/2` of the Bessel function solving the frozen-potential
    /// comparison equation.
    pub fn bessel_order(&self) -> f64 {
        (self.c_u() - 1.0) / 2.0
    }

    /// Default offset from the singular origin where integration starts.
    pub fn default_eps_origin(&self) -> f64 {
        1e-4 * self.r0().max(1.0)
    }
}

/// Phase point `(u, u', V, V')` at some radius.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ShootState {
    pub u: f64,
    pub du: f64,
    pub v: f64,
    pub dv: f64,
}

impl ShootState {
    pub const fn new(u: f64, du: f64, v: f64, dv: f64) -> Self {
        Self { u, du, v, dv }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.u, self.du, self.v, self.dv]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    /// `u` and `u'` nonzero with opposite signs. Compares signs rather than
    /// the product, which underflows deep in a tail.
    pub fn is_decaying(&self) -> bool {
        self.u != 0.0 && self.du != 0.0 && (self.u > 0.0) != (self.du > 0.0)
    }

    /// `u` and `u'` nonzero with equal signs.
    pub fn is_growing(&self) -> bool {
        self.u != 0.0 && self.du != 0.0 && (self.u > 0.0) == (self.du > 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }
}

impl Add for ShootState {
    type Output = ShootState;
    fn add(self, o: ShootState) -> ShootState {
        ShootState::new(self.u + o.u, self.du + o.du, self.v + o.v, self.dv + o.dv)
    }
}

impl Mul<ShootState> for f64 {
    type Output = ShootState;
    fn mul(self, s: ShootState) -> ShootState {
        ShootState::new(self * s.u, self * s.du, self * s.v, self * s.dv)
    }
}

/// Right-hand side as a first-order system; the returned state holds
/// `(u', u'', V', V'')`.
pub fn rhs(r: f64, s: &ShootState, p: &ProblemParams) -> Result<ShootState> {
    if r.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::NonPositiveRadius(r));
    }
    Ok(rhs_unchecked(r, s, p))
}

#[inline]
pub(crate) fn rhs_unchecked(r: f64, s: &ShootState, p: &ProblemParams) -> ShootState {
    let source = if p.m == 0.0 {
        s.u * s.u
    } else {
        s.u * s.u * r.powf(p.source_exponent())
    };
    ShootState {
        u: s.du,
        du: (s.v - 1.0) * s.u - p.c_u() * s.du / r,
        v: s.dv,
        dv: source - p.c_v() * s.dv / r,
    }
}

/// Leading-order expansion of the regular solution at `r = eps`.
pub fn origin_series(u0: f64, p: &ProblemParams, eps: f64) -> Result<ShootState> {
    if !(u0 > 0.0 && u0.is_finite()) {
        return Err(Error::InvalidParameter(format!("u0 must be positive, got {u0}")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "origin offset must be positive, got {eps}"
        )));
    }
    let k = p.origin_denominator();
    let m1 = p.m + 1.0;
    let u2 = u0 * u0;
    // The V expansion assumes c_v = d - 1; for the literal display variant
    // the denominator changes accordingly.
    let kv = 2.0 * p.m + 1.0 + p.c_v();
    Ok(ShootState {
        u: u0 * (1.0 - eps * eps / (2.0 * k)),
        du: -u0 * eps / k,
        v: u2 * eps.powf(2.0 * m1) / (2.0 * m1 * kv),
        dv: u2 * eps.powf(2.0 * m1 - 1.0) / kv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients_one_dim_even() {
        let p = ProblemParams::new(1, 0.0).unwrap();
        assert_eq!((p.c_u(), p.c_v(), p.source_exponent()), (0.0, 0.0, 0.0));
    }

    #[test]
    fn coefficients_two_dim_m3() {
        let p = ProblemParams::new(2, 3.0).unwrap();
        assert_eq!((p.c_u(), p.c_v(), p.source_exponent()), (7.0, 1.0, 6.0));
    }

    #[test]
    fn odd_parity_matches_general_system() {
        let p = ProblemParams::new(1, 1.0).unwrap();
        // u'' + (2p/r) u' with p = 1
        assert_eq!(p.c_u(), 2.0);
        assert_eq!(p.c_v(), 0.0);
        assert_eq!(p.source_exponent(), 2.0);
    }

    #[test]
    fn literal_display_variant() {
        let p = ProblemParams::new(2, 1.0)
            .unwrap()
            .with_friction(FrictionModel::LiteralDisplay);
        assert_eq!((p.c_u(), p.c_v()), (4.0, 2.0));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ProblemParams::new(3, 0.0).is_err());
        assert!(ProblemParams::new(0, 0.0).is_err());
        assert!(ProblemParams::new(2, -0.5).is_err());
        assert!(ProblemParams::new(1, 0.5).is_err());
        assert!(ProblemParams::new(1, 2.0).is_err());
        assert!(ProblemParams::new(2, f64::NAN).is_err());
        assert!(ProblemParams::new(2, 2.5).is_ok());
    }

    #[test]
    fn rhs_direct_substitution() {
        let p = ProblemParams::new(1, 0.0).unwrap();
        let d = rhs(1.0, &ShootState::new(1.0, 0.0, 0.0, 0.0), &p).unwrap();
        assert_eq!(d, ShootState::new(0.0, -1.0, 0.0, 1.0));

        let p = ProblemParams::new(2, 1.0).unwrap();
        let d = rhs(0.5, &ShootState::new(0.9, -0.2, 0.3, 0.1), &p).unwrap();
        assert!((d.du - 0.57).abs() < 1e-14);
        assert!((d.dv - 0.0025).abs() < 1e-14);
        assert_eq!(d.u, -0.2);
        assert_eq!(d.v, 0.1);
    }

    #[test]
    fn rhs_zero_state_stays_zero() {
        let p = ProblemParams::new(2, 0.5).unwrap();
        let d = rhs(0.7, &ShootState::default(), &p).unwrap();
        assert_eq!(d, ShootState::default());
    }

    #[test]
    fn rhs_rejects_nonpositive_radius() {
        let p = ProblemParams::new(2, 0.0).unwrap();
        assert!(matches!(
            rhs(0.0, &ShootState::default(), &p),
            Err(Error::NonPositiveRadius(_))
        ));
        assert!(rhs(-1.0, &ShootState::default(), &p).is_err());
    }

    #[test]
    fn origin_curvature_limit() {
        let p = ProblemParams::new(2, 0.0).unwrap();
        let eps = 1e-6;
        let s = origin_series(1.0, &p, eps).unwrap();
        // u'(eps)/eps -> u''(0)
        assert!((s.du / eps + 0.5).abs() < 1e-12);
    }

    #[test]
    fn origin_series_positivity_and_errors() {
        for (d, m) in [(1, 0.0), (1, 1.0), (2, 0.0), (2, 2.5)] {
            let p = ProblemParams::new(d, m).unwrap();
            for u0 in [1e-3, 1.0, 50.0] {
                let s = origin_series(u0, &p, p.default_eps_origin()).unwrap();
                assert!(s.v > 0.0 && s.dv > 0.0);
                assert!(s.du < 0.0 && s.u < u0);
            }
            assert!(origin_series(0.0, &p, 1e-4).is_err());
            assert!(origin_series(1.0, &p, 0.0).is_err());
        }
    }

    #[test]
    fn derived_radii() {
        let p = ProblemParams::new(2, 0.0).unwrap();
        assert_eq!(p.r0(), 2.0);
        let p = ProblemParams::new(1, 0.0).unwrap();
        assert!((p.half_radius_lower_bound(1.0) - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(p.bessel_order(), -0.5);
    }
}

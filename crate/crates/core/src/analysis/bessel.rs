//! Bessel functions of the first kind for the comparison equations
//! `ū'' + ((2m+d-1)/r) ū' + k ū = 0`.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::system::ProblemParams;

const SERIES_LIMIT: f64 = 12.0;
const ARG_LIMIT: f64 = 60.0;

/// `J_nu(r)` for `nu > -1` and `0 < r <= 60`: ascending series up to
/// `r = 12`, Hankel's asymptotic expansion with forward recurrence beyond.
pub fn bessel_j(nu: f64, r: f64) -> Result<f64> {
    if !(nu > -1.0) || !nu.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "bessel order must exceed -1, got {nu}"
        )));
    }
    if !(r > 0.0 && r <= ARG_LIMIT) {
        return Err(Error::OutOfRange(r));
    }
    if r <= SERIES_LIMIT || nu >= r {
        return Ok(series(nu, r));
    }
    if nu < 0.0 {
        return Ok(asymptotic(nu, r));
    }
    let base = nu.fract();
    let steps = nu.floor() as usize;
    let mut prev = asymptotic(base, r);
    if steps == 0 {
        return Ok(prev);
    }
    let mut cur = asymptotic(base + 1.0, r);
    for k in 1..steps {
        let order = base + k as f64;
        let next = 2.0 * order / r * cur - prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

fn series(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = half.powf(nu) / gamma(nu + 1.0);
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) && k > half {
            break;
        }
        k += 1.0;
        if k > 500.0 {
            break;
        }
    }
    sum
}

fn asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0; // a_k(nu) / x^k
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        a *= (mu - odd * odd) / (kf * 8.0 * x);
        if a.abs() >= last || a == 0.0 {
            break;
        }
        last = a.abs();
        // Signs: P = 1 - a2 + a4 - ..., Q = a1 - a3 + a5 - ...
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Frozen-potential comparison solution
/// `ū(r) = u0 Γ(m+d/2) (2/r)^nu J_nu(r)`, `nu = (2m+d-2)/2`, which solves
/// `ū'' + ((2m+d-1)/r) ū' + ū = 0` with `ū(0) = u0`.
pub fn comparison_solution(u0: f64, p: &ProblemParams, r: f64) -> Result<f64> {
    let nu = p.bessel_order();
    Ok(u0 * gamma(nu + 1.0) * (2.0 / r).powf(nu) * bessel_j(nu, r)?)
}

/// Positive zeros of `J_nu` on `(0, x_max]`, `x_max <= 60`.
pub fn bessel_zeros(nu: f64, x_max: f64) -> Result<Vec<f64>> {
    let x_max = x_max.min(ARG_LIMIT);
    let mut zeros = Vec::new();
    if x_max <= 0.0 {
        return Ok(zeros);
    }
    let step = 0.05;
    let mut x0 = 1e-3;
    let mut f0 = bessel_j(nu, x0)?;
    while x0 < x_max {
        let x1 = (x0 + step).min(x_max);
        let f1 = bessel_j(nu, x1)?;
        if f0 == 0.0 {
            zeros.push(x0);
        } else if f0 * f1 < 0.0 {
            let (mut a, mut b, mut fa) = (x0, x1, f0);
            for _ in 0..100 {
                let c = 0.5 * (a + b);
                if c <= a || c >= b {
                    break;
                }
                let fc = bessel_j(nu, c)?;
                if (fc > 0.0) == (fa > 0.0) {
                    a = c;
                    fa = fc;
                } else {
                    b = c;
                }
            }
            zeros.push(0.5 * (a + b));
        }
        x0 = x1;
        f0 = f1;
    }
    Ok(zeros)
}

/// Number of zeros of `J_nu` on `(0, x]`. Past the oracle range the count is
/// continued with the largest spacing the zeros can have there, so the
/// result never overestimates.
fn count_bessel_zeros(nu: f64, x: f64) -> Result<usize> {
    let zeros = bessel_zeros(nu, x)?;
    if x <= ARG_LIMIT {
        return Ok(zeros.len());
    }
    let n = zeros.len();
    let Some(&last) = zeros.last() else {
        return Ok(0);
    };
    // Spacings decrease to pi for nu > 1/2 and increase to pi for nu < 1/2.
    let spacing = if n >= 2 { (last - zeros[n - 2]).max(PI) } else { PI };
    let extra = ((x - last) / spacing).floor().max(0.0) as usize;
    Ok(n + extra)
}

/// Sturm lower bound on the number of zeros of the trajectory launched at
/// `u0`: the zeros of `J_nu(r / sqrt 2)` for `r` up to the lower bound on the
/// radius where `V = 1/2`.
pub fn sturm_node_bound(u0: f64, p: &ProblemParams) -> Result<usize> {
    if !(u0 > 0.0) {
        return Err(Error::InvalidParameter(format!("u0 must be positive, got {u0}")));
    }
    let b = p.half_radius_lower_bound(u0);
    let x = b / 2f64.sqrt();
    if !(x > 1e-3) {
        return Ok(0);
    }
    count_bessel_zeros(p.bessel_order(), x)
}

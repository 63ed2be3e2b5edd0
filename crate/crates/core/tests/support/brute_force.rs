//! Direct double quadrature of `∬ G_d(|x - y|) rho(x) rho(y) dx dy` for a
//! radial density, independent of the library's one-dimensional reductions.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

fn rule(n: usize) -> GaussLegendre {
    GaussLegendre::new(NonZeroUsize::new(n).unwrap())
}

fn pieces(rule: &GaussLegendre, cuts: &[f64], f: &mut dyn FnMut(f64) -> f64) -> f64 {
    cuts.windows(2).map(|w| rule.integrate(w[0], w[1], &mut *f)).sum()
}

/// Line, `G_1(s) = s / 2`. The inner integral is split at `y = x` where the
/// kernel has its kink.
pub fn pair_interaction_1d(rho: &dyn Fn(f64) -> f64, half_width: f64) -> f64 {
    let inner_rule = rule(80);
    let outer_rule = rule(80);
    let l = half_width;
    let mut outer = |x: f64| {
        let mut g = |y: f64| 0.5 * (x - y).abs() * rho(y.abs());
        rho(x.abs()) * pieces(&inner_rule, &[-l, x, l], &mut g)
    };
    pieces(&outer_rule, &[-l, -0.5 * l, 0.0, 0.5 * l, l], &mut outer)
}

/// Plane, `G_2(s) = ln(s) / (2 pi)`. The inner integral is taken in polar
/// coordinates around `x` with `t = s^2`, which removes the logarithmic
/// singularity; the angle uses the periodic trapezoid rule.
pub fn pair_interaction_2d(rho: &dyn Fn(f64) -> f64, radius: f64) -> f64 {
    let radial = rule(60);
    let outer_rule = rule(60);
    let angles = 96;
    let mut outer = |a: f64| {
        let reach = (a + radius).sqrt();
        let mut g = |s: f64| {
            let t = s * s;
            let mut ring = 0.0;
            for k in 0..angles {
                let th = 2.0 * PI * k as f64 / angles as f64;
                let (px, py) = (a + t * th.cos(), t * th.sin());
                ring += rho((px * px + py * py).sqrt());
            }
            ring *= 2.0 * PI / angles as f64;
            // ln(t) / (2 pi) * t dt with dt = 2 s ds.
            t.ln() / (2.0 * PI) * t * 2.0 * s * ring
        };
        let inner = pieces(&radial, &[0.0, 0.5, 1.0, 1.5, 2.0, reach.max(2.5)], &mut g);
        2.0 * PI * a * rho(a) * inner
    };
    pieces(&outer_rule, &[0.0, 1.0, 2.0, 3.5, radius], &mut outer)
}

//! Quadrature on nonuniform sample grids by local quadratic fits.

/// Integral over `[ta, tb]` (offsets from `x0`) of the quadratic through
/// `(x0, y0), (x0 + h0, y1), (x0 + h0 + h1, y2)`.
fn quadratic_piece(h0: f64, h1: f64, y: [f64; 3], ta: f64, tb: f64) -> f64 {
    let c1 = (y[1] - y[0]) / h0;
    let c2 = ((y[2] - y[1]) / h1 - c1) / (h0 + h1);
    let d1 = tb - ta;
    let d2 = (tb * tb - ta * ta) / 2.0;
    let d3 = (tb * tb * tb - ta * ta * ta) / 3.0;
    y[0] * d1 + c1 * d2 + c2 * (d3 - h0 * d2)
}

/// Integral over `[x[i], x[i + 1]]` from the quadratic through three
/// neighbouring samples.
fn interval(x: &[f64], y: &[f64], i: usize) -> f64 {
    let n = x.len();
    if n == 2 {
        return 0.5 * (x[1] - x[0]) * (y[0] + y[1]);
    }
    let j = if i + 2 < n { i } else { i - 1 };
    let h0 = x[j + 1] - x[j];
    let h1 = x[j + 2] - x[j + 1];
    quadratic_piece(h0, h1, [y[j], y[j + 1], y[j + 2]], x[i] - x[j], x[i + 1] - x[j])
}

/// Composite Simpson rule on a nonuniform grid: exact quadratic fits over
/// interval pairs, with a final single interval taken from the last three
/// samples.
pub fn simpson(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return interval(x, y, 0);
    }
    let mut acc = 0.0;
    let mut i = 0;
    while i + 2 < n {
        let h0 = x[i + 1] - x[i];
        let h1 = x[i + 2] - x[i + 1];
        acc += quadratic_piece(h0, h1, [y[i], y[i + 1], y[i + 2]], 0.0, h0 + h1);
        i += 2;
    }
    if i + 1 < n {
        acc += interval(x, y, i);
    }
    acc
}

/// Running integral from `x[0]`, one value per sample.
pub fn cumulative(x: &[f64], y: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), y.len());
    let mut out = Vec::with_capacity(x.len());
    if x.is_empty() {
        return out;
    }
    out.push(0.0);
    let mut acc = 0.0;
    for i in 0..x.len() - 1 {
        acc += interval(x, y, i);
        out.push(acc);
    }
    out
}

/// Fit `y ~ c x^k (1 + b x^2)` near the origin from the secant log-slopes
/// between the first three samples. Returns `(c, k, b)`.
fn origin_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    if x.is_empty() || y[0] == 0.0 || x[0] <= 0.0 {
        return None;
    }
    let same = |i: usize| i < y.len() && y[i] != 0.0 && y[i].signum() == y[0].signum();
    let slope = |i: usize| (y[i + 1] / y[i]).ln() / (x[i + 1] / x[i]).ln();
    let (k, b) = if same(1) && same(2) {
        let (s0, s1) = (slope(0), slope(1));
        // ln(y_{i+1}/y_i) / ln(x_{i+1}/x_i) = k + b q_i to first order in b.
        let q = |i: usize| (x[i + 1] * x[i + 1] - x[i] * x[i]) / (x[i + 1] / x[i]).ln();
        let (q0, q1) = (q(0), q(1));
        let b = (s1 - s0) / (q1 - q0);
        (s0 - b * q0, b)
    } else if same(1) {
        (slope(0), 0.0)
    } else {
        (0.0, 0.0)
    };
    let k = k.max(-0.5);
    let c = y[0] / (x[0].powf(k) * (1.0 + b * x[0] * x[0]));
    Some((c, k, b))
}

/// Integral of `y` over `[0, x[0]]` from the fit `c x^k (1 + b x^2)`.
pub fn origin_piece(x: &[f64], y: &[f64]) -> f64 {
    let Some((c, k, b)) = origin_fit(x, y) else {
        return 0.0;
    };
    let r = x[0];
    c * (r.powf(k + 1.0) / (k + 1.0) + b * r.powf(k + 3.0) / (k + 3.0))
}

/// Integral of `ln(x) y` over `[0, x[0]]` with `y` fitted as in
/// [`origin_piece`].
pub fn origin_piece_log(x: &[f64], y: &[f64]) -> f64 {
    let Some((c, k, b)) = origin_fit(x, y) else {
        return 0.0;
    };
    let r = x[0];
    let l = r.ln();
    // ∫_0^r s^j ln s ds = r^{j+1} (ln r / (j+1) - 1 / (j+1)^2).
    let term = |j: f64| r.powf(j + 1.0) * (l / (j + 1.0) - 1.0 / ((j + 1.0) * (j + 1.0)));
    c * (term(k) + b * term(k + 2.0))
}

/// Integral of `y` over `[x_last, inf)` for `y` decaying like
/// `exp(-kappa x)`.
pub fn exponential_tail(last: f64, kappa: f64) -> f64 {
    if kappa > 0.0 && kappa.is_finite() {
        last / kappa
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn warped_grid(n: usize, a: f64, b: f64) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                a + (b - a) * (t + 0.3 * t * (1.0 - t))
            })
            .collect()
    }

    #[test]
    fn exact_for_quadratics() {
        for n in [3, 4, 7, 10] {
            let x = warped_grid(n, 0.5, 2.0);
            let y: Vec<f64> = x.iter().map(|t| 3.0 * t * t - t + 2.0).collect();
            let exact = |t: f64| t * t * t - 0.5 * t * t + 2.0 * t;
            assert!((simpson(&x, &y) - (exact(2.0) - exact(0.5))).abs() < 1e-13, "n = {n}");
            let c = cumulative(&x, &y);
            for (xi, ci) in x.iter().zip(&c) {
                assert!((ci - (exact(*xi) - exact(0.5))).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn converges_on_smooth_integrand() {
        let x = warped_grid(2001, 0.0, std::f64::consts::PI);
        let y: Vec<f64> = x.iter().map(|t| t.sin()).collect();
        assert!((simpson(&x, &y) - 2.0).abs() < 1e-11);
    }

    #[test]
    fn origin_piece_power_law() {
        let x = [1e-3, 2e-3, 3.5e-3];
        let y = x.map(|t| t * t);
        assert!((origin_piece(&x, &y) - 1e-9 / 3.0).abs() < 1e-22);
        // y = x^{1/2} (1 - x^2): exact integral x^{3/2} (2/3 - 2 x^2 / 7).
        let x: [f64; 3] = [0.01, 0.012, 0.015];
        let y = x.map(|t| t.sqrt() * (1.0 - t * t));
        let exact = x[0].powf(1.5) * (2.0 / 3.0 - 2.0 * x[0] * x[0] / 7.0);
        let est = origin_piece(&x, &y);
        // The fit is first order in b x^2.
        assert!((est / exact - 1.0).abs() < 1e-7, "{est} {exact}");
    }

    #[test]
    fn origin_piece_with_logarithm() {
        let x: [f64; 3] = [1e-3, 1.3e-3, 1.7e-3];
        let y = x.map(|t| t * (1.0 - t * t));
        let r = x[0];
        let exact = r * r * (r.ln() / 2.0 - 0.25) - r.powi(4) * (r.ln() / 4.0 - 1.0 / 16.0);
        let est = origin_piece_log(&x, &y);
        assert!((est / exact - 1.0).abs() < 1e-9, "{est} {exact}");
    }

    #[test]
    fn exponential_tail_integral() {
        assert_eq!(exponential_tail(2.0, 4.0), 0.5);
        assert_eq!(exponential_tail(2.0, 0.0), 0.0);
    }
}

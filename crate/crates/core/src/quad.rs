//! Adaptive Simpson quadrature and uniform grids.

const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integrates piecewise, splitting at `breaks` inside `(a, b)`. Use for
/// integrands with kinks where a single Simpson panel would stall.
pub fn adaptive_simpson_split<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: f64,
) -> f64 {
    let mut pts: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    pts.push(a);
    pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let n = (pts.len() - 1) as f64;
    pts.windows(2)
        .map(|w| adaptive_simpson(&f, w[0], w[1], tol / n))
        .sum()
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let h = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + h * i as f64 })
                .collect()
        }
    }
}

/// Uniform grid covering `[lo, hi]` with spacing at most `spacing`.
pub fn uniform_grid(lo: f64, hi: f64, spacing: f64) -> Vec<f64> {
    let n = ((hi - lo) / spacing - 1e-9).ceil().max(1.0) as usize + 1;
    linspace(lo, hi, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_exact() {
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x, -1.0, 2.0, 1e-12);
        assert!((v - (4.0 - 0.25 - 4.0 + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn gaussian_mass() {
        let s = 0.03;
        let f = |x: f64| (-x * x / (2.0 * s * s)).exp() / ((2.0 * std::f64::consts::PI).sqrt() * s);
        let v = adaptive_simpson(f, -8.0 * s, 8.0 * s, 1e-12);
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn kinked_integrand() {
        let v = adaptive_simpson_split(|x: f64| x.abs(), -1.0, 3.0, &[0.0], 1e-12);
        assert!((v - 5.0).abs() < 1e-12);
    }

    #[test]
    fn grids() {
        let g = uniform_grid(-1.0, 1.0, 0.1);
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], -1.0);
        assert_eq!(g[20], 1.0);
        assert!(linspace(0.0, 1.0, 0).is_empty());
    }
}

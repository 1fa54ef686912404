//! Special functions used by the Chebyshev machinery: exponentially scaled
//! modified Bessel functions, the principal Lambert W branch and the decay
//! function `kappa` that controls Chebyshev coefficient magnitudes of a Gaussian.

use crate::error::{Error, Result};

/// Argument at which the Bessel evaluation switches from the power series to
/// the large-argument expansion.
pub const BESSEL_SERIES_SWITCH: f64 = 20.0;

/// `kappa(1)`, used by the intermediate-regime bounds.
pub fn kappa_one() -> f64 {
    kappa(1.0)
}

/// Auxiliary decay rate
/// `log(x + sqrt(1+x^2))/2 - (x - 1 + sqrt(1+x^2))^2 / (4 x (x + sqrt(1+x^2)))`.
pub fn kappa(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let r = (1.0 + x * x).sqrt();
    let s = x + r;
    0.5 * s.ln() - (x - 1.0 + r).powi(2) / (4.0 * x * s)
}

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// `exp(-x) * I_m(x)` for integer order `m >= 0` and `x >= 0`.
pub fn bessel_i_scaled(m: u32, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Numeric(format!(
            "bessel argument {x} not finite/nonnegative"
        )));
    }
    if x == 0.0 {
        return Ok(if m == 0 { 1.0 } else { 0.0 });
    }
    if x <= BESSEL_SERIES_SWITCH {
        return Ok(bessel_series(m, x));
    }
    if let Some(v) = bessel_asymptotic(m, x) {
        return Ok(v);
    }
    bessel_miller(m, x)
}

fn ln_factorial(n: u32) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

fn bessel_series(m: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mf = m as f64;
    // leading term (x/2)^m / m! * exp(-x), in log space
    let ln_t0 = mf * half.ln() - ln_factorial(m) - x;
    let q = half * half;
    // the remaining sum is at most exp(q / (m + 1))
    if ln_t0 + q / (mf + 1.0) < -745.0 {
        return 0.0;
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + mf));
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    (ln_t0 + sum.ln()).exp()
}

/// Hankel expansion `e^{-x} I_m(x) ~ (2 pi x)^{-1/2} sum_k (-1)^k a_k(m) / x^k`.
/// Returns `None` when the series does not reach the target accuracy before
/// its terms start to grow.
fn bessel_asymptotic(m: u32, x: f64) -> Option<f64> {
    let mu = 4.0 * (m as f64).powi(2);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= -(mu - odd * odd) / (kf * 8.0 * x);
        let a = term.abs();
        if a > prev {
            return None;
        }
        sum += term;
        if a < 1e-16 * sum.abs() {
            return Some(sum / (2.0 * std::f64::consts::PI * x).sqrt());
        }
        prev = a;
    }
    None
}

/// Backward recurrence `I_{k-1} = (2k/x) I_k + I_{k+1}` normalised by
/// `e^{-x} (I_0 + 2 sum_k I_k) = 1`.
fn bessel_miller(m: u32, x: f64) -> Result<f64> {
    let start = (m as f64).max(x.min(1e4)) + (140.0 * x).sqrt() + 40.0;
    let start = start.ceil() as usize;
    if start > 50_000_000 {
        return Err(Error::Numeric(format!(
            "bessel recurrence too long for m={m}, x={x}"
        )));
    }
    let mut above = 0.0_f64;
    let mut cur = 1e-280_f64;
    let mut target = 0.0;
    let mut sum = 0.0;
    for k in (1..=start).rev() {
        if k == m as usize {
            target = cur;
        }
        sum += 2.0 * cur;
        let below = (2.0 * k as f64 / x) * cur + above;
        above = cur;
        cur = below;
        if cur > 1e250 {
            above *= 1e-250;
            cur *= 1e-250;
            target *= 1e-250;
            sum *= 1e-250;
        }
    }
    if m == 0 {
        target = cur;
    }
    sum += cur;
    let v = target / sum;
    if !v.is_finite() {
        return Err(Error::Numeric(format!(
            "bessel recurrence failed for m={m}, x={x}"
        )));
    }
    Ok(v)
}

/// Principal branch of the Lambert W function via Halley iteration.
pub fn lambert_w(x: f64) -> Result<f64> {
    let branch = -(-1.0f64).exp();
    if !x.is_finite() || x < branch - 1e-15 {
        return Err(Error::Domain(format!("lambert_w needs x >= -1/e, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x <= branch {
        return Ok(-1.0);
    }
    let mut w = if x < -0.25 {
        let p = (2.0 * (std::f64::consts::E * x + 1.0)).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        (1.0 + x).ln() * 0.8
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };
    for _ in 0..50 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * (1.0 + w.abs()) {
            return Ok(w);
        }
    }
    let resid = (w * w.exp() - x).abs();
    if resid <= 1e-12 * x.abs().max(1.0) {
        Ok(w)
    } else {
        Err(Error::Numeric(format!(
            "lambert_w did not converge for x={x}"
        )))
    }
}

/// `g_a(x) = x / W(x)`, with the limit 1 at the origin.
pub fn g_asymptotic(x: f64) -> Result<f64> {
    if x.abs() < 1e-300 {
        return Ok(1.0);
    }
    Ok(x / lambert_w(x)?)
}

/// `g_i(x) = log x - log(log(x^2)) / 4`, defined for `x > sqrt(e)`.
pub fn g_intermediate(x: f64) -> Result<f64> {
    let l2 = (x * x).ln();
    if !(l2 > 1.0) {
        return Err(Error::Domain(format!("g_i needs x > sqrt(e), got {x}")));
    }
    Ok(x.ln() - 0.25 * l2.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // reference values from a 40-digit multiprecision evaluation
    const BESSEL_REF: &[(u32, f64, f64)] = &[
        (0, 0.25, 0.791_017_162_139_719_4),
        (1, 0.25, 0.098_112_628_697_368_24),
        (3, 2.0, 0.028_791_222_639_470_898),
        (0, 20.0, 0.089_780_311_884_826_02),
        (2, 25.0, 0.073_910_684_481_893_3),
        (5, 100.0, 0.035_229_468_707_741_78),
        (28, 115.0, 0.0012346228646413613),
        (40, 400.0, 0.002_698_145_705_088_44),
        (0, 1e4, 0.003_989_472_674_604_732),
        (150, 1e4, 0.001_295_146_612_430_129_2),
        (60, 30.0, 1.493_081_102_838_365e-23),
        (10, 0.01, 2.664_373_176_116_595e-30),
    ];

    #[test]
    fn bessel_reference_values() {
        for &(m, x, want) in BESSEL_REF {
            let got = bessel_i_scaled(m, x).unwrap();
            assert_relative_eq!(got, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn bessel_paths_agree_near_switch() {
        for m in [0u32, 1, 4, 9] {
            let a = bessel_series(m, 20.0);
            let b = bessel_miller(m, 20.0).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-12);
            let c = bessel_miller(m, 60.0).unwrap();
            let d = bessel_asymptotic(m, 60.0).unwrap();
            assert_relative_eq!(c, d, max_relative = 1e-12);
        }
    }

    #[test]
    fn bessel_sum_rule() {
        // e^{-x} (I_0 + 2 sum I_k) = 1
        for x in [0.3, 5.0, 21.0, 250.0] {
            let mut s = bessel_i_scaled(0, x).unwrap();
            for k in 1..400 {
                s += 2.0 * bessel_i_scaled(k, x).unwrap();
            }
            assert_relative_eq!(s, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn lambert_w_values() {
        assert_eq!(lambert_w(0.0).unwrap(), 0.0);
        assert_relative_eq!(
            lambert_w(std::f64::consts::E).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        assert_relative_eq!(lambert_w(1.0).unwrap(), 0.5671432904097838, epsilon = 1e-14);
        assert_relative_eq!(
            lambert_w(10.0).unwrap(),
            1.7455280027406994,
            epsilon = 1e-13
        );
        assert_relative_eq!(
            lambert_w(-0.3).unwrap(),
            -0.4894022271802149,
            epsilon = 1e-13
        );
        assert_relative_eq!(lambert_w(1e6).unwrap(), 11.383358086140053, epsilon = 1e-12);
        assert!(lambert_w(-0.5).is_err());
    }

    #[test]
    fn lambert_w_round_trip() {
        let mut x = -0.3678;
        while x < 1e8 {
            let w = lambert_w(x).unwrap();
            assert!((w * w.exp() - x).abs() <= 1e-12 * x.abs().max(1.0), "x={x}");
            x = if x < 1.0 { x + 0.0173 } else { x * 1.37 };
        }
    }

    #[test]
    fn kappa_values_and_bounds() {
        assert!((kappa(1.0) - 0.23358).abs() < 1e-5);
        let k1 = kappa_one();
        for i in 1..=1000 {
            let x = i as f64 / 1000.0;
            let k = kappa(x);
            assert!(x * k1 <= k + 1e-15 && k <= x / 4.0 + 1e-15, "x={x}");
        }
        let mut x = 1.001;
        while x <= 100.0 {
            assert!(kappa(x) >= 0.5 * ((2.0 * x).ln() - 1.0), "x={x}");
            x += 0.0371;
        }
    }

    #[test]
    fn helper_functions() {
        assert_relative_eq!(g_asymptotic(0.0).unwrap(), 1.0);
        assert_relative_eq!(
            g_asymptotic(std::f64::consts::E).unwrap(),
            std::f64::consts::E
        );
        assert!(g_intermediate(1.2).is_err());
        let x = 953.27;
        assert_relative_eq!(
            g_intermediate(x).unwrap(),
            x.ln() - 0.25 * (2.0 * x.ln()).ln(),
            epsilon = 1e-14
        );
    }
}

use std::f64::consts::PI;

use super::AccuracyTarget;
use crate::error::{Error, Result};

/// Default cap on planned Fejer orders.
pub const DEFAULT_ORDER_CAP: u64 = 1 << 26;

/// Outcome grid `sigma_k = 2k/N - 1`, `k = 0..N-1`.
pub fn fejer_grid(n: u64) -> Vec<f64> {
    (0..n).map(|k| 2.0 * k as f64 / n as f64 - 1.0).collect()
}

/// `(1/N^2) sin^2(N pi d / 2) / sin^2(pi d / 2)` with `d = sigma - omega`.
/// The kernel has period 2 in `d`; the removable singularities return 1.
pub fn fejer_eval(sigma: f64, omega: f64, n: u64) -> f64 {
    let d = sigma - omega;
    let d = d - 2.0 * (0.5 * d).round();
    if d == 0.0 {
        return 1.0;
    }
    let nf = n as f64;
    let num = (0.5 * nf * PI * d).sin();
    let den = nf * (0.5 * PI * d).sin();
    (num / den).powi(2)
}

/// Tail bound `1 / (N Delta - 2)` on the mass outside `+-Delta`.
pub fn fejer_tail_bound(n: u64, delta: f64) -> f64 {
    let x = n as f64 * delta - 2.0;
    if x <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / x
    }
}

fn round_up_pow2(raw: f64, cap: u64) -> Result<u64> {
    if !raw.is_finite() || raw > cap as f64 {
        return Err(Error::ResourceCap(format!(
            "planned order {raw:.3e} exceeds cap {cap}"
        )));
    }
    // absorb rounding in the raw formula so exact powers of two are not doubled
    let target = raw * (1.0 - 4.0 * f64::EPSILON);
    let mut n = 2u64;
    while (n as f64) < target {
        n <<= 1;
    }
    if n > cap {
        return Err(Error::ResourceCap(format!(
            "planned order {n} exceeds cap {cap}"
        )));
    }
    Ok(n)
}

/// Smallest power of two `N >= (1/Delta)(1/Sigma + 2)`.
pub fn fejer_plan(target: &AccuracyTarget) -> Result<u64> {
    fejer_plan_with_cap(target, DEFAULT_ORDER_CAP)
}

pub fn fejer_plan_with_cap(target: &AccuracyTarget, cap: u64) -> Result<u64> {
    target.validate()?;
    round_up_pow2((1.0 / target.sigma + 2.0) / target.delta, cap)
}

/// Angular resolution `sqrt(1 + Delta) - 1` needed by the qubitized variant.
pub fn delta_theta(delta: f64) -> f64 {
    (1.0 + delta).sqrt() - 1.0
}

/// Smallest power of two `M >= (2/Delta_theta)(1/Sigma + 2)`.
pub fn qubitized_fejer_plan(target: &AccuracyTarget) -> Result<u64> {
    qubitized_fejer_plan_with_cap(target, DEFAULT_ORDER_CAP)
}

pub fn qubitized_fejer_plan_with_cap(target: &AccuracyTarget, cap: u64) -> Result<u64> {
    target.validate()?;
    round_up_pow2(
        2.0 / delta_theta(target.delta) * (1.0 / target.sigma + 2.0),
        cap,
    )
}

/// `(K_F(sigma, theta/pi) + K_F(sigma, -theta/pi)) / 2` with `cos(theta) = omega`.
/// The outcome grid is in units of pi, so an outcome `sigma` maps back to the
/// frequency `cos(pi |sigma|)`.
pub fn qubitized_fejer_eval(sigma: f64, omega: f64, n: u64) -> Result<f64> {
    if !(omega.abs() <= 1.0) {
        return Err(Error::Domain(format!(
            "qubitized Fejer needs |omega| <= 1, got {omega}"
        )));
    }
    let phi = omega.acos() / PI;
    Ok(0.5 * (fejer_eval(sigma, phi, n) + fejer_eval(sigma, -phi, n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn target(sigma: f64, delta: f64) -> AccuracyTarget {
        AccuracyTarget::new(sigma, delta, 0.1, 0.05).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(fejer_eval(0.3, 0.3, 64), 1.0);
        assert!(fejer_eval(0.5, 0.0, 4).abs() < 1e-30);
        // direct evaluation away from the singular points
        let d: f64 = 0.137;
        let want = ((16.0 * PI * d / 2.0).sin() / (16.0 * (PI * d / 2.0).sin())).powi(2);
        assert_relative_eq!(fejer_eval(0.2 + d, 0.2, 16), want, max_relative = 1e-13);
        // period 2 and limit at d = 2
        assert_relative_eq!(fejer_eval(1.0, -1.0, 32), 1.0, epsilon = 1e-12);
        assert_relative_eq!(
            fejer_eval(0.9, -0.8, 32),
            fejer_eval(-1.1, -0.8, 32),
            epsilon = 1e-12
        );
    }

    #[test]
    fn plan_examples() {
        assert_eq!(fejer_plan(&target(0.25, 0.1)).unwrap(), 64);
        assert_eq!(fejer_plan(&target(0.5, 0.5)).unwrap(), 8);
        assert_eq!(fejer_plan(&target(0.1, 0.01)).unwrap(), 2048);
        let e = fejer_plan_with_cap(&target(0.1, 0.01), 1024).unwrap_err();
        assert!(matches!(e, Error::ResourceCap(_)));
        assert!(fejer_plan(&target(1e-6, 1e-6)).is_err());
    }

    #[test]
    fn qubitized_plan_examples() {
        assert!((delta_theta(0.1) - 0.048809).abs() < 1e-6);
        assert_eq!(delta_theta(3.0), 1.0);
        let raw = 2.0 * 6.0 / delta_theta(0.1);
        assert!((raw - 245.9).abs() < 0.05);
        assert_eq!(qubitized_fejer_plan(&target(0.25, 0.1)).unwrap(), 256);
    }

    #[test]
    fn qubitized_examples() {
        assert_eq!(qubitized_fejer_eval(0.0, 1.0, 32).unwrap(), 1.0);
        for &s in &fejer_grid(32) {
            let a = qubitized_fejer_eval(s, 0.0, 32).unwrap();
            let b = qubitized_fejer_eval(-s, 0.0, 32).unwrap();
            assert_relative_eq!(a, b, epsilon = 1e-14);
        }
        assert!(matches!(
            qubitized_fejer_eval(0.0, 1.5, 8),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn tail_bound_holds_at_plan() {
        let t = target(0.1, 0.05);
        let n = fejer_plan(&t).unwrap();
        assert!(fejer_tail_bound(n, t.delta) <= t.sigma);
        assert!(fejer_tail_bound(4, 0.1).is_infinite());
    }

    proptest! {
        #[test]
        fn fejer_is_a_distribution(omega in -1.0f64..1.0, p in 1u32..9) {
            let n = 1u64 << p;
            let total: f64 = fejer_grid(n).iter().map(|&s| fejer_eval(s, omega, n)).sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
            prop_assert!(fejer_grid(n).iter().all(|&s| fejer_eval(s, omega, n) >= 0.0));
        }

        #[test]
        fn qubitized_is_a_distribution(omega in -1.0f64..=1.0) {
            let n = 64;
            let total: f64 = fejer_grid(n).iter().map(|&s| qubitized_fejer_eval(s, omega, n).unwrap()).sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn plan_is_minimal_power_of_two(sigma in 0.01f64..0.99, delta in 0.001f64..0.99) {
            let t = target(sigma, delta);
            let n = fejer_plan(&t).unwrap();
            let raw = (1.0 / sigma + 2.0) / delta;
            prop_assert!(n.is_power_of_two());
            prop_assert!(n as f64 >= raw * (1.0 - 1e-12));
            prop_assert!(n == 2 || ((n / 2) as f64) < raw);
        }
    }
}

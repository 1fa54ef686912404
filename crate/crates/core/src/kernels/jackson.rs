use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{AccuracyTarget, JacksonParams};
use crate::cheb::clenshaw;
use crate::error::{validation, Error, Result};
use crate::quad::adaptive_simpson_split;

/// Tent `g(x)`: `1 - 2|x|/delta` on `[-delta, delta]`, `-1` elsewhere.
pub fn jackson_g(x: f64, delta: f64) -> f64 {
    if x.abs() >= delta {
        -1.0
    } else {
        1.0 - 2.0 * x.abs() / delta
    }
}

/// Jackson-damped Chebyshev coefficients of the tent `g`, degree `n`.
pub fn jackson_coeffs(n: u32, delta: f64) -> Vec<f64> {
    let theta0 = delta.min(1.0).acos();
    // s(m) = int_{theta0}^{pi/2} cos(m t) dt
    let s = |m: u32| -> f64 {
        if m == 0 {
            0.5 * PI - theta0
        } else {
            let mf = m as f64;
            ((0.5 * mf * PI).sin() - (mf * theta0).sin()) / mf
        }
    };
    let nf = n as f64;
    let a = PI / (nf + 1.0);
    let cot = 1.0 / a.tan();
    (0..=n)
        .map(|k| {
            if k % 2 == 1 {
                return 0.0;
            }
            let gamma = if k == 0 { 1.0 } else { 2.0 };
            let km1 = if k == 0 { 1 } else { k - 1 };
            let tent = gamma / PI * 4.0 * (s(k) - (s(km1) + s(k + 1)) / (2.0 * delta));
            let bare = tent - if k == 0 { 1.0 } else { 0.0 };
            let kf = k as f64;
            let damp = ((nf - kf + 1.0) * (a * kf).cos() + (a * kf).sin() * cot) / (nf + 1.0);
            damp * bare
        })
        .collect()
}

/// Degree-`n` Jackson approximation `J_N(x)` of the tent `g`.
pub fn jackson_approx(x: f64, n: u32, delta: f64) -> f64 {
    clenshaw(&jackson_coeffs(n, delta), x)
}

/// Two-level amplifying polynomial of degree `k` on `[-1, 1]`:
/// close to 1 on `[3/5, 1]`, close to 0 on `[-1, -3/5]`, within `tau = exp(-k/6)`.
pub trait AmplifierProvider: Send + Sync + fmt::Debug {
    fn degree(&self) -> u32;
    fn eval(&self, y: f64) -> f64;
    fn tau(&self) -> f64 {
        (-(self.degree() as f64) / 6.0).exp()
    }
}

/// `A_k(y) = P[Bin(k, (1+y)/2) > k/2]`, ties counted with weight one half.
#[derive(Clone, Debug)]
pub struct MajorityVote {
    k: u32,
    ln_binom: Vec<f64>,
}

impl MajorityVote {
    pub fn new(k: u32) -> Self {
        let lg = |x: f64| libm::lgamma(x + 1.0);
        let kf = k as f64;
        let ln_binom = (0..=k)
            .map(|j| lg(kf) - lg(j as f64) - lg(kf - j as f64))
            .collect();
        Self { k, ln_binom }
    }
}

impl AmplifierProvider for MajorityVote {
    fn degree(&self) -> u32 {
        self.k
    }

    fn eval(&self, y: f64) -> f64 {
        let p = (0.5 * (1.0 + y)).clamp(0.0, 1.0);
        if p == 0.0 {
            return 0.0;
        }
        if p == 1.0 {
            return 1.0;
        }
        let (lp, lq) = (p.ln(), (1.0 - p).ln());
        let k = self.k;
        let pmf = |j: u32| (self.ln_binom[j as usize] + j as f64 * lp + (k - j) as f64 * lq).exp();
        let mut total: f64 = ((k / 2 + 1)..=k).map(pmf).sum();
        if k.is_multiple_of(2) {
            total += 0.5 * pmf(k / 2);
        }
        total.min(1.0)
    }
}

/// `K_J(sigma, omega) = norm * A_k((4/5) J_N((sigma - omega)/2))`, zero when
/// `|sigma - omega| > 2`. The normalization makes `K_J` a unit-mass density in
/// `sigma` over the full translate `[omega - 2, omega + 2]`.
pub struct JacksonKernel {
    delta: f64,
    n: u32,
    coeffs: Vec<f64>,
    amplifier: Box<dyn AmplifierProvider>,
    normalization: f64,
}

impl fmt::Debug for JacksonKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JacksonKernel")
            .field("delta", &self.delta)
            .field("n", &self.n)
            .field("k", &self.amplifier.degree())
            .field("normalization", &self.normalization)
            .finish()
    }
}

const NORM_TOL: f64 = 1e-12;

impl JacksonKernel {
    /// Builds the kernel with the default majority-vote amplifier and the
    /// normalization computed by quadrature.
    pub fn new(delta: f64, n: u32, k: u32) -> Result<Self> {
        Self::with_amplifier(delta, n, Box::new(MajorityVote::new(k)))
    }

    pub fn with_amplifier(
        delta: f64,
        n: u32,
        amplifier: Box<dyn AmplifierProvider>,
    ) -> Result<Self> {
        check(delta, n, amplifier.degree())?;
        let mut kern = Self {
            delta,
            n,
            coeffs: jackson_coeffs(n, delta),
            amplifier,
            normalization: 1.0,
        };
        let mass = 2.0 * kern.window_integral(-1.0, 1.0);
        if !(mass > 0.0) {
            return Err(Error::Numeric(format!("Jackson window has mass {mass}")));
        }
        kern.normalization = 1.0 / mass;
        Ok(kern)
    }

    /// Uses a precomputed normalization (as stored in a [`super::KernelSpec`]).
    pub fn with_normalization(delta: f64, n: u32, k: u32, normalization: f64) -> Result<Self> {
        check(delta, n, k)?;
        Ok(Self {
            delta,
            n,
            coeffs: jackson_coeffs(n, delta),
            amplifier: Box::new(MajorityVote::new(k)),
            normalization,
        })
    }

    pub fn params(&self) -> JacksonParams {
        JacksonParams {
            k: self.amplifier.degree(),
            n: self.n,
            delta: self.delta,
            normalization: self.normalization,
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// `exp(-k/6)`.
    pub fn tau(&self) -> f64 {
        self.amplifier.tau()
    }

    /// `J_N(x)`.
    pub fn approx(&self, x: f64) -> f64 {
        clenshaw(&self.coeffs, x)
    }

    /// Unnormalized window `A_k((4/5) J_N(x))`.
    pub fn window(&self, x: f64) -> f64 {
        if x.abs() > 1.0 {
            return 0.0;
        }
        self.amplifier.eval(0.8 * self.approx(x))
    }

    pub fn eval(&self, sigma: f64, omega: f64) -> f64 {
        self.normalization * self.window(0.5 * (sigma - omega))
    }

    /// `int_a^b window(x) dx` by adaptive Simpson on panels a few oscillations wide.
    pub fn window_integral(&self, a: f64, b: f64) -> f64 {
        let h = (4.0 / self.n as f64).min(0.05);
        let mut breaks = vec![-self.delta, 0.0, self.delta];
        let mut x = a + h;
        while x < b {
            breaks.push(x);
            x += h;
        }
        adaptive_simpson_split(|x| self.window(x), a, b, &breaks, NORM_TOL)
    }

    /// `sigma`-mass inside `[omega - d, omega + d]`.
    pub fn captured_mass(&self, d: f64) -> f64 {
        2.0 * self.normalization * self.window_integral(-0.5 * d, 0.5 * d)
    }

    /// Lower bound `1/(2 delta + tau (2 - 2 delta))` and, for `tau < 5/8`,
    /// upper bound `(1/delta) 4/(5 - 8 tau)` on the normalization.
    pub fn normalization_bounds(&self) -> (f64, Option<f64>) {
        let (d, t) = (self.delta, self.tau());
        let lower = 1.0 / (2.0 * d + t * (2.0 - 2.0 * d));
        let upper = if t < 0.625 {
            Some(4.0 / (d * (5.0 - 8.0 * t)))
        } else {
            None
        };
        (lower, upper)
    }

    /// Errors when the quadrature normalization falls outside the analytic bounds.
    pub fn check_normalization(&self) -> Result<()> {
        let (lo, hi) = self.normalization_bounds();
        let n = self.normalization;
        if n < lo * (1.0 - 1e-9) || hi.is_some_and(|h| n > h * (1.0 + 1e-9)) {
            return Err(Error::Numeric(format!(
                "normalization {n} outside [{lo}, {hi:?}]"
            )));
        }
        Ok(())
    }
}

fn check(delta: f64, n: u32, k: u32) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(validation(format!(
            "Jackson delta {delta} must lie in (0, 1)"
        )));
    }
    if n < 1 || k < 1 {
        return Err(validation("Jackson orders must be >= 1"));
    }
    Ok(())
}

/// `Sigma/(1-Sigma) * Delta/(2-Delta)`.
pub fn jackson_tau(delta: f64, sigma: f64) -> f64 {
    sigma / (1.0 - sigma) * delta / (2.0 - delta)
}

/// `(288/Delta) ln((1-Sigma)/Sigma * (2-Delta)/Delta)`.
pub fn jackson_d_min(delta: f64, sigma: f64) -> f64 {
    288.0 / delta * ((1.0 - sigma) / sigma * (2.0 - delta) / delta).ln()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacksonPlan {
    pub delta: f64,
    pub n: u32,
    pub k: u32,
    pub tau: f64,
    pub d_min: f64,
    /// Polynomial degree `k N` of the planned kernel.
    pub degree: u64,
    /// `k N >= d_min`.
    pub consistent: bool,
}

pub fn jackson_plan(target: &AccuracyTarget) -> Result<JacksonPlan> {
    target.validate()?;
    let delta = 0.5 * target.delta;
    let n = (24.0 / delta - 1e-9).ceil() as u32;
    let tau = jackson_tau(target.delta, target.sigma);
    let k = ((6.0 * (1.0 / tau).ln() - 1e-9).ceil() as u32).max(1);
    let d_min = jackson_d_min(target.delta, target.sigma);
    let degree = k as u64 * n as u64;
    Ok(JacksonPlan {
        delta,
        n,
        k,
        tau,
        d_min,
        degree,
        consistent: degree as f64 >= d_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn max_error(n: u32, delta: f64, points: usize) -> f64 {
        let c = jackson_coeffs(n, delta);
        (0..points)
            .map(|i| -1.0 + 2.0 * i as f64 / (points - 1) as f64)
            .map(|x| (clenshaw(&c, x) - jackson_g(x, delta)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn tent_examples() {
        assert_eq!(jackson_g(0.0, 0.2), 1.0);
        assert_eq!(jackson_g(0.2, 0.2), -1.0);
        assert_eq!(jackson_g(-0.2, 0.2), -1.0);
        assert_relative_eq!(jackson_g(0.1, 0.2), 0.0, epsilon = 1e-15);
        assert_eq!(jackson_g(0.7, 0.2), -1.0);
    }

    #[test]
    fn tent_coefficients_match_quadrature() {
        // undamped coefficients against a fine Gauss-Chebyshev projection
        let delta = 0.3;
        let n = 40;
        let m = 200_000;
        let damped = jackson_coeffs(n, delta);
        let nf = n as f64;
        let a = PI / (nf + 1.0);
        for (k, dk) in damped.iter().enumerate() {
            let kf = k as f64;
            let damp = ((nf - kf + 1.0) * (a * kf).cos() + (a * kf).sin() / a.tan()) / (nf + 1.0);
            let mut s = 0.0;
            for j in 0..m {
                let t = PI * (j as f64 + 0.5) / m as f64;
                s += jackson_g(t.cos(), delta) * (kf * t).cos();
            }
            let gamma = if k == 0 { 1.0 } else { 2.0 };
            let quad = gamma * s / m as f64;
            assert!((dk / damp - quad).abs() < 1e-8, "k={k}");
        }
    }

    #[test]
    fn approx_examples() {
        assert!((jackson_approx(0.0, 48, 0.5) - 1.0).abs() <= 0.25);
        for x in [0.01, 0.3, 0.77] {
            assert_relative_eq!(
                jackson_approx(x, 60, 0.1),
                jackson_approx(-x, 60, 0.1),
                epsilon = 1e-12
            );
        }
        for delta in [0.5f64, 0.2, 0.05] {
            let n = (24.0 / delta - 1e-9).ceil() as u32;
            assert!(max_error(n, delta, 10_000) <= 0.25, "delta={delta}");
        }
    }

    #[test]
    fn plan_examples() {
        let t = AccuracyTarget::new(0.1, 0.1, 0.1, 0.05).unwrap();
        let p = jackson_plan(&t).unwrap();
        assert_eq!(p.delta, 0.05);
        assert_eq!(p.n, 480);
        assert_relative_eq!(p.d_min, 2880.0 * 171f64.ln(), max_relative = 1e-12);
        assert!((p.d_min - 14808.1).abs() < 0.2);
        assert_eq!(p.k, (6.0 * (1.0 / p.tau).ln()).ceil() as u32);
        assert!(p.consistent);
        assert_eq!(jackson_tau(1.0, 0.5), 1.0);
        assert_eq!(jackson_d_min(1.0, 0.5), 0.0);
    }

    #[test]
    fn amplifier_contract() {
        for k in [1, 2, 5, 6, 12, 31, 60] {
            let a = MajorityVote::new(k);
            let tau = a.tau();
            for i in 0..=2000 {
                let y = -1.0 + i as f64 / 1000.0;
                let v = a.eval(y);
                assert!((0.0..=1.0).contains(&v));
                if y >= 0.6 {
                    assert!(v >= 1.0 - tau, "k={k} y={y} v={v}");
                }
                if y <= -0.6 {
                    assert!(v <= tau, "k={k} y={y} v={v}");
                }
            }
        }
    }

    #[test]
    fn amplifier_is_degree_k_polynomial() {
        // (k+2)-th finite differences of a degree-k polynomial vanish
        let k = 7;
        let a = MajorityVote::new(k);
        let h = 0.05;
        let vals: Vec<f64> = (0..=k + 2).map(|i| a.eval(-0.4 + h * i as f64)).collect();
        let mut d = vals;
        for _ in 0..=k {
            d = d.windows(2).map(|w| w[1] - w[0]).collect();
        }
        assert!(d.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn kernel_normalization() {
        let t = AccuracyTarget::new(0.25, 0.2, 0.1, 0.05).unwrap();
        let p = jackson_plan(&t).unwrap();
        let kern = JacksonKernel::new(p.delta, p.n, p.k).unwrap();
        // unit mass over the full translate
        let total = 2.0 * kern.normalization() * kern.window_integral(-1.0, 1.0);
        assert_relative_eq!(total, 1.0, epsilon = 1e-8);
        // independent oracle: composite midpoint rule on a fine grid
        let m = 400_000;
        let mid: f64 = (0..m)
            .map(|i| kern.window(-1.0 + (i as f64 + 0.5) * 2.0 / m as f64))
            .sum::<f64>()
            * 2.0
            / m as f64;
        assert_relative_eq!(2.0 * kern.normalization() * mid, 1.0, epsilon = 1e-7);
        kern.check_normalization().unwrap();
        let (lo, hi) = kern.normalization_bounds();
        assert!(lo <= kern.normalization() && kern.normalization() <= hi.unwrap());
    }

    #[test]
    fn kernel_tail_below_tau() {
        let kern = JacksonKernel::new(0.1, 240, 12).unwrap();
        let cap = kern.normalization() * kern.tau();
        for i in 0..=400 {
            let d = 0.2 + 1.8 * i as f64 / 400.0;
            assert!(kern.eval(0.3 + d, 0.3) <= cap * (1.0 + 1e-12), "d={d}");
        }
    }

    #[test]
    fn upper_bound_flagged_for_large_tau() {
        let kern = JacksonKernel::new(0.3, 80, 2).unwrap();
        assert!(kern.tau() >= 0.625);
        assert!(kern.normalization_bounds().1.is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn d_min_monotone(d in 0.01f64..0.9, s in 0.01f64..0.45, f in 1.01f64..1.1) {
            prop_assert!(jackson_d_min(d * f, s) < jackson_d_min(d, s));
            prop_assert!(jackson_d_min(d, s * f) < jackson_d_min(d, s));
        }

        #[test]
        fn amplifier_antisymmetric(k in 1u32..80, y in -1.0f64..1.0) {
            let a = MajorityVote::new(k);
            prop_assert!((a.eval(y) + a.eval(-y) - 1.0).abs() < 1e-12);
        }
    }
}

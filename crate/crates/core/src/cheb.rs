//! Chebyshev expansion of the Gaussian kernel: bare and shifted coefficients,
//! truncation-order planning, truncation and coefficient bounds, and Chebyshev
//! moments of an operator.

use std::f64::consts::{E, PI};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};
use crate::kernels::{git_resolution, AccuracyTarget};
use crate::spectral::{HermitianOperator, ProbeState, TargetInterval, TransformGrid, C64};

pub use crate::special::{g_asymptotic, g_intermediate, kappa, kappa_one, lambert_w};

/// Constants of the intermediate-regime closed form for `L`.
pub const ALPHA_1: f64 = 2.93;
pub const ALPHA_2: f64 = 4.14;
/// Prefactor of the asymptotic truncation bound.
pub const ASYMPTOTIC_PREFACTOR: f64 = 3.4;
/// Upper limit of `Lambda` for the minimum-error expression.
pub const MAX_LAMBDA_MIN_ERROR: f64 = 5.0;

/// `sum_k c[k] T_k(x)` by Clenshaw's recurrence.
pub fn clenshaw(c: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    match c.first() {
        Some(&c0) => x * b1 - b2 + c0,
        None => 0.0,
    }
}

/// `T_k(x)` by the three-term recurrence (valid for any real `x`).
pub fn chebyshev_t(k: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, x);
    if k == 0 {
        return a;
    }
    for _ in 1..k {
        let c = 2.0 * x * b - a;
        a = b;
        b = c;
    }
    b
}

fn gamma(n: usize) -> f64 {
    if n == 0 {
        1.0
    } else {
        2.0
    }
}

/// Chebyshev coefficients `a_0..a_L` of the bare Gaussian `exp(-x^2 / (2 Lambda^2))`:
/// `a_{2m} = gamma_{2m} (-1)^m e^{-z} I_m(z)` with `z = 1/(4 Lambda^2)`, odd ones zero.
pub fn gauss_cheb_coeffs(lambda: f64, order: usize) -> Result<Vec<f64>> {
    if !(lambda > 0.0) {
        return Err(validation(format!("Lambda = {lambda} must be positive")));
    }
    let z = 0.25 / (lambda * lambda);
    (0..=order)
        .map(|n| {
            if n % 2 == 1 {
                return Ok(0.0);
            }
            let m = n / 2;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            Ok(gamma(n) * sign * crate::special::bessel_i_scaled(m as u32, z)?)
        })
        .collect()
}

/// Gauss-Chebyshev estimate of `a_n` with `nodes` points; independent of the
/// Bessel form. Needs `nodes >= 4 (n + 1)`.
pub fn coeff_quadrature_oracle(lambda: f64, n: usize, nodes: usize) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(validation(format!("Lambda = {lambda} must be positive")));
    }
    if nodes < 4 * (n + 1) {
        return Err(validation(format!("{nodes} nodes too few for order {n}")));
    }
    let s: f64 = (0..nodes)
        .map(|m| {
            let t = PI * (m as f64 + 0.5) / nodes as f64;
            let x = t.cos();
            (-x * x / (2.0 * lambda * lambda)).exp() * (n as f64 * t).cos()
        })
        .sum();
    Ok(gamma(n) * s / nodes as f64)
}

/// Coefficients `c_0..c_L` with `sum_j c_j T_j(omega) = K_GL(sigma, omega)`,
/// projected on the `L+1` Chebyshev nodes. Requires `|sigma| <= 1`.
pub fn shifted_coeffs(lambda: f64, sigma: f64, order: usize) -> Result<Vec<f64>> {
    if order < 1 {
        return Err(validation("expansion order must be >= 1"));
    }
    if !(sigma.abs() <= 1.0) {
        return Err(Error::Domain(format!(
            "shifted expansion needs |sigma| <= 1, got {sigma}"
        )));
    }
    let a = gauss_cheb_coeffs(0.5 * lambda, order)?;
    let nodes = order + 1;
    let thetas: Vec<f64> = (0..nodes)
        .map(|m| PI * (2 * m + 1) as f64 / (2 * nodes) as f64)
        .collect();
    let g: Vec<f64> = thetas
        .iter()
        .map(|t| clenshaw(&a, 0.5 * (t.cos() - sigma)))
        .collect();
    let pre = 1.0 / ((2.0 * PI).sqrt() * lambda * nodes as f64);
    Ok((0..=order)
        .map(|j| {
            let s: f64 = thetas
                .iter()
                .zip(&g)
                .map(|(t, gm)| gm * (j as f64 * t).cos())
                .sum();
            gamma(j) * pre * s
        })
        .collect())
}

/// Truncated kernel `K_GL(sigma, omega)` evaluated directly from the bare series.
pub fn truncated_gaussian(lambda: f64, order: usize, sigma: f64, omega: f64) -> Result<f64> {
    let a = gauss_cheb_coeffs(0.5 * lambda, order)?;
    Ok(clenshaw(&a, 0.5 * (omega - sigma)) / ((2.0 * PI).sqrt() * lambda))
}

/// A shifted Chebyshev expansion of `K_G(sigma, .)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebExpansion {
    pub lambda: f64,
    pub order: usize,
    /// Bare coefficients `a_k(Lambda/2)`.
    pub a: Vec<f64>,
    pub c: Vec<f64>,
    pub sigma: f64,
    pub rescale_mode: TargetInterval,
}

impl ChebExpansion {
    pub fn new(
        lambda: f64,
        sigma: f64,
        order: usize,
        rescale_mode: TargetInterval,
    ) -> Result<Self> {
        if rescale_mode == TargetInterval::Half && sigma.abs() > 0.5 + 1e-12 {
            return Err(Error::Domain(format!(
                "half mode needs |sigma| <= 1/2, got {sigma}"
            )));
        }
        Ok(Self {
            lambda,
            order,
            a: gauss_cheb_coeffs(0.5 * lambda, order)?,
            c: shifted_coeffs(lambda, sigma, order)?,
            sigma,
            rescale_mode,
        })
    }

    pub fn eval(&self, omega: f64) -> f64 {
        clenshaw(&self.c, omega)
    }

    /// Largest `|c_j|`.
    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Half-mode magnitude bound `|c_j| <= 2 (R_L + 1.1)`.
    pub fn within_coefficient_bound(&self, r_l: f64) -> bool {
        self.max_abs() <= 2.0 * (r_l + 1.1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Asymptotic,
    Intermediate,
}

/// `beta_L = e^{-1/Delta^2} / Sigma` and `beta_U = sqrt(ln(1/Sigma)/2) / Delta`.
pub fn critical_betas(target: &AccuracyTarget) -> Result<(f64, f64)> {
    target.validate()?;
    let (s, d) = (target.sigma, target.delta);
    Ok((
        (-1.0 / (d * d)).exp() / s,
        ((1.0 / s).ln() / 2.0).sqrt() / d,
    ))
}

fn l_prime(order: usize) -> f64 {
    (if order.is_multiple_of(2) {
        order + 2
    } else {
        order + 3
    }) as f64
}

/// Validity condition of each regime's bound.
pub fn bound_is_valid(order: usize, lambda: f64, regime: Regime) -> bool {
    match regime {
        Regime::Asymptotic => l_prime(order) * lambda * lambda >= 2.0,
        Regime::Intermediate => {
            let lk = lambda * kappa_one().sqrt();
            order as f64 >= (2.0 / PI).sqrt() / lk - 1.0 && l_prime(order) * lambda * lambda <= 2.0
        }
    }
}

/// Analytic bound on `max |K_G - K_GL|` for the given regime.
pub fn truncation_error_bound(order: usize, lambda: f64, regime: Regime) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(validation(format!("Lambda = {lambda} must be positive")));
    }
    if !bound_is_valid(order, lambda, regime) {
        return Err(Error::OutOfRegime(format!(
            "{regime:?} bound not valid for L = {order}, Lambda = {lambda}"
        )));
    }
    Ok(match regime {
        Regime::Asymptotic => {
            let lp = l_prime(order);
            ASYMPTOTIC_PREFACTOR * (E / (lp * lambda * lambda)).powf(0.5 * lp)
        }
        Regime::Intermediate => {
            let lk2 = lambda * lambda * kappa_one();
            let l1 = order as f64 + 1.0;
            (-0.5 * l1 * l1 * lk2).exp() / (2f64.sqrt() * lk2 * l1)
        }
    })
}

/// Geometric-series bound `(1/sqrt2) e^{-L' kappa(L' Lambda^2 / 2)} / (1 - e^{-kappa(L' Lambda^2 / 2)})`.
pub fn geometric_series_bound(order: usize, lambda: f64) -> f64 {
    let lp = l_prime(order);
    let k = kappa(0.5 * lp * lambda * lambda);
    (-lp * k).exp() / (2f64.sqrt() * (1.0 - (-k).exp()))
}

/// Smallest analytic bound among the regimes valid at `(L, Lambda)`.
pub fn best_valid_bound(order: usize, lambda: f64) -> Option<(f64, Regime)> {
    [Regime::Asymptotic, Regime::Intermediate]
        .into_iter()
        .filter_map(|r| {
            truncation_error_bound(order, lambda, r)
                .ok()
                .map(|b| (b, r))
        })
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinError {
    /// First expression of the chain (tightest).
    pub tight: f64,
    pub middle: f64,
    /// `exp(-1/(2 Lambda^2))`.
    pub envelope: f64,
}

/// Minimum truncation error guaranteed in the intermediate regime.
pub fn min_error_intermediate(lambda: f64) -> Result<MinError> {
    if !(lambda > 0.0 && lambda <= MAX_LAMBDA_MIN_ERROR) {
        return Err(validation(format!("Lambda = {lambda} outside (0, 5]")));
    }
    let k1 = kappa_one();
    let l2 = lambda * lambda;
    let tight = (-0.5 * k1 * (2.0 + lambda).powi(2) / l2).exp() / (2f64.sqrt() * k1 * (2.0 + l2));
    let middle = (-2.0 * k1).exp() / (8f64.sqrt() * k1) * (-2.0 * k1 / l2).exp();
    Ok(MinError {
        tight,
        middle,
        envelope: (-0.5 / l2).exp(),
    })
}

/// Planned truncation of the GIT series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationBudget {
    /// Order used by the pipelines: smallest `L >= formula_order` whose
    /// analytic bound is at most `beta/2`.
    pub order: usize,
    /// Closed-form order of the selected regime.
    pub formula_order: usize,
    pub regime: Regime,
    /// Regime whose bound certifies `order`.
    pub bound_regime: Regime,
    pub r_l_bound: f64,
    pub lambda: f64,
    pub beta: f64,
    pub beta_l: f64,
    pub beta_u: f64,
    pub eps_min: f64,
}

/// Intermediate closed form `ceil((a1/Delta) sqrt(ln(1/Sigma) g_i((a2/(Delta beta)) ln(1/Sigma)))) - 1`.
pub fn intermediate_formula(target: &AccuracyTarget) -> Result<usize> {
    let ls = (1.0 / target.sigma).ln();
    let gi = g_intermediate(ALPHA_2 / (target.delta * target.beta) * ls)?;
    let v = (ALPHA_1 / target.delta * (ls * gi).sqrt()).ceil() - 1.0;
    Ok(v.max(0.0) as usize)
}

/// Asymptotic closed form `ceil((2e/Delta^2) ln(1/Sigma) + g_a((Delta^2/e) ln(6.8/beta)/ln(1/Sigma))) - 2`.
pub fn asymptotic_formula(target: &AccuracyTarget) -> Result<usize> {
    let ls = (1.0 / target.sigma).ln();
    let d2 = target.delta * target.delta;
    let ga = g_asymptotic(d2 / E * (6.8 / target.beta).ln() / ls)?;
    let v = (2.0 * E / d2 * ls + ga).ceil() - 2.0;
    Ok(v.max(0.0) as usize)
}

/// Smallest `L >= start` with `best_valid_bound(L) <= eps`.
fn certified_order(start: usize, lambda: f64, eps: f64) -> Result<(usize, f64, Regime)> {
    const MAX_ORDER: usize = 1 << 40;
    let ok = |l: usize| best_valid_bound(l, lambda).filter(|(b, _)| *b <= eps);
    if let Some((b, r)) = ok(start) {
        return Ok((start, b, r));
    }
    let mut lo = start;
    let mut hi = start.max(1) * 2;
    while ok(hi).is_none() {
        if hi > MAX_ORDER {
            return Err(Error::ResourceCap(format!(
                "no certified order below {MAX_ORDER}"
            )));
        }
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid).is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (b, r) = ok(hi).unwrap();
    Ok((hi, b, r))
}

pub fn truncation_order(target: &AccuracyTarget) -> Result<TruncationBudget> {
    let lambda = git_resolution(target)?;
    let (beta_l, beta_u) = critical_betas(target)?;
    let beta = target.beta;
    if beta > beta_u {
        return Err(Error::OutOfRegime(format!(
            "beta = {beta} exceeds beta_U = {beta_u}"
        )));
    }
    let eps = 0.5 * beta;
    let eps_min = if lambda <= MAX_LAMBDA_MIN_ERROR {
        min_error_intermediate(lambda)?.tight
    } else {
        0.0
    };
    let budget = |regime: Regime, formula_order: usize| -> Result<TruncationBudget> {
        let (order, r_l_bound, bound_regime) = certified_order(formula_order, lambda, eps)?;
        Ok(TruncationBudget {
            order,
            formula_order,
            regime,
            bound_regime,
            r_l_bound,
            lambda,
            beta,
            beta_l,
            beta_u,
            eps_min,
        })
    };
    let asymptotic = || budget(Regime::Asymptotic, asymptotic_formula(target)?);
    let intermediate = || budget(Regime::Intermediate, intermediate_formula(target)?);
    if beta == beta_l {
        let a = asymptotic()?;
        return match intermediate() {
            Ok(i) if i.order < a.order => Ok(i),
            _ => Ok(a),
        };
    }
    if beta < beta_l || eps < eps_min {
        asymptotic()
    } else {
        intermediate()
    }
}

/// `t_k = <psi|T_k(O)|psi>` for `k = 0..=L` by the vector recurrence.
pub fn cheb_moments(op: &HermitianOperator, psi: &ProbeState, order: usize) -> Result<Vec<f64>> {
    if op.dim() != psi.dim() {
        return Err(validation("operator and probe dimensions differ"));
    }
    let o = op.matrix();
    let p = psi.amplitudes();
    let dot = |v: &DVector<C64>| p.dotc(v).re;
    let mut prev = p.clone();
    let mut t = vec![1.0];
    if order == 0 {
        return Ok(t);
    }
    let mut cur = o * p;
    t.push(dot(&cur));
    for _ in 2..=order {
        let next = (o * &cur) * C64::new(2.0, 0.0) - &prev;
        prev = cur;
        cur = next;
        t.push(dot(&cur));
    }
    if let Some((k, v)) = t.iter().enumerate().find(|(_, v)| v.abs() > 1.0 + 1e-10) {
        return Err(Error::Numeric(format!(
            "|t_{k}| = {} > 1: operator not normalized",
            v.abs()
        )));
    }
    Ok(t)
}

/// `Phi_GL(nu) = sum_k c_k(Lambda, nu) t_k` on a grid.
pub fn git_transform_exact_moments(
    moments: &[f64],
    lambda: f64,
    nu: &[f64],
) -> Result<TransformGrid> {
    if moments.len() < 2 {
        return Err(validation("need moments t_0..t_L with L >= 1"));
    }
    let order = moments.len() - 1;
    let values = nu
        .iter()
        .map(|&v| Ok(dot(&shifted_coeffs(lambda, v, order)?, moments)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(TransformGrid {
        nu: nu.to_vec(),
        values,
        exact: false,
        discrete: false,
        width: Some(lambda),
    })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

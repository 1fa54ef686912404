//! Sample planners and the two end-to-end estimators: the Fejer histogram
//! approximator (Algorithm 1) and the Chebyshev moment approximator of the
//! Gaussian transform (Algorithm 2).

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cheb::{cheb_moments, dot, shifted_coeffs, truncation_order, TruncationBudget};
use crate::error::{validation, Error, Result};
use crate::kernels::{fejer_plan, git_resolution, qubitized_fejer_plan, AccuracyTarget};
use crate::sampler::{
    hadamard_test_sample, qpe_distribution, qubitized_frequency, qubitized_qpe_distribution,
    split_seed, statevector_qpe, FaultModel, OutcomeDistribution,
};
use crate::spectral::{
    diagonalize, AffineMap, HermitianOperator, ProbeState, SpectralModel, TargetInterval,
    TransformGrid,
};

/// Constant of the loose shot bound `2 L^3 (1 + 2.2/beta)^2 log(2/eta)`.
pub const LOOSE_BOUND_CONSTANT: f64 = 2.2;
/// Largest sample count any run accepts.
pub const DEFAULT_SAMPLE_CAP: u64 = 1 << 53;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Fejer,
    QubitizedFejer,
    Git,
}

impl Method {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fejer" => Ok(Method::Fejer),
            "qfejer" | "qubitized_fejer" => Ok(Method::QubitizedFejer),
            "git" => Ok(Method::Git),
            other => Err(validation(format!("unknown method '{other}'"))),
        }
    }
}

/// Resources of one estimator run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub method: Method,
    /// `N`, `M` or `L`.
    pub kernel_order: u64,
    pub lambda: Option<f64>,
    pub n_s: u64,
    pub per_order_shots: Option<u64>,
    pub delta_t: Option<f64>,
}

impl Budget {
    pub fn fejer(method: Method, order: u64, n_s: u64) -> Result<Self> {
        let b = Self {
            method,
            kernel_order: order,
            lambda: None,
            n_s,
            per_order_shots: None,
            delta_t: None,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_s < 1 {
            return Err(validation("sample count N_S must be >= 1"));
        }
        if self.n_s > DEFAULT_SAMPLE_CAP {
            return Err(Error::ResourceCap(format!(
                "N_S = {} exceeds cap {DEFAULT_SAMPLE_CAP}",
                self.n_s
            )));
        }
        match self.method {
            Method::Git => {
                let shots = self
                    .per_order_shots
                    .ok_or_else(|| validation("GIT budget needs per-order shots"))?;
                if self.kernel_order.checked_mul(shots) != Some(self.n_s) {
                    return Err(validation("GIT budget needs N_S = L x per-order shots"));
                }
                if self.lambda.is_none_or(|l| !(l > 0.0)) {
                    return Err(validation("GIT budget needs a positive Lambda"));
                }
            }
            Method::Fejer | Method::QubitizedFejer => {
                if self.kernel_order < 2 || !self.kernel_order.is_power_of_two() {
                    return Err(validation(format!(
                        "Fejer order {} must be a power of two",
                        self.kernel_order
                    )));
                }
            }
        }
        if let Some(d) = self.delta_t {
            if !(d >= 0.0) {
                return Err(validation("delta_t must be nonnegative"));
            }
        }
        Ok(())
    }
}

/// Detail kept for Algorithm 2 runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GitDetails {
    pub truncation: TruncationBudget,
    /// Moments fed into the dot product (sampled unless `exact_moments`).
    pub moments: Vec<f64>,
    pub exact_moments: bool,
    pub loose_n_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub transform: TransformGrid,
    pub budget: Budget,
    pub seed: u64,
    pub elapsed: Duration,
    pub git: Option<GitDetails>,
}

/// `ceil` that ignores relative rounding noise below 1e-12.
fn ceil_count(x: f64) -> Result<u64> {
    if !x.is_finite() || x > DEFAULT_SAMPLE_CAP as f64 {
        return Err(Error::ResourceCap(format!(
            "sample count {x:.3e} exceeds cap {DEFAULT_SAMPLE_CAP}"
        )));
    }
    Ok(((x * (1.0 - 1e-12)).ceil() as u64).max(1))
}

fn check_prob(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(validation(format!(
            "{name} = {v} must lie strictly inside (0, 1)"
        )));
    }
    Ok(())
}

/// `ceil(log(2/eta) / (2 beta^2))`.
pub fn plan_fejer_samples(beta: f64, eta: f64) -> Result<u64> {
    check_prob("beta", beta)?;
    check_prob("eta", eta)?;
    ceil_count((2.0 / eta).ln() / (2.0 * beta * beta))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaultySamplePlan {
    pub n_s: u64,
    /// Largest tolerated error per controlled evolution, `beta / (2 log2 N)`.
    pub delta_t: f64,
}

/// `ceil(2 log(2/eta) / beta^2)` samples with `delta_t = beta / (2 log2 N)`.
pub fn plan_fejer_samples_faulty(beta: f64, eta: f64, n: u64) -> Result<FaultySamplePlan> {
    check_prob("beta", beta)?;
    check_prob("eta", eta)?;
    if n < 2 || !n.is_power_of_two() {
        return Err(validation(format!(
            "Fejer order {n} must be a power of two >= 2"
        )));
    }
    Ok(FaultySamplePlan {
        n_s: ceil_count(2.0 * (2.0 / eta).ln() / (beta * beta))?,
        delta_t: beta / (2.0 * n.trailing_zeros() as f64),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GitSamplePlan {
    pub order: usize,
    pub c_max: f64,
    pub per_order_shots: u64,
    /// `L * per_order_shots`, i.e. `2 L log(2/eta) (L c_max / beta)^2` rounded up per order.
    pub n_s: u64,
    /// `2 L^3 (1 + 2.2/beta)^2 log(2/eta)`.
    pub loose_n_s: f64,
}

/// `2 L^3 (1 + 2.2/beta)^2 log(2/eta)`, rounded up.
pub fn git_loose_bound(order: usize, beta: f64, eta: f64) -> f64 {
    let l = order as f64;
    (2.0 * l.powi(3) * (1.0 + LOOSE_BOUND_CONSTANT / beta).powi(2) * (2.0 / eta).ln()).ceil()
}

/// Shot plan for Algorithm 2 from the coefficient table (one row per `nu`).
/// In half mode the coefficient-aware count must not exceed the loose bound.
pub fn plan_git_samples(
    order: usize,
    coeffs: &[Vec<f64>],
    beta: f64,
    eta: f64,
    mode: TargetInterval,
) -> Result<GitSamplePlan> {
    check_prob("beta", beta)?;
    check_prob("eta", eta)?;
    if order < 1 {
        return Err(validation("expansion order must be >= 1"));
    }
    if coeffs.is_empty() || coeffs.iter().any(|c| c.len() != order + 1) {
        return Err(validation(format!(
            "coefficient table must hold rows of length {}",
            order + 1
        )));
    }
    let c_max = coeffs.iter().flatten().fold(0.0_f64, |m, c| m.max(c.abs()));
    let l = order as f64;
    let per_order_shots = ceil_count(2.0 * (2.0 / eta).ln() * (l * c_max / beta).powi(2))?;
    let n_s = per_order_shots
        .checked_mul(order as u64)
        .filter(|&n| n <= DEFAULT_SAMPLE_CAP)
        .ok_or_else(|| Error::ResourceCap(format!("N_S for L = {order} overflows")))?;
    let loose_n_s = git_loose_bound(order, beta, eta);
    if mode == TargetInterval::Half && n_s as f64 > loose_n_s {
        return Err(Error::Numeric(format!(
            "coefficient-aware N_S = {n_s} exceeds the loose bound {loose_n_s:e} in half mode"
        )));
    }
    Ok(GitSamplePlan {
        order,
        c_max,
        per_order_shots,
        n_s,
        loose_n_s,
    })
}

/// Input of Algorithm 1: an analytic spectral model or a statevector
/// simulation (the only path supporting fault injection).
#[derive(Clone, Copy, Debug)]
pub enum Alg1Source<'a> {
    Model(&'a SpectralModel),
    Statevector {
        op: &'a HermitianOperator,
        psi: &'a ProbeState,
        fault: Option<FaultModel>,
    },
}

/// Shift `[-1, 1] -> [0, 1]` applied before qubitized QPE.
pub const QUBITIZED_SHIFT: AffineMap = AffineMap {
    scale: 0.5,
    shift: 0.5,
};

/// Outcome distribution sampled by Algorithm 1.
pub fn alg1_distribution(source: Alg1Source<'_>, budget: &Budget) -> Result<OutcomeDistribution> {
    budget.validate()?;
    let n = budget.kernel_order;
    match (budget.method, source) {
        (Method::Fejer, Alg1Source::Model(m)) => qpe_distribution(m, n),
        (Method::Fejer, Alg1Source::Statevector { op, psi, fault }) => {
            statevector_qpe(op, psi, n.trailing_zeros(), fault.as_ref())
        }
        (Method::QubitizedFejer, Alg1Source::Model(m)) => {
            qubitized_qpe_distribution(&m.mapped(&QUBITIZED_SHIFT)?, n)
        }
        (
            Method::QubitizedFejer,
            Alg1Source::Statevector {
                op,
                psi,
                fault: None,
            },
        ) => qubitized_qpe_distribution(&diagonalize(op, psi)?.mapped(&QUBITIZED_SHIFT)?, n),
        (Method::QubitizedFejer, Alg1Source::Statevector { fault: Some(_), .. }) => Err(
            validation("fault injection is only modelled for time-evolution QPE"),
        ),
        (Method::Git, _) => Err(validation("Algorithm 1 runs the Fejer methods only")),
    }
}

/// Histogram over outcomes as a transform. Qubitized outcomes `+-sigma` are
/// merged and mapped back to frequencies through `cos(pi sigma)` and the shift.
fn histogram_transform(
    method: Method,
    dist_grid: &[f64],
    freq: &[f64],
    n: u64,
    exact: bool,
) -> TransformGrid {
    match method {
        Method::QubitizedFejer => {
            let half = (n / 2) as usize;
            // |sigma| = 2j/N for j = 0..=N/2; outcome q has sigma = 2q/N - 1
            let mut vals = vec![0.0; half + 1];
            for (&s, &f) in dist_grid.iter().zip(freq) {
                let j = ((s.abs() * n as f64) / 2.0).round() as usize;
                vals[j] += f;
            }
            let mut pairs: Vec<(f64, f64)> = vals
                .into_iter()
                .enumerate()
                .map(|(j, v)| {
                    (
                        QUBITIZED_SHIFT.invert(qubitized_frequency(2.0 * j as f64 / n as f64)),
                        v,
                    )
                })
                .collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            TransformGrid {
                nu: pairs.iter().map(|p| p.0).collect(),
                values: pairs.iter().map(|p| p.1).collect(),
                exact,
                discrete: true,
                width: None,
            }
        }
        _ => TransformGrid {
            nu: dist_grid.to_vec(),
            values: freq.to_vec(),
            exact,
            discrete: true,
            width: Some(2.0 / n as f64),
        },
    }
}

/// The `N_S -> infinity` limit of Algorithm 1 on its own outcome grid.
pub fn alg1_exact(source: Alg1Source<'_>, budget: &Budget) -> Result<TransformGrid> {
    let d = alg1_distribution(source, budget)?;
    Ok(histogram_transform(
        budget.method,
        &d.grid,
        &d.probs,
        budget.kernel_order,
        true,
    ))
}

/// Algorithm 1 with an already computed outcome distribution.
pub fn run_algorithm1_on(
    dist: &OutcomeDistribution,
    budget: &Budget,
    seed: u64,
) -> Result<EstimationResult> {
    let start = Instant::now();
    budget.validate()?;
    let hist = dist.sample(budget.n_s, split_seed(seed, 0))?;
    let transform = histogram_transform(
        budget.method,
        &hist.grid,
        &hist.frequencies(),
        budget.kernel_order,
        false,
    );
    Ok(EstimationResult {
        transform,
        budget: *budget,
        seed,
        elapsed: start.elapsed(),
        git: None,
    })
}

/// Fejer-based approximator: `N_S` QPE shots binned into a frequency histogram.
pub fn run_algorithm1(
    source: Alg1Source<'_>,
    budget: &Budget,
    seed: u64,
) -> Result<EstimationResult> {
    let start = Instant::now();
    let dist = alg1_distribution(source, budget)?;
    let mut r = run_algorithm1_on(&dist, budget, seed)?;
    r.elapsed = start.elapsed();
    Ok(r)
}

/// Planned Algorithm 1 budget for a target.
pub fn plan_algorithm1(method: Method, target: &AccuracyTarget) -> Result<Budget> {
    let order = match method {
        Method::Fejer => fejer_plan(target)?,
        Method::QubitizedFejer => qubitized_fejer_plan(target)?,
        Method::Git => return Err(validation("Algorithm 1 runs the Fejer methods only")),
    };
    Budget::fejer(method, order, plan_fejer_samples(target.beta, target.eta)?)
}

/// How Algorithm 2 obtains the moments `t_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShotMode {
    /// No shot noise: exact moments.
    Exact,
    /// Coefficient-aware per-order shots from [`plan_git_samples`].
    Planned,
    /// A fixed number of shots per order.
    PerOrder(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alg2Options {
    pub shots: ShotMode,
    pub rescale: TargetInterval,
}

impl Default for Alg2Options {
    fn default() -> Self {
        Self {
            shots: ShotMode::Planned,
            rescale: TargetInterval::Half,
        }
    }
}

/// Hadamard-test estimates of `t_1..t_L`; `t_0 = 1` needs no measurement.
pub fn sample_moments(exact: &[f64], shots: u64, seed: u64) -> Result<Vec<f64>> {
    let mut out = vec![1.0];
    let rest: Vec<f64> = (1..exact.len())
        .into_par_iter()
        .map(|k| hadamard_test_sample(exact[k], shots, split_seed(seed, k as u64)))
        .collect::<Result<_>>()?;
    out.extend(rest);
    Ok(out)
}

/// Orthogonal-polynomial approximator of the Gaussian transform at the points `nu`.
pub fn run_algorithm2(
    op: &HermitianOperator,
    psi: &ProbeState,
    target: &AccuracyTarget,
    nu: &[f64],
    seed: u64,
    opts: Alg2Options,
) -> Result<EstimationResult> {
    let start = Instant::now();
    if nu.is_empty() {
        return Err(validation("Algorithm 2 needs at least one frequency"));
    }
    let limit = match opts.rescale {
        TargetInterval::Half => 0.5,
        TargetInterval::Full => 1.0,
    };
    if let Some(v) = nu.iter().find(|v| !(v.abs() <= limit + 1e-12)) {
        return Err(Error::Domain(format!(
            "frequency {v} outside [-{limit}, {limit}]"
        )));
    }
    git_resolution(target)?;
    let trunc = truncation_order(target)?;
    let order = trunc.order;
    let coeffs = nu
        .iter()
        .map(|&v| shifted_coeffs(trunc.lambda, v, order))
        .collect::<Result<Vec<_>>>()?;
    let plan = plan_git_samples(order, &coeffs, target.beta, target.eta, opts.rescale)?;
    let exact = cheb_moments(op, psi, order)?;
    let (moments, per_order) = match opts.shots {
        ShotMode::Exact => (exact, plan.per_order_shots),
        ShotMode::Planned => (
            sample_moments(&exact, plan.per_order_shots, seed)?,
            plan.per_order_shots,
        ),
        ShotMode::PerOrder(s) => (sample_moments(&exact, s, seed)?, s),
    };
    let values = coeffs.iter().map(|c| dot(c, &moments)).collect();
    let budget = Budget {
        method: Method::Git,
        kernel_order: order as u64,
        lambda: Some(trunc.lambda),
        n_s: per_order
            .checked_mul(order as u64)
            .ok_or_else(|| Error::ResourceCap("N_S overflows".into()))?,
        per_order_shots: Some(per_order),
        delta_t: None,
    };
    budget.validate()?;
    Ok(EstimationResult {
        transform: TransformGrid {
            nu: nu.to_vec(),
            values,
            exact: false,
            discrete: false,
            width: Some(trunc.lambda),
        },
        budget,
        seed,
        elapsed: start.elapsed(),
        git: Some(GitDetails {
            truncation: trunc,
            moments,
            exact_moments: opts.shots == ShotMode::Exact,
            loose_n_s: plan.loose_n_s,
        }),
    })
}

/// One row of the cost comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityRow {
    pub method: String,
    pub delta: f64,
    pub epsilon: f64,
    /// Calls to the base unitary (`M`, `N` or `L`).
    pub calls: Option<f64>,
    pub samples: Option<f64>,
    /// Closed-form scaling with unit constant; never executed.
    pub analytic_only: bool,
    pub note: String,
}

fn row(
    method: &str,
    delta: f64,
    eps: f64,
    calls: Option<f64>,
    samples: Option<f64>,
    analytic: bool,
    note: String,
) -> ComplexityRow {
    ComplexityRow {
        method: method.into(),
        delta,
        epsilon: eps,
        calls,
        samples,
        analytic_only: analytic,
        note,
    }
}

fn git_row(name: &str, delta: f64, eps: f64, beta: f64, eta: f64) -> ComplexityRow {
    match AccuracyTarget::new(eps, delta, beta, eta).and_then(|t| truncation_order(&t)) {
        Ok(tb) => row(
            name,
            delta,
            eps,
            Some(tb.order as f64),
            Some(git_loose_bound(tb.order, beta, eta)),
            false,
            format!("{:?} regime, loose shot bound", tb.regime).to_lowercase(),
        ),
        Err(e) => row(name, delta, eps, None, None, false, e.to_string()),
    }
}

/// Cost comparison at `Sigma = beta = epsilon`, confidence `1 - eta`.
/// The `*_all_grid` rows keep the total error over all `O(1/Delta)` frequencies.
pub fn complexity_table(points: &[(f64, f64)], eta: f64) -> Result<Vec<ComplexityRow>> {
    check_prob("eta", eta)?;
    let mut rows = Vec::new();
    for &(delta, eps) in points {
        check_prob("delta", delta)?;
        check_prob("epsilon", eps)?;
        let le = (1.0 / eps).ln();
        let tsa_ns = le.powi(6) * (1.0 / eta).ln() / (delta.powi(3) * eps * eps);
        let note = "analytic, not implemented; unit constant".to_string();
        rows.push(row(
            "tsa",
            delta,
            eps,
            Some(le * le / delta),
            Some(tsa_ns),
            true,
            note.clone(),
        ));
        let lde = (1.0 / (delta * eps)).ln();
        rows.push(row(
            "tsa_all_grid",
            delta,
            eps,
            Some(lde * lde / delta),
            None,
            true,
            note,
        ));
        let target = AccuracyTarget::new(eps, delta, eps, eta)?;
        let n_s = plan_fejer_samples(eps, eta)? as f64;
        for (name, plan) in [
            ("fejer", fejer_plan(&target)),
            ("qubitized_fejer", qubitized_fejer_plan(&target)),
        ] {
            rows.push(match plan {
                Ok(m) => row(
                    name,
                    delta,
                    eps,
                    Some(m as f64),
                    Some(n_s),
                    false,
                    String::new(),
                ),
                Err(e) => row(name, delta, eps, None, None, false, e.to_string()),
            });
        }
        rows.push(git_row("git", delta, eps, eps, eta));
        rows.push(git_row("git_all_grid", delta, eps, eps * delta, eta));
    }
    Ok(rows)
}

pub fn complexity_csv(rows: &[ComplexityRow]) -> String {
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.6e}"));
    let mut out = String::from("method,delta,epsilon,calls,samples,analytic_only,note\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},\"{}\"\n",
            r.method,
            r.delta,
            r.epsilon,
            opt(r.calls),
            opt(r.samples),
            r.analytic_only,
            r.note.replace('"', "'")
        ));
    }
    out
}

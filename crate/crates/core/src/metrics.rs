//! Error metrics, the observable error bound, confidence statistics over
//! seeded trials, fault sweeps and log-log scaling fits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{validation, Result};
use crate::estimators::{
    alg1_exact, plan_algorithm1, run_algorithm1_on, run_algorithm2, Alg1Source, Alg2Options,
    Budget, Method,
};
use crate::kernels::{git_resolution, sigma_accuracy, AccuracyTarget, Kernel, KernelSpec};
use crate::quad::uniform_grid;
use crate::sampler::{fault_experiment, split_seed, FaultModel, FaultReport};
use crate::spectral::{
    diagonalize, exact_transform, observable_exact, observable_from_transform, HermitianOperator,
    ObservableFn, ProbeState, SpectralModel, TransformGrid,
};

/// Two-sided normal quantile at 95%.
pub const Z95: f64 = 1.959963984540054;
/// Largest relative change of a measured value under grid halving.
pub const REFINEMENT_TOL: f64 = 0.05;

fn same_grid(a: &TransformGrid, b: &TransformGrid) -> Result<()> {
    if a.nu.len() != b.nu.len() || a.nu.iter().zip(&b.nu).any(|(x, y)| (x - y).abs() > 1e-12) {
        return Err(validation("transforms are evaluated on different grids"));
    }
    Ok(())
}

/// `sup |Phi - Phi~|` over the shared grid.
pub fn total_variation(a: &TransformGrid, b: &TransformGrid) -> Result<f64> {
    same_grid(a, b)?;
    Ok(a.values
        .iter()
        .zip(&b.values)
        .fold(0.0, |m, (x, y)| m.max((x - y).abs())))
}

/// Grid sup restricted to `lo <= nu <= hi`.
pub fn total_variation_within(
    a: &TransformGrid,
    b: &TransformGrid,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    same_grid(a, b)?;
    Ok(a.nu
        .iter()
        .zip(a.values.iter().zip(&b.values))
        .filter(|(nu, _)| **nu >= lo && **nu <= hi)
        .fold(0.0, |m, (_, (x, y))| m.max((x - y).abs())))
}

/// `f^Delta_max + 2 f_max Sigma + beta f_int` and its parts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableBound {
    pub f_max: f64,
    pub f_int: f64,
    pub f_delta_max: f64,
    pub bound: f64,
}

/// `(f_max, f_int, f^Delta_max)` on a grid of spacing `f.grid_resolution`.
pub fn observable_components(f: &ObservableFn, delta: f64) -> (f64, f64, f64) {
    let h = f.grid_resolution;
    let omegas = uniform_grid(-1.0, 1.0, h);
    let vals: Vec<f64> = omegas.iter().map(|&w| f.eval(w)).collect();
    let f_max = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let f_int = (1..vals.len())
        .map(|i| 0.5 * (omegas[i] - omegas[i - 1]) * (vals[i].abs() + vals[i - 1].abs()))
        .sum();
    let shifts = uniform_grid(-delta, delta, h);
    let f_delta_max = omegas
        .par_iter()
        .zip(&vals)
        .map(|(&w, &fw)| {
            shifts
                .iter()
                .fold(0.0_f64, |m, &x| m.max((f.eval(w + x) - fw).abs()))
        })
        .reduce(|| 0.0, f64::max);
    (f_max, f_int, f_delta_max)
}

pub fn observable_bound(f: &ObservableFn, target: &AccuracyTarget) -> Result<ObservableBound> {
    target.validate()?;
    let (f_max, f_int, f_delta_max) = observable_components(f, target.delta);
    Ok(ObservableBound {
        f_max,
        f_int,
        f_delta_max,
        bound: f_delta_max + 2.0 * f_max * target.sigma + target.beta * f_int,
    })
}

/// Two-sided 95% binomial half-width at success rate `p` over `n` trials.
pub fn binomial_slack(p: f64, n: usize) -> f64 {
    Z95 * (p * (1.0 - p) / n.max(1) as f64).sqrt()
}

/// `(1 - eta) - slack`: smallest empirical confidence accepted.
pub fn confidence_threshold(eta: f64, trials: usize) -> f64 {
    (1.0 - eta) - binomial_slack(1.0 - eta, trials)
}

/// Log-log least-squares fit `log y = exponent log x + intercept`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: Vec<(f64, f64)>,
    /// `log y - fitted`.
    pub residuals: Vec<f64>,
}

impl ScalingFit {
    /// CSV `x,M,fit_residual`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,M,fit_residual\n");
        for ((x, y), r) in self.points.iter().zip(&self.residuals) {
            out.push_str(&format!("{x:.10e},{y:.10e},{r:.6e}\n"));
        }
        out
    }
}

pub fn scaling_fit(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 4 {
        return Err(validation(format!(
            "scaling fit needs >= 4 points, got {}",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(validation(format!(
            "scaling fit needs positive data, got {p:?}"
        )));
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = points.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(validation("scaling fit needs at least two distinct x"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residuals: Vec<f64> = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| y - (exponent * x + intercept))
        .collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let ss_tot: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(ScalingFit {
        exponent,
        intercept,
        r2,
        points: points.to_vec(),
        residuals,
    })
}

/// `n` log-spaced points over `[lo, hi]`.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1).max(1) as f64).exp())
        .collect()
}

/// Planner sweeps reproducing the cost trends of the method comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerSweeps {
    /// Fejer `N` vs `1/Delta` at fixed Sigma.
    pub fejer_vs_delta: ScalingFit,
    /// GIT `L` vs `1/Delta` at fixed (Sigma, beta).
    pub git_vs_delta: ScalingFit,
    /// Fejer `N` vs `1/Sigma` at fixed Delta.
    pub fejer_vs_sigma: ScalingFit,
    /// GIT `L` vs `1/beta` at fixed (Sigma, Delta).
    pub git_vs_beta: ScalingFit,
}

impl PlannerSweeps {
    pub fn named(&self) -> [(&'static str, &ScalingFit); 4] {
        [
            ("fejer_vs_delta", &self.fejer_vs_delta),
            ("git_vs_delta", &self.git_vs_delta),
            ("fejer_vs_sigma", &self.fejer_vs_sigma),
            ("git_vs_beta", &self.git_vs_beta),
        ]
    }
}

/// Runs the four sweeps with `points` log-spaced samples each.
pub fn planner_sweeps(points: usize, eta: f64) -> Result<PlannerSweeps> {
    let fejer = |sigma: f64, delta: f64| -> Result<f64> {
        let t = AccuracyTarget::new(sigma, delta, 0.1, eta)?;
        Ok(crate::kernels::fejer_plan(&t)? as f64)
    };
    let git = |sigma: f64, delta: f64, beta: f64| -> Result<f64> {
        let t = AccuracyTarget::new(sigma, delta, beta, eta)?;
        Ok(crate::cheb::truncation_order(&t)?.order as f64)
    };
    let deltas = log_space(1e-4, 1e-1, points);
    let fejer_vs_delta = deltas
        .iter()
        .map(|&d| fejer(0.1, d).map(|m| (1.0 / d, m)))
        .collect::<Result<Vec<_>>>()?;
    let git_vs_delta = deltas
        .iter()
        .map(|&d| git(0.1, d, 0.1).map(|l| (1.0 / d, l)))
        .collect::<Result<Vec<_>>>()?;
    let fejer_vs_sigma = log_space(1e-4, 1e-1, points)
        .iter()
        .map(|&s| fejer(s, 0.01).map(|m| (1.0 / s, m)))
        .collect::<Result<Vec<_>>>()?;
    let git_vs_beta = log_space(1e-6, 1e-1, points)
        .iter()
        .map(|&b| git(0.1, 0.1, b).map(|l| (1.0 / b, l)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PlannerSweeps {
        fejer_vs_delta: scaling_fit(&fejer_vs_delta)?,
        git_vs_delta: scaling_fit(&git_vs_delta)?,
        fejer_vs_sigma: scaling_fit(&fejer_vs_sigma)?,
        git_vs_beta: scaling_fit(&git_vs_beta)?,
    })
}

/// Measured value at two sup-grid spacings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRefinement {
    pub spacing: f64,
    pub coarse: f64,
    pub fine: f64,
    pub relative_change: f64,
    pub stable: bool,
}

impl GridRefinement {
    pub fn new(spacing: f64, coarse: f64, fine: f64) -> Self {
        let scale = coarse.abs().max(fine.abs());
        let relative_change = if scale == 0.0 {
            0.0
        } else {
            (coarse - fine).abs() / scale
        };
        Self {
            spacing,
            coarse,
            fine,
            relative_change,
            stable: relative_change < REFINEMENT_TOL,
        }
    }
}

/// Measured Sigma at `spacing` and `spacing / 2`.
pub fn sigma_refinement(kernel: &Kernel, delta: f64, spacing: f64) -> Result<GridRefinement> {
    let coarse = sigma_accuracy(kernel, delta, spacing)?.measured_sigma;
    let fine = sigma_accuracy(kernel, delta, 0.5 * spacing)?.measured_sigma;
    Ok(GridRefinement::new(spacing, coarse, fine))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PassFlags {
    pub sigma: bool,
    pub beta_confidence: bool,
    pub grid_refinement: bool,
}

/// Composite `(Sigma, Delta, beta, eta)` verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub method: Method,
    pub target: AccuracyTarget,
    pub measured_sigma: f64,
    /// Largest trial `delta_V`.
    pub delta_v: f64,
    pub median_delta_v: f64,
    pub empirical_confidence: f64,
    pub confidence_threshold: f64,
    pub trials: usize,
    pub grid_spacing: f64,
    pub refinement: GridRefinement,
    pub budget: Budget,
    pub pass: PassFlags,
}

impl AccuracyReport {
    pub fn passed(&self) -> bool {
        self.pass.sigma && self.pass.beta_confidence && self.pass.grid_refinement
    }
}

/// A probe problem: operator, state and its exact spectral model.
#[derive(Clone, Debug)]
pub struct TrialProblem {
    pub op: HermitianOperator,
    pub psi: ProbeState,
    pub model: SpectralModel,
}

impl TrialProblem {
    pub fn new(op: HermitianOperator, psi: ProbeState) -> Result<Self> {
        let model = diagonalize(&op, &psi)?;
        Ok(Self { op, psi, model })
    }
}

#[derive(Clone, Debug)]
pub struct ContractConfig {
    pub method: Method,
    pub target: AccuracyTarget,
    pub trials: usize,
    pub seed: u64,
    /// Replaces the planned `N_S` (Fejer methods).
    pub n_s_override: Option<u64>,
    /// Frequencies for GIT; ignored by the Fejer methods.
    pub nu: Vec<f64>,
    pub alg2: Alg2Options,
    /// Sup-grid spacing for the Sigma check, default `Delta / 20`.
    pub grid_spacing: Option<f64>,
    pub observables: Vec<ObservableFn>,
}

impl ContractConfig {
    pub fn new(method: Method, target: AccuracyTarget, trials: usize, seed: u64) -> Self {
        Self {
            method,
            target,
            trials,
            seed,
            n_s_override: None,
            nu: vec![-0.4, -0.2, 0.0, 0.2, 0.4],
            alg2: Alg2Options::default(),
            grid_spacing: None,
            observables: vec![ObservableFn::constant(1.0), ObservableFn::identity()],
        }
    }
}

/// One seeded trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub problem: usize,
    pub seed: u64,
    pub delta_v: f64,
    /// `|Q(S, f) - Q(Phi~, f)|` per observable (Fejer methods only).
    pub observable_errors: Vec<f64>,
}

/// Violation statistics of the observable bound over the trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableCheck {
    pub observable: String,
    pub bound: ObservableBound,
    pub max_error: f64,
    pub violations: usize,
    pub trials: usize,
    pub success_rate: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractReport {
    pub report: AccuracyReport,
    pub observables: Vec<ObservableCheck>,
    pub trials: Vec<TrialOutcome>,
}

fn kernel_for(method: Method, budget: &Budget) -> Result<Kernel> {
    match method {
        Method::Fejer => KernelSpec::fejer(budget.kernel_order).build(),
        Method::QubitizedFejer => KernelSpec::qubitized_fejer(budget.kernel_order).build(),
        Method::Git => KernelSpec::gaussian(budget.lambda.unwrap_or(f64::NAN)).build(),
    }
}

/// Planned budget of a method (GIT planned through a dry Algorithm 2 run).
fn contract_budget(cfg: &ContractConfig, problem: &TrialProblem) -> Result<Budget> {
    match cfg.method {
        Method::Fejer | Method::QubitizedFejer => {
            let mut b = plan_algorithm1(cfg.method, &cfg.target)?;
            if let Some(n) = cfg.n_s_override {
                b.n_s = n;
                b.validate()?;
            }
            Ok(b)
        }
        Method::Git => {
            let dry = Alg2Options {
                shots: crate::estimators::ShotMode::Exact,
                ..cfg.alg2
            };
            Ok(run_algorithm2(
                &problem.op,
                &problem.psi,
                &cfg.target,
                &cfg.nu,
                cfg.seed,
                dry,
            )?
            .budget)
        }
    }
}

/// End-to-end contract: trials spread round-robin over the problems, each with
/// its own child seed; `delta_V` against the exact transform of the same kernel.
pub fn run_contract(problems: &[TrialProblem], cfg: &ContractConfig) -> Result<ContractReport> {
    if problems.is_empty() || cfg.trials == 0 {
        return Err(validation(
            "contract needs at least one problem and one trial",
        ));
    }
    cfg.target.validate()?;
    let budget = contract_budget(cfg, &problems[0])?;
    // exact transforms and outcome distributions, once per problem
    let prepared: Vec<(TransformGrid, Option<crate::sampler::OutcomeDistribution>)> = problems
        .par_iter()
        .map(|p| match cfg.method {
            Method::Git => {
                let k = KernelSpec::gaussian(git_resolution(&cfg.target)?).build()?;
                Ok((exact_transform(&p.model, &k, &cfg.nu)?, None))
            }
            _ => {
                let src = Alg1Source::Model(&p.model);
                let dist = crate::estimators::alg1_distribution(src, &budget)?;
                Ok((alg1_exact(src, &budget)?, Some(dist)))
            }
        })
        .collect::<Result<_>>()?;
    let trials: Vec<TrialOutcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let pi = i % problems.len();
            let p = &problems[pi];
            let seed = split_seed(cfg.seed, i as u64);
            let (exact, dist) = &prepared[pi];
            let est = match dist {
                Some(d) => run_algorithm1_on(d, &budget, seed)?,
                None => run_algorithm2(&p.op, &p.psi, &cfg.target, &cfg.nu, seed, cfg.alg2)?,
            };
            let delta_v = total_variation(exact, &est.transform)?;
            let observable_errors = if cfg.method == Method::Git {
                Vec::new()
            } else {
                cfg.observables
                    .iter()
                    .map(|f| {
                        (observable_exact(&p.model, f)
                            - observable_from_transform(&est.transform, f).value)
                            .abs()
                    })
                    .collect()
            };
            Ok(TrialOutcome {
                problem: pi,
                seed,
                delta_v,
                observable_errors,
            })
        })
        .collect::<Result<_>>()?;

    let spacing = cfg.grid_spacing.unwrap_or(cfg.target.delta / 20.0);
    let kernel = kernel_for(cfg.method, &budget)?;
    // the qubitized kernel resolves Delta/2 in the shifted units
    let sigma_delta = if cfg.method == Method::QubitizedFejer {
        0.5 * cfg.target.delta
    } else {
        cfg.target.delta
    };
    let refinement = sigma_refinement(&kernel, sigma_delta, spacing)?;
    let measured_sigma = refinement.coarse.max(refinement.fine);

    let mut dvs: Vec<f64> = trials.iter().map(|t| t.delta_v).collect();
    dvs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let hits = trials
        .iter()
        .filter(|t| t.delta_v <= cfg.target.beta)
        .count();
    let confidence = hits as f64 / trials.len() as f64;
    let threshold = confidence_threshold(cfg.target.eta, trials.len());
    let report = AccuracyReport {
        method: cfg.method,
        target: cfg.target,
        measured_sigma,
        delta_v: *dvs.last().unwrap(),
        median_delta_v: dvs[dvs.len() / 2],
        empirical_confidence: confidence,
        confidence_threshold: threshold,
        trials: trials.len(),
        grid_spacing: spacing,
        refinement,
        budget,
        pass: PassFlags {
            sigma: measured_sigma <= cfg.target.sigma,
            beta_confidence: confidence >= threshold,
            grid_refinement: refinement.stable,
        },
    };
    let observables = if cfg.method == Method::Git {
        Vec::new()
    } else {
        cfg.observables
            .iter()
            .enumerate()
            .map(|(j, f)| {
                let errs: Vec<f64> = trials.iter().map(|t| t.observable_errors[j]).collect();
                observable_check(f, &cfg.target, &errs)
            })
            .collect::<Result<_>>()?
    };
    Ok(ContractReport {
        report,
        observables,
        trials,
    })
}

/// Compares per-trial observable errors with the bound.
pub fn observable_check(
    f: &ObservableFn,
    target: &AccuracyTarget,
    errors: &[f64],
) -> Result<ObservableCheck> {
    let bound = observable_bound(f, target)?;
    let violations = errors.iter().filter(|&&e| e > bound.bound).count();
    let n = errors.len();
    let success_rate = if n == 0 {
        0.0
    } else {
        (n - violations) as f64 / n as f64
    };
    let threshold = confidence_threshold(target.eta, n);
    Ok(ObservableCheck {
        observable: f.name().to_string(),
        bound,
        max_error: errors.iter().fold(0.0, |m: f64, e| m.max(*e)),
        violations,
        trials: n,
        success_rate,
        threshold,
        pass: n > 0 && success_rate >= threshold,
    })
}

/// Observable-bound check for GIT on a dense frequency grid over `[-1, 1]`
/// (spacing `Lambda / 4`). With exact moments the `beta f_int` term is replaced
/// by the certified truncation bound `R_L f_int`.
pub fn git_observable_check(
    problems: &[TrialProblem],
    f: &ObservableFn,
    target: &AccuracyTarget,
    trials: usize,
    seed: u64,
    opts: Alg2Options,
) -> Result<ObservableCheck> {
    if problems.is_empty() {
        return Err(validation("need at least one problem"));
    }
    let lambda = git_resolution(target)?;
    let nu = uniform_grid(-1.0, 1.0, 0.25 * lambda);
    let errors: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let p = &problems[i % problems.len()];
            let r = run_algorithm2(&p.op, &p.psi, target, &nu, split_seed(seed, i as u64), opts)?;
            let q = observable_exact(&p.model, f);
            let r_l = r
                .git
                .as_ref()
                .map_or(target.beta, |g| g.truncation.r_l_bound);
            Ok((
                (q - observable_from_transform(&r.transform, f).value).abs(),
                r_l,
            ))
        })
        .collect::<Result<_>>()?;
    let mut check = observable_check(f, target, &errors.iter().map(|e| e.0).collect::<Vec<_>>())?;
    if opts.shots == crate::estimators::ShotMode::Exact {
        let r_l = errors.iter().fold(0.0_f64, |m, e| m.max(e.1));
        let b = check.bound;
        check.bound.bound = b.f_delta_max + 2.0 * b.f_max * target.sigma + r_l * b.f_int;
        check.violations = errors.iter().filter(|e| e.0 > check.bound.bound).count();
        check.success_rate = (errors.len() - check.violations) as f64 / errors.len().max(1) as f64;
        check.pass = check.violations == 0;
    }
    Ok(check)
}

/// Faulty-Fejer bookkeeping for one realization: total error and its two parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaultyRun {
    pub fault: FaultReport,
    /// `delta_V(Phi_F, Phi~_F^e)`.
    pub total: f64,
    /// `delta_V(Phi_F, Phi_F^e)`.
    pub fault_part: f64,
    /// `delta_V(Phi_F^e, Phi~_F^e)`.
    pub sampling_part: f64,
    pub triangle_holds: bool,
}

/// Sweep over `N` (as ancilla counts) and `delta_t` with `realizations` fault seeds each.
pub fn fault_sweep(
    problem: &TrialProblem,
    ancillas: &[u32],
    deltas: &[f64],
    realizations: usize,
    samples: u64,
    seed: u64,
) -> Result<Vec<FaultyRun>> {
    let jobs: Vec<(u32, f64, usize)> = ancillas
        .iter()
        .flat_map(|&a| {
            deltas
                .iter()
                .flat_map(move |&d| (0..realizations).map(move |r| (a, d, r)))
        })
        .collect();
    jobs.into_par_iter()
        .enumerate()
        .map(|(j, (a, d, _))| {
            let fm = FaultModel::new(d, split_seed(seed, 2 * j as u64))?;
            let fault = fault_experiment(&problem.op, &problem.psi, a, &fm)?;
            let budget = Budget::fejer(Method::Fejer, 1 << a, samples)?;
            let ideal = alg1_exact(Alg1Source::Model(&problem.model), &budget)?;
            let src = Alg1Source::Statevector {
                op: &problem.op,
                psi: &problem.psi,
                fault: Some(fm),
            };
            let faulty_dist = crate::estimators::alg1_distribution(src, &budget)?;
            let faulty = alg1_exact(src, &budget)?;
            let sampled =
                run_algorithm1_on(&faulty_dist, &budget, split_seed(seed, 2 * j as u64 + 1))?;
            let total = total_variation(&ideal, &sampled.transform)?;
            let fault_part = total_variation(&ideal, &faulty)?;
            let sampling_part = total_variation(&faulty, &sampled.transform)?;
            Ok(FaultyRun {
                fault,
                total,
                fault_part,
                sampling_part,
                triangle_holds: total <= fault_part + sampling_part + 1e-15,
            })
        })
        .collect()
}

pub fn fault_sweep_csv(runs: &[FaultyRun]) -> String {
    let mut out =
        String::from("N,delta_t,bound,measured,total,fault_part,sampling_part,triangle_holds\n");
    for r in runs {
        out.push_str(&format!(
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{}\n",
            r.fault.n,
            r.fault.delta_t,
            r.fault.bound,
            r.fault.measured,
            r.total,
            r.fault_part,
            r.sampling_part,
            r.triangle_holds
        ));
    }
    out
}

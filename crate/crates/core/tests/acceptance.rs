//! Acceptance run: one PASS/FAIL line per criterion, with pinned tolerances
//! and runtime limits. Exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::Rng;

use specdens::cheb::{
    best_valid_bound, cheb_moments, clenshaw, coeff_quadrature_oracle, gauss_cheb_coeffs,
    truncated_gaussian, truncation_order, ChebExpansion, ALPHA_1, ALPHA_2,
};
use specdens::estimators::{plan_fejer_samples, Alg2Options, Method};
use specdens::kernels::{
    delta_theta, fejer_plan, gaussian_eval, jackson_coeffs, jackson_d_min, jackson_g, jackson_plan,
    qubitized_fejer_plan, sigma_accuracy, AccuracyTarget, JacksonKernel, KernelSpec,
};
use specdens::metrics::{
    git_observable_check, planner_sweeps, run_contract, ContractConfig, ContractReport,
    TrialProblem,
};
use specdens::sampler::{
    build_qubiterate, fault_experiment, rng_from_seed, split_seed, FaultModel,
};
use specdens::special::{kappa_one, lambert_w};
use specdens::spectral::{normalize_operator, random_model, GeneratorSpec, TargetInterval};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn target(sigma: f64, delta: f64, beta: f64, eta: f64) -> AccuracyTarget {
    AccuracyTarget::new(sigma, delta, beta, eta).unwrap()
}

fn planner_golden() -> Outcome {
    let mut bad = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            bad.push(name.to_string());
        }
    };
    check(
        "fejer_plan",
        fejer_plan(&target(0.25, 0.1, 0.1, 0.05)).unwrap() == 64,
    );
    check("N_S", plan_fejer_samples(0.1, 0.05).unwrap() == 185);
    check("delta_theta", (delta_theta(0.1) - 0.048809).abs() <= 5e-7);
    let tb = truncation_order(&target(0.1, 0.2, 0.05, 0.05)).unwrap();
    check("truncation_order", tb.formula_order == 55);
    check("alpha", ALPHA_1 == 2.93 && ALPHA_2 == 4.14);
    let d_min = jackson_d_min(0.1, 0.1);
    let d_min_exact = 2880.0 * 171f64.ln();
    check("d_min", (d_min - d_min_exact).abs() <= 1e-9 * d_min_exact);
    let k1 = kappa_one();
    check("kappa(1)", (k1 - 0.23358).abs() <= 1e-5);
    let w1 = lambert_w(1.0).unwrap();
    check("W(1)", (w1 - 0.567143).abs() <= 1e-6);
    outcome(
        bad.is_empty(),
        format!(
            "L={} d_min={d_min:.4} (2880 ln 171, quoted 14808.1 differs by {:.3}) kappa(1)={k1:.6} W(1)={w1:.7} failed={bad:?}",
            tb.formula_order,
            d_min - 14808.1
        ),
    )
}

fn sigma_contract() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut violations = Vec::new();
    for delta in [0.05, 0.1, 0.2] {
        for sigma in [0.05, 0.1, 0.25] {
            let t = target(sigma, delta, 0.1, 0.05);
            let h = delta / 20.0;
            let kernels = [
                ("fejer", KernelSpec::fejer(fejer_plan(&t).unwrap()), delta),
                (
                    "qfejer",
                    KernelSpec::qubitized_fejer(qubitized_fejer_plan(&t).unwrap()),
                    0.5 * delta,
                ),
                (
                    "gaussian",
                    KernelSpec::gaussian(specdens::kernels::git_resolution(&t).unwrap()),
                    delta,
                ),
            ];
            for (name, spec, d) in kernels {
                let m = sigma_accuracy(&spec.build().unwrap(), d, h)
                    .unwrap()
                    .measured_sigma;
                worst = worst.max(m / sigma);
                if m > sigma {
                    violations.push(format!("{name}(D={delta},S={sigma})={m:.4}"));
                }
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "27 kernels, max Sigma'/Sigma = {worst:.4}, violations={}",
            violations.len()
        ),
    )
}

fn max_truncation_error(lambda: f64, order: usize, sigma: f64) -> f64 {
    (0..=4000)
        .map(|i| -1.0 + i as f64 / 2000.0)
        .map(|w| {
            (truncated_gaussian(lambda, order, sigma, w).unwrap() - gaussian_eval(sigma, w, lambda))
                .abs()
        })
        .fold(0.0, f64::max)
}

const ROUNDOFF_ULPS: f64 = 32.0;

fn truncation_validity() -> Outcome {
    let mut rng = rng_from_seed(0x7a11);
    let mut pairs = 0;
    let mut violations = 0;
    let mut worst_ratio: f64 = 0.0;
    let mut floor_limited = 0;
    while pairs < 50 {
        let lambda = 0.05 + 0.45 * rng.gen::<f64>();
        let order = rng.gen_range(4..160usize);
        let Some((bound, _)) = best_valid_bound(order, lambda) else {
            continue;
        };
        pairs += 1;
        let sigma = rng.gen_range(-0.5..0.5);
        let err = max_truncation_error(lambda, order, sigma);
        // errors below a few ulps of max |K_G| are not measurable in f64
        let floor = ROUNDOFF_ULPS * f64::EPSILON / ((2.0 * PI).sqrt() * lambda);
        if bound < floor {
            floor_limited += 1;
        } else {
            worst_ratio = worst_ratio.max(err / bound);
        }
        if err > bound + floor {
            violations += 1;
        }
    }
    let mut planned_bad = 0;
    let mut planned = 0;
    for (s, d, b) in [
        (0.1, 0.2, 0.05),
        (0.1, 0.2, 0.1),
        (0.25, 0.1, 0.1),
        (0.05, 0.1, 0.01),
        (0.1, 0.05, 0.1),
        (0.1, 0.9, 1e-5),
    ] {
        let tb = truncation_order(&target(s, d, b, 0.05)).unwrap();
        planned += 1;
        if max_truncation_error(tb.lambda, tb.order, 0.0) > 0.5 * b {
            planned_bad += 1;
        }
    }
    outcome(
        violations == 0 && planned_bad == 0,
        format!(
            "{pairs} random pairs ({floor_limited} with R_L below the f64 floor), max err/R_L = {worst_ratio:.3e}, violations={violations}; planned L <= beta/2 in {}/{planned}",
            planned - planned_bad
        ),
    )
}

fn coefficient_identities() -> Outcome {
    let mut max_diff: f64 = 0.0;
    for i in 0..12 {
        let lambda = 0.05 * 20f64.powf(i as f64 / 11.0);
        let a = gauss_cheb_coeffs(lambda, 60).unwrap();
        for (n, an) in a.iter().enumerate() {
            let q = coeff_quadrature_oracle(lambda, n, 4096).unwrap();
            max_diff = max_diff.max((an - q).abs());
        }
    }
    let mut violations = 0;
    let mut checked = 0;
    for (s, d, b) in [
        (0.1, 0.2, 0.05),
        (0.1, 0.2, 0.1),
        (0.25, 0.1, 0.1),
        (0.1, 0.05, 0.1),
    ] {
        let tb = truncation_order(&target(s, d, b, 0.05)).unwrap();
        for j in 0..=40 {
            let nu = -0.5 + j as f64 / 40.0;
            let e = ChebExpansion::new(tb.lambda, nu, tb.order, TargetInterval::Half).unwrap();
            checked += 1;
            if !e.within_coefficient_bound(tb.r_l_bound) {
                violations += 1;
            }
        }
    }
    outcome(
        max_diff < 1e-10 && violations == 0,
        format!("max |Bessel - quadrature| = {max_diff:.2e}; coefficient bound violations {violations}/{checked}"),
    )
}

fn qubiterate_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for (i, dim) in [2usize, 3, 5, 8, 13, 16].into_iter().enumerate() {
        let (op, psi) = random_model(dim, 500 + i as u64, &GeneratorSpec::dense()).unwrap();
        let q = build_qubiterate(&op).unwrap();
        let walk = q.walk_moments(&psi, 64).unwrap();
        let rec = cheb_moments(&op, &psi, 64).unwrap();
        for (a, b) in walk.iter().zip(&rec) {
            worst = worst.max((a - b).abs());
        }
    }
    outcome(
        worst <= 1e-10,
        format!("max |walk - recurrence| = {worst:.2e}"),
    )
}

fn fault_bound() -> Outcome {
    let mut runs = 0;
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for dim in [4usize, 8] {
        let (op, psi) = random_model(dim, 900 + dim as u64, &GeneratorSpec::dense()).unwrap();
        for anc in [4u32, 5, 6] {
            for dt in [1e-3, 1e-2] {
                for r in 0..9u64 {
                    let fm =
                        FaultModel::new(dt, split_seed(dim as u64 * 1000 + anc as u64, r)).unwrap();
                    let rep = fault_experiment(&op, &psi, anc, &fm).unwrap();
                    runs += 1;
                    worst = worst.max(rep.measured / rep.bound);
                    if !rep.holds() {
                        violations += 1;
                    }
                }
            }
        }
    }
    outcome(
        runs >= 100 && violations == 0,
        format!("{runs} realizations, max deviation/bound = {worst:.3e}, violations={violations}"),
    )
}

fn problems(interval: TargetInterval) -> Vec<TrialProblem> {
    (0..10)
        .map(|i| {
            let (op, psi) = random_model(32, 4000 + i, &GeneratorSpec::dense()).unwrap();
            let (op, _) = normalize_operator(&op, interval).unwrap();
            TrialProblem::new(op, psi).unwrap()
        })
        .collect()
}

fn end_to_end() -> (Outcome, ContractReport, ContractReport) {
    let fejer_cfg = ContractConfig::new(Method::Fejer, target(0.25, 0.1, 0.1, 0.05), 200, 71);
    let fejer = run_contract(&problems(TargetInterval::Full), &fejer_cfg).unwrap();
    let git_cfg = ContractConfig::new(Method::Git, target(0.1, 0.2, 0.1, 0.05), 200, 72);
    let git = run_contract(&problems(TargetInterval::Half), &git_cfg).unwrap();
    let line = |r: &ContractReport| {
        format!(
            "{:?}: P(dV<=beta)={:.3} (threshold {:.4}), Sigma'={:.4}, refinement {:.3}, N_S={}",
            r.report.method,
            r.report.empirical_confidence,
            r.report.confidence_threshold,
            r.report.measured_sigma,
            r.report.refinement.relative_change,
            r.report.budget.n_s
        )
    };
    (
        outcome(
            fejer.report.passed() && git.report.passed(),
            format!("{}; {}", line(&fejer), line(&git)),
        ),
        fejer,
        git,
    )
}

fn observable_bound(fejer: &ContractReport) -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for c in &fejer.observables {
        pass &= c.pass;
        parts.push(format!(
            "fejer {}: {:.3} (max err {:.2e}, bound {:.3})",
            c.observable, c.success_rate, c.max_error, c.bound.bound
        ));
    }
    let opts = Alg2Options {
        rescale: TargetInterval::Full,
        ..Alg2Options::default()
    };
    let probs = problems(TargetInterval::Half);
    let t = target(0.1, 0.2, 0.1, 0.05);
    for (j, f) in [
        specdens::spectral::ObservableFn::constant(1.0),
        specdens::spectral::ObservableFn::identity(),
    ]
    .iter()
    .enumerate()
    {
        let c = git_observable_check(&probs, f, &t, 200, split_seed(72, 1 << 32 | j as u64), opts)
            .unwrap();
        pass &= c.pass;
        parts.push(format!(
            "git {}: {:.3} (max err {:.2e}, bound {:.3})",
            c.observable, c.success_rate, c.max_error, c.bound.bound
        ));
    }
    outcome(pass, parts.join("; "))
}

fn table_trends() -> Outcome {
    let s = planner_sweeps(13, 0.05).unwrap();
    let ok = (s.fejer_vs_delta.exponent - 1.0).abs() <= 0.1
        && (s.git_vs_delta.exponent - 1.0).abs() <= 0.1
        && (s.fejer_vs_sigma.exponent - 1.0).abs() <= 0.05
        && s.git_vs_beta.exponent < 0.2;
    outcome(
        ok,
        s.named()
            .iter()
            .map(|(n, f)| format!("{n}={:.3} (r2 {:.3})", f.exponent, f.r2))
            .collect::<Vec<_>>()
            .join(", "),
    )
}

fn jackson_comparison() -> Outcome {
    let mut max_err: f64 = 0.0;
    for delta in [0.025f64, 0.05, 0.1] {
        let n = (24.0 / delta - 1e-9).ceil() as u32;
        let c = jackson_coeffs(n, delta);
        for i in 0..10_000 {
            let x = (PI * i as f64 / 9_999.0).cos();
            max_err = max_err.max((clenshaw(&c, x) - jackson_g(x, delta)).abs());
        }
    }
    let mut norm_ok = true;
    for (s, d) in [(0.25, 0.2), (0.1, 0.2), (0.25, 0.1)] {
        let p = jackson_plan(&target(s, d, 0.1, 0.05)).unwrap();
        let k = JacksonKernel::new(p.delta, p.n, p.k).unwrap();
        let (lo, hi) = k.normalization_bounds();
        norm_ok &= lo <= k.normalization() && hi.is_none_or(|h| k.normalization() <= h);
    }
    let git_l = truncation_order(&target(0.1, 0.05, 0.1, 0.05))
        .unwrap()
        .order;
    let jd = jackson_d_min(0.05, 0.1);
    outcome(
        max_err <= 0.25 && norm_ok && (git_l as f64) < jd,
        format!(
            "max |J_N - g| = {max_err:.4}; normalization within bounds: {norm_ok}; GIT L = {git_l} vs Jackson d_min = {jd:.1}"
        ),
    )
}

fn main() {
    let mut failed = 0;
    let mut report = |id: u32, name: &str, limit: Duration, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let took = start.elapsed();
        let ok = o.pass && took <= limit;
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {id:>2} [{name}]: {} ({:.2} s, limit {} s) {}",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs(),
            o.detail
        );
    };
    let s = Duration::from_secs;
    report(1, "planner golden values", s(1), &mut planner_golden);
    report(2, "Sigma accuracy", s(10), &mut sigma_contract);
    report(
        3,
        "GIT truncation validity",
        s(60),
        &mut truncation_validity,
    );
    report(
        4,
        "coefficient identities",
        s(60),
        &mut coefficient_identities,
    );
    report(5, "qubiterate identity", s(10), &mut qubiterate_identity);
    report(6, "fault bound", s(300), &mut fault_bound);
    let mut runs = None;
    report(7, "end-to-end contract", s(900), &mut || {
        let (o, f, _) = end_to_end();
        runs = Some(f);
        o
    });
    let fejer = runs.expect("criterion 7 ran");
    report(8, "observable bound", s(900), &mut || {
        observable_bound(&fejer)
    });
    report(9, "cost trends", s(30), &mut table_trends);
    report(10, "Jackson comparison", s(60), &mut jackson_comparison);
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

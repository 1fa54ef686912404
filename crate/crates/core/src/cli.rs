//! Command-line workbench: `plan`, `transform`, `estimate`, `verify`, `bench`.
//!
//! Every option can come from a flag or from a `key = value` config file
//! (`--config`); flags win. Output files start with a header carrying the
//! artifact version and a hash of the resolved configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::cheb::{cheb_moments, git_transform_exact_moments, shifted_coeffs, truncation_order};
use crate::error::{validation, Error, Result};
use crate::estimators::{
    alg1_distribution, alg1_exact, complexity_csv, complexity_table, plan_algorithm1,
    plan_fejer_samples_faulty, plan_git_samples, run_algorithm1_on, run_algorithm2, Alg1Source,
    Alg2Options, Method, ShotMode,
};
use crate::kernels::{
    delta_theta, fejer_tail_bound, git_resolution, jackson_plan, AccuracyTarget, KernelSpec,
};
use crate::metrics::{
    fault_sweep, fault_sweep_csv, git_observable_check, planner_sweeps, run_contract,
    total_variation, ContractConfig, TrialProblem,
};
use crate::quad::uniform_grid;
use crate::sampler::split_seed;
use crate::spectral::{
    exact_transform, normalize_operator, parse_operator_text, random_model, AffineMap,
    GeneratorSpec, HermitianOperator, ProbeState, TargetInterval,
};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const DEFAULT_SIGMA: f64 = 0.25;
pub const DEFAULT_DELTA: f64 = 0.1;
pub const DEFAULT_BETA: f64 = 0.1;
pub const DEFAULT_ETA: f64 = 0.05;
pub const DEFAULT_TRIALS: usize = 200;
pub const DEFAULT_MODELS: usize = 10;
pub const DEFAULT_DIM: usize = 32;

/// Child-seed stream reserved for generated models.
const MODEL_STREAM: u64 = u64::MAX;
/// Each GIT observable trial in `verify` simulates every Chebyshev order.
pub const GIT_OBSERVABLE_TRIALS: usize = 50;

#[derive(Parser, Debug)]
#[command(
    name = "specdens",
    version,
    about = "Spectral density estimation workbench"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Print the planned resources for a target.
    Plan(Flags),
    /// Write exact kernel transforms of a model.
    Transform(Flags),
    /// Run one seeded estimation.
    Estimate(Flags),
    /// Monte Carlo check of the accuracy contract.
    Verify(Flags),
    /// Cost table and planner scaling fits.
    Bench(Flags),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Plan(_) => "plan",
            Command::Transform(_) => "transform",
            Command::Estimate(_) => "estimate",
            Command::Verify(_) => "verify",
            Command::Bench(_) => "bench",
        }
    }

    pub fn flags(&self) -> &Flags {
        match self {
            Command::Plan(f)
            | Command::Transform(f)
            | Command::Estimate(f)
            | Command::Verify(f)
            | Command::Bench(f) => f,
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct Flags {
    /// `key = value` config file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// fejer, qfejer, git, jackson or all.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Sup-grid spacing (default Delta/20).
    #[arg(long)]
    pub grid_spacing: Option<f64>,
    /// Operator file (`dim n`, matrix rows, optional `psi` block).
    #[arg(long, conflicts_with = "gen")]
    pub model: Option<PathBuf>,
    /// Generator spec: dense, spiked or gapped:<delta>:<overlap>, optional @radius.
    #[arg(long)]
    pub gen: Option<String>,
    /// Dimension of generated models.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Number of generated models for `verify`.
    #[arg(long)]
    pub models: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Comma-separated GIT frequencies.
    #[arg(long)]
    pub nu: Option<String>,
    /// GIT shots: exact, planned or a per-order count.
    #[arg(long)]
    pub shots: Option<String>,
    /// GIT rescaling interval: half or full.
    #[arg(long)]
    pub rescale: Option<String>,
    /// Overrides the planned Fejer sample count.
    #[arg(long)]
    pub n_s: Option<u64>,
    /// Comma-separated time-step errors for the fault sweep.
    #[arg(long)]
    pub delta_t: Option<String>,
}

const KEYS: &[&str] = &[
    "method",
    "sigma",
    "delta",
    "beta",
    "eta",
    "seed",
    "trials",
    "grid_spacing",
    "model",
    "gen",
    "dim",
    "models",
    "out",
    "workers",
    "nu",
    "shots",
    "rescale",
    "n_s",
    "delta_t",
];

/// Keys that do not change results and are left out of the config hash.
const UNHASHED: &[&str] = &["out", "workers"];

impl Flags {
    fn pairs(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v);
            }
        };
        put("method", self.method.clone());
        put("sigma", self.sigma.map(|v| v.to_string()));
        put("delta", self.delta.map(|v| v.to_string()));
        put("beta", self.beta.map(|v| v.to_string()));
        put("eta", self.eta.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("trials", self.trials.map(|v| v.to_string()));
        put("grid_spacing", self.grid_spacing.map(|v| v.to_string()));
        put(
            "model",
            self.model.as_ref().map(|p| p.display().to_string()),
        );
        put("gen", self.gen.clone());
        put("dim", self.dim.map(|v| v.to_string()));
        put("models", self.models.map(|v| v.to_string()));
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("workers", self.workers.map(|v| v.to_string()));
        put("nu", self.nu.clone());
        put("shots", self.shots.clone());
        put("rescale", self.rescale.clone());
        put("n_s", self.n_s.map(|v| v.to_string()));
        put("delta_t", self.delta_t.clone());
        m
    }
}

/// Parses a `key = value` config file. `#` starts a comment; `-` in keys reads as `_`.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut m = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            msg: format!("expected key = value, got '{line}'"),
        })?;
        let key = k.trim().trim_start_matches("--").replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("unknown key '{key}'"),
            });
        }
        m.insert(key, v.trim().to_string());
    }
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodSel {
    Fejer,
    QubitizedFejer,
    Git,
    Jackson,
    All,
}

impl MethodSel {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fejer" => Ok(MethodSel::Fejer),
            "qfejer" | "qubitized_fejer" => Ok(MethodSel::QubitizedFejer),
            "git" => Ok(MethodSel::Git),
            "jackson" => Ok(MethodSel::Jackson),
            "all" => Ok(MethodSel::All),
            other => Err(validation(format!(
                "unknown method '{other}' (fejer, qfejer, git, jackson, all)"
            ))),
        }
    }

    fn expand(self) -> Vec<MethodSel> {
        match self {
            MethodSel::All => vec![
                MethodSel::Fejer,
                MethodSel::QubitizedFejer,
                MethodSel::Git,
                MethodSel::Jackson,
            ],
            m => vec![m],
        }
    }

    fn name(self) -> &'static str {
        match self {
            MethodSel::Fejer => "fejer",
            MethodSel::QubitizedFejer => "qfejer",
            MethodSel::Git => "git",
            MethodSel::Jackson => "jackson",
            MethodSel::All => "all",
        }
    }

    /// Estimator behind the selection; Jackson has none.
    fn estimator(self) -> Result<Method> {
        match self {
            MethodSel::Fejer => Ok(Method::Fejer),
            MethodSel::QubitizedFejer => Ok(Method::QubitizedFejer),
            MethodSel::Git => Ok(Method::Git),
            _ => Err(validation(
                "jackson is a planning/transform comparison only; no estimator runs it",
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelSource {
    File(PathBuf),
    Generated(GeneratorSpec),
}

/// Fully resolved options of one command.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: &'static str,
    pub method: MethodSel,
    pub target: AccuracyTarget,
    pub seed: Option<u64>,
    pub trials: usize,
    pub grid_spacing: Option<f64>,
    pub source: ModelSource,
    pub dim: usize,
    pub models: usize,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub nu: Option<Vec<f64>>,
    pub shots: ShotMode,
    pub rescale: Option<TargetInterval>,
    pub n_s: Option<u64>,
    pub delta_t: Vec<f64>,
    settings: BTreeMap<String, String>,
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| validation(format!("bad value '{v}' for {key}")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|s| parse_num::<f64>(key, s.trim()))
        .collect()
}

impl RunConfig {
    /// Merges the config file (if any) under the flags and validates.
    pub fn resolve(command: &Command) -> Result<Self> {
        let flags = command.flags();
        let mut settings = match &flags.config {
            Some(p) => parse_config_text(&fs::read_to_string(p)?)?,
            None => BTreeMap::new(),
        };
        settings.extend(flags.pairs());
        Self::from_settings(command.name(), settings)
    }

    pub fn from_settings(
        command: &'static str,
        settings: BTreeMap<String, String>,
    ) -> Result<Self> {
        let get = |k: &str| settings.get(k).map(String::as_str);
        let num = |k: &str, d: f64| -> Result<f64> { get(k).map_or(Ok(d), |v| parse_num(k, v)) };
        let default_method = if command == "plan" || command == "bench" {
            "all"
        } else {
            "fejer"
        };
        let method = MethodSel::parse(get("method").unwrap_or(default_method))?;
        let target = AccuracyTarget::new(
            num("sigma", DEFAULT_SIGMA)?,
            num("delta", DEFAULT_DELTA)?,
            num("beta", DEFAULT_BETA)?,
            num("eta", DEFAULT_ETA)?,
        )?;
        let seed = get("seed").map(|v| parse_num("seed", v)).transpose()?;
        let source = match (get("model"), get("gen")) {
            (Some(_), Some(_)) => return Err(validation("give either model or gen, not both")),
            (Some(p), None) => ModelSource::File(PathBuf::from(p)),
            (None, g) => ModelSource::Generated(GeneratorSpec::parse(g.unwrap_or("dense"))?),
        };
        let shots = match get("shots").unwrap_or("planned") {
            "exact" => ShotMode::Exact,
            "planned" => ShotMode::Planned,
            s => ShotMode::PerOrder(parse_num("shots", s)?),
        };
        let rescale = match get("rescale") {
            None => None,
            Some("half") => Some(TargetInterval::Half),
            Some("full") => Some(TargetInterval::Full),
            Some(o) => {
                return Err(validation(format!(
                    "rescale must be half or full, got '{o}'"
                )))
            }
        };
        let cfg = Self {
            command,
            method,
            target,
            seed,
            trials: get("trials").map_or(Ok(DEFAULT_TRIALS), |v| parse_num("trials", v))?,
            grid_spacing: get("grid_spacing")
                .map(|v| parse_num("grid_spacing", v))
                .transpose()?,
            source,
            dim: get("dim").map_or(Ok(DEFAULT_DIM), |v| parse_num("dim", v))?,
            models: get("models").map_or(Ok(DEFAULT_MODELS), |v| parse_num("models", v))?,
            out: get("out").map(PathBuf::from),
            workers: get("workers")
                .map(|v| parse_num("workers", v))
                .transpose()?,
            nu: get("nu").map(|v| parse_list("nu", v)).transpose()?,
            shots,
            rescale,
            n_s: get("n_s").map(|v| parse_num("n_s", v)).transpose()?,
            delta_t: get("delta_t").map_or(Ok(vec![1e-3, 1e-2]), |v| parse_list("delta_t", v))?,
            settings,
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        if self.trials == 0 || self.models == 0 || self.dim == 0 {
            return Err(validation("trials, models and dim must be >= 1"));
        }
        if self.workers == Some(0) {
            return Err(validation("workers must be >= 1"));
        }
        if let Some(h) = self.grid_spacing {
            if !(h > 0.0 && h.is_finite()) {
                return Err(validation("grid_spacing must be positive"));
            }
        }
        if self.delta_t.iter().any(|d| !(*d >= 0.0)) {
            return Err(validation("delta_t values must be nonnegative"));
        }
        let needs_seed = match self.command {
            "estimate" | "verify" => true,
            "transform" => matches!(self.source, ModelSource::Generated(_)),
            _ => false,
        };
        if needs_seed && self.seed.is_none() {
            return Err(validation(format!(
                "{} needs an explicit --seed",
                self.command
            )));
        }
        Ok(())
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// Hex SHA-256 of the command and the result-relevant settings.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("command={}\n", self.command));
        for (k, v) in &self.settings {
            if !UNHASHED.contains(&k.as_str()) {
                h.update(format!("{k}={v}\n"));
            }
        }
        h.finalize().iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    fn csv_header(&self) -> String {
        format!(
            "# specdens {ARTIFACT_VERSION}\n# command: {}\n# config_sha256: {}\n",
            self.command,
            self.hash()
        )
    }

    fn json_header(&self) -> Value {
        json!({
            "artifact": "specdens",
            "version": ARTIFACT_VERSION,
            "command": self.command,
            "config_sha256": self.hash(),
            "config": self.settings,
        })
    }

    fn out_dir(&self) -> Result<PathBuf> {
        let dir = self
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from("specdens_out"));
        fs::create_dir_all(&dir)?;
        Ok(dir)
    }

    fn write_csv(&self, dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
        let p = dir.join(name);
        fs::write(&p, format!("{}{body}", self.csv_header()))?;
        Ok(p)
    }

    fn write_json(&self, dir: &Path, name: &str, mut body: Value) -> Result<PathBuf> {
        if let Value::Object(m) = &mut body {
            m.insert("header".into(), self.json_header());
        }
        let p = dir.join(name);
        fs::write(&p, serde_json::to_string_pretty(&body)? + "\n")?;
        Ok(p)
    }

    /// Raw (unnormalized) problem instances.
    fn raw_problems(&self, count: usize) -> Result<Vec<(HermitianOperator, ProbeState)>> {
        match &self.source {
            ModelSource::File(p) => {
                let (op, psi) = parse_operator_text(&fs::read_to_string(p)?)?;
                let psi = psi.ok_or_else(|| {
                    validation(format!("{} has no probe state block", p.display()))
                })?;
                Ok(vec![(op, psi)])
            }
            ModelSource::Generated(spec) => {
                let base = split_seed(self.seed(), MODEL_STREAM);
                (0..count)
                    .map(|i| random_model(self.dim, split_seed(base, i as u64), spec))
                    .collect()
            }
        }
    }

    fn interval(&self, method: Method) -> TargetInterval {
        match method {
            Method::Git => self.rescale.unwrap_or(TargetInterval::Half),
            _ => TargetInterval::Full,
        }
    }

    fn alg2(&self) -> Alg2Options {
        Alg2Options {
            shots: self.shots,
            rescale: self.rescale.unwrap_or(TargetInterval::Half),
        }
    }

    fn git_nu(&self, single: bool) -> Vec<f64> {
        match &self.nu {
            Some(v) => v.clone(),
            None if single => vec![0.0],
            None => vec![-0.4, -0.2, 0.0, 0.2, 0.4],
        }
    }
}

/// Normalized problems for one estimator, with the map applied to each operator.
fn problems_for(
    raw: &[(HermitianOperator, ProbeState)],
    interval: TargetInterval,
) -> Result<Vec<(TrialProblem, AffineMap)>> {
    raw.iter()
        .map(|(op, psi)| {
            let (op, map) = normalize_operator(op, interval)?;
            Ok((TrialProblem::new(op, psi.clone())?, map))
        })
        .collect()
}

fn map_json(m: &AffineMap) -> Value {
    json!({"scale": m.scale, "shift": m.shift})
}

/// Parses arguments, runs the command and writes the summary to `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let cfg = RunConfig::resolve(&cli.command)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::ResourceCap(format!("cannot start worker pool: {e}")))?;
    let mut buf: Vec<u8> = Vec::new();
    let res = pool.install(|| match cli.command {
        Command::Plan(_) => cmd_plan(&cfg, &mut buf),
        Command::Transform(_) => cmd_transform(&cfg, &mut buf),
        Command::Estimate(_) => cmd_estimate(&cfg, &mut buf),
        Command::Verify(_) => cmd_verify(&cfg, &mut buf),
        Command::Bench(_) => cmd_bench(&cfg, &mut buf),
    });
    stdout.write_all(&buf)?;
    res
}

fn plan_row(cfg: &RunConfig, m: MethodSel) -> Result<Value> {
    let t = &cfg.target;
    Ok(match m {
        MethodSel::Fejer | MethodSel::QubitizedFejer => {
            let b = plan_algorithm1(m.estimator()?, t)?;
            let faulty = plan_fejer_samples_faulty(t.beta, t.eta, b.kernel_order)?;
            let mut row = json!({
                "method": m.name(),
                "N": b.kernel_order,
                "N_S": b.n_s,
                "N_S_faulty": faulty.n_s,
                "delta_t": faulty.delta_t,
            });
            if m == MethodSel::Fejer {
                row["tail_bound"] = json!(fejer_tail_bound(b.kernel_order, t.delta));
            } else {
                row["delta_theta"] = json!(delta_theta(t.delta));
            }
            row
        }
        MethodSel::Git => {
            let tb = truncation_order(t)?;
            let mode = cfg.rescale.unwrap_or(TargetInterval::Half);
            let nu = cfg.git_nu(false);
            let coeffs = nu
                .iter()
                .map(|&v| shifted_coeffs(tb.lambda, v, tb.order))
                .collect::<Result<Vec<_>>>()?;
            let p = plan_git_samples(tb.order, &coeffs, t.beta, t.eta, mode)?;
            json!({
                "method": "git",
                "regime": tb.regime,
                "Lambda": tb.lambda,
                "L": tb.formula_order,
                "L_used": tb.order,
                "R_L": tb.r_l_bound,
                "beta_L": tb.beta_l,
                "beta_U": tb.beta_u,
                "c_max": p.c_max,
                "per_order_shots": p.per_order_shots,
                "N_S": p.n_s,
                "N_S_loose": p.loose_n_s,
            })
        }
        MethodSel::Jackson => {
            let p = jackson_plan(t)?;
            json!({
                "method": "jackson",
                "delta": p.delta,
                "N": p.n,
                "k": p.k,
                "degree": p.degree,
                "tau": p.tau,
                "d_min": p.d_min,
                "consistent": p.consistent,
            })
        }
        MethodSel::All => unreachable!("expanded before planning"),
    })
}

fn fmt_row(row: &Value) -> String {
    let Value::Object(m) = row else {
        return row.to_string();
    };
    let mut s = format!("method={}", m["method"].as_str().unwrap_or("?"));
    for (k, v) in m.iter().filter(|(k, _)| *k != "method") {
        let v = match v {
            Value::String(x) => x.clone(),
            other => other.to_string(),
        };
        let _ = write!(s, " {k}={v}");
    }
    s
}

fn cmd_plan(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let mut rows = Vec::new();
    let mut first_err = None;
    for m in cfg.method.expand() {
        match plan_row(cfg, m) {
            Ok(r) => {
                writeln!(stdout, "{}", fmt_row(&r))?;
                rows.push(r);
            }
            Err(e) => {
                writeln!(stdout, "method={} error=\"{e}\"", m.name())?;
                first_err.get_or_insert(e);
            }
        }
    }
    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir)?;
        cfg.write_json(
            dir,
            "plan.json",
            json!({"target": cfg.target, "rows": rows}),
        )?;
    }
    first_err.map_or(Ok(()), Err)
}

fn transform_csv(cols: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = cols.join(",") + "\n";
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| format!("{v:.12e}")).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

fn cmd_transform(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let raw = cfg.raw_problems(1)?;
    let dir = cfg.out_dir()?;
    let t = &cfg.target;
    for m in cfg.method.expand() {
        let method = m.estimator().ok();
        let interval = method.map_or(TargetInterval::Full, |e| cfg.interval(e));
        let (problem, map) = problems_for(&raw[..1], interval)?.remove(0);
        let (csv, kernel) = match m {
            MethodSel::Fejer | MethodSel::QubitizedFejer => {
                let b = plan_algorithm1(m.estimator()?, t)?;
                let g = alg1_exact(Alg1Source::Model(&problem.model), &b)?;
                let rows: Vec<Vec<f64>> =
                    g.nu.iter()
                        .zip(&g.values)
                        .map(|(a, b)| vec![*a, *b])
                        .collect();
                (transform_csv(&["nu", "value"], &rows), json!(b))
            }
            MethodSel::Git => {
                let tb = truncation_order(t)?;
                let lim = match interval {
                    TargetInterval::Half => 0.5,
                    TargetInterval::Full => 1.0,
                };
                let grid = uniform_grid(-lim, lim, cfg.grid_spacing.unwrap_or(t.delta / 20.0));
                let k = KernelSpec::gaussian(tb.lambda).build()?;
                let g = exact_transform(&problem.model, &k, &grid)?;
                let moments = cheb_moments(&problem.op, &problem.psi, tb.order)?;
                let tr = git_transform_exact_moments(&moments, tb.lambda, &grid)?;
                let rows: Vec<Vec<f64>> = (0..grid.len())
                    .map(|i| vec![grid[i], g.values[i], tr.values[i]])
                    .collect();
                (
                    transform_csv(&["nu", "gaussian", "truncated"], &rows),
                    json!(tb),
                )
            }
            MethodSel::Jackson => {
                let p = jackson_plan(t)?;
                let spec = KernelSpec::jackson(p.delta, p.n, p.k)?;
                let grid = uniform_grid(-1.0, 1.0, cfg.grid_spacing.unwrap_or(t.delta / 20.0));
                let g = exact_transform(&problem.model, &spec.build()?, &grid)?;
                let rows: Vec<Vec<f64>> =
                    g.nu.iter()
                        .zip(&g.values)
                        .map(|(a, b)| vec![*a, *b])
                        .collect();
                (transform_csv(&["nu", "value"], &rows), json!(spec))
            }
            MethodSel::All => unreachable!("expanded"),
        };
        let name = format!("transform_{}", m.name());
        let p = cfg.write_csv(&dir, &format!("{name}.csv"), &csv)?;
        cfg.write_json(
            &dir,
            &format!("{name}.json"),
            json!({"target": t, "kernel": kernel, "map": map_json(&map), "csv": p.file_name().map(|f| f.to_string_lossy().to_string())}),
        )?;
        writeln!(stdout, "method={} wrote={}", m.name(), p.display())?;
    }
    Ok(())
}

fn cmd_estimate(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let seed = cfg.seed();
    let raw = cfg.raw_problems(1)?;
    let dir = cfg.out_dir()?;
    for m in cfg.method.expand() {
        let method = m.estimator()?;
        let (p, map) = problems_for(&raw[..1], cfg.interval(method))?.remove(0);
        let (result, exact, csv) = match method {
            Method::Fejer | Method::QubitizedFejer => {
                let mut b = plan_algorithm1(method, &cfg.target)?;
                if let Some(n) = cfg.n_s {
                    b.n_s = n;
                    b.validate()?;
                }
                let src = Alg1Source::Model(&p.model);
                let dist = alg1_distribution(src, &b)?;
                let r = run_algorithm1_on(&dist, &b, seed)?;
                let exact = alg1_exact(src, &b)?;
                let mut csv = String::from("nu,count,frequency\n");
                for (nu, f) in r.transform.nu.iter().zip(&r.transform.values) {
                    let count = (f * b.n_s as f64).round() as u64;
                    let _ = writeln!(csv, "{nu:.12e},{count},{f:.12e}");
                }
                (r, exact, csv)
            }
            Method::Git => {
                let nu = cfg.git_nu(true);
                let r = run_algorithm2(&p.op, &p.psi, &cfg.target, &nu, seed, cfg.alg2())?;
                let k = KernelSpec::gaussian(git_resolution(&cfg.target)?).build()?;
                let exact = exact_transform(&p.model, &k, &nu)?;
                let mut csv = String::from("nu,value\n");
                for (v, x) in r.transform.nu.iter().zip(&r.transform.values) {
                    let _ = writeln!(csv, "{v:.12e},{x:.12e}");
                }
                (r, exact, csv)
            }
        };
        let delta_v = total_variation(&exact, &result.transform)?;
        let name = format!("estimate_{}", m.name());
        let path = cfg.write_csv(&dir, &format!("{name}.csv"), &csv)?;
        cfg.write_json(
            &dir,
            &format!("{name}.json"),
            json!({
                "target": cfg.target,
                "budget": result.budget,
                "seed": seed,
                "transform": result.transform,
                "report": {
                    "delta_v": delta_v,
                    "within_beta": delta_v <= cfg.target.beta,
                    "map": map_json(&map),
                    "git": result.git,
                },
            }),
        )?;
        writeln!(
            stdout,
            "method={} N_S={} delta_v={delta_v:.6e} wrote={}",
            m.name(),
            result.budget.n_s,
            path.display()
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ControlSummary {
    n_s: u64,
    empirical_confidence: f64,
    confidence_threshold: f64,
    beta_confidence: bool,
    detected: bool,
}

fn cmd_verify(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let seed = cfg.seed();
    let raw = cfg.raw_problems(cfg.models)?;
    let dir = cfg.out_dir()?;
    let selected: Vec<MethodSel> = cfg
        .method
        .expand()
        .into_iter()
        .filter(|m| cfg.method != MethodSel::All || *m != MethodSel::Jackson)
        .collect();
    for m in selected {
        let method = m.estimator()?;
        let pm = problems_for(&raw, cfg.interval(method))?;
        let problems: Vec<TrialProblem> = pm.iter().map(|p| p.0.clone()).collect();
        let mut cc = ContractConfig::new(method, cfg.target, cfg.trials, seed);
        cc.n_s_override = cfg.n_s;
        cc.grid_spacing = cfg.grid_spacing;
        cc.alg2 = cfg.alg2();
        if let Some(nu) = &cfg.nu {
            cc.nu = nu.clone();
        }
        let contract = run_contract(&problems, &cc)?;
        let mut record = json!({
            "target": cfg.target,
            "seed": seed,
            "models": problems.len(),
            "report": contract.report,
            "passed": contract.report.passed(),
            "trials": contract.trials,
        });
        let mut summary = format!(
            "method={} pass={} sigma={:.4e} confidence={:.4} threshold={:.4}",
            m.name(),
            contract.report.passed(),
            contract.report.measured_sigma,
            contract.report.empirical_confidence,
            contract.report.confidence_threshold
        );
        let observables = if method == Method::Git {
            // dense grid over [-1, 1]; the operator stays in its normalized range
            let opts = Alg2Options {
                rescale: TargetInterval::Full,
                ..cfg.alg2()
            };
            cc.observables
                .iter()
                .enumerate()
                .map(|(j, f)| {
                    let trials = cfg.trials.min(GIT_OBSERVABLE_TRIALS);
                    git_observable_check(
                        &problems,
                        f,
                        &cfg.target,
                        trials,
                        split_seed(seed, 1 << 32 | j as u64),
                        opts,
                    )
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            contract.observables.clone()
        };
        record["observables"] = json!(observables);
        if method == Method::Git {
            record["observable_trials"] = json!(cfg.trials.min(GIT_OBSERVABLE_TRIALS));
        }
        if method != Method::Git {
            let planned = contract.report.budget.n_s;
            let mut half = cc.clone();
            half.n_s_override = Some((planned / 2).max(1));
            let r = run_contract(&problems, &half)?.report;
            let control = ControlSummary {
                n_s: (planned / 2).max(1),
                empirical_confidence: r.empirical_confidence,
                confidence_threshold: r.confidence_threshold,
                beta_confidence: r.pass.beta_confidence,
                detected: !r.pass.beta_confidence,
            };
            let _ = write!(summary, " halved_ns_detected={}", control.detected);
            record["under_budget_control"] = json!(control);
        }
        if method == Method::Fejer {
            let n = contract.report.budget.kernel_order;
            let top = n.trailing_zeros().max(2);
            let ancillas: Vec<u32> = (top.saturating_sub(2)..=top).collect();
            let runs = fault_sweep(
                &problems[0],
                &ancillas,
                &cfg.delta_t,
                3,
                contract.report.budget.n_s,
                split_seed(seed, 1 << 33),
            )?;
            let held = runs.iter().all(|r| r.fault.holds());
            cfg.write_csv(&dir, "fault_sweep.csv", &fault_sweep_csv(&runs))?;
            let _ = write!(summary, " fault_bound_holds={held}");
            record["fault_sweep"] = json!({"runs": runs, "bound_holds": held});
        }
        let path = cfg.write_json(&dir, &format!("verify_{}.json", m.name()), record)?;
        writeln!(stdout, "{summary} wrote={}", path.display())?;
    }
    Ok(())
}

fn cmd_bench(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let dir = cfg.out_dir()?;
    let mut points = Vec::new();
    for d in [0.1, 0.01, 0.001] {
        for e in [0.1, 0.01, 0.001] {
            points.push((d, e));
        }
    }
    let rows = complexity_table(&points, cfg.target.eta)?;
    cfg.write_csv(&dir, "complexity.csv", &complexity_csv(&rows))?;
    cfg.write_json(
        &dir,
        "complexity.json",
        json!({"eta": cfg.target.eta, "rows": rows}),
    )?;
    let sweeps = planner_sweeps(13, cfg.target.eta)?;
    let mut fits = serde_json::Map::new();
    for (name, fit) in sweeps.named() {
        cfg.write_csv(&dir, &format!("scaling_{name}.csv"), &fit.to_csv())?;
        fits.insert(
            name.into(),
            json!({"exponent": fit.exponent, "intercept": fit.intercept, "r2": fit.r2}),
        );
        writeln!(
            stdout,
            "sweep={name} exponent={:.4} r2={:.4}",
            fit.exponent, fit.r2
        )?;
    }
    cfg.write_json(&dir, "scaling_fits.json", json!({"fits": fits}))?;
    writeln!(stdout, "rows={} wrote={}", rows.len(), dir.display())?;
    Ok(())
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut out = std::io::stdout().lock();
    match run(&cli, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

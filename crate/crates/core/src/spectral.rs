//! Hermitian operators, probe states and their discrete spectral models.
//!
//! Exact dense diagonalization is the ground truth every estimator is checked
//! against. A [`SpectralModel`] is the response function of a probe state: a
//! set of spectral lines `O_k` with weights `alpha_k = |<psi|k>|^2`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};
use crate::kernels::Kernel;

pub type C64 = Complex64;

/// Default cap on the dimension handled by exact diagonalization.
pub const DEFAULT_MAX_DIM: usize = 256;
/// Eigenvalues closer than this are merged into one spectral line.
pub const DEGENERACY_TOL: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    entries: DMatrix<C64>,
}

impl HermitianOperator {
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.nrows() != entries.ncols() {
            return Err(validation(format!(
                "operator must be square and nonempty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let n = entries.nrows();
        for i in 0..n {
            for j in i..n {
                if (entries[(i, j)] - entries[(j, i)].conj()).norm() > HERMITIAN_TOL {
                    return Err(validation(format!("operator not hermitian at ({i},{j})")));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.entries
    }

    /// Ascending eigenvalues and the matching orthonormal eigenvectors (columns).
    pub fn eigen(&self) -> Result<(Vec<f64>, DMatrix<C64>)> {
        let eig = nalgebra::SymmetricEigen::try_new(self.entries.clone(), f64::EPSILON, 100_000)
            .ok_or_else(|| Error::Numeric("hermitian eigensolver did not converge".into()))?;
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            eig.eigenvectors[(r, order[c])]
        });
        Ok((values, vectors))
    }

    /// Spectral norm (largest absolute eigenvalue).
    pub fn norm(&self) -> Result<f64> {
        let (vals, _) = self.eigen()?;
        Ok(vals.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
    }

    /// Applies `scale * O + shift * I`.
    pub fn affine(&self, map: AffineMap) -> Self {
        let n = self.dim();
        let mut m = self.entries.map(|z| z * map.scale);
        for i in 0..n {
            m[(i, i)] += C64::new(map.shift, 0.0);
        }
        Self { entries: m }
    }
}

/// `x -> scale * x + shift`, recorded so estimated frequencies can be mapped back.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub scale: f64,
    pub shift: f64,
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap {
        scale: 1.0,
        shift: 0.0,
    };

    /// `[-1, 1] -> [0, 1]`, used by the qubitized Fejer path.
    pub const TO_UNIT: AffineMap = AffineMap {
        scale: 0.5,
        shift: 0.5,
    };

    pub fn apply(&self, x: f64) -> f64 {
        self.scale * x + self.shift
    }

    pub fn invert(&self, y: f64) -> f64 {
        (y - self.shift) / self.scale
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &AffineMap) -> AffineMap {
        AffineMap {
            scale: self.scale * first.scale,
            shift: self.scale * first.shift + self.shift,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetInterval {
    /// `[-1, 1]`: pure rescaling by the operator norm when it exceeds one.
    Full,
    /// `[-1/2, 1/2]`: affine map of the spectral endpoints onto the interval.
    Half,
}

pub fn normalize_operator(
    op: &HermitianOperator,
    target: TargetInterval,
) -> Result<(HermitianOperator, AffineMap)> {
    let (vals, _) = op.eigen()?;
    let lo = vals[0];
    let hi = vals[vals.len() - 1];
    let map = match target {
        TargetInterval::Full => {
            let norm = lo.abs().max(hi.abs());
            if norm <= 1.0 {
                AffineMap::IDENTITY
            } else {
                AffineMap {
                    scale: 1.0 / norm,
                    shift: 0.0,
                }
            }
        }
        TargetInterval::Half => {
            if hi - lo <= DEGENERACY_TOL {
                AffineMap {
                    scale: 1.0,
                    shift: -lo,
                }
            } else {
                let scale = 1.0 / (hi - lo);
                AffineMap {
                    scale,
                    shift: -0.5 - lo * scale,
                }
            }
        }
    };
    Ok((op.affine(map), map))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeState {
    amplitudes: DVector<C64>,
}

impl ProbeState {
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(validation(format!("probe state norm {norm} is not 1")));
        }
        Ok(Self { amplitudes })
    }

    pub fn normalized(amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) {
            return Err(validation("probe state is zero"));
        }
        Ok(Self {
            amplitudes: amplitudes / C64::new(norm, 0.0),
        })
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(validation("basis index out of range"));
        }
        let mut v = DVector::from_element(dim, C64::new(0.0, 0.0));
        v[index] = C64::new(1.0, 0.0);
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }
}

/// Discrete response function: lines `eigenvalues[k]` with weights `weights[k]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralModel {
    eigenvalues: Vec<f64>,
    weights: Vec<f64>,
}

impl SpectralModel {
    /// Validates, sorts and merges coincident lines.
    pub fn new(eigenvalues: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() || eigenvalues.len() != weights.len() {
            return Err(validation(
                "eigenvalues and weights must be nonempty and equal length",
            ));
        }
        if let Some(x) = eigenvalues.iter().find(|x| !(x.abs() <= 1.0 + NORM_TOL)) {
            return Err(validation(format!("eigenvalue {x} outside [-1, 1]")));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(validation("weights must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(validation(format!("weights sum to {total}, not 1")));
        }
        let mut pairs: Vec<(f64, f64)> = eigenvalues
            .into_iter()
            .map(|x| x.clamp(-1.0, 1.0))
            .zip(weights)
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut eig: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut w: Vec<f64> = Vec::with_capacity(pairs.len());
        for (x, a) in pairs {
            match eig.last() {
                Some(&last) if (x - last).abs() <= DEGENERACY_TOL => *w.last_mut().unwrap() += a,
                _ => {
                    eig.push(x);
                    w.push(a);
                }
            }
        }
        Ok(Self {
            eigenvalues: eig,
            weights: w,
        })
    }

    pub fn single(omega: f64) -> Result<Self> {
        Self::new(vec![omega], vec![1.0])
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of distinct spectral lines.
    pub fn gamma(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn lines(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.eigenvalues
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }

    pub fn mapped(&self, map: &AffineMap) -> Result<Self> {
        Self::new(
            self.eigenvalues.iter().map(|&x| map.apply(x)).collect(),
            self.weights.clone(),
        )
    }

    /// `t * self + (1 - t) * other`.
    pub fn mixture(&self, other: &SpectralModel, t: f64) -> Result<Self> {
        let mut e = self.eigenvalues.clone();
        e.extend_from_slice(&other.eigenvalues);
        let mut w: Vec<f64> = self.weights.iter().map(|a| a * t).collect();
        w.extend(other.weights.iter().map(|a| a * (1.0 - t)));
        Self::new(e, w)
    }
}

pub fn diagonalize(op: &HermitianOperator, psi: &ProbeState) -> Result<SpectralModel> {
    diagonalize_with_cap(op, psi, DEFAULT_MAX_DIM)
}

pub fn diagonalize_with_cap(
    op: &HermitianOperator,
    psi: &ProbeState,
    max_dim: usize,
) -> Result<SpectralModel> {
    if op.dim() > max_dim {
        return Err(Error::ResourceCap(format!(
            "dimension {} exceeds cap {max_dim}",
            op.dim()
        )));
    }
    if op.dim() != psi.dim() {
        return Err(validation("operator and probe dimensions differ"));
    }
    let (vals, vecs) = op.eigen()?;
    if let Some(x) = vals.iter().find(|x| x.abs() > 1.0 + NORM_TOL) {
        return Err(validation(format!(
            "operator not normalized: eigenvalue {x}"
        )));
    }
    let overlaps = vecs.adjoint() * psi.amplitudes();
    let mut weights: Vec<f64> = overlaps.iter().map(|z| z.norm_sqr()).collect();
    // rounding only; keeps the sum rule at machine precision
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    SpectralModel::new(vals, weights)
}

/// Transform values on an evaluation grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformGrid {
    pub nu: Vec<f64>,
    pub values: Vec<f64>,
    /// Exact (analytic) transform as opposed to a sampled estimate.
    pub exact: bool,
    /// Discrete outcome set (Fejer histograms) rather than a density.
    pub discrete: bool,
    /// Kernel resolution, used to flag grids too coarse for quadrature.
    pub width: Option<f64>,
}

impl TransformGrid {
    pub fn len(&self) -> usize {
        self.nu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nu.is_empty()
    }
}

pub fn exact_transform(
    model: &SpectralModel,
    kernel: &Kernel,
    grid: &[f64],
) -> Result<TransformGrid> {
    let values = grid
        .iter()
        .map(|&nu| {
            model
                .lines()
                .map(|(o, a)| kernel.eval(nu, o).map(|k| a * k))
                .sum::<Result<f64>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TransformGrid {
        nu: grid.to_vec(),
        values,
        exact: true,
        discrete: kernel.is_discrete(),
        width: Some(kernel.width()),
    })
}

/// Real observable `f(omega)` bounded on `[-1, 1]`.
#[derive(Clone)]
pub struct ObservableFn {
    name: String,
    evaluator: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Spacing used for numerical sups and integrals.
    pub grid_resolution: f64,
}

impl fmt::Debug for ObservableFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObservableFn")
            .field("name", &self.name)
            .field("grid_resolution", &self.grid_resolution)
            .finish()
    }
}

impl ObservableFn {
    pub fn new(
        name: impl Into<String>,
        grid_resolution: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            evaluator: Arc::new(f),
            grid_resolution,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const({c})"), 1e-3, move |_| c)
    }

    pub fn identity() -> Self {
        Self::new("omega", 1e-3, |w| w)
    }

    pub fn power(p: i32) -> Self {
        Self::new(format!("omega^{p}"), 1e-3, move |w| w.powi(p))
    }

    /// Parses the CLI names `one`, `omega`, `omega2`, `omega3`.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "one" | "1" => Ok(Self::constant(1.0)),
            "omega" | "w" => Ok(Self::identity()),
            "omega2" => Ok(Self::power(2)),
            "omega3" => Ok(Self::power(3)),
            other => Err(validation(format!("unknown observable '{other}'"))),
        }
    }

    pub fn with_resolution(mut self, h: f64) -> Self {
        self.grid_resolution = h;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, w: f64) -> f64 {
        (self.evaluator)(w)
    }
}

/// `Q(S, f) = sum_k alpha_k f(O_k)`.
pub fn observable_exact(model: &SpectralModel, f: &ObservableFn) -> f64 {
    model.lines().map(|(o, a)| a * f.eval(o)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObservableEstimate {
    pub value: f64,
    /// Set when the grid spacing exceeds half the kernel width.
    pub coarse_grid: bool,
}

/// `Q(Phi, f)`: outcome sum for discrete transforms, trapezoid rule otherwise.
pub fn observable_from_transform(grid: &TransformGrid, f: &ObservableFn) -> ObservableEstimate {
    if grid.discrete {
        let value = grid
            .nu
            .iter()
            .zip(&grid.values)
            .map(|(&nu, &p)| p * f.eval(nu))
            .sum();
        return ObservableEstimate {
            value,
            coarse_grid: false,
        };
    }
    let mut value = 0.0;
    let mut max_h: f64 = 0.0;
    for i in 1..grid.nu.len() {
        let h = grid.nu[i] - grid.nu[i - 1];
        max_h = max_h.max(h);
        value += 0.5
            * h
            * (grid.values[i] * f.eval(grid.nu[i]) + grid.values[i - 1] * f.eval(grid.nu[i - 1]));
    }
    let coarse_grid = grid.width.is_some_and(|w| max_h > 0.5 * w);
    ObservableEstimate { value, coarse_grid }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelKind {
    /// Random hermitian matrix with a random probe.
    Dense,
    /// Random spectrum with one line carrying most of the probe weight.
    Spiked,
    /// Gap `O_1 - O_0 > 2 delta` and ground amplitude `|<psi|0>| >= min_overlap`.
    Gapped { delta: f64, min_overlap: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: ModelKind,
    /// Spectra are placed inside `[-radius, radius]`.
    pub radius: f64,
}

impl GeneratorSpec {
    pub const DEFAULT_RADIUS: f64 = 0.9;

    pub fn dense() -> Self {
        Self {
            kind: ModelKind::Dense,
            radius: Self::DEFAULT_RADIUS,
        }
    }

    pub fn spiked() -> Self {
        Self {
            kind: ModelKind::Spiked,
            radius: Self::DEFAULT_RADIUS,
        }
    }

    pub fn gapped(delta: f64, min_overlap: f64) -> Self {
        Self {
            kind: ModelKind::Gapped { delta, min_overlap },
            radius: Self::DEFAULT_RADIUS,
        }
    }

    /// Parses `dense`, `spiked` or `gapped:<delta>:<overlap>`, with an optional
    /// `@<radius>` suffix.
    pub fn parse(s: &str) -> Result<Self> {
        let (body, radius) = match s.split_once('@') {
            Some((b, r)) => (
                b,
                r.parse::<f64>()
                    .map_err(|_| validation(format!("bad radius in '{s}'")))?,
            ),
            None => (s, Self::DEFAULT_RADIUS),
        };
        let parts: Vec<&str> = body.split(':').collect();
        let kind = match parts.as_slice() {
            ["dense"] => ModelKind::Dense,
            ["spiked"] => ModelKind::Spiked,
            ["gapped", d, e] => ModelKind::Gapped {
                delta: d
                    .parse()
                    .map_err(|_| validation(format!("bad gap in '{s}'")))?,
                min_overlap: e
                    .parse()
                    .map_err(|_| validation(format!("bad overlap in '{s}'")))?,
            },
            _ => return Err(validation(format!("unknown generator spec '{s}'"))),
        };
        Ok(Self { kind, radius })
    }
}

pub(crate) fn complex_normal(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
    )
}

fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| complex_normal(rng));
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    // fix column phases so the distribution is Haar
    DMatrix::from_fn(dim, dim, |i, j| {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        q[(i, j)] * phase
    })
}

fn from_spectrum(eigs: &[f64], u: &DMatrix<C64>) -> Result<HermitianOperator> {
    let n = eigs.len();
    let d = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(eigs[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let m = u * d * u.adjoint();
    // symmetrize away rounding
    let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()));
    HermitianOperator::new(m)
}

/// Deterministic test instance for `(dim, seed, spec)`.
pub fn random_model(
    dim: usize,
    seed: u64,
    spec: &GeneratorSpec,
) -> Result<(HermitianOperator, ProbeState)> {
    if dim == 0 {
        return Err(validation("dim must be >= 1"));
    }
    if !(spec.radius > 0.0 && spec.radius <= 1.0) {
        return Err(validation(format!("radius {} outside (0, 1]", spec.radius)));
    }
    let r = spec.radius;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match spec.kind {
        ModelKind::Dense => {
            let a = DMatrix::from_fn(dim, dim, |_, _| complex_normal(&mut rng));
            let h = (&a + a.adjoint()) * C64::new(0.5, 0.0);
            let op = HermitianOperator::new(DMatrix::from_fn(dim, dim, |i, j| {
                0.5 * (h[(i, j)] + h[(j, i)].conj())
            }))?;
            let (vals, _) = op.eigen()?;
            let (lo, hi) = (vals[0], vals[dim - 1]);
            let map = if hi - lo > DEGENERACY_TOL {
                let scale = 2.0 * r / (hi - lo);
                AffineMap {
                    scale,
                    shift: -r - lo * scale,
                }
            } else {
                AffineMap {
                    scale: 0.0,
                    shift: r * (2.0 * rng.gen::<f64>() - 1.0),
                }
            };
            let psi =
                ProbeState::normalized(DVector::from_fn(dim, |_, _| complex_normal(&mut rng)))?;
            Ok((op.affine(map), psi))
        }
        ModelKind::Spiked => {
            let eigs: Vec<f64> = (0..dim)
                .map(|_| r * (2.0 * rng.gen::<f64>() - 1.0))
                .collect();
            let u = random_unitary(dim, &mut rng);
            let spike = rng.gen_range(0..dim);
            let noise = DVector::from_fn(dim, |_, _| complex_normal(&mut rng));
            let noise = &noise / C64::new(noise.norm(), 0.0);
            let v = u.column(spike) * C64::new(0.7f64.sqrt(), 0.0)
                + noise * C64::new(0.3f64.sqrt(), 0.0);
            Ok((from_spectrum(&eigs, &u)?, ProbeState::normalized(v)?))
        }
        ModelKind::Gapped { delta, min_overlap } => {
            if dim < 2 {
                return Err(validation("gapped model needs dim >= 2"));
            }
            if !(delta > 0.0) || 2.5 * delta >= 2.0 * r {
                return Err(validation(format!(
                    "gap 2*{delta} infeasible inside [-{r}, {r}]"
                )));
            }
            if !(min_overlap > 0.0 && min_overlap <= 1.0) {
                return Err(validation(format!(
                    "min_overlap {min_overlap} outside (0, 1]"
                )));
            }
            let ground = -r;
            let first = -r + 2.5 * delta;
            let mut eigs = vec![ground, first];
            eigs.extend((2..dim).map(|_| first + (r - first) * rng.gen::<f64>()));
            let u = random_unitary(dim, &mut rng);
            let amp0 = min_overlap + (1.0 - min_overlap) * 0.5 * rng.gen::<f64>();
            let mut coeffs = DVector::from_fn(dim, |i, _| {
                if i == 0 {
                    C64::new(0.0, 0.0)
                } else {
                    complex_normal(&mut rng)
                }
            });
            let rest = coeffs.norm();
            let rest_amp = (1.0 - amp0 * amp0).max(0.0).sqrt();
            for i in 1..dim {
                coeffs[i] *= if rest > 0.0 { rest_amp / rest } else { 0.0 };
            }
            coeffs[0] = C64::new(amp0, 0.0);
            if rest == 0.0 || rest_amp == 0.0 {
                coeffs[0] = C64::new(1.0, 0.0);
            }
            let v = &u * coeffs;
            Ok((from_spectrum(&eigs, &u)?, ProbeState::normalized(v)?))
        }
    }
}

fn parse_complex(tok: &str) -> Option<C64> {
    let t = tok.trim();
    if let Some(body) = t.strip_suffix('j').or_else(|| t.strip_suffix('i')) {
        let bytes = body.as_bytes();
        let mut split = None;
        for i in (1..bytes.len()).rev() {
            if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
                split = Some(i);
                break;
            }
        }
        match split {
            Some(i) => {
                let re: f64 = body[..i].parse().ok()?;
                let im_str = &body[i..];
                let im: f64 = match im_str {
                    "+" => 1.0,
                    "-" => -1.0,
                    s => s.parse().ok()?,
                };
                Some(C64::new(re, im))
            }
            None => Some(C64::new(0.0, body.parse().ok()?)),
        }
    } else {
        Some(C64::new(t.parse().ok()?, 0.0))
    }
}

fn parse_row(line: &str, n: usize, lineno: usize) -> Result<Vec<C64>> {
    let row = line
        .split_whitespace()
        .map(|t| {
            parse_complex(t).ok_or_else(|| Error::Parse {
                line: lineno,
                msg: format!("bad complex entry '{t}'"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if row.len() != n {
        return Err(Error::Parse {
            line: lineno,
            msg: format!("expected {n} entries, found {}", row.len()),
        });
    }
    Ok(row)
}

/// Parses the operator text format: `dim n`, then `n` rows of `n` entries
/// written `re+imj`, then an optional probe row.
pub fn parse_operator_text(text: &str) -> Result<(HermitianOperator, Option<ProbeState>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (ln, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    let n: usize = header
        .strip_prefix("dim")
        .and_then(|s| s.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
        .ok_or(Error::Parse {
            line: ln,
            msg: format!("expected 'dim n', found '{header}'"),
        })?;
    let mut data = Vec::with_capacity(n * n);
    for r in 0..n {
        let (ln, line) = lines.next().ok_or(Error::Parse {
            line: ln + r + 1,
            msg: "missing matrix row".into(),
        })?;
        data.extend(parse_row(line, n, ln)?);
    }
    let op = HermitianOperator::new(DMatrix::from_row_slice(n, n, &data))?;
    let psi = match lines.next() {
        Some((ln, line)) => Some(ProbeState::new(DVector::from_vec(parse_row(line, n, ln)?))?),
        None => None,
    };
    Ok((op, psi))
}

fn fmt_complex(z: C64) -> String {
    format!("{:e}{:+e}j", z.re, z.im)
}

pub fn format_operator_text(op: &HermitianOperator, psi: Option<&ProbeState>) -> String {
    let n = op.dim();
    let mut out = format!("dim {n}\n");
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| fmt_complex(op.matrix()[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    if let Some(p) = psi {
        let row: Vec<String> = p.amplitudes().iter().map(|z| fmt_complex(*z)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

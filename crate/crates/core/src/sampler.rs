//! Classical stand-in for the quantum measurement layer: QPE outcome
//! distributions (analytic and statevector), fault injection in the controlled
//! evolutions, the qubiterate block encoding, and Hadamard-test shot noise.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};
use crate::kernels::{fejer_eval, fejer_grid, qubitized_fejer_eval};
use crate::spectral::{complex_normal, HermitianOperator, ProbeState, SpectralModel, C64};

/// Default cap on `dim * 2^n_ancilla` amplitudes held by the statevector path.
pub const DEFAULT_MEMORY_CAP: usize = 1 << 22;
const PROB_TOL: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-12;

/// splitmix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th child task: `splitmix64(seed + golden * (index + 1))`.
pub fn split_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1))))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Measurement distribution over an outcome grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub grid: Vec<f64>,
    pub probs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(grid: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if grid.is_empty() || grid.len() != probs.len() {
            return Err(validation(
                "grid and probabilities must be nonempty and equal length",
            ));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= -PROB_TOL)) {
            return Err(Error::Numeric(format!("negative outcome probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::Numeric(format!(
                "outcome probabilities sum to {total}"
            )));
        }
        let probs = probs.into_iter().map(|p| p.max(0.0)).collect();
        Ok(Self { grid, probs })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Largest per-outcome difference `max_q |p_q - p'_q|`.
    pub fn max_deviation(&self, other: &OutcomeDistribution) -> Result<f64> {
        if self.grid != other.grid {
            return Err(validation("distributions live on different grids"));
        }
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Multinomial draw of `samples` outcomes via conditional binomials.
    pub fn sample(&self, samples: u64, seed: u64) -> Result<Histogram> {
        let mut rng = rng_from_seed(seed);
        let mut counts = vec![0u64; self.len()];
        let mut left = samples;
        let mut mass_left = 1.0;
        for (q, &p) in self.probs.iter().enumerate() {
            if left == 0 {
                break;
            }
            if q + 1 == self.len() || mass_left <= p {
                counts[q] = left;
                break;
            }
            let cond = (p / mass_left).clamp(0.0, 1.0);
            let c = Binomial::new(left, cond)
                .map_err(|e| Error::Numeric(e.to_string()))?
                .sample(&mut rng);
            counts[q] = c;
            left -= c;
            mass_left -= p;
        }
        Ok(Histogram {
            grid: self.grid.clone(),
            counts,
            total: samples,
        })
    }
}

/// Outcome counts of a sampling run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub grid: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    pub fn frequencies(&self) -> Vec<f64> {
        let t = self.total.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / t).collect()
    }

    /// CSV with columns `sigma_q,count,frequency`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sigma_q,count,frequency\n");
        for ((s, c), f) in self.grid.iter().zip(&self.counts).zip(self.frequencies()) {
            out.push_str(&format!("{s:.12e},{c},{f:.15e}\n"));
        }
        out
    }
}

/// Norm-bounded perturbation of every controlled evolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaultModel {
    pub delta_t: f64,
    pub seed: u64,
}

impl FaultModel {
    pub fn new(delta_t: f64, seed: u64) -> Result<Self> {
        if !(delta_t >= 0.0) || !delta_t.is_finite() {
            return Err(validation(format!(
                "fault strength {delta_t} must be nonnegative"
            )));
        }
        Ok(Self { delta_t, seed })
    }
}

fn check_order(n: u64) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(validation(format!(
            "QPE grid size {n} must be a power of two >= 2"
        )));
    }
    Ok(())
}

/// `P(q) = sum_k alpha_k K_F(sigma_q, O_k, N)`.
pub fn qpe_distribution(model: &SpectralModel, n: u64) -> Result<OutcomeDistribution> {
    check_order(n)?;
    let grid = fejer_grid(n);
    let probs = grid
        .iter()
        .map(|&s| model.lines().map(|(o, a)| a * fejer_eval(s, o, n)).sum())
        .collect();
    OutcomeDistribution::new(grid, probs)
}

/// Symmetrized Fejer distribution over the angle grid (units of pi) for a
/// spectrum already shifted into `[0, 1]`.
pub fn qubitized_qpe_distribution(model: &SpectralModel, n: u64) -> Result<OutcomeDistribution> {
    check_order(n)?;
    if let Some(x) = model
        .eigenvalues()
        .iter()
        .find(|x| !(**x >= 0.0 && **x <= 1.0))
    {
        return Err(Error::Domain(format!(
            "qubitized QPE needs spectrum in [0, 1], found {x}"
        )));
    }
    let grid = fejer_grid(n);
    let probs = grid
        .iter()
        .map(|&s| {
            model
                .lines()
                .map(|(o, a)| Ok(a * qubitized_fejer_eval(s, o, n)?))
                .sum::<Result<f64>>()
        })
        .collect::<Result<Vec<f64>>>()?;
    OutcomeDistribution::new(grid, probs)
}

/// Frequency recovered from an angle-grid outcome.
pub fn qubitized_frequency(sigma: f64) -> f64 {
    (PI * sigma.abs()).cos()
}

/// Random Hermitian matrix with operator norm exactly one.
pub fn random_unit_hermitian(dim: usize, seed: u64) -> Result<HermitianOperator> {
    let mut rng = rng_from_seed(seed);
    let a = DMatrix::from_fn(dim, dim, |_, _| complex_normal(&mut rng));
    let h = DMatrix::from_fn(dim, dim, |i, j| 0.5 * (a[(i, j)] + a[(j, i)].conj()));
    let op = HermitianOperator::new(h)?;
    let norm = op.norm()?;
    if !(norm > 0.0) {
        return HermitianOperator::from_real_diagonal(&vec![1.0; dim]);
    }
    Ok(op.affine(crate::spectral::AffineMap {
        scale: 1.0 / norm,
        shift: 0.0,
    }))
}

/// `V exp(i phases) V^dagger`.
fn unitary_from_phases(vecs: &DMatrix<C64>, phases: impl Iterator<Item = f64>) -> DMatrix<C64> {
    let mut scaled = vecs.clone();
    for (j, p) in phases.enumerate() {
        let z = C64::from_polar(1.0, p);
        scaled.column_mut(j).iter_mut().for_each(|x| *x *= z);
    }
    scaled * vecs.adjoint()
}

/// `exp(-i t H)` through the eigendecomposition of `H`.
fn evolve(h: &HermitianOperator, t: f64) -> Result<DMatrix<C64>> {
    let (vals, vecs) = h.eigen()?;
    Ok(unitary_from_phases(&vecs, vals.into_iter().map(|l| -t * l)))
}

/// Controlled powers `V^{2^k}`, `V = exp(i pi (O + 1))`, for `k < n_ancilla`,
/// optionally followed by the fault `exp(-i delta_t H_k)`.
pub fn controlled_powers(
    op: &HermitianOperator,
    n_ancilla: u32,
    fault: Option<&FaultModel>,
) -> Result<Vec<DMatrix<C64>>> {
    let (vals, vecs) = op.eigen()?;
    if let Some(x) = vals.iter().find(|x| x.abs() > 1.0 + PROB_TOL) {
        return Err(Error::Domain(format!(
            "QPE needs a normalized operator, eigenvalue {x}"
        )));
    }
    (0..n_ancilla)
        .map(|k| {
            let scale = (1u64 << k) as f64;
            // (O + 1) 2^k is exact in binary, so the reduction mod 2 is too
            let u = unitary_from_phases(
                &vecs,
                vals.iter()
                    .map(|l| PI * ((l + 1.0) * scale).rem_euclid(2.0)),
            );
            match fault {
                Some(f) if f.delta_t > 0.0 => {
                    let h = random_unit_hermitian(op.dim(), split_seed(f.seed, k as u64))?;
                    Ok(u * evolve(&h, f.delta_t)?)
                }
                _ => Ok(u),
            }
        })
        .collect()
}

pub fn statevector_qpe(
    op: &HermitianOperator,
    psi: &ProbeState,
    n_ancilla: u32,
    fault: Option<&FaultModel>,
) -> Result<OutcomeDistribution> {
    statevector_qpe_with_cap(op, psi, n_ancilla, fault, DEFAULT_MEMORY_CAP)
}

/// Ancilla-register QPE: uniform superposition, controlled `V^{2^k}`, inverse
/// Fourier transform on the ancillas, measurement.
pub fn statevector_qpe_with_cap(
    op: &HermitianOperator,
    psi: &ProbeState,
    n_ancilla: u32,
    fault: Option<&FaultModel>,
    memory_cap: usize,
) -> Result<OutcomeDistribution> {
    if !(1..=40).contains(&n_ancilla) {
        return Err(validation(format!(
            "ancilla count {n_ancilla} outside [1, 40]"
        )));
    }
    if op.dim() != psi.dim() {
        return Err(validation("operator and probe dimensions differ"));
    }
    let dim = op.dim();
    let n = 1usize << n_ancilla;
    if dim.saturating_mul(n) > memory_cap {
        return Err(Error::ResourceCap(format!(
            "statevector of {dim} x {n} amplitudes exceeds cap {memory_cap}"
        )));
    }
    let powers = controlled_powers(op, n_ancilla, fault)?;
    // branch j carries prod over set bits of j of the controlled powers, lowest bit first
    let mut branches: Vec<DVector<C64>> = Vec::with_capacity(n);
    branches.push(psi.amplitudes().clone());
    for j in 1..n {
        let top = usize::BITS - 1 - j.leading_zeros();
        let prev = &branches[j - (1 << top)];
        branches.push(&powers[top as usize] * prev);
    }
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut probs = vec![0.0; n];
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for s in 0..dim {
        for (j, b) in branches.iter().enumerate() {
            buf[j] = b[s];
        }
        fft.process(&mut buf);
        for (p, a) in probs.iter_mut().zip(&buf) {
            *p += a.norm_sqr() / (n * n) as f64;
        }
    }
    OutcomeDistribution::new(fejer_grid(n as u64), probs)
}

/// Result of one faulty-QPE comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaultReport {
    #[serde(rename = "N")]
    pub n: u64,
    pub delta_t: f64,
    /// `log2(N) * delta_t`.
    pub bound: f64,
    /// Largest per-outcome deviation from the ideal distribution.
    pub measured: f64,
}

impl FaultReport {
    pub fn holds(&self) -> bool {
        self.measured <= self.bound
    }
}

/// Compares faulty and ideal statevector QPE for one fault realization.
pub fn fault_experiment(
    op: &HermitianOperator,
    psi: &ProbeState,
    n_ancilla: u32,
    fault: &FaultModel,
) -> Result<FaultReport> {
    let ideal = statevector_qpe(op, psi, n_ancilla, None)?;
    let faulty = statevector_qpe(op, psi, n_ancilla, Some(fault))?;
    Ok(FaultReport {
        n: 1 << n_ancilla,
        delta_t: fault.delta_t,
        bound: n_ancilla as f64 * fault.delta_t,
        measured: ideal.max_deviation(&faulty)?,
    })
}

/// One-ancilla block encoding `W = [[O, S], [-S, O]]`, `S = sqrt(1 - O^2)`:
/// the dilation `[[O, S], [S, -O]]` followed by the reflection about the flag.
/// The flag state is the ancilla `|0>`, i.e. the first `dim` coordinates.
#[derive(Clone, Debug)]
pub struct Qubiterate {
    dim: usize,
    unitary: DMatrix<C64>,
}

impl Qubiterate {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn unitary(&self) -> &DMatrix<C64> {
        &self.unitary
    }

    /// `|G>|psi>`.
    pub fn flagged(&self, psi: &ProbeState) -> Result<DVector<C64>> {
        if psi.dim() != self.dim {
            return Err(validation("probe dimension does not match the qubiterate"));
        }
        let mut v = DVector::from_element(2 * self.dim, C64::new(0.0, 0.0));
        v.rows_mut(0, self.dim).copy_from(psi.amplitudes());
        Ok(v)
    }

    /// `<G, psi| W^k |G, psi>` for `k = 0..=order`, real parts.
    pub fn walk_moments(&self, psi: &ProbeState, order: usize) -> Result<Vec<f64>> {
        let start = self.flagged(psi)?;
        let mut v = start.clone();
        let mut out = Vec::with_capacity(order + 1);
        out.push(start.dotc(&v).re);
        for _ in 0..order {
            v = &self.unitary * v;
            out.push(start.dotc(&v).re);
        }
        Ok(out)
    }

    /// `max |W^dagger W - I|` entrywise.
    pub fn unitarity_error(&self) -> f64 {
        let p = self.unitary.adjoint() * &self.unitary;
        let mut err: f64 = 0.0;
        for i in 0..p.nrows() {
            for j in 0..p.ncols() {
                let id = if i == j { 1.0 } else { 0.0 };
                err = err.max((p[(i, j)] - C64::new(id, 0.0)).norm());
            }
        }
        err
    }
}

pub fn build_qubiterate(op: &HermitianOperator) -> Result<Qubiterate> {
    let (vals, vecs) = op.eigen()?;
    if let Some(x) = vals.iter().find(|x| x.abs() > 1.0 + PROB_TOL) {
        return Err(Error::Domain(format!(
            "qubiterate needs spectrum in [-1, 1], found {x}"
        )));
    }
    let d = op.dim();
    let to_c = |f: &dyn Fn(f64) -> f64| {
        let diag = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                C64::new(f(vals[i]), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        &vecs * diag * vecs.adjoint()
    };
    let o = to_c(&|x| x.clamp(-1.0, 1.0));
    let s = to_c(&|x| (1.0 - x * x).max(0.0).sqrt());
    let mut w = DMatrix::from_element(2 * d, 2 * d, C64::new(0.0, 0.0));
    w.view_mut((0, 0), (d, d)).copy_from(&o);
    w.view_mut((0, d), (d, d)).copy_from(&s);
    w.view_mut((d, 0), (d, d)).copy_from(&(-&s));
    w.view_mut((d, d), (d, d)).copy_from(&o);
    let q = Qubiterate { dim: d, unitary: w };
    let err = q.unitarity_error();
    if err > UNITARY_TOL {
        return Err(Error::Numeric(format!(
            "qubiterate deviates from unitarity by {err:e}"
        )));
    }
    Ok(q)
}

/// Real-part Hadamard test: `2 Bin(shots, (1 + t)/2) / shots - 1`.
pub fn hadamard_test_sample(t: f64, shots: u64, seed: u64) -> Result<f64> {
    if !(t.abs() <= 1.0 + 1e-10) {
        return Err(validation(format!("expectation {t} outside [-1, 1]")));
    }
    if shots == 0 {
        return Err(validation("shots must be >= 1"));
    }
    let p = (0.5 * (1.0 + t)).clamp(0.0, 1.0);
    let mut rng = rng_from_seed(seed);
    let ones = Binomial::new(shots, p)
        .map_err(|e| Error::Numeric(e.to_string()))?
        .sample(&mut rng);
    Ok(2.0 * ones as f64 / shots as f64 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cheb::cheb_moments;
    use crate::spectral::{diagonalize, random_model, GeneratorSpec};
    use proptest::prelude::*;

    fn model(dim: usize, seed: u64) -> (HermitianOperator, ProbeState) {
        random_model(dim, seed, &GeneratorSpec::dense()).unwrap()
    }

    #[test]
    fn seed_splitting_is_stable_and_distinct() {
        assert_eq!(split_seed(7, 3), split_seed(7, 3));
        let kids: std::collections::HashSet<u64> = (0..1000).map(|i| split_seed(42, i)).collect();
        assert_eq!(kids.len(), 1000);
        assert_ne!(split_seed(1, 0), split_seed(2, 0));
    }

    #[test]
    fn on_grid_eigenvalue_is_certain() {
        let m = SpectralModel::single(0.25).unwrap();
        let d = qpe_distribution(&m, 16).unwrap();
        let q = d
            .grid
            .iter()
            .position(|&s| (s - 0.25).abs() < 1e-15)
            .unwrap();
        assert!((d.probs[q] - 1.0).abs() < 1e-14);
        assert!(qpe_distribution(&m, 12).is_err());
    }

    #[test]
    fn statevector_matches_analytic() {
        for (dim, seed) in [(1, 1), (3, 2), (8, 3)] {
            let (op, psi) = model(dim, seed);
            let m = diagonalize(&op, &psi).unwrap();
            for n_anc in [1u32, 3, 6] {
                let a = qpe_distribution(&m, 1 << n_anc).unwrap();
                let s = statevector_qpe(&op, &psi, n_anc, None).unwrap();
                assert!(a.max_deviation(&s).unwrap() <= 1e-10, "dim {dim} n {n_anc}");
                let zero = FaultModel::new(0.0, 9).unwrap();
                let z = statevector_qpe(&op, &psi, n_anc, Some(&zero)).unwrap();
                assert!(z.max_deviation(&s).unwrap() <= 1e-12);
            }
        }
    }

    #[test]
    fn memory_cap_is_enforced() {
        let (op, psi) = model(4, 1);
        let e = statevector_qpe_with_cap(&op, &psi, 10, None, 1024).unwrap_err();
        assert!(matches!(e, Error::ResourceCap(_)));
    }

    #[test]
    fn fault_bound_holds() {
        let (op, psi) = model(6, 11);
        for seed in 0..10 {
            for dt in [1e-3, 1e-2, 0.1] {
                let r =
                    fault_experiment(&op, &psi, 5, &FaultModel::new(dt, seed).unwrap()).unwrap();
                assert!(r.holds(), "{r:?}");
                assert!(r.measured > 0.0);
            }
        }
        assert!(FaultModel::new(-1.0, 0).is_err());
    }

    #[test]
    fn unit_hermitian_has_unit_norm() {
        for d in [1, 2, 7] {
            let h = random_unit_hermitian(d, d as u64).unwrap();
            assert!((h.norm().unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn qubitized_mirror_peaks() {
        let m = SpectralModel::single(0.5).unwrap();
        let d = qubitized_qpe_distribution(&m, 64).unwrap();
        assert!((d.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // theta = pi/3 sits off-grid; mirror symmetry of the two peaks
        for (q, &s) in d.grid.iter().enumerate().skip(1) {
            let mirror = d.grid.iter().position(|&t| (t + s).abs() < 1e-12).unwrap();
            assert!((d.probs[q] - d.probs[mirror]).abs() < 1e-14);
        }
        let on = SpectralModel::single(0.0).unwrap();
        let d = qubitized_qpe_distribution(&on, 16).unwrap();
        let p = |x: f64| d.probs[d.grid.iter().position(|&s| (s - x).abs() < 1e-12).unwrap()];
        assert!((p(0.5) - 0.5).abs() < 1e-14 && (p(-0.5) - 0.5).abs() < 1e-14);
        let bad = SpectralModel::single(-0.2).unwrap();
        assert!(matches!(
            qubitized_qpe_distribution(&bad, 16),
            Err(Error::Domain(_))
        ));
        assert!((qubitized_frequency(-0.5) - 0.0).abs() < 1e-15);
    }

    #[test]
    fn qubiterate_moments_match_recurrence() {
        for (dim, seed) in [(1, 1), (5, 2), (16, 3)] {
            let (op, psi) = model(dim, seed);
            let w = build_qubiterate(&op).unwrap();
            assert!(w.unitarity_error() <= 1e-12);
            let walk = w.walk_moments(&psi, 64).unwrap();
            let rec = cheb_moments(&op, &psi, 64).unwrap();
            assert!((walk[0] - 1.0).abs() < 1e-12);
            for (a, b) in walk.iter().zip(&rec) {
                assert!((a - b).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn qubiterate_eigenvector_rotates() {
        let op = HermitianOperator::from_real_diagonal(&[0.3, -0.8]).unwrap();
        let psi = ProbeState::basis(2, 0).unwrap();
        let w = build_qubiterate(&op).unwrap();
        let th = 0.3f64.acos();
        for (k, m) in w.walk_moments(&psi, 10).unwrap().into_iter().enumerate() {
            assert!((m - (k as f64 * th).cos()).abs() < 1e-12);
        }
        let big = HermitianOperator::from_real_diagonal(&[1.5]).unwrap();
        assert!(matches!(build_qubiterate(&big), Err(Error::Domain(_))));
    }

    #[test]
    fn hadamard_examples() {
        assert_eq!(hadamard_test_sample(1.0, 17, 3).unwrap(), 1.0);
        assert_eq!(hadamard_test_sample(-1.0, 5, 3).unwrap(), -1.0);
        assert!(hadamard_test_sample(0.2, 0, 3).is_err());
        assert!(hadamard_test_sample(1.2, 10, 3).is_err());
        // concentration: std of the estimate is 1e-3 at 1e6 shots
        let hits = (0..200)
            .filter(|&s| hadamard_test_sample(0.0, 1_000_000, s).unwrap().abs() <= 0.005)
            .count();
        assert!(hits >= 198);
        // unbiasedness within three standard errors
        let t = 0.37;
        let xs: Vec<f64> = (0..1000)
            .map(|s| hadamard_test_sample(t, 100, split_seed(5, s)).unwrap())
            .collect();
        let mean = xs.iter().sum::<f64>() / 1000.0;
        let se = ((1.0 - t * t) / 100.0 / 1000.0).sqrt();
        assert!((mean - t).abs() <= 3.0 * se, "{mean}");
    }

    #[test]
    fn histogram_sampling() {
        let m = SpectralModel::new(vec![-0.5, 0.3], vec![0.4, 0.6]).unwrap();
        let d = qpe_distribution(&m, 32).unwrap();
        let h = d.sample(10_000, 1).unwrap();
        assert_eq!(h.counts.iter().sum::<u64>(), 10_000);
        assert_eq!(h, d.sample(10_000, 1).unwrap());
        assert!((h.frequencies().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let csv = h.to_csv();
        assert!(csv.starts_with("sigma_q,count,frequency\n"));
        assert_eq!(csv.lines().count(), 33);
        let sure = qpe_distribution(&SpectralModel::single(0.0).unwrap(), 8)
            .unwrap()
            .sample(50, 4)
            .unwrap();
        assert_eq!(sure.counts[4], 50);
    }

    proptest! {
        #[test]
        fn distributions_normalized(ws in proptest::collection::vec((-1.0f64..1.0, 0.01f64..1.0), 1..6), n in 1u32..8) {
            let total: f64 = ws.iter().map(|w| w.1).sum();
            let m = SpectralModel::new(ws.iter().map(|w| w.0).collect(), ws.iter().map(|w| w.1 / total).collect()).unwrap();
            let d = qpe_distribution(&m, 1 << n).unwrap();
            prop_assert!((d.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let shifted = m.mapped(&crate::spectral::AffineMap { scale: 0.5, shift: 0.5 }).unwrap();
            let q = qubitized_qpe_distribution(&shifted, 1 << n).unwrap();
            prop_assert!((q.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn hadamard_deterministic(t in -1.0f64..1.0, shots in 1u64..10_000, seed in any::<u64>()) {
            let a = hadamard_test_sample(t, shots, seed).unwrap();
            prop_assert_eq!(a, hadamard_test_sample(t, shots, seed).unwrap());
            prop_assert!(a.abs() <= 1.0);
        }
    }
}

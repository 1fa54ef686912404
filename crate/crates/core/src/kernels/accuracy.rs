use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fejer_eval, gaussian_eval, qubitized_fejer_eval, Kernel};
use crate::error::{validation, Result};
use crate::quad::{adaptive_simpson_split, uniform_grid};

const QUAD_TOL: f64 = 1e-10;
// grid points sitting exactly on a window edge count as captured
const EDGE_TOL: f64 = 1e-12;

/// Measured Sigma: one minus the smallest mass captured within `+-Delta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaAccuracy {
    pub measured_sigma: f64,
    pub delta: f64,
    pub spacing: f64,
    pub worst_omega0: f64,
    /// `(omega0, captured mass)` on the sup grid.
    pub rows: Vec<(f64, f64)>,
}

impl SigmaAccuracy {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("omega0,mass\n");
        for (w, m) in &self.rows {
            out.push_str(&format!("{w:.12e},{m:.15e}\n"));
        }
        out
    }
}

/// Distance on the period-2 outcome circle.
fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs() % 2.0;
    d.min(2.0 - d)
}

/// Sup-grid check of the Sigma-accuracy definition.
///
/// Fejer: outcome sums over `sigma_k` with circular distance `<= delta`, `omega0`
/// on `[-1, 1]`. Qubitized Fejer: `omega0` on `[0, 1]` and outcomes whose
/// recovered frequency `cos(pi sigma_k)` lies within `delta`. Gaussian and
/// Jackson: adaptive quadrature of the density over `[omega0 - delta, omega0 + delta]`.
pub fn sigma_accuracy(kernel: &Kernel, delta: f64, spacing: f64) -> Result<SigmaAccuracy> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(validation(format!("delta {delta} outside (0, 1)")));
    }
    if !(spacing > 0.0) {
        return Err(validation("sup-grid spacing must be positive"));
    }
    let (lo, hi) = match kernel {
        Kernel::QubitizedFejer { .. } => (0.0, 1.0),
        _ => (-1.0, 1.0),
    };
    let omegas = uniform_grid(lo, hi, spacing);
    let masses: Vec<f64> = match kernel {
        Kernel::Fejer { n } => {
            let grid = kernel.outcome_grid().unwrap();
            omegas
                .par_iter()
                .map(|&w| {
                    grid.iter()
                        .filter(|&&s| circular_distance(s, w) <= delta + EDGE_TOL)
                        .map(|&s| fejer_eval(s, w, *n))
                        .sum()
                })
                .collect()
        }
        Kernel::QubitizedFejer { n } => {
            let grid = kernel.outcome_grid().unwrap();
            omegas
                .par_iter()
                .map(|&w| {
                    grid.iter()
                        .filter(|&&s| {
                            ((std::f64::consts::PI * s).cos() - w).abs() <= delta + EDGE_TOL
                        })
                        .map(|&s| qubitized_fejer_eval(s, w, *n).unwrap())
                        .sum()
                })
                .collect()
        }
        Kernel::Gaussian { lambda } => omegas
            .par_iter()
            .map(|&w| {
                adaptive_simpson_split(
                    |s| gaussian_eval(s, w, *lambda),
                    w - delta,
                    w + delta,
                    &[w],
                    QUAD_TOL,
                )
            })
            .collect(),
        Kernel::Jackson(j) => {
            // translation invariant: one quadrature serves every omega0
            let m = j.captured_mass(delta);
            vec![m; omegas.len()]
        }
    };
    let (worst, min_mass) =
        omegas
            .iter()
            .zip(&masses)
            .fold((omegas[0], f64::INFINITY), |acc, (&w, &m)| {
                if m < acc.1 {
                    (w, m)
                } else {
                    acc
                }
            });
    Ok(SigmaAccuracy {
        measured_sigma: (1.0 - min_mass).max(0.0),
        delta,
        spacing,
        worst_omega0: worst,
        rows: omegas.into_iter().zip(masses).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{
        fejer_plan, fejer_tail_bound, git_resolution, qubitized_fejer_plan, AccuracyTarget,
        KernelSpec,
    };

    #[test]
    fn gaussian_meets_target() {
        let t = AccuracyTarget::new(0.1, 0.1, 0.1, 0.05).unwrap();
        let k = KernelSpec::gaussian(git_resolution(&t).unwrap())
            .build()
            .unwrap();
        let r = sigma_accuracy(&k, t.delta, t.delta / 20.0).unwrap();
        assert!(r.measured_sigma <= t.sigma);
        // erf identity for a translation-invariant kernel
        let lambda = git_resolution(&t).unwrap();
        let want = crate::special::erfc(t.delta / (2f64.sqrt() * lambda));
        assert!((r.measured_sigma - want).abs() < 1e-9);
        assert_eq!(r.rows.len(), 401);
    }

    #[test]
    fn narrow_gaussian_captures_everything() {
        let k = KernelSpec::gaussian(1e-4).build().unwrap();
        let r = sigma_accuracy(&k, 0.1, 0.005).unwrap();
        assert!(r.measured_sigma < 1e-12);
    }

    #[test]
    fn fejer_meets_target_and_tail_bound() {
        let t = AccuracyTarget::new(0.25, 0.1, 0.1, 0.05).unwrap();
        let n = fejer_plan(&t).unwrap();
        let r = sigma_accuracy(
            &KernelSpec::fejer(n).build().unwrap(),
            t.delta,
            t.delta / 20.0,
        )
        .unwrap();
        assert!(r.measured_sigma <= fejer_tail_bound(n, t.delta));
        assert!(fejer_tail_bound(n, t.delta) <= t.sigma);
    }

    #[test]
    fn under_resolved_fejer_fails() {
        let r = sigma_accuracy(&KernelSpec::fejer(8).build().unwrap(), 0.05, 0.0025).unwrap();
        assert!(r.measured_sigma > 0.25);
    }

    #[test]
    fn qubitized_meets_target_in_shifted_units() {
        let t = AccuracyTarget::new(0.1, 0.1, 0.1, 0.05).unwrap();
        let m = qubitized_fejer_plan(&t).unwrap();
        let k = KernelSpec::qubitized_fejer(m).build().unwrap();
        let r = sigma_accuracy(&k, t.delta / 2.0, t.delta / 40.0).unwrap();
        assert!(r.measured_sigma <= t.sigma, "{}", r.measured_sigma);
    }

    #[test]
    fn csv_layout() {
        let r = sigma_accuracy(&KernelSpec::fejer(16).build().unwrap(), 0.2, 0.5).unwrap();
        let csv = r.to_csv();
        assert!(csv.starts_with("omega0,mass\n"));
        assert_eq!(csv.lines().count(), 1 + r.rows.len());
    }

    #[test]
    fn circular_distance_wraps() {
        assert!((circular_distance(-1.0, 0.95) - 0.05).abs() < 1e-15);
        assert_eq!(circular_distance(0.2, 0.2), 0.0);
    }
}

//! Kernel families, their resolution planners and the Sigma-accuracy checker.

mod accuracy;
mod fejer;
mod gaussian;
mod jackson;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{validation, Result};

pub use accuracy::{sigma_accuracy, SigmaAccuracy};
pub use fejer::{
    delta_theta, fejer_eval, fejer_grid, fejer_plan, fejer_plan_with_cap, fejer_tail_bound,
    qubitized_fejer_eval, qubitized_fejer_plan, qubitized_fejer_plan_with_cap, DEFAULT_ORDER_CAP,
};
pub use gaussian::{gaussian_eval, git_resolution};
pub use jackson::{
    jackson_approx, jackson_coeffs, jackson_d_min, jackson_g, jackson_plan, jackson_tau,
    AmplifierProvider, JacksonKernel, JacksonPlan, MajorityVote,
};

/// Target `(Sigma, Delta, beta, eta)` of an approximation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTarget {
    pub sigma: f64,
    pub delta: f64,
    pub beta: f64,
    pub eta: f64,
}

impl AccuracyTarget {
    pub fn new(sigma: f64, delta: f64, beta: f64, eta: f64) -> Result<Self> {
        let t = Self {
            sigma,
            delta,
            beta,
            eta,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma", self.sigma),
            ("delta", self.delta),
            ("beta", self.beta),
            ("eta", self.eta),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(validation(format!(
                    "{name} = {v} must lie strictly inside (0, 1)"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacksonParams {
    pub k: u32,
    pub n: u32,
    pub delta: f64,
    pub normalization: f64,
}

/// Serializable description of one kernel: `{"family": ..., "params": {...}}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum KernelSpec {
    Fejer { n: u64 },
    QubitizedFejer { n: u64 },
    Gaussian { lambda: f64 },
    Jackson(JacksonParams),
}

impl KernelSpec {
    pub fn fejer(n: u64) -> Self {
        KernelSpec::Fejer { n }
    }

    pub fn qubitized_fejer(n: u64) -> Self {
        KernelSpec::QubitizedFejer { n }
    }

    pub fn gaussian(lambda: f64) -> Self {
        KernelSpec::Gaussian { lambda }
    }

    /// Jackson spec with its normalization computed by quadrature.
    pub fn jackson(delta: f64, n: u32, k: u32) -> Result<Self> {
        let kern = JacksonKernel::new(delta, n, k)?;
        Ok(KernelSpec::Jackson(kern.params()))
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Fejer { n } | KernelSpec::QubitizedFejer { n } => {
                if n < 2 || !n.is_power_of_two() {
                    return Err(validation(format!(
                        "Fejer order {n} must be a power of two >= 2"
                    )));
                }
            }
            KernelSpec::Gaussian { lambda } => {
                if !(lambda > 0.0) || !lambda.is_finite() {
                    return Err(validation(format!(
                        "Gaussian width {lambda} must be positive"
                    )));
                }
            }
            KernelSpec::Jackson(p) => {
                if !(p.delta > 0.0 && p.delta < 1.0) || p.k < 1 || p.n < 1 {
                    return Err(validation(format!("invalid Jackson parameters {p:?}")));
                }
                if !(p.normalization > 0.0) || !p.normalization.is_finite() {
                    return Err(validation("Jackson normalization must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Kernel> {
        self.validate()?;
        Ok(match *self {
            KernelSpec::Fejer { n } => Kernel::Fejer { n },
            KernelSpec::QubitizedFejer { n } => Kernel::QubitizedFejer { n },
            KernelSpec::Gaussian { lambda } => Kernel::Gaussian { lambda },
            KernelSpec::Jackson(p) => Kernel::Jackson(Arc::new(JacksonKernel::with_normalization(
                p.delta,
                p.n,
                p.k,
                p.normalization,
            )?)),
        })
    }
}

/// Evaluable kernel built from a [`KernelSpec`].
#[derive(Clone, Debug)]
pub enum Kernel {
    Fejer { n: u64 },
    QubitizedFejer { n: u64 },
    Gaussian { lambda: f64 },
    Jackson(Arc<JacksonKernel>),
}

impl Kernel {
    /// `K(nu, omega)`.
    pub fn eval(&self, nu: f64, omega: f64) -> Result<f64> {
        match self {
            Kernel::Fejer { n } => Ok(fejer_eval(nu, omega, *n)),
            Kernel::QubitizedFejer { n } => qubitized_fejer_eval(nu, omega, *n),
            Kernel::Gaussian { lambda } => Ok(gaussian_eval(nu, omega, *lambda)),
            Kernel::Jackson(j) => Ok(j.eval(nu, omega)),
        }
    }

    /// Fejer families produce outcome probabilities on a finite grid.
    pub fn is_discrete(&self) -> bool {
        matches!(self, Kernel::Fejer { .. } | Kernel::QubitizedFejer { .. })
    }

    /// Translation-invariant kernels depend on `nu - omega` only.
    pub fn is_translation_invariant(&self) -> bool {
        matches!(self, Kernel::Gaussian { .. } | Kernel::Jackson(_))
    }

    /// Characteristic width in the transform variable.
    pub fn width(&self) -> f64 {
        match self {
            Kernel::Fejer { n } | Kernel::QubitizedFejer { n } => 2.0 / *n as f64,
            Kernel::Gaussian { lambda } => *lambda,
            Kernel::Jackson(j) => 2.0 * j.delta(),
        }
    }

    /// Outcome grid `sigma_k = 2k/N - 1` for the discrete families.
    pub fn outcome_grid(&self) -> Option<Vec<f64>> {
        match self {
            Kernel::Fejer { n } | Kernel::QubitizedFejer { n } => Some(fejer_grid(*n)),
            _ => None,
        }
    }

    pub fn spec(&self) -> KernelSpec {
        match self {
            Kernel::Fejer { n } => KernelSpec::Fejer { n: *n },
            Kernel::QubitizedFejer { n } => KernelSpec::QubitizedFejer { n: *n },
            Kernel::Gaussian { lambda } => KernelSpec::Gaussian { lambda: *lambda },
            Kernel::Jackson(j) => KernelSpec::Jackson(j.params()),
        }
    }
}

//! Boundary-adjusted priors, training updates and prediction.

mod adjusted;
pub mod closed_form;
mod emulator;
pub mod multivariate;

pub use adjusted::{adjust_set, adjust_single, BoundaryAdjustedPrior, DENOMINATOR_EPS, MAX_RANDOM_PROBES};
pub use emulator::{update_by_training, Emulator, Prediction, JITTER_LADDER};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::CorrelationKernel;

/// Second-order prior `E[f(x)] = beta`, `Cov[f(x), f(x')] = sigma2 r(x - x')`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPrior")]
pub struct EmulatorPrior {
    beta: f64,
    sigma2: f64,
    kernel: CorrelationKernel,
}

#[derive(Deserialize)]
struct RawPrior {
    beta: f64,
    sigma2: f64,
    kernel: CorrelationKernel,
}

impl TryFrom<RawPrior> for EmulatorPrior {
    type Error = Error;

    fn try_from(r: RawPrior) -> Result<Self> {
        EmulatorPrior::new(r.beta, r.sigma2, r.kernel)
    }
}

impl EmulatorPrior {
    pub fn new(beta: f64, sigma2: f64, kernel: CorrelationKernel) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::InvalidArgument(format!("prior mean must be finite, got {beta}")));
        }
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "prior variance must be positive and finite, got {sigma2}"
            )));
        }
        Ok(EmulatorPrior { beta, sigma2, kernel })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn kernel(&self) -> &CorrelationKernel {
        &self.kernel
    }

    pub fn p(&self) -> usize {
        self.kernel.dim()
    }

    /// Prior covariance `sigma2 r(x - x')`.
    pub fn covariance(&self, x: &[f64], x2: &[f64]) -> f64 {
        self.sigma2 * self.kernel.corr_points(x, x2)
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite input {x:?}")));
        }
        Ok(())
    }
}

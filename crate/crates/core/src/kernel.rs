//! Product correlation functions.
//!
//! Every correlation is a product of one-dimensional factors,
//! `r(d) = prod_j r_j(d_j)`, which is what makes boundary conditioning
//! analytic. `r_J` restricts the product to an index set `J` (with
//! `r_{empty} = 1`), and the updated correlation component is
//! `R_J(a, a') = r_J(a - a') - r_J(a) r_J(a')`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    /// `r_j(d) = exp(-(d / theta_j)^2)`
    Gaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelSpec", into = "KernelSpec")]
pub struct CorrelationKernel {
    family: KernelFamily,
    theta: Vec<f64>,
}

/// Serialized form, `{ "family": "gaussian", "theta": [...] }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub theta: Vec<f64>,
}

impl TryFrom<KernelSpec> for CorrelationKernel {
    type Error = Error;

    fn try_from(spec: KernelSpec) -> Result<Self> {
        CorrelationKernel::new(spec.family, spec.theta)
    }
}

impl From<CorrelationKernel> for KernelSpec {
    fn from(k: CorrelationKernel) -> Self {
        KernelSpec {
            family: k.family,
            theta: k.theta,
        }
    }
}

impl CorrelationKernel {
    pub fn new(family: KernelFamily, theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidKernel("no lengthscales given".into()));
        }
        if let Some(t) = theta.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::InvalidKernel(format!(
                "lengthscales must be positive and finite, got {t}"
            )));
        }
        Ok(CorrelationKernel { family, theta })
    }

    pub fn gaussian(theta: Vec<f64>) -> Result<Self> {
        Self::new(KernelFamily::Gaussian, theta)
    }

    /// Gaussian kernel with a common lengthscale in every dimension.
    pub fn isotropic(p: usize, theta: f64) -> Result<Self> {
        Self::gaussian(vec![theta; p])
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// `r(d)` over all dimensions.
    pub fn corr(&self, d: &[f64]) -> Result<f64> {
        self.check_len(d)?;
        Ok(self.corr_all(d))
    }

    /// `r_J(q)`; 1 for an empty index set.
    pub fn corr_subset(&self, dims: &[usize], q: &[f64]) -> Result<f64> {
        self.check_len(q)?;
        self.check_dims(dims)?;
        Ok(self.corr_on(dims, q))
    }

    /// `R_J(a, a') = r_J(a - a') - r_J(a) r_J(a')`.
    ///
    /// An empty `J` only arises from a boundary without normal directions,
    /// which [`crate::geometry::Boundary`] refuses to construct.
    pub fn updated_corr(&self, dims: &[usize], a: &[f64], a2: &[f64]) -> Result<f64> {
        self.check_len(a)?;
        self.check_len(a2)?;
        self.check_dims(dims)?;
        debug_assert!(!dims.is_empty(), "updated correlation over an empty index set");
        Ok(self.updated_corr_on(dims, a, a2))
    }

    pub(crate) fn corr_all(&self, d: &[f64]) -> f64 {
        match self.family {
            KernelFamily::Gaussian => {
                let s: f64 = d
                    .iter()
                    .zip(&self.theta)
                    .map(|(di, t)| (di / t) * (di / t))
                    .sum();
                (-s).exp()
            }
        }
    }

    /// Correlation between two points, `r(x - y)`, without allocating.
    pub(crate) fn corr_points(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.family {
            KernelFamily::Gaussian => {
                let s: f64 = x
                    .iter()
                    .zip(y)
                    .zip(&self.theta)
                    .map(|((xi, yi), t)| {
                        let u = (xi - yi) / t;
                        u * u
                    })
                    .sum();
                (-s).exp()
            }
        }
    }

    pub(crate) fn corr_on(&self, dims: &[usize], q: &[f64]) -> f64 {
        match self.family {
            KernelFamily::Gaussian => (-self.sq_sum(dims, q)).exp(),
        }
    }

    pub(crate) fn updated_corr_on(&self, dims: &[usize], a: &[f64], a2: &[f64]) -> f64 {
        match self.family {
            // exp(-|a-a'|^2) - exp(-|a|^2 - |a'|^2)
            //   = exp(-|a|^2 - |a'|^2) * expm1(2 <a, a'>), which keeps full
            // relative precision when either offset is small.
            KernelFamily::Gaussian => {
                let mut norms = 0.0;
                let mut cross = 0.0;
                for &j in dims {
                    let u = a[j] / self.theta[j];
                    let v = a2[j] / self.theta[j];
                    norms += u * u + v * v;
                    cross += u * v;
                }
                if cross.abs() < 0.5 {
                    (-norms).exp() * (2.0 * cross).exp_m1()
                } else {
                    // exp(-norms) may underflow while expm1 overflows
                    (-(norms - 2.0 * cross)).exp() - (-norms).exp()
                }
            }
        }
    }

    fn sq_sum(&self, dims: &[usize], q: &[f64]) -> f64 {
        dims.iter()
            .map(|&j| {
                let u = q[j] / self.theta[j];
                u * u
            })
            .sum()
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(())
    }

    fn check_dims(&self, dims: &[usize]) -> Result<()> {
        match dims.iter().find(|&&j| j >= self.dim()) {
            Some(&index) => Err(Error::IndexOutOfRange {
                index,
                p: self.dim(),
            }),
            None => Ok(()),
        }
    }
}

/// Indices of `0..p` not in `dims` (which must be sorted).
pub fn complement(p: usize, dims: &[usize]) -> Vec<usize> {
    (0..p).filter(|j| dims.binary_search(j).is_err()).collect()
}

//! Separable multivariate emulators, `Cov[f_v(x), f_w(x')] = Sigma_vw r(x - x')`.
//!
//! Two cases are supported: boundaries on which every output is known, and
//! a single boundary on which only one output is known.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use super::{BoundaryAdjustedPrior, EmulatorPrior};
use crate::error::{Error, Result};
use crate::geometry::{validate_set, Boundary};
use crate::kernel::CorrelationKernel;

/// Symmetric positive semi-definite `q x q` output covariance.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputCovariance {
    sigma: DMatrix<f64>,
}

impl OutputCovariance {
    /// Requires symmetry and eigenvalues at least `-1e-10 * trace`.
    pub fn new(sigma: DMatrix<f64>) -> Result<Self> {
        let q = sigma.nrows();
        if q == 0 || sigma.ncols() != q {
            return Err(Error::DimensionMismatch {
                expected: q.max(1),
                got: sigma.ncols(),
            });
        }
        let scale = sigma.amax().max(f64::MIN_POSITIVE);
        if (&sigma - sigma.transpose()).amax() > 1e-12 * scale {
            return Err(Error::InvalidArgument("output covariance is not symmetric".into()));
        }
        let min = SymmetricEigen::new(sigma.clone()).eigenvalues.min();
        if min < -1e-10 * sigma.trace().abs() {
            return Err(Error::NotPositiveSemiDefinite { min_eigenvalue: min });
        }
        Ok(OutputCovariance { sigma })
    }

    pub fn q(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn get(&self, v: usize, w: usize) -> f64 {
        self.sigma[(v, w)]
    }
}

/// Solver returning all `q` outputs at a point on the boundary.
pub type VectorSolver = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A boundary on which every output component is known.
#[derive(Clone)]
pub struct MultiBoundary {
    pub label: String,
    pub normal: Vec<usize>,
    pub alpha: Vec<f64>,
    pub solver: VectorSolver,
}

/// Multivariate moments after conditioning every output on a validated
/// set of full-output boundaries.
pub struct MultivariateAdjusted {
    beta: Vec<f64>,
    sigma: OutputCovariance,
    corr: BoundaryAdjustedPrior,
    components: Vec<BoundaryAdjustedPrior>,
}

impl MultivariateAdjusted {
    pub fn new(
        beta: Vec<f64>,
        sigma: OutputCovariance,
        kernel: CorrelationKernel,
        boundaries: Vec<MultiBoundary>,
    ) -> Result<Self> {
        let q = sigma.q();
        if beta.len() != q {
            return Err(Error::DimensionMismatch {
                expected: q,
                got: beta.len(),
            });
        }
        let p = kernel.dim();
        let component_set = |v: usize| -> Result<_> {
            let bs = boundaries
                .iter()
                .map(|mb| {
                    let solver = mb.solver.clone();
                    Boundary::from_fn(mb.label.clone(), p, mb.normal.clone(), mb.alpha.clone(), move |x| {
                        let out = solver(x);
                        out.get(v).copied().unwrap_or(f64::NAN)
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            validate_set(bs)
        };
        // unit variance: the adjusted correlation shared by all outputs
        let corr = BoundaryAdjustedPrior::new(EmulatorPrior::new(0.0, 1.0, kernel.clone())?, component_set(0)?)?;
        let components = (0..q)
            .map(|v| {
                let var = sigma.get(v, v).max(f64::MIN_POSITIVE);
                BoundaryAdjustedPrior::new(EmulatorPrior::new(beta[v], var, kernel.clone())?, component_set(v)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MultivariateAdjusted {
            beta,
            sigma,
            corr,
            components,
        })
    }

    pub fn q(&self) -> usize {
        self.sigma.q()
    }

    pub fn prior_mean(&self) -> &[f64] {
        &self.beta
    }

    pub fn mean(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.components.iter().map(|c| c.mean(x)).collect()
    }

    /// `Sigma * c(x, x')` with `c` the adjusted correlation.
    pub fn covariance(&self, x: &[f64], x2: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.sigma.matrix() * self.corr.covariance(x, x2)?)
    }
}

pub fn adjust_single_multivariate(
    beta: Vec<f64>,
    sigma: OutputCovariance,
    kernel: CorrelationKernel,
    b: MultiBoundary,
) -> Result<MultivariateAdjusted> {
    MultivariateAdjusted::new(beta, sigma, kernel, vec![b])
}

/// Moments of every output after learning output `u` along one boundary.
///
/// The result no longer has product correlation structure, so it cannot
/// be conditioned on further boundaries.
pub struct CrossOutputAdjusted {
    beta: Vec<f64>,
    sigma: OutputCovariance,
    kernel: CorrelationKernel,
    boundary: Boundary,
    u: usize,
}

impl CrossOutputAdjusted {
    /// `boundary`'s solver gives output `u` on the boundary.
    pub fn new(
        beta: Vec<f64>,
        sigma: OutputCovariance,
        kernel: CorrelationKernel,
        boundary: Boundary,
        u: usize,
    ) -> Result<Self> {
        let q = sigma.q();
        if beta.len() != q {
            return Err(Error::DimensionMismatch {
                expected: q,
                got: beta.len(),
            });
        }
        if u >= q {
            return Err(Error::IndexOutOfRange { index: u, p: q });
        }
        if sigma.get(u, u) <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "known output {u} has non-positive variance {}",
                sigma.get(u, u)
            )));
        }
        if boundary.p() != kernel.dim() {
            return Err(Error::DimensionMismatch {
                expected: kernel.dim(),
                got: boundary.p(),
            });
        }
        Ok(CrossOutputAdjusted {
            beta,
            sigma,
            kernel,
            boundary,
            u,
        })
    }

    fn check(&self, v: usize, x: &[f64]) -> Result<()> {
        if v >= self.sigma.q() {
            return Err(Error::IndexOutOfRange {
                index: v,
                p: self.sigma.q(),
            });
        }
        if x.len() != self.kernel.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.kernel.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `E[f_v(x)] + Sigma_vu / Sigma_uu r_J(a) (f_u(x^K) - E[f_u(x^K)])`.
    pub fn mean(&self, v: usize, x: &[f64]) -> Result<f64> {
        self.check(v, x)?;
        let xk = self.boundary.project_point(x);
        let a: Vec<f64> = x.iter().zip(&xk).map(|(p, q)| p - q).collect();
        let r = self.kernel.corr_on(self.boundary.normal(), &a);
        let du = self.boundary.solve(&xk)? - self.beta[self.u];
        Ok(self.beta[v] + self.sigma.get(v, self.u) / self.sigma.get(self.u, self.u) * r * du)
    }

    /// Adjusted `Cov[f_v(x), f_w(x')]`.
    pub fn covariance(&self, v: usize, w: usize, x: &[f64], x2: &[f64]) -> Result<f64> {
        self.check(v, x)?;
        self.check(w, x2)?;
        let j = self.boundary.normal();
        let free = self.boundary.free();
        let a: Vec<f64> = x.iter().zip(self.boundary.project_point(x)).map(|(p, q)| p - q).collect();
        let a2: Vec<f64> = x2.iter().zip(self.boundary.project_point(x2)).map(|(p, q)| p - q).collect();
        let d: Vec<f64> = x.iter().zip(x2).map(|(p, q)| p - q).collect();
        let s = &self.sigma;
        let u = self.u;
        let inner = s.get(v, w) * self.kernel.corr_on(j, &d)
            - s.get(v, u) * s.get(w, u) / s.get(u, u) * self.kernel.corr_on(j, &a) * self.kernel.corr_on(j, &a2);
        Ok(inner * self.kernel.corr_on(free, &d))
    }

    /// Always fails: conditioning on a further boundary needs product
    /// correlation structure, which a partial-output update destroys.
    pub fn adjust_further(&self, b: &Boundary) -> Result<()> {
        Err(Error::UnsupportedChain(format!(
            "cannot condition on `{}` after learning only output {} along `{}`",
            b.label(),
            self.u,
            self.boundary.label()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::adjust_single;
    use approx::assert_relative_eq;
    use nalgebra::{dmatrix, DVector};

    fn kernel() -> CorrelationKernel {
        CorrelationKernel::gaussian(vec![0.7, 1.2]).unwrap()
    }

    fn sigma3() -> OutputCovariance {
        OutputCovariance::new(dmatrix![2.0, 0.6, -0.3; 0.6, 1.0, 0.2; -0.3, 0.2, 0.5]).unwrap()
    }

    fn vec_solver() -> VectorSolver {
        Arc::new(|x: &[f64]| vec![x[1].sin(), x[1] * 0.5, x[1].cos()])
    }

    #[test]
    fn rejects_bad_sigma() {
        assert!(OutputCovariance::new(dmatrix![1.0, 2.0; 2.0, 1.0]).is_err());
        assert!(OutputCovariance::new(dmatrix![1.0, 0.1; 0.0, 1.0]).is_err());
        assert!(OutputCovariance::new(dmatrix![1.0, 1.0; 1.0, 1.0]).is_ok());
    }

    #[test]
    fn single_output_reduces_to_univariate() {
        let mb = MultiBoundary {
            label: "K".into(),
            normal: vec![0],
            alpha: vec![0.1],
            solver: Arc::new(|x: &[f64]| vec![x[1].sin()]),
        };
        let multi =
            adjust_single_multivariate(vec![0.3], OutputCovariance::new(dmatrix![1.7]).unwrap(), kernel(), mb).unwrap();
        let uni = adjust_single(
            EmulatorPrior::new(0.3, 1.7, kernel()).unwrap(),
            Boundary::from_fn("K", 2, vec![0], vec![0.1], |x| x[1].sin()).unwrap(),
        )
        .unwrap();
        let x = [0.9, -0.4];
        let y = [-0.3, 0.8];
        assert_relative_eq!(multi.mean(&x).unwrap()[0], uni.mean(&x).unwrap(), max_relative = 1e-14);
        assert_relative_eq!(
            multi.covariance(&x, &y).unwrap()[(0, 0)],
            uni.covariance(&x, &y).unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn on_boundary_variance_vanishes_and_diagonal_decouples() {
        let mb = MultiBoundary {
            label: "K".into(),
            normal: vec![0],
            alpha: vec![0.1],
            solver: vec_solver(),
        };
        let diag = OutputCovariance::new(dmatrix![2.0, 0.0, 0.0; 0.0, 1.0, 0.0; 0.0, 0.0, 0.5]).unwrap();
        let multi = adjust_single_multivariate(vec![0.0, 1.0, -1.0], diag, kernel(), mb).unwrap();
        assert_eq!(multi.covariance(&[0.1, 0.7], &[0.1, 0.7]).unwrap().amax(), 0.0);
        let x = [0.9, -0.4];
        let means = multi.mean(&x).unwrap();
        let cov = multi.covariance(&x, &x).unwrap();
        for (v, (beta, var)) in [(0.0, 2.0), (1.0, 1.0), (-1.0, 0.5)].into_iter().enumerate() {
            let uni = adjust_single(
                EmulatorPrior::new(beta, var, kernel()).unwrap(),
                Boundary::from_fn("K", 2, vec![0], vec![0.1], {
                    let s = vec_solver();
                    move |x| s(x)[v]
                })
                .unwrap(),
            )
            .unwrap();
            assert_relative_eq!(means[v], uni.mean(&x).unwrap(), max_relative = 1e-14);
            assert_relative_eq!(cov[(v, v)], uni.variance(&x).unwrap(), max_relative = 1e-14);
        }
        assert_eq!(cov[(0, 1)], 0.0);
    }

    fn cross() -> CrossOutputAdjusted {
        let k = Boundary::from_fn("K", 2, vec![0], vec![0.1], |x| x[1].sin()).unwrap();
        CrossOutputAdjusted::new(vec![0.0, 1.0, -1.0], sigma3(), kernel(), k, 0).unwrap()
    }

    #[test]
    fn cross_output_reductions() {
        let c = cross();
        let x = [0.9, -0.4];
        let y = [-0.3, 0.8];
        // v = w = u: univariate update with sigma2 = Sigma_uu
        let uni = adjust_single(
            EmulatorPrior::new(0.0, 2.0, kernel()).unwrap(),
            Boundary::from_fn("K", 2, vec![0], vec![0.1], |x| x[1].sin()).unwrap(),
        )
        .unwrap();
        assert_relative_eq!(c.mean(0, &x).unwrap(), uni.mean(&x).unwrap(), max_relative = 1e-14);
        assert_relative_eq!(c.covariance(0, 0, &x, &y).unwrap(), uni.covariance(&x, &y).unwrap(), epsilon = 1e-14);
        // Schur complement on the boundary
        let on = [0.1, 0.3];
        assert_relative_eq!(c.covariance(1, 1, &on, &on).unwrap(), 1.0 - 0.36 / 2.0, epsilon = 1e-14);
        assert!(matches!(c.adjust_further(&uni.chain()[0]), Err(Error::UnsupportedChain(_))));
    }

    #[test]
    fn cross_output_uncorrelated_is_untouched() {
        let s = OutputCovariance::new(dmatrix![2.0, 0.0; 0.0, 1.0]).unwrap();
        let k = Boundary::from_fn("K", 2, vec![0], vec![0.1], |x| x[1].sin()).unwrap();
        let c = CrossOutputAdjusted::new(vec![0.0, 1.0], s, kernel(), k, 0).unwrap();
        let x = [0.9, -0.4];
        let y = [-0.3, 0.8];
        assert_eq!(c.mean(1, &x).unwrap(), 1.0);
        assert_relative_eq!(
            c.covariance(1, 1, &x, &y).unwrap(),
            kernel().corr(&[1.2, -1.2]).unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn cross_output_matches_joint_conditioning() {
        // condition (f_v(x), f_w(y)) jointly on output 0 at many boundary points
        let c = cross();
        let kern = kernel();
        let s = sigma3();
        let x = [0.9, -0.4];
        let y = [-0.3, 0.8];
        // the projections of x and y suffice; extra points must not matter
        let pts: Vec<[f64; 2]> = vec![[0.1, x[1]], [0.1, y[1]], [0.1, 2.5], [0.1, -2.7]];
        let m = pts.len();
        let kmat = DMatrix::from_fn(m, m, |i, j| s.get(0, 0) * kern.corr(&[0.0, pts[i][1] - pts[j][1]]).unwrap());
        let chol = kmat.clone().cholesky().unwrap();
        let resid = DVector::from_fn(m, |i, _| pts[i][1].sin() - 0.0);
        for (v, w) in [(1, 1), (1, 2), (2, 2), (0, 2)] {
            let kx = DVector::from_fn(m, |i, _| s.get(v, 0) * kern.corr(&[x[0] - 0.1, x[1] - pts[i][1]]).unwrap());
            let ky = DVector::from_fn(m, |i, _| s.get(w, 0) * kern.corr(&[y[0] - 0.1, y[1] - pts[i][1]]).unwrap());
            let mean = [0.0, 1.0, -1.0][v] + kx.dot(&chol.solve(&resid));
            let cov = s.get(v, w) * kern.corr(&[x[0] - y[0], x[1] - y[1]]).unwrap() - kx.dot(&chol.solve(&ky));
            assert_relative_eq!(c.mean(v, &x).unwrap(), mean, epsilon = 1e-8);
            assert_relative_eq!(c.covariance(v, w, &x, &y).unwrap(), cov, epsilon = 1e-8);
        }
    }
}

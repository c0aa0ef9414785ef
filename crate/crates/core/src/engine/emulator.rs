//! Second-stage update of a boundary-adjusted prior by ordinary training runs.

use log::warn;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::adjusted::{key, BoundaryAdjustedPrior, Eval, Features};
use crate::error::{Error, Result};

/// Diagonal jitter tried in turn, in units of the prior variance.
pub const JITTER_LADDER: [f64; 6] = [0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

/// Training inputs closer than this to a boundary are dropped.
const ON_BOUNDARY_TOL: f64 = 1e-12;

/// Batch prediction: means, variances and optionally the joint covariance.
#[derive(Clone, Debug)]
pub struct Prediction {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub covariance: Option<DMatrix<f64>>,
}

/// Boundary-adjusted prior updated by `n` training runs.
#[derive(Clone, Debug)]
pub struct Emulator {
    base: BoundaryAdjustedPrior,
    x: Vec<Vec<f64>>,
    d: Vec<f64>,
    dropped: Vec<usize>,
    feats: Vec<Features>,
    chol: Option<Cholesky<f64, Dyn>>,
    alpha: DVector<f64>,
    jitter: f64,
}

pub fn update_by_training(base: BoundaryAdjustedPrior, x: Vec<Vec<f64>>, d: Vec<f64>) -> Result<Emulator> {
    Emulator::new(base, x, d)
}

impl Emulator {
    /// Points lying on a boundary carry no new information and are dropped
    /// with a warning; repeated points are an error.
    pub fn new(base: BoundaryAdjustedPrior, x: Vec<Vec<f64>>, d: Vec<f64>) -> Result<Self> {
        if x.len() != d.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: d.len(),
            });
        }
        for xi in &x {
            base.prior().check_point(xi)?;
        }
        if let Some(v) = d.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite training output {v}")));
        }
        let mut dropped = Vec::new();
        let mut kept_x = Vec::with_capacity(x.len());
        let mut kept_d = Vec::with_capacity(d.len());
        for (i, (xi, di)) in x.into_iter().zip(d).enumerate() {
            if base.boundary_set().on_any(&xi, ON_BOUNDARY_TOL) {
                warn!("dropping training point {i} on a known boundary: {xi:?}");
                dropped.push(i);
            } else {
                kept_x.push(xi);
                kept_d.push(di);
            }
        }
        let mut seen = std::collections::HashMap::new();
        for (i, xi) in kept_x.iter().enumerate() {
            if let Some(j) = seen.insert(key(xi), i) {
                return Err(Error::SingularTrainingCovariance(format!(
                    "training points {j} and {i} coincide"
                )));
            }
        }

        let h = base.chain().len();
        let n = kept_x.len();
        let ev = base.eval();
        let feats: Vec<Features> = kept_x.iter().map(|xi| (*ev.features(h, xi)).clone()).collect();
        let mut resid = DVector::zeros(n);
        for i in 0..n {
            resid[i] = kept_d[i] - ev.mean(h, &kept_x[i])?;
        }
        let (chol, alpha, jitter) = if n == 0 {
            (None, resid, 0.0)
        } else {
            let v = DMatrix::from_fn(n, n, |i, j| {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                ev.cross(&feats[a], &feats[b])
            });
            let (chol, jitter) = factorize(v, base.prior().sigma2())?;
            let alpha = chol.solve(&resid);
            (Some(chol), alpha, jitter)
        };
        if jitter > 0.0 {
            warn!("training covariance needed jitter {jitter:e} x sigma2");
        }
        drop(ev);
        Ok(Emulator {
            base,
            x: kept_x,
            d: kept_d,
            dropped,
            feats,
            chol,
            alpha,
            jitter,
        })
    }

    pub fn base(&self) -> &BoundaryAdjustedPrior {
        &self.base
    }

    /// Training inputs actually used.
    pub fn design(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn outputs(&self) -> &[f64] {
        &self.d
    }

    /// Input rows dropped for lying on a boundary.
    pub fn dropped(&self) -> &[usize] {
        &self.dropped
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Jitter applied to the training covariance, in units of `sigma2`.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn predict(&self, xs: &[Vec<f64>], want_cov: bool) -> Result<Prediction> {
        for x in xs {
            self.base.prior().check_point(x)?;
        }
        let ev = self.base.eval();
        let h = self.base.chain().len();
        let m = xs.len();
        let feats: Vec<_> = xs.iter().map(|x| ev.features(h, x)).collect();
        let mut mean = Vec::with_capacity(m);
        for x in xs {
            mean.push(ev.mean(h, x)?);
        }
        let mut variance: Vec<f64> = feats.iter().map(|f| ev.cross(f, f)).collect();
        let mut covariance = want_cov.then(|| self.prior_cov(&ev, &feats));

        if let Some(chol) = &self.chol {
            let n = self.n();
            let k = DMatrix::from_fn(n, m, |i, j| ev.cross(&self.feats[i], &feats[j]));
            let shift = k.tr_mul(&self.alpha);
            for (mj, s) in mean.iter_mut().zip(shift.iter()) {
                *mj += s;
            }
            let w = chol
                .l_dirty()
                .solve_lower_triangular(&k)
                .expect("Cholesky factor has a nonzero diagonal");
            for (j, v) in variance.iter_mut().enumerate() {
                *v -= w.column(j).norm_squared();
            }
            if let Some(c) = covariance.as_mut() {
                *c -= w.tr_mul(&w);
            }
        }

        let sigma2 = self.base.prior().sigma2();
        for v in variance.iter_mut() {
            if *v < -1e-10 * sigma2 {
                warn!("negative predictive variance {v:e} clamped to zero");
            }
            *v = v.max(0.0);
        }
        if let Some(c) = covariance.as_mut() {
            // exact symmetry
            let sym = (&*c + c.transpose()) * 0.5;
            *c = sym;
        }
        Ok(Prediction {
            mean,
            variance,
            covariance,
        })
    }

    fn prior_cov(&self, ev: &Eval<'_>, feats: &[std::rc::Rc<Features>]) -> DMatrix<f64> {
        let m = feats.len();
        DMatrix::from_fn(m, m, |i, j| {
            let (a, b) = if i <= j { (i, j) } else { (j, i) };
            ev.cross(&feats[a], &feats[b])
        })
    }
}

/// Cholesky factorization with the escalating jitter ladder.
pub(crate) fn factorize(v: DMatrix<f64>, sigma2: f64) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let n = v.nrows();
    for &delta in &JITTER_LADDER {
        let mut a = v.clone();
        if delta > 0.0 {
            for i in 0..n {
                a[(i, i)] += delta * sigma2;
            }
        }
        if let Some(c) = Cholesky::new(a) {
            return Ok((c, delta));
        }
    }
    Err(Error::SingularTrainingCovariance(format!(
        "{n} x {n} covariance not positive definite with jitter up to {:e} x sigma2",
        JITTER_LADDER[JITTER_LADDER.len() - 1]
    )))
}

//! Brute-force reference: a dense Bayes linear update on a finite design
//! augmented with boundary evaluations.
//!
//! Conditioning on whole boundaries is equivalent to conditioning on the
//! simulator at the sequential projections of the training and target
//! points, so a plain `|D*| x |D*|` solve reproduces the analytic engine.
//! Nothing here uses the boundary recursion of [`crate::engine`].

use std::time::{Duration, Instant};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{EmulatorPrior, JITTER_LADDER};
use crate::error::{Error, Result};
use crate::geometry::{sequential_project, Boundary, BoundarySet};

/// Points closer than this (max-norm) are merged.
pub const DEDUP_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Training,
    /// Sequential projection onto the listed boundaries.
    BoundaryProjection(Vec<String>),
    /// Extra point sampled on a boundary.
    BoundaryGrid(String),
}

#[derive(Clone, Debug, Default)]
pub struct AugmentedDesign {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    provenance: Vec<Provenance>,
}

impl AugmentedDesign {
    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Append unless a point within [`DEDUP_TOL`] is already present.
    /// Returns whether the point was added.
    pub fn push(&mut self, x: Vec<f64>, value: f64, prov: Provenance) -> Result<bool> {
        if !value.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite design value at {x:?}")));
        }
        let dup = self
            .points
            .iter()
            .any(|y| y.iter().zip(&x).all(|(a, b)| (a - b).abs() <= DEDUP_TOL));
        if dup {
            return Ok(false);
        }
        self.points.push(x);
        self.values.push(value);
        self.provenance.push(prov);
        Ok(true)
    }

    /// Reorder rows; the naive update is invariant under this.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        AugmentedDesign {
            points: perm.iter().map(|&i| self.points[i].clone()).collect(),
            values: perm.iter().map(|&i| self.values[i]).collect(),
            provenance: perm.iter().map(|&i| self.provenance[i].clone()).collect(),
        }
    }
}

/// Training runs plus the sequential projections of training runs and
/// targets onto every nonempty subset of boundaries (in chain order).
pub fn build_augmented(
    x_d: &[Vec<f64>],
    d: &[f64],
    bset: &BoundarySet,
    targets: &[Vec<f64>],
) -> Result<AugmentedDesign> {
    if x_d.len() != d.len() {
        return Err(Error::DimensionMismatch {
            expected: x_d.len(),
            got: d.len(),
        });
    }
    let mut aug = AugmentedDesign::default();
    for (x, v) in x_d.iter().zip(d) {
        aug.push(x.clone(), *v, Provenance::Training)?;
    }
    let chain: Vec<&Boundary> = bset.ordered().collect();
    let h = chain.len();
    for x in x_d.iter().chain(targets) {
        for mask in 1u64..(1u64 << h) {
            let t: Vec<&Boundary> = (0..h).filter(|i| mask & (1 << i) != 0).map(|i| chain[i]).collect();
            let y = sequential_project(x, &t)?;
            let v = t[0].solve(&y)?;
            let labels = t.iter().map(|b| b.label().to_string()).collect();
            aug.push(y, v, Provenance::BoundaryProjection(labels))?;
        }
    }
    Ok(aug)
}

/// Add `m` points per boundary, uniform over `bounds` in the free directions.
pub fn add_boundary_grid(
    aug: &mut AugmentedDesign,
    bset: &BoundarySet,
    m: usize,
    bounds: &[(f64, f64)],
    seed: u64,
) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for b in bset.boundaries() {
        if bounds.len() != b.p() {
            return Err(Error::DimensionMismatch {
                expected: b.p(),
                got: bounds.len(),
            });
        }
        for _ in 0..m {
            let x: Vec<f64> = bounds.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect();
            let y = b.project_point(&x);
            let v = b.solve(&y)?;
            aug.push(y, v, Provenance::BoundaryGrid(b.label().to_string()))?;
        }
    }
    Ok(())
}

/// Size and timing of one naive update.
#[derive(Clone, Debug)]
pub struct OracleStats {
    pub size: usize,
    pub jitter: f64,
    pub factor_time: Duration,
    pub total_time: Duration,
}

#[derive(Clone, Debug)]
pub struct NaiveResult {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub stats: OracleStats,
}

/// Dense Bayes linear update of the prior by every point of `aug`.
pub fn naive_update(prior: &EmulatorPrior, aug: &AugmentedDesign, xs: &[Vec<f64>]) -> Result<NaiveResult> {
    let start = Instant::now();
    let n = aug.len();
    let p = prior.p();
    for x in aug.points.iter().chain(xs) {
        if x.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: x.len(),
            });
        }
    }
    let beta = prior.beta();
    let sigma2 = prior.sigma2();
    if n == 0 {
        return Ok(NaiveResult {
            mean: vec![beta; xs.len()],
            variance: vec![sigma2; xs.len()],
            stats: OracleStats {
                size: 0,
                jitter: 0.0,
                factor_time: Duration::ZERO,
                total_time: start.elapsed(),
            },
        });
    }
    let v = DMatrix::from_fn(n, n, |i, j| prior.covariance(&aug.points[i], &aug.points[j]));
    let t0 = Instant::now();
    let (chol, jitter) = factorize(v, sigma2, n)?;
    let factor_time = t0.elapsed();
    let resid = DVector::from_fn(n, |i, _| aug.values[i] - beta);
    let alpha = chol.solve(&resid);
    let k = DMatrix::from_fn(n, xs.len(), |i, j| prior.covariance(&aug.points[i], &xs[j]));
    let w = chol.solve(&k);
    let mut mean = Vec::with_capacity(xs.len());
    let mut variance = Vec::with_capacity(xs.len());
    for j in 0..xs.len() {
        let kj = k.column(j);
        mean.push(beta + kj.dot(&alpha));
        variance.push(sigma2 - kj.dot(&w.column(j)));
    }
    Ok(NaiveResult {
        mean,
        variance,
        stats: OracleStats {
            size: n,
            jitter,
            factor_time,
            total_time: start.elapsed(),
        },
    })
}

fn factorize(v: DMatrix<f64>, sigma2: f64, n: usize) -> Result<(Cholesky<f64, Dyn>, f64)> {
    for &delta in &JITTER_LADDER {
        let mut a = v.clone();
        for i in 0..n {
            a[(i, i)] += delta * sigma2;
        }
        if let Some(c) = Cholesky::new(a) {
            return Ok((c, delta));
        }
    }
    Err(Error::SingularMatrix { size: n })
}

/// Oracle predictions with one augmented design per target, which keeps
/// every dense system as small and well conditioned as possible.
pub fn naive_per_target(
    prior: &EmulatorPrior,
    x_d: &[Vec<f64>],
    d: &[f64],
    bset: &BoundarySet,
    xs: &[Vec<f64>],
) -> Result<NaiveResult> {
    let start = Instant::now();
    let mut mean = Vec::with_capacity(xs.len());
    let mut variance = Vec::with_capacity(xs.len());
    let mut size = 0;
    let mut jitter: f64 = 0.0;
    let mut factor_time = Duration::ZERO;
    for x in xs {
        let aug = build_augmented(x_d, d, bset, std::slice::from_ref(x))?;
        let r = naive_update(prior, &aug, std::slice::from_ref(x))?;
        mean.push(r.mean[0]);
        variance.push(r.variance[0]);
        size = size.max(r.stats.size);
        jitter = jitter.max(r.stats.jitter);
        factor_time += r.stats.factor_time;
    }
    Ok(NaiveResult {
        mean,
        variance,
        stats: OracleStats {
            size,
            jitter,
            factor_time,
            total_time: start.elapsed(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::validate_set;
    use crate::kernel::CorrelationKernel;
    use approx::assert_relative_eq;

    fn prior() -> EmulatorPrior {
        EmulatorPrior::new(0.5, 2.0, CorrelationKernel::gaussian(vec![1.0, 1.5, 0.8]).unwrap()).unwrap()
    }

    fn f(x: &[f64]) -> f64 {
        x[0].sin() + x[1] * x[2]
    }

    fn plane(label: &str, normal: Vec<usize>, alpha: Vec<f64>) -> Boundary {
        Boundary::from_fn(label, 3, normal, alpha, f).unwrap()
    }

    #[test]
    fn empty_design_returns_prior() {
        let r = naive_update(&prior(), &AugmentedDesign::default(), &[vec![0.0; 3]]).unwrap();
        assert_eq!(r.mean, vec![0.5]);
        assert_eq!(r.variance, vec![2.0]);
    }

    #[test]
    fn single_point_interpolates() {
        let mut aug = AugmentedDesign::default();
        aug.push(vec![0.1, 0.2, 0.3], 4.0, Provenance::Training).unwrap();
        let r = naive_update(&prior(), &aug, &[vec![0.1, 0.2, 0.3]]).unwrap();
        assert_relative_eq!(r.mean[0], 4.0, epsilon = 1e-12);
        assert!(r.variance[0].abs() < 1e-12);
    }

    #[test]
    fn augmented_sizes() {
        let xd: Vec<Vec<f64>> = (0..4).map(|i| vec![0.3 * i as f64 + 0.1, 0.7 - 0.2 * i as f64, 0.05 * i as f64 + 0.5]).collect();
        let d: Vec<f64> = xd.iter().map(|x| f(x)).collect();
        let targets = vec![vec![-1.0, 0.4, 0.9], vec![1.3, -0.8, 0.2]];
        let one = validate_set(vec![plane("A", vec![0], vec![0.0])]).unwrap();
        assert_eq!(build_augmented(&xd, &d, &one, &targets).unwrap().len(), 2 * 4 + 2);
        // a free direction keeps the triple intersection from collapsing to a point
        let plane4 = |label: &str, j: usize| Boundary::from_fn(label, 4, vec![j], vec![0.0], |x| x[3]).unwrap();
        let orth = validate_set(vec![plane4("A", 0), plane4("B", 1), plane4("C", 2)]).unwrap();
        let lift = |v: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            v.iter().enumerate().map(|(i, x)| [x.as_slice(), &[0.1 + i as f64]].concat()).collect()
        };
        let t4: Vec<Vec<f64>> = lift(&targets).into_iter().map(|mut x| { x[3] += 10.0; x }).collect();
        assert_eq!(build_augmented(&lift(&xd), &d, &orth, &t4).unwrap().len(), 8 * 4 + 7 * 2);
        let par = validate_set(vec![
            plane("A", vec![0], vec![0.0]),
            plane("B", vec![0], vec![2.0]),
            plane("C", vec![0], vec![-2.0]),
        ])
        .unwrap();
        assert_eq!(build_augmented(&xd, &d, &par, &targets).unwrap().len(), 4 * 4 + 3 * 2);
    }

    #[test]
    fn permutation_invariant() {
        let xd = vec![vec![0.1, 0.2, 0.3], vec![1.0, -0.5, 0.2], vec![-0.7, 0.9, -0.4]];
        let d: Vec<f64> = xd.iter().map(|x| f(x)).collect();
        let set = validate_set(vec![plane("A", vec![0], vec![0.0])]).unwrap();
        let xs = vec![vec![0.5, 0.5, 0.5]];
        let aug = build_augmented(&xd, &d, &set, &xs).unwrap();
        let a = naive_update(&prior(), &aug, &xs).unwrap();
        let perm: Vec<usize> = (0..aug.len()).rev().collect();
        let b = naive_update(&prior(), &aug.permuted(&perm), &xs).unwrap();
        assert_relative_eq!(a.mean[0], b.mean[0], epsilon = 1e-12);
        assert_relative_eq!(a.variance[0], b.variance[0], epsilon = 1e-12);
    }

    #[test]
    fn dedup_merges_coincident_projections() {
        let mut aug = AugmentedDesign::default();
        assert!(aug.push(vec![0.0, 1.0], 1.0, Provenance::Training).unwrap());
        assert!(!aug.push(vec![1e-13, 1.0], 1.0, Provenance::Training).unwrap());
        assert!(aug.push(vec![1e-11, 1.0], 1.0, Provenance::Training).unwrap());
    }
}

//! Conditioning on a validated set of boundaries by the sequential
//! lambda-factor recursion.
//!
//! After the `t`-th boundary `L` (chain order) the moments satisfy
//!
//! ```text
//! lambda(x) = c(x, y0) / c(x^L, y0)             for a probe y0 on L
//! m'(x)     = m(x) + lambda(x) (f(x^L) - m(x^L))
//! c'(x, x') = c(x, x') - lambda(x) c(x^L, x'^L) lambda(x')
//! ```
//!
//! Unrolling the covariance recursion gives a signed sum of `2^t` prior
//! kernel terms, `c(x, x') = sigma2 sum_k s_k w_k(x) w_k(x') r(p_k(x) - p_k(x'))`,
//! with `s_k = (-1)^{popcount k}`. Each point therefore carries `2^t`
//! weighted feature points, and every covariance is one pass over them.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;
use std::sync::RwLock;

use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::EmulatorPrior;
use crate::error::{Error, Result};
use crate::geometry::{validate_set, Boundary, BoundarySet};

/// Probe denominators at or below `DENOMINATOR_EPS * sigma2` are rejected.
pub const DENOMINATOR_EPS: f64 = 1e-12;

/// Random probes tried after the first free-direction probe fails.
pub const MAX_RANDOM_PROBES: usize = 8;

/// Residual below which a boundary with no usable probe is already resolved.
const RESOLVED_TOL: f64 = 1e-10;

const PROBE_SEED: u64 = 0x6b62_656d_755f_7072;

pub(crate) type Key = Vec<u64>;

pub(crate) fn key(x: &[f64]) -> Key {
    // +0.0 and -0.0 name the same point
    x.iter().map(|v| if *v == 0.0 { 0 } else { v.to_bits() }).collect()
}

/// Feature expansion of one point: `2^t` weights and points, row-major.
#[derive(Clone, Debug)]
pub(crate) struct Features {
    weights: Vec<f64>,
    points: Vec<f64>,
}

impl Features {
    fn root(x: &[f64]) -> Self {
        Features {
            weights: vec![1.0],
            points: x.to_vec(),
        }
    }

    fn len(&self) -> usize {
        self.weights.len()
    }

    fn point(&self, k: usize, p: usize) -> &[f64] {
        &self.points[k * p..(k + 1) * p]
    }

    /// `self ++ lambda * other`, with the appended half negated by its index.
    fn extend(&self, other: &Features, lambda: f64) -> Self {
        let mut weights = Vec::with_capacity(2 * self.len());
        weights.extend_from_slice(&self.weights);
        weights.extend(other.weights.iter().map(|w| lambda * w));
        let mut points = Vec::with_capacity(2 * self.points.len());
        points.extend_from_slice(&self.points);
        points.extend_from_slice(&other.points);
        Features { weights, points }
    }
}

/// Moments of the simulator after conditioning on every boundary of a set.
pub struct BoundaryAdjustedPrior {
    prior: EmulatorPrior,
    bset: BoundarySet,
    chain: Vec<Boundary>,
    solved: RwLock<HashMap<(usize, Key), f64>>,
}

impl Clone for BoundaryAdjustedPrior {
    fn clone(&self) -> Self {
        BoundaryAdjustedPrior {
            prior: self.prior.clone(),
            bset: self.bset.clone(),
            chain: self.chain.clone(),
            solved: RwLock::new(HashMap::new()),
        }
    }
}

impl std::fmt::Debug for BoundaryAdjustedPrior {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundaryAdjustedPrior")
            .field("prior", &self.prior)
            .field("chain", &self.chain)
            .finish()
    }
}

pub fn adjust_single(prior: EmulatorPrior, b: Boundary) -> Result<BoundaryAdjustedPrior> {
    BoundaryAdjustedPrior::new(prior, validate_set(vec![b])?)
}

pub fn adjust_set(prior: EmulatorPrior, bset: BoundarySet) -> Result<BoundaryAdjustedPrior> {
    BoundaryAdjustedPrior::new(prior, bset)
}

impl BoundaryAdjustedPrior {
    pub fn new(prior: EmulatorPrior, bset: BoundarySet) -> Result<Self> {
        if let Some(b) = bset.boundaries().iter().find(|b| b.p() != prior.p()) {
            return Err(Error::InvalidBoundary {
                label: b.label().to_string(),
                reason: format!("input dimension {} but the kernel has {}", b.p(), prior.p()),
            });
        }
        let chain = bset.ordered().cloned().collect();
        Ok(BoundaryAdjustedPrior {
            prior,
            bset,
            chain,
            solved: RwLock::new(HashMap::new()),
        })
    }

    /// No boundaries: the prior itself.
    pub fn unadjusted(prior: EmulatorPrior) -> Self {
        Self::new(prior, BoundarySet::empty()).expect("empty set is compatible")
    }

    pub fn prior(&self) -> &EmulatorPrior {
        &self.prior
    }

    pub fn boundary_set(&self) -> &BoundarySet {
        &self.bset
    }

    /// Boundaries in the order they are conditioned on.
    pub fn chain(&self) -> &[Boundary] {
        &self.chain
    }

    pub fn p(&self) -> usize {
        self.prior.p()
    }

    pub fn mean(&self, x: &[f64]) -> Result<f64> {
        self.prior.check_point(x)?;
        self.eval().mean(self.chain.len(), x)
    }

    /// Adjusted variance, with round-off negatives clamped to zero.
    pub fn variance(&self, x: &[f64]) -> Result<f64> {
        self.prior.check_point(x)?;
        let ev = self.eval();
        let f = ev.features(self.chain.len(), x);
        Ok(ev.cross(&f, &f).max(0.0))
    }

    pub fn covariance(&self, x: &[f64], x2: &[f64]) -> Result<f64> {
        self.prior.check_point(x)?;
        self.prior.check_point(x2)?;
        let ev = self.eval();
        let h = self.chain.len();
        Ok(ev.cross(&ev.features(h, x), &ev.features(h, x2)))
    }

    /// Means and variances over a batch, sharing intermediate results.
    pub fn mean_and_variance(&self, xs: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
        let ev = self.eval();
        let h = self.chain.len();
        let mut means = Vec::with_capacity(xs.len());
        let mut vars = Vec::with_capacity(xs.len());
        for x in xs {
            self.prior.check_point(x)?;
            means.push(ev.mean(h, x)?);
            let f = ev.features(h, x);
            vars.push(ev.cross(&f, &f).max(0.0));
        }
        Ok((means, vars))
    }

    pub fn covariance_matrix(&self, xs: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        for x in xs {
            self.prior.check_point(x)?;
        }
        let ev = self.eval();
        let h = self.chain.len();
        let feats: Vec<_> = xs.iter().map(|x| ev.features(h, x)).collect();
        Ok(DMatrix::from_fn(xs.len(), xs.len(), |i, j| {
            if i <= j {
                ev.cross(&feats[i], &feats[j])
            } else {
                ev.cross(&feats[j], &feats[i])
            }
        }))
    }

    /// The factor `lambda(x)` used when conditioning on the boundary at
    /// position `pos` of the chain, from the default probe policy.
    /// `None` when no probe has a usable denominator.
    pub fn lambda(&self, pos: usize, x: &[f64]) -> Result<Option<f64>> {
        self.check_pos(pos)?;
        self.prior.check_point(x)?;
        Ok(self.eval().lambda(pos + 1, x))
    }

    /// `c(x, y) / c(x^L, y)` for an explicit probe `y` on the boundary at
    /// position `pos`, using the moments before that boundary.
    pub fn lambda_with_probe(&self, pos: usize, x: &[f64], y: &[f64]) -> Result<Option<f64>> {
        self.check_pos(pos)?;
        self.prior.check_point(x)?;
        self.prior.check_point(y)?;
        let b = &self.chain[pos];
        if !b.contains(y, 0.0) {
            return Err(Error::InvalidArgument(format!("probe is not on `{}`", b.label())));
        }
        let ev = self.eval();
        let xl = b.project_point(x);
        let den = ev.cross(&ev.features(pos, &xl), &ev.features(pos, y));
        if den.abs() <= DENOMINATOR_EPS * self.prior.sigma2() {
            return Ok(None);
        }
        Ok(Some(ev.cross(&ev.features(pos, x), &ev.features(pos, y)) / den))
    }

    fn check_pos(&self, pos: usize) -> Result<()> {
        if pos >= self.chain.len() {
            return Err(Error::InvalidArgument(format!(
                "boundary position {pos} out of range for {} boundaries",
                self.chain.len()
            )));
        }
        Ok(())
    }

    pub(crate) fn eval(&self) -> Eval<'_> {
        Eval {
            adj: self,
            feats: RefCell::new(HashMap::new()),
            lambdas: RefCell::new(HashMap::new()),
            means: RefCell::new(HashMap::new()),
        }
    }

    fn solve(&self, pos: usize, x: &[f64]) -> Result<f64> {
        let k = (pos, key(x));
        if let Some(v) = self.solved.read().expect("solver cache poisoned").get(&k) {
            return Ok(*v);
        }
        let v = self.chain[pos].solve(x)?;
        self.solved.write().expect("solver cache poisoned").insert(k, v);
        Ok(v)
    }

    /// Drop memoized boundary solutions.
    pub fn clear_cache(&self) {
        self.solved.write().expect("solver cache poisoned").clear();
    }
}

/// Single-threaded evaluation context; caches intermediate states per level.
pub(crate) struct Eval<'a> {
    adj: &'a BoundaryAdjustedPrior,
    feats: RefCell<HashMap<(usize, Key), Rc<Features>>>,
    lambdas: RefCell<HashMap<(usize, Key), Option<f64>>>,
    means: RefCell<HashMap<(usize, Key), f64>>,
}

impl Eval<'_> {
    /// Covariance between two points at the same level.
    pub(crate) fn cross(&self, a: &Features, b: &Features) -> f64 {
        let p = self.adj.p();
        let kernel = self.adj.prior.kernel();
        let mut s = 0.0;
        for k in 0..a.len() {
            let w = a.weights[k] * b.weights[k];
            if w == 0.0 {
                continue;
            }
            let term = w * kernel.corr_points(a.point(k, p), b.point(k, p));
            if k.count_ones() % 2 == 0 {
                s += term;
            } else {
                s -= term;
            }
        }
        self.adj.prior.sigma2() * s
    }

    pub(crate) fn features(&self, t: usize, x: &[f64]) -> Rc<Features> {
        if t == 0 {
            return Rc::new(Features::root(x));
        }
        let k = (t, key(x));
        if let Some(f) = self.feats.borrow().get(&k) {
            return f.clone();
        }
        let b = &self.adj.chain[t - 1];
        let xl = b.project_point(x);
        let prev = self.features(t - 1, x);
        let f = if key(&xl) == k.1 {
            prev.extend(&prev, 1.0)
        } else {
            let lambda = self.lambda(t, x).unwrap_or(0.0);
            prev.extend(&self.features(t - 1, &xl), lambda)
        };
        let f = Rc::new(f);
        self.feats.borrow_mut().insert(k, f.clone());
        f
    }

    /// Factor for the `t`-th boundary (1-based level).
    pub(crate) fn lambda(&self, t: usize, x: &[f64]) -> Option<f64> {
        let k = (t, key(x));
        if let Some(l) = self.lambdas.borrow().get(&k) {
            return *l;
        }
        let b = &self.adj.chain[t - 1];
        let xl = b.project_point(x);
        let l = if key(&xl) == k.1 {
            Some(1.0)
        } else {
            let fx = self.features(t - 1, x);
            let fl = self.features(t - 1, &xl);
            let eps = DENOMINATOR_EPS * self.adj.prior.sigma2();
            probes(self.adj, b, &xl).into_iter().find_map(|y| {
                let fy = self.features(t - 1, &y);
                let den = self.cross(&fl, &fy);
                (den.abs() > eps).then(|| self.cross(&fx, &fy) / den)
            })
        };
        self.lambdas.borrow_mut().insert(k, l);
        l
    }

    pub(crate) fn mean(&self, t: usize, x: &[f64]) -> Result<f64> {
        if t == 0 {
            return Ok(self.adj.prior.beta());
        }
        let k = (t, key(x));
        if let Some(m) = self.means.borrow().get(&k) {
            return Ok(*m);
        }
        let b = &self.adj.chain[t - 1];
        let xl = b.project_point(x);
        let m = if key(&xl) == k.1 {
            // exact on the boundary, without round-off from the update
            self.adj.solve(t - 1, &xl)?
        } else {
            let prev = self.mean(t - 1, x)?;
            match self.lambda(t, x) {
                Some(0.0) => prev,
                Some(l) => {
                    let resid = self.adj.solve(t - 1, &xl)? - self.mean(t - 1, &xl)?;
                    prev + l * resid
                }
                None => {
                    let resid = self.adj.solve(t - 1, &xl)? - self.mean(t - 1, &xl)?;
                    if resid.abs() >= RESOLVED_TOL {
                        return Err(Error::DegenerateDenominator(b.label().to_string()));
                    }
                    prev
                }
            }
        };
        self.means.borrow_mut().insert(k, m);
        Ok(m)
    }
}

/// Probe points on `b` for the projection `xl`, in the order tried: one
/// lengthscale along the first free direction, seeded random free-direction
/// offsets, then `xl` itself.
fn probes(adj: &BoundaryAdjustedPrior, b: &Boundary, xl: &[f64]) -> Vec<Vec<f64>> {
    let theta = adj.prior.kernel().theta();
    let free = b.free();
    let mut out = Vec::with_capacity(MAX_RANDOM_PROBES + 2);
    if let Some(&j) = free.first() {
        let mut y = xl.to_vec();
        y[j] += theta[j];
        out.push(y);
        let seed = key(xl)
            .iter()
            .fold(PROBE_SEED, |h, v| (h ^ v).wrapping_mul(0x0000_0100_0000_01b3));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..MAX_RANDOM_PROBES {
            let mut y = xl.to_vec();
            for &j in free {
                y[j] += theta[j] * rng.random_range(-2.0..2.0);
            }
            out.push(y);
        }
    }
    out.push(xl.to_vec());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::CorrelationKernel;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn prior3() -> EmulatorPrior {
        EmulatorPrior::new(0.0, 2.0, CorrelationKernel::gaussian(vec![PI, PI / 8.0, PI]).unwrap()).unwrap()
    }

    fn k_boundary() -> Boundary {
        Boundary::from_fn("K", 3, vec![1, 2], vec![0.0, 0.0], |x| x[0].sin() + 1.0).unwrap()
    }

    #[test]
    fn single_boundary_worked_example() {
        let adj = adjust_single(prior3(), k_boundary()).unwrap();
        let x = [PI / 2.0, 0.0, PI / 2.0];
        assert_relative_eq!(adj.mean(&x).unwrap(), 2.0 * (-0.25f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(adj.mean(&x).unwrap(), 1.55760, epsilon = 1e-5);
        assert_relative_eq!(adj.variance(&x).unwrap(), 2.0 * (1.0 - (-0.5f64).exp()), max_relative = 1e-14);
        assert_relative_eq!(adj.variance(&x).unwrap(), 0.78694, epsilon = 1e-5);
    }

    #[test]
    fn single_boundary_matches_direct_formula() {
        let prior = prior3();
        let adj = adjust_single(prior.clone(), k_boundary()).unwrap();
        let k = prior.kernel();
        let x = [0.7, 0.2, -1.3];
        let y = [-2.0, -0.1, 0.4];
        let (ax, ay) = ([0.0, 0.2, -1.3], [0.0, -0.1, 0.4]);
        let direct = 2.0 * k.updated_corr(&[1, 2], &ax, &ay).unwrap() * k.corr_subset(&[0], &[x[0] - y[0], 0.0, 0.0]).unwrap();
        assert_relative_eq!(adj.covariance(&x, &y).unwrap(), direct, epsilon = 1e-15);
        let m = 0.3 + k.corr_subset(&[1, 2], &ax).unwrap() * (0.7f64.sin() + 1.0 - 0.3);
        let adj_b = adjust_single(EmulatorPrior::new(0.3, 2.0, k.clone()).unwrap(), k_boundary()).unwrap();
        assert_relative_eq!(adj_b.mean(&x).unwrap(), m, max_relative = 1e-14);
    }

    #[test]
    fn on_boundary_exact_and_far_field() {
        let adj = adjust_single(EmulatorPrior::new(0.3, 2.0, prior3().kernel().clone()).unwrap(), k_boundary()).unwrap();
        let x = [1.1, 0.0, 0.0];
        assert_eq!(adj.mean(&x).unwrap(), 1.1f64.sin() + 1.0);
        assert_eq!(adj.variance(&x).unwrap(), 0.0);
        let far = [1.1, 0.0, 40.0];
        assert_relative_eq!(adj.variance(&far).unwrap(), 2.0, max_relative = 1e-12);
        assert_relative_eq!(adj.mean(&far).unwrap(), 0.3, max_relative = 1e-12);
    }

    #[test]
    fn empty_set_is_prior() {
        let adj = BoundaryAdjustedPrior::unadjusted(prior3());
        let x = [0.3, 0.1, 0.2];
        assert_eq!(adj.mean(&x).unwrap(), 0.0);
        assert_eq!(adj.variance(&x).unwrap(), 2.0);
    }

    #[test]
    fn dimension_checks() {
        let adj = adjust_single(prior3(), k_boundary()).unwrap();
        assert!(matches!(adj.mean(&[0.0; 2]), Err(Error::DimensionMismatch { .. })));
        let b4 = Boundary::from_fn("K4", 4, vec![1], vec![0.0], |_| 0.0).unwrap();
        assert!(adjust_single(prior3(), b4).is_err());
    }

    #[test]
    fn failing_solver_propagates() {
        let b = Boundary::new(
            "bad",
            3,
            vec![0],
            vec![0.0],
            std::sync::Arc::new(FailingSolver),
        )
        .unwrap();
        let adj = adjust_single(prior3(), b).unwrap();
        assert!(matches!(adj.mean(&[1.0, 0.0, 0.0]), Err(Error::Solver { .. })));
        // variance never touches the solver
        assert!(adj.variance(&[1.0, 0.0, 0.0]).is_ok());
    }

    struct FailingSolver;

    impl crate::geometry::BoundarySolver for FailingSolver {
        fn evaluate(&self, _: &[f64]) -> std::result::Result<f64, String> {
            Err("no".into())
        }
    }

    #[test]
    fn point_boundary_uses_projection_probe() {
        // every direction normal: the boundary is a single point
        let b = Boundary::from_fn("pt", 2, vec![0, 1], vec![0.5, -0.5], |_| 3.0).unwrap();
        let prior = EmulatorPrior::new(1.0, 1.5, CorrelationKernel::gaussian(vec![1.0, 2.0]).unwrap()).unwrap();
        let adj = adjust_single(prior.clone(), b).unwrap();
        let x = [0.1, 0.4];
        let r = prior.kernel().corr_points(&x, &[0.5, -0.5]);
        assert_relative_eq!(adj.mean(&x).unwrap(), 1.0 + r * 2.0, max_relative = 1e-14);
        assert_relative_eq!(adj.variance(&x).unwrap(), 1.5 * (1.0 - r * r), max_relative = 1e-12);
    }
}

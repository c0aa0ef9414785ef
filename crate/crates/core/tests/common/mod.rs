#![allow(dead_code)]

use kbemu::geometry::Boundary;
use kbemu::kernel::CorrelationKernel;
use kbemu::EmulatorPrior;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn point_in(rng: &mut ChaCha8Rng, domain: &[(f64, f64)]) -> Vec<f64> {
    domain.iter().map(|&(a, b)| rng.random_range(a..b)).collect()
}

pub fn points_in(rng: &mut ChaCha8Rng, domain: &[(f64, f64)], n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| point_in(rng, domain)).collect()
}

pub fn cube(p: usize) -> Vec<(f64, f64)> {
    vec![(-2.0, 2.0); p]
}

/// Smooth test function on six inputs; the first five drive the p = 5 fixtures.
pub fn synth_f(x: &[f64]) -> f64 {
    let extra = if x.len() > 5 { 0.5 * x[5] } else { 0.0 };
    x[0].sin() + x[1].cos() * x[2] + 0.3 * x[3] * x[3] + 0.2 * x[4] + extra
}

pub fn synth_prior(p: usize) -> EmulatorPrior {
    let theta = [1.2, 1.0, 1.4, 0.9, 2.0, 1.1][..p].to_vec();
    EmulatorPrior::new(0.2, 1.5, CorrelationKernel::gaussian(theta).unwrap()).unwrap()
}

/// `x_j = -1.5` for `j < h`, in six dimensions. Mutually orthogonal with
/// nonempty pairwise intersections.
pub fn orthogonal_planes(h: usize) -> Vec<Boundary> {
    (0..h)
        .map(|j| Boundary::from_fn(&format!("O{j}"), 6, vec![j], vec![-1.5], synth_f).unwrap())
        .collect()
}

/// Strictly nested chain in five dimensions: `J_i = {0, ..., i - 1}`.
pub fn nested_chain(h: usize) -> Vec<Boundary> {
    let alphas: [&[f64]; 4] = [&[-2.0], &[-1.2, -1.5], &[-0.6, -1.0, -1.5], &[-0.3, -0.5, -1.0, -1.2]];
    (0..h)
        .map(|i| Boundary::from_fn(&format!("N{i}"), 5, (0..=i).collect(), alphas[i].to_vec(), synth_f).unwrap())
        .collect()
}

/// Parallel chain sharing `J = {0, 1}` in `p` dimensions.
pub fn shared_chain(h: usize, p: usize) -> Vec<Boundary> {
    let alphas = [[-1.8, 0.5], [0.3, -1.7], [1.6, 1.2], [-0.4, 1.9]];
    (0..h)
        .map(|i| Boundary::from_fn(&format!("S{i}"), p, vec![0, 1], alphas[i].to_vec(), synth_f).unwrap())
        .collect()
}

/// `|a - b| <= tol * max(1, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

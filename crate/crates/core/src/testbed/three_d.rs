//! The analytic test function `f(x) = sin(x1 / exp(x2)) + cos(x3)` and its
//! three known boundaries.

use std::f64::consts::PI;

use crate::engine::EmulatorPrior;
use crate::error::Result;
use crate::geometry::{validate_set, Boundary, BoundarySet, SolverSpec};
use crate::kernel::CorrelationKernel;

/// Input box `[-2pi, 2pi] x [-pi/4, pi/4] x [-2pi, 2pi]`.
pub const DOMAIN: [(f64, f64); 3] = [(-2.0 * PI, 2.0 * PI), (-PI / 4.0, PI / 4.0), (-2.0 * PI, 2.0 * PI)];

pub fn eval_3d(x: &[f64]) -> f64 {
    (x[0] / x[1].exp()).sin() + x[2].cos()
}

/// `E[f] = 0`, `sigma2 = 2`, `theta = (pi, pi/8, pi)`.
pub fn prior_3d() -> EmulatorPrior {
    let kernel = CorrelationKernel::gaussian(vec![PI, PI / 8.0, PI]).expect("valid lengthscales");
    EmulatorPrior::new(0.0, 2.0, kernel).expect("valid prior")
}

/// `K: (x2, x3) = (0, 0)` with `f = sin(x1) + 1`.
pub fn boundary_k() -> Boundary {
    Boundary::from_fn("K", 3, vec![1, 2], vec![0.0, 0.0], |x| x[0].sin() + 1.0)
        .expect("valid boundary")
        .with_spec(SolverSpec::Builtin("three_d.K".into()))
}

/// `L: (x2, x3) = (0, -pi)` with `f = sin(x1) - 1`.
pub fn boundary_l() -> Boundary {
    Boundary::from_fn("L", 3, vec![1, 2], vec![0.0, -PI], |x| x[0].sin() - 1.0)
        .expect("valid boundary")
        .with_spec(SolverSpec::Builtin("three_d.L".into()))
}

/// `M: x1 = 0` with `f = cos(x3)`.
pub fn boundary_m() -> Boundary {
    Boundary::from_fn("M", 3, vec![0], vec![0.0], |x| x[2].cos())
        .expect("valid boundary")
        .with_spec(SolverSpec::Builtin("three_d.M".into()))
}

/// The named boundaries of the 3D example, `K`, `L` and `M`.
pub fn boundaries_3d() -> Vec<Boundary> {
    vec![boundary_k(), boundary_l(), boundary_m()]
}

/// Validated subset of `K`, `L`, `M` by label, in the given order.
pub fn boundary_set_3d(labels: &[&str]) -> Result<BoundarySet> {
    let all = boundaries_3d();
    let picked = labels
        .iter()
        .map(|l| {
            all.iter()
                .find(|b| b.label() == *l)
                .cloned()
                .ok_or_else(|| crate::Error::Config(format!("unknown 3D boundary `{l}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    validate_set(picked)
}

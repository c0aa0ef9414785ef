//! Known-boundary emulation for expensive computer models.
//!
//! A Bayes linear (second-order) emulator with a product correlation
//! structure can be conditioned analytically on hyperplanes of the input
//! space along which the simulator is cheap to evaluate. This crate builds
//! such emulators for single boundaries, sets of intersecting orthogonal
//! boundaries, nested parallel chains and mixtures of the two, and then
//! updates them by ordinary training runs with a single `n x n` solve.
//!
//! Modules:
//!
//! - [`kernel`]: product correlation functions `r_J(q)` and the updated
//!   correlation component `R_J(a, a')`.
//! - [`geometry`]: boundaries, projections, pairwise classification and
//!   validated boundary sets.
//! - [`engine`]: boundary-adjusted priors, training updates, closed forms
//!   and the multivariate extension.
//! - [`oracle`]: a brute-force dense update on boundary-augmented designs,
//!   used to certify the engine.
//! - [`testbed`]: the 3D analytic test function and the Arabidopsis
//!   hormonal crosstalk model with its known `[ET]` boundaries.
//! - [`analysis`]: maximin Latin hypercube designs and emulator diagnostics.
//! - [`cli`]: the experiment driver behind the `kbe` binary.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod analysis;
pub mod cli;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod kernel;
pub mod oracle;
pub mod persist;
pub mod testbed;

pub use engine::{BoundaryAdjustedPrior, Emulator, EmulatorPrior, Prediction};
pub use error::{Error, Result};
pub use geometry::{Boundary, BoundarySet, PairClass};
pub use kernel::{CorrelationKernel, KernelFamily};

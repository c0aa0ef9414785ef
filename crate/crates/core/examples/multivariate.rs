//! Two correlated outputs: a boundary where both are known, and one where
//! only the first is known.

use std::sync::Arc;

use kbemu::engine::multivariate::{adjust_single_multivariate, CrossOutputAdjusted, MultiBoundary, OutputCovariance};
use kbemu::kernel::CorrelationKernel;
use kbemu::Boundary;
use nalgebra::dmatrix;

fn main() -> kbemu::Result<()> {
    let sigma = OutputCovariance::new(dmatrix![1.0, 0.6; 0.6, 2.0])?;
    let kernel = CorrelationKernel::gaussian(vec![1.0, 0.8])?;
    let both = MultiBoundary {
        label: "K".into(),
        normal: vec![1],
        alpha: vec![0.0],
        solver: Arc::new(|x: &[f64]| vec![x[0].sin(), x[0].cos()]),
    };
    let full = adjust_single_multivariate(vec![0.0, 0.0], sigma.clone(), kernel.clone(), both)?;
    let one = Boundary::from_fn("K", 2, vec![1], vec![0.0], |x| x[0].sin())?;
    let partial = CrossOutputAdjusted::new(vec![0.0, 0.0], sigma, kernel, one, 0)?;

    for x in [[0.5, 0.0], [0.5, 0.4], [0.5, 1.5]] {
        let m = full.mean(&x)?;
        let c = full.covariance(&x, &x)?;
        println!("x = {x:?}");
        println!("  both known:  means {:+.4} {:+.4}, variances {:.4} {:.4}", m[0], m[1], c[(0, 0)], c[(1, 1)]);
        println!(
            "  first known: means {:+.4} {:+.4}, variances {:.4} {:.4}",
            partial.mean(0, &x)?,
            partial.mean(1, &x)?,
            partial.covariance(0, 0, &x, &x)?,
            partial.covariance(1, 1, &x, &x)?
        );
    }
    Ok(())
}

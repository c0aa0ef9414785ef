//! Compare the engine with a dense update on the augmented design and
//! report factorization sizes for growing orthogonal sets.

use kbemu::analysis::maximin_lhc;
use kbemu::cli::commands::{compare_oracle, SweepData};
use kbemu::geometry::{validate_set, Boundary};
use kbemu::kernel::CorrelationKernel;
use kbemu::testbed::three_d::{boundary_set_3d, prior_3d};
use kbemu::testbed::Model;
use kbemu::EmulatorPrior;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> kbemu::Result<()> {
    let data = SweepData::generate(Model::ThreeD, 10, 1, 40, 3, 20)?;
    for labels in [&["K"][..], &["K", "L"], &["K", "L", "M"]] {
        let set = boundary_set_3d(labels)?;
        let c = compare_oracle(&labels.concat(), &prior_3d(), &set, &data.train_x, &data.train_y, &data.test_x, true)?;
        println!(
            "{:>4}: oracle size {:>4} (formula {:?}), max rel mean {:.1e}, var {:.1e}",
            c.label, c.oracle_size, c.expected_size, c.max_rel_mean, c.max_rel_var
        );
    }

    // x_j = -1 for j < h in five dimensions
    let f = |x: &[f64]| x.iter().map(|v| v.sin()).sum::<f64>();
    let prior = EmulatorPrior::new(0.0, 1.0, CorrelationKernel::isotropic(5, 1.0)?)?;
    let train = maximin_lhc(30, 5, 1, 20)?.scaled(&[(-1.0, 1.0); 5])?;
    let d: Vec<f64> = train.iter().map(|x| f(x)).collect();
    // uniform targets; stratum centres of two LHCs can share coordinates
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let targets: Vec<Vec<f64>> = (0..10).map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    for h in 1..=4 {
        let bs = (0..h)
            .map(|j| Boundary::from_fn(format!("O{j}"), 5, vec![j], vec![-1.5], f))
            .collect::<kbemu::Result<Vec<_>>>()?;
        let c = compare_oracle(&format!("h={h}"), &prior, &validate_set(bs)?, &train, &d, &targets, false)?;
        println!(
            "{}: oracle {:>4} x {:<4} in {:>10.3?}; engine {:>2} x {:<2} in {:>10.3?}",
            c.label, c.oracle_size, c.oracle_size, c.oracle_time, c.engine_factor_size, c.engine_factor_size, c.engine_time
        );
    }
    Ok(())
}

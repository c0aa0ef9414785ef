//! Condition the 3D prior on the known boundary `K: x2 = x3 = 0` and
//! compare moments before and after, with and without training runs.

use kbemu::engine::{adjust_single, Emulator};
use kbemu::testbed::three_d::{boundary_k, eval_3d, prior_3d};

fn main() -> kbemu::Result<()> {
    let prior = prior_3d();
    let adjusted = adjust_single(prior.clone(), boundary_k())?;

    let points = [[1.0, 0.0, 0.0], [1.0, 0.1, 0.5], [1.0, 0.5, 2.0], [-3.0, -0.6, -5.0]];
    println!("{:>24} {:>10} {:>10} {:>10}", "x", "f(x)", "E_K", "Var_K");
    for x in &points {
        println!(
            "{:>24} {:>10.4} {:>10.4} {:>10.4}",
            format!("{x:?}"),
            eval_3d(x),
            adjusted.mean(x)?,
            adjusted.variance(x)?
        );
    }

    let train: Vec<Vec<f64>> = vec![vec![2.0, 0.3, 1.0], vec![-1.0, -0.4, 3.0], vec![4.0, 0.6, -2.0]];
    let outputs: Vec<f64> = train.iter().map(|x| eval_3d(x)).collect();
    let em = Emulator::new(adjusted, train, outputs)?;
    let pred = em.predict(&points.map(|p| p.to_vec()), false)?;
    println!("\nafter {} training runs:", em.n());
    for (x, (m, v)) in points.iter().zip(pred.mean.iter().zip(&pred.variance)) {
        println!("{:>24} mean {m:>8.4} var {v:>8.4}", format!("{x:?}"));
    }
    println!("prior variance everywhere: {}", prior.sigma2());
    Ok(())
}

//! Save a fitted emulator to JSON and reload it; predictions are identical.

use kbemu::engine::{adjust_set, Emulator};
use kbemu::persist::{load_emulator, save_emulator};
use kbemu::testbed::three_d::{boundary_set_3d, eval_3d, prior_3d};
use kbemu::testbed::Model;

fn main() -> kbemu::Result<()> {
    let base = adjust_set(prior_3d(), boundary_set_3d(&["K", "M"])?)?;
    let x: Vec<Vec<f64>> = vec![vec![1.0, 0.2, 2.0], vec![-2.0, -0.3, -1.0], vec![3.5, 0.7, 0.4]];
    let d = x.iter().map(|v| eval_3d(v)).collect();
    let em = Emulator::new(base, x, d)?;

    let path = std::env::temp_dir().join("kbe_example_emulator.json");
    save_emulator(&em, Some(Model::ThreeD), &path)?;
    let (back, model) = load_emulator(&path)?;
    let probe = vec![vec![0.5, 0.1, 0.5], vec![-4.0, 0.3, 2.0]];
    let (a, b) = (em.predict(&probe, false)?, back.predict(&probe, false)?);
    println!("saved to {} (model {model:?})", path.display());
    for i in 0..probe.len() {
        println!("  mean {:.17} / {:.17}, variance {:.17} / {:.17}", a.mean[i], b.mean[i], a.variance[i], b.variance[i]);
    }
    std::fs::remove_file(&path)?;
    Ok(())
}

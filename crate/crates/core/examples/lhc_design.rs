//! Maximin Latin hypercube designs: the best of several restarts, scaled to
//! a model's input box.

use kbemu::analysis::{maximin_lhc, maximin_score};
use kbemu::testbed::Model;

fn main() -> kbemu::Result<()> {
    for restarts in [1, 10, 100] {
        let d = maximin_lhc(20, 3, 42, restarts)?;
        println!("restarts {restarts:>3}: min pairwise distance {:.4}", d.score);
    }
    let d = maximin_lhc(8, 3, 7, 50)?;
    let scaled = d.scaled(&Model::ThreeD.domain())?;
    println!("\n8 points in the 3D box (score {:.4}):", maximin_score(&d.points));
    for x in scaled {
        println!("  [{:>8.4}, {:>8.4}, {:>8.4}]", x[0], x[1], x[2]);
    }
    Ok(())
}

//! Validate a mixed set of parallel and orthogonal boundaries, inspect the
//! pairwise classification and the order in which they are applied.

use kbemu::engine::adjust_set;
use kbemu::geometry::validate_set;
use kbemu::testbed::three_d::{boundaries_3d, boundary_k, boundary_m, prior_3d};

fn main() -> kbemu::Result<()> {
    let set = validate_set(boundaries_3d())?;
    let labels: Vec<&str> = set.boundaries().iter().map(|b| b.label()).collect();
    println!("boundaries: {labels:?}");
    for (i, row) in set.pair_classes().iter().enumerate() {
        for (j, class) in row.iter().enumerate().skip(i + 1) {
            println!("  {} / {}: {class:?}", labels[i], labels[j]);
        }
    }
    let order: Vec<&str> = set.ordered().map(|b| b.label()).collect();
    println!("application order: {order:?}");

    let adj = adjust_set(prior_3d(), set)?;
    for x in [[0.5, 0.0, 0.0], [0.0, 0.3, 1.0], [2.0, 0.0, -std::f64::consts::PI], [2.0, 0.4, 1.0]] {
        println!("x = {x:?}: mean {:.5}, variance {:.3e}", adj.mean(&x)?, adj.variance(&x)?);
    }

    // K and M meet; an identical copy of K is rejected, as is a plane that
    // neither meets nor nests with the others.
    let dup = boundary_k().relabeled("K2");
    println!("\nK with a relabeled copy: {:?}", validate_set(vec![boundary_k(), dup]).map(|s| s.len()));
    let tilted = kbemu::Boundary::from_fn("T", 3, vec![0, 1], vec![1.0, 0.2], |_| 0.0)?;
    match validate_set(vec![boundary_m(), boundary_k(), tilted]) {
        Ok(_) => println!("unexpectedly valid"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}

//! Check the general recursion against closed-form moments for the
//! configurations where those exist.

use kbemu::engine::adjust_set;
use kbemu::engine::closed_form::{
    parallel_mean, parallel_pair_with_orthogonal, two_orthogonal_cov, two_orthogonal_mean, ChainMeanVariant,
};
use kbemu::geometry::validate_set;
use kbemu::testbed::three_d::{boundary_k, boundary_l, boundary_m, prior_3d};

fn main() -> kbemu::Result<()> {
    let prior = prior_3d();
    let (k, l, m) = (boundary_k(), boundary_l(), boundary_m());
    let xs = [[1.0, 0.2, 0.5], [-2.0, -0.5, 2.5], [4.0, 0.1, -3.0]];

    let km = adjust_set(prior.clone(), validate_set(vec![k.clone(), m.clone()])?)?;
    let kl = adjust_set(prior.clone(), validate_set(vec![k.clone(), l.clone()])?)?;
    let klm = adjust_set(prior.clone(), validate_set(vec![k.clone(), l.clone(), m.clone()])?)?;

    for x in &xs {
        let y = [0.3, -0.1, 1.0];
        let (cm, cc) = (two_orthogonal_mean(&prior, &k, &m, x)?, two_orthogonal_cov(&prior, &k, &m, x, &y)?);
        println!("x = {x:?}");
        println!("  K,M   mean {:+.3e}  cov {:+.3e}", cm - km.mean(x)?, cc - km.covariance(x, &y)?);
        let pm = parallel_mean(&prior, &[&k, &l], x, ChainMeanVariant::NextInSequence)?;
        println!("  K,L   mean {:+.3e}", pm - kl.mean(x)?);
        let (m3, c3) = parallel_pair_with_orthogonal(&prior, &k, &l, &m, x, &y)?;
        println!("  K,L,M mean {:+.3e}  cov {:+.3e}", m3 - klm.mean(x)?, c3 - klm.covariance(x, &y)?);
    }
    Ok(())
}

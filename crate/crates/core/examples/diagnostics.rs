//! Standardized-error diagnostics for the 3D emulator over three planes,
//! using only the known boundaries.

use kbemu::cli::commands::{plane_table, FIGURE_PLANES};
use kbemu::engine::{adjust_set, Emulator};
use kbemu::geometry::validate_set;
use kbemu::testbed::three_d::{boundaries_3d, prior_3d};

fn main() -> kbemu::Result<()> {
    let base = adjust_set(prior_3d(), validate_set(boundaries_3d())?)?;
    let em = Emulator::new(base, Vec::new(), Vec::new())?;
    for plane in FIGURE_PLANES {
        let (_, r) = plane_table(&em, plane, 20)?;
        println!(
            "{:>9}: three-sigma fraction {:.3}, MASPE {:.3}, RMSE {:.3}, sum of variances {:.1}",
            plane.name, r.three_sigma_fraction, r.maspe, r.rmse, r.sum_of_variances
        );
    }
    Ok(())
}

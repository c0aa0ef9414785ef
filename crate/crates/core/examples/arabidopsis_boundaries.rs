//! The hormonal crosstalk model: closed-form `[ET](2)` on its two known
//! boundaries against the ODE, then an emulator that uses both.

use kbemu::engine::{adjust_set, Emulator};
use kbemu::kernel::CorrelationKernel;
use kbemu::testbed::arabidopsis::{self as ara, ArabidopsisModel, PARAMS};
use kbemu::testbed::Model;
use kbemu::{analysis, cli::commands::SweepData, EmulatorPrior};

fn main() -> kbemu::Result<()> {
    let mid: Vec<f64> = PARAMS.iter().map(|&(_, lo, hi)| 0.5 * (lo + hi)).collect();
    let model = ArabidopsisModel::default();
    for b in ara::boundaries_arabidopsis() {
        let mut raw = mid.clone();
        for &j in b.normal() {
            raw[j] = 0.0;
        }
        let closed = b.solve(&ara::transform_extended(&raw)?)?;
        println!("{}: closed form {closed:.10}, ODE {:.10}", b.label(), model.et_at_output(&raw)?);
    }

    let data = SweepData::generate(Model::Arabidopsis, 100, 11, 100, 7, 10)?;
    let prior = EmulatorPrior::new(0.29, 344.23 / 500.0, CorrelationKernel::isotropic(ara::N_PARAMS, 3.0)?)?;
    for labels in [&[][..], &["K"], &["K", "L"]] {
        let base = adjust_set(prior.clone(), ara::boundary_set_arabidopsis(labels)?)?;
        let em = Emulator::new(base, data.train_x.clone(), data.train_y.clone())?;
        let r = analysis::diagnose_emulator(&em, &data.test_x, &data.test_y)?;
        println!(
            "{} known boundaries: sum of variances {:.2}, MASPE {:.3}",
            labels.len(),
            r.sum_of_variances,
            r.maspe
        );
    }
    Ok(())
}

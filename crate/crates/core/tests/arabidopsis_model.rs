mod common;

use common::rng;
use kbemu::testbed::arabidopsis::{s, ArabidopsisModel, ATOL, PARAMS, RTOL, T_OUTPUT};
use rand::RngExt;

#[test]
fn halving_tolerances_barely_moves_the_output() {
    let model = ArabidopsisModel::default();
    let mut r = rng(20);
    for _ in 0..20 {
        let raw: Vec<f64> = PARAMS.iter().map(|&(_, lo, hi)| r.random_range(lo..hi)).collect();
        let a = model.integrate_tol(&raw, T_OUTPUT, RTOL, ATOL).unwrap()[s::ET];
        let b = model.integrate_tol(&raw, T_OUTPUT, RTOL / 2.0, ATOL / 2.0).unwrap()[s::ET];
        assert!((a - b).abs() < 1e-7, "{a} vs {b}");
    }
}

#[test]
fn negative_rate_is_rejected() {
    let mut raw: Vec<f64> = PARAMS.iter().map(|&(_, lo, hi)| 0.5 * (lo + hi)).collect();
    raw[3] = -1.0;
    assert!(ArabidopsisModel::default().et_at_output(&raw).is_err());
}

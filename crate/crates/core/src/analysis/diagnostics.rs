use serde::{Deserialize, Serialize};

use crate::engine::Emulator;
use crate::error::{Error, Result};

/// A variance below `ZERO_VARIANCE_REL * sigma2` counts as zero.
pub const ZERO_VARIANCE_REL: f64 = 1e-12;
/// Largest residual treated as exact at a zero-variance point.
pub const ZERO_RESIDUAL_ABS: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub sum_of_variances: f64,
    /// Mean absolute standardized prediction error.
    pub maspe: f64,
    pub rmse: f64,
    pub standardized_errors: Vec<f64>,
    /// Fraction of points with `|s| <= 3`.
    pub three_sigma_fraction: f64,
    /// Set when some point has zero variance but a non-negligible residual.
    pub failure: bool,
}

/// Sum with pairwise (cascade) summation; the result depends only on the
/// order of `v`.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn check_sizes(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, got: b });
    }
    Ok(())
}

/// `s = (mu - f) / sqrt(nu)`.
///
/// Where `nu < ZERO_VARIANCE_REL * sigma2`, `s` is 0 if the residual is
/// below `ZERO_RESIDUAL_ABS` and `+inf` otherwise.
pub fn standardized_errors(
    means: &[f64],
    variances: &[f64],
    truths: &[f64],
    sigma2: f64,
) -> Result<Vec<f64>> {
    check_sizes(means.len(), variances.len())?;
    check_sizes(means.len(), truths.len())?;
    if let Some(v) = variances.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::InvalidArgument(format!("negative or NaN variance {v}")));
    }
    Ok(means
        .iter()
        .zip(variances)
        .zip(truths)
        .map(|((&m, &v), &f)| {
            let r = m - f;
            if v < ZERO_VARIANCE_REL * sigma2 {
                if r.abs() < ZERO_RESIDUAL_ABS {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                r / v.sqrt()
            }
        })
        .collect())
}

/// Diagnostics from predictions at test points with known outputs.
pub fn diagnostics(
    means: &[f64],
    variances: &[f64],
    truths: &[f64],
    sigma2: f64,
) -> Result<DiagnosticsReport> {
    let s = standardized_errors(means, variances, truths, sigma2)?;
    let n = s.len();
    if n == 0 {
        return Err(Error::InvalidArgument("no test points".into()));
    }
    let abs: Vec<f64> = s.iter().map(|v| v.abs()).collect();
    let sq: Vec<f64> = means.iter().zip(truths).map(|(m, f)| (m - f) * (m - f)).collect();
    Ok(DiagnosticsReport {
        sum_of_variances: pairwise_sum(variances),
        maspe: pairwise_sum(&abs) / n as f64,
        rmse: (pairwise_sum(&sq) / n as f64).sqrt(),
        three_sigma_fraction: abs.iter().filter(|v| **v <= 3.0).count() as f64 / n as f64,
        failure: s.iter().any(|v| v.is_infinite()),
        standardized_errors: s,
    })
}

/// Predict at `inputs` and compare against `truths`.
pub fn diagnose_emulator(
    em: &Emulator,
    inputs: &[Vec<f64>],
    truths: &[f64],
) -> Result<DiagnosticsReport> {
    check_sizes(inputs.len(), truths.len())?;
    let pred = em.predict(inputs, false)?;
    diagnostics(&pred.mean, &pred.variance, truths, em.base().prior().sigma2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn standardized_cases() {
        let s = standardized_errors(&[1.0, 4.0, 2.0, 2.0], &[1.0, 1.0, 0.0, 0.0], &[1.0, 1.0, 2.0, 3.0], 1.0)
            .unwrap();
        assert_eq!(s[0], 0.0);
        assert_eq!(s[1], 3.0);
        assert_eq!(s[2], 0.0);
        assert!(s[3].is_infinite());
        assert!(standardized_errors(&[0.0], &[-1.0], &[0.0], 1.0).is_err());
        assert!(standardized_errors(&[0.0], &[1.0], &[], 1.0).is_err());
    }

    #[test]
    fn report_fields() {
        let r = diagnostics(&[1.0, 2.0], &[1.0, 4.0], &[1.0, 2.0], 1.0).unwrap();
        assert_eq!(r.rmse, 0.0);
        assert_eq!(r.maspe, 0.0);
        assert_eq!(r.sum_of_variances, 5.0);
        assert_eq!(r.three_sigma_fraction, 1.0);
        assert!(!r.failure);
        let r = diagnostics(&[0.0, 5.0], &[1.0, 0.0], &[4.0, 0.0], 1.0).unwrap();
        assert_eq!(r.three_sigma_fraction, 0.0);
        assert!(r.failure && r.maspe.is_infinite());
    }

    #[test]
    fn prior_sum_of_variances() {
        let s2 = 344.23 / 500.0;
        let r = diagnostics(&[0.0; 500], &[s2; 500], &[0.5; 500], s2).unwrap();
        assert!((r.sum_of_variances - 344.23).abs() < 1e-10);
    }

    #[test]
    fn prior_rmse_is_rms_about_beta() {
        let truths = [0.3, -1.2, 2.5, 0.0];
        let r = diagnostics(&[0.5; 4], &[1.0; 4], &truths, 1.0).unwrap();
        let rms = (truths.iter().map(|t| (t - 0.5f64).powi(2)).sum::<f64>() / 4.0).sqrt();
        assert!((r.rmse - rms).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn permutation_invariant(v in prop::collection::vec((-5.0..5.0f64, 0.01..4.0f64, -5.0..5.0f64), 2..40), rot in 0usize..40) {
            let m: Vec<f64> = v.iter().map(|t| t.0).collect();
            let var: Vec<f64> = v.iter().map(|t| t.1).collect();
            let f: Vec<f64> = v.iter().map(|t| t.2).collect();
            let k = rot % v.len();
            let rotate = |x: &[f64]| { let mut y = x.to_vec(); y.rotate_left(k); y };
            let a = diagnostics(&m, &var, &f, 1.0).unwrap();
            let b = diagnostics(&rotate(&m), &rotate(&var), &rotate(&f), 1.0).unwrap();
            prop_assert!((a.maspe - b.maspe).abs() <= 1e-12 * a.maspe.max(1.0));
            prop_assert!((a.sum_of_variances - b.sum_of_variances).abs() <= 1e-12 * a.sum_of_variances);
            prop_assert!((0.0..=1.0).contains(&a.three_sigma_fraction));
        }
    }
}

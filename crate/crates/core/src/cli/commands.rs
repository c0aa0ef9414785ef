//! The work behind each subcommand, as plain library functions.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::csvio::Table;
use crate::analysis::{diagnostics, maximin_lhc, standardized_errors, DiagnosticsReport};
use crate::engine::{adjust_set, Emulator, EmulatorPrior};
use crate::error::{Error, Result};
use crate::geometry::{classify_pair, BoundarySet, PairClass};
use crate::oracle::{build_augmented, naive_per_target, naive_update};
use crate::testbed::{arabidopsis, Model};

/// One line per boundary pair plus the order updates are applied in.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub pairs: Vec<(String, String, String)>,
    pub chain_order: Vec<String>,
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (a, b, c) in &self.pairs {
            writeln!(f, "{a} {b}: {c}")?;
        }
        write!(f, "update order: [{}]", self.chain_order.join(", "))
    }
}

fn describe(c: PairClass, a: &str, b: &str) -> String {
    match c {
        PairClass::OrthogonalIntersecting => "orthogonal, intersecting".into(),
        PairClass::ParallelNested { parent } => {
            let p = if parent == crate::geometry::PairMember::First { a } else { b };
            format!("parallel, nested (parent {p})")
        }
        PairClass::Identical => "identical".into(),
        PairClass::Invalid => "invalid".into(),
    }
}

/// Classify every pair of the named boundaries, then validate the set.
pub fn validate(cfg: &ExperimentConfig, labels: &[String]) -> Result<ValidationReport> {
    let bs = cfg.boundaries_by_label(labels)?;
    let mut pairs = Vec::new();
    for i in 0..bs.len() {
        for j in i + 1..bs.len() {
            let c = classify_pair(&bs[i], &bs[j]);
            pairs.push((
                bs[i].label().to_string(),
                bs[j].label().to_string(),
                describe(c, bs[i].label(), bs[j].label()),
            ));
        }
    }
    for (a, b, c) in &pairs {
        log::info!("{a} {b}: {c}");
    }
    let set = crate::geometry::validate_set(bs)?;
    Ok(ValidationReport {
        pairs,
        chain_order: set.ordered().map(|b| b.label().to_string()).collect(),
    })
}

/// Column names of the model inputs.
pub fn input_header(model: Model) -> Vec<String> {
    match model {
        Model::ThreeD => (1..=3).map(|i| format!("x{i}")).collect(),
        Model::Arabidopsis => arabidopsis::PARAMS.iter().map(|p| p.0.to_string()).collect(),
    }
}

/// Column holding the output of interest in `run_model` tables.
pub fn output_column(model: Model) -> &'static str {
    match model {
        Model::ThreeD => "f",
        Model::Arabidopsis => "ET",
    }
}

/// Maximin Latin hypercube in model units.
pub fn design(model: Model, n: usize, seed: u64, restarts: usize) -> Result<Table> {
    let d = maximin_lhc(n, model.dim(), seed, restarts)?;
    Ok(Table {
        header: input_header(model),
        rows: d.scaled(&model.domain())?,
    })
}

fn check_width(t: &Table, p: usize) -> Result<()> {
    match t.rows.iter().find(|r| r.len() != p) {
        Some(r) => Err(Error::DimensionMismatch {
            expected: p,
            got: r.len(),
        }),
        None if t.header.len() != p => Err(Error::DimensionMismatch {
            expected: p,
            got: t.header.len(),
        }),
        None => Ok(()),
    }
}

/// Run the simulator at every design row. The 3D model gives one column
/// `f`; the Arabidopsis model gives `t` and all 18 states at `t = 2`.
pub fn run_model(model: Model, inputs: &Table) -> Result<Table> {
    check_width(inputs, model.dim())?;
    match model {
        Model::ThreeD => Ok(Table {
            header: vec!["f".into()],
            rows: inputs
                .rows
                .iter()
                .map(|x| Ok(vec![model.evaluate(x)?]))
                .collect::<Result<_>>()?,
        }),
        Model::Arabidopsis => {
            let m = arabidopsis::ArabidopsisModel::default();
            let mut header = vec!["t".to_string()];
            header.extend(arabidopsis::STATES.iter().map(|s| s.0.replace('*', "_star")));
            let rows = inputs
                .rows
                .iter()
                .map(|z| {
                    let raw = arabidopsis::inverse_transform(z)?;
                    let y = m.integrate(&raw, arabidopsis::T_OUTPUT)?;
                    let mut row = vec![arabidopsis::T_OUTPUT];
                    row.extend(y.iter());
                    Ok(row)
                })
                .collect::<Result<_>>()?;
            Ok(Table { header, rows })
        }
    }
}

/// Fit an emulator on the first `n` design rows, or all rows.
pub fn fit(
    prior: EmulatorPrior,
    set: BoundarySet,
    inputs: &Table,
    outputs: &[f64],
    n: Option<usize>,
) -> Result<Emulator> {
    check_width(inputs, prior.p())?;
    if inputs.rows.len() != outputs.len() {
        return Err(Error::DimensionMismatch {
            expected: inputs.rows.len(),
            got: outputs.len(),
        });
    }
    let n = n.unwrap_or(outputs.len());
    if n > outputs.len() {
        return Err(Error::InvalidArgument(format!(
            "asked for {n} training runs but only {} are available",
            outputs.len()
        )));
    }
    let base = adjust_set(prior, set)?;
    Emulator::new(base, inputs.rows[..n].to_vec(), outputs[..n].to_vec())
}

pub fn predict(em: &Emulator, points: &Table) -> Result<Table> {
    check_width(points, em.base().p())?;
    let pred = em.predict(&points.rows, false)?;
    Ok(Table {
        header: vec!["mean".into(), "variance".into()],
        rows: pred.mean.into_iter().zip(pred.variance).map(|(m, v)| vec![m, v]).collect(),
    })
}

/// One cell of a diagnostics table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticRow {
    pub theta: f64,
    pub n_tp: usize,
    pub n_kb: usize,
    pub sum_var: f64,
    pub maspe: f64,
    pub rmse: f64,
    pub three_sigma_fraction: f64,
    pub failure: bool,
}

pub const DIAGNOSTIC_HEADER: [&str; 8] =
    ["theta", "n_tp", "n_kb", "sum_var", "maspe", "rmse", "three_sigma_fraction", "failure"];

impl DiagnosticRow {
    pub fn from_report(theta: f64, n_tp: usize, n_kb: usize, r: &DiagnosticsReport) -> Self {
        DiagnosticRow {
            theta,
            n_tp,
            n_kb,
            sum_var: r.sum_of_variances,
            maspe: r.maspe,
            rmse: r.rmse,
            three_sigma_fraction: r.three_sigma_fraction,
            failure: r.failure,
        }
    }

    pub fn record(&self) -> Vec<String> {
        use super::csvio::fmt_f64;
        vec![
            fmt_f64(self.theta),
            self.n_tp.to_string(),
            self.n_kb.to_string(),
            fmt_f64(self.sum_var),
            fmt_f64(self.maspe),
            fmt_f64(self.rmse),
            fmt_f64(self.three_sigma_fraction),
            self.failure.to_string(),
        ]
    }
}

/// Shared inputs of a diagnostics sweep: one training design, sampled by
/// prefix, and one test design.
#[derive(Clone, Debug)]
pub struct SweepData {
    pub train_x: Vec<Vec<f64>>,
    pub train_y: Vec<f64>,
    pub test_x: Vec<Vec<f64>>,
    pub test_y: Vec<f64>,
}

impl SweepData {
    pub fn generate(model: Model, n_train: usize, train_seed: u64, n_test: usize, test_seed: u64, restarts: usize) -> Result<Self> {
        let run = |n: usize, seed: u64| -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
            if n == 0 {
                return Ok((Vec::new(), Vec::new()));
            }
            let x = design(model, n, seed, restarts)?.rows;
            let y = x.iter().map(|xi| model.evaluate(xi)).collect::<Result<_>>()?;
            Ok((x, y))
        };
        let (train_x, train_y) = run(n_train, train_seed)?;
        let (test_x, test_y) = run(n_test, test_seed)?;
        Ok(SweepData {
            train_x,
            train_y,
            test_x,
            test_y,
        })
    }
}

/// Diagnostics for one `(theta, boundaries, n)` cell.
pub fn diagnose_cell(
    cfg: &ExperimentConfig,
    data: &SweepData,
    theta: Option<f64>,
    labels: &[String],
    n: usize,
) -> Result<(DiagnosticRow, Vec<f64>, Vec<f64>)> {
    let prior = cfg.prior_with(theta)?;
    let sigma2 = prior.sigma2();
    let theta_v = theta.unwrap_or_else(|| prior.kernel().theta()[0]);
    if n > data.train_x.len() {
        return Err(Error::InvalidArgument(format!(
            "cell needs {n} training runs, design has {}",
            data.train_x.len()
        )));
    }
    let base = adjust_set(prior, cfg.boundary_set(labels)?)?;
    let em = Emulator::new(base, data.train_x[..n].to_vec(), data.train_y[..n].to_vec())?;
    let pred = em.predict(&data.test_x, false)?;
    let r = diagnostics(&pred.mean, &pred.variance, &data.test_y, sigma2)?;
    Ok((DiagnosticRow::from_report(theta_v, n, labels.len(), &r), pred.mean, pred.variance))
}

/// Default axes of the diagnostics table.
pub const DEFAULT_THETA_SWEEP: [f64; 5] = [0.1, 1.0, 3.0, 6.0, 10.0];
pub const DEFAULT_TRAIN_SWEEP: [usize; 4] = [0, 200, 500, 1000];

/// Every cell of the `theta x boundaries x n` grid from the config.
pub fn diagnostic_sweep(cfg: &ExperimentConfig) -> Result<Vec<DiagnosticRow>> {
    let thetas = if cfg.theta_sweep.is_empty() {
        DEFAULT_THETA_SWEEP.to_vec()
    } else {
        cfg.theta_sweep.clone()
    };
    let ns = if cfg.train_sweep.is_empty() {
        DEFAULT_TRAIN_SWEEP.to_vec()
    } else {
        cfg.train_sweep.clone()
    };
    let sets = if cfg.boundary_sweep.is_empty() {
        (0..=cfg.boundaries.len()).map(|k| cfg.boundaries[..k].to_vec()).collect()
    } else {
        cfg.boundary_sweep.clone()
    };
    let diag = cfg
        .diagnostic
        .clone()
        .ok_or_else(|| Error::Config("diagnostics need a `diagnostic` section".into()))?;
    let n_max = ns.iter().copied().max().unwrap_or(0);
    let data = SweepData::generate(cfg.model, n_max, cfg.design.seed, diag.n_test, diag.seed, cfg.design.restarts)?;
    let mut rows = Vec::new();
    for &theta in &thetas {
        for labels in &sets {
            for &n in &ns {
                let (row, _, _) = diagnose_cell(cfg, &data, Some(theta), labels, n)?;
                log::info!("theta {theta} kb {} n {n}: maspe {:.3}", labels.len(), row.maspe);
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

/// Shape of a boundary set, which fixes the expected augmented size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SetKind {
    Empty,
    Orthogonal,
    /// Parallel chain whose members share one normal set.
    Parallel,
    /// Parallel chain with strictly growing normal sets.
    Nested,
    Mixed,
}

pub fn set_kind(set: &BoundarySet) -> SetKind {
    let classes = set.pair_classes();
    let h = set.len();
    let off: Vec<PairClass> = (0..h).flat_map(|i| (i + 1..h).map(move |j| (i, j))).map(|(i, j)| classes[i][j]).collect();
    if h == 0 {
        SetKind::Empty
    } else if off.iter().all(|c| *c == PairClass::OrthogonalIntersecting) {
        SetKind::Orthogonal
    } else if off.iter().all(|c| matches!(c, PairClass::ParallelNested { .. })) {
        let j = set.boundaries()[0].normal();
        if set.boundaries().iter().all(|b| b.normal() == j) {
            SetKind::Parallel
        } else {
            SetKind::Nested
        }
    } else {
        SetKind::Mixed
    }
}

/// `2^h n + (2^h - 1) n_B` for orthogonal sets, `(h + 1) n + h n_B` for
/// parallel chains sharing `J`, `n` for the empty set. Nested chains and
/// mixed sets have no closed count.
pub fn expected_oracle_size(kind: SetKind, h: usize, n: usize, n_b: usize) -> Option<usize> {
    match kind {
        SetKind::Empty => Some(n),
        SetKind::Orthogonal => Some((1 << h) * n + ((1 << h) - 1) * n_b),
        SetKind::Parallel => Some((h + 1) * n + h * n_b),
        SetKind::Nested | SetKind::Mixed => None,
    }
}

/// Engine against the dense oracle on one configuration.
#[derive(Clone, Debug, Serialize)]
pub struct OracleComparison {
    pub label: String,
    pub kind: SetKind,
    pub h: usize,
    pub n: usize,
    pub n_b: usize,
    pub oracle_size: usize,
    pub expected_size: Option<usize>,
    pub engine_factor_size: usize,
    pub engine_time: Duration,
    pub oracle_time: Duration,
    pub oracle_jitter: f64,
    /// `max |engine - oracle| / max(|oracle|, sigma)` over targets.
    pub max_rel_mean: f64,
    /// `max |engine - oracle| / max(|oracle|, sigma2)` over targets.
    pub max_rel_var: f64,
}

pub const ORACLE_HEADER: [&str; 13] = [
    "label",
    "kind",
    "h",
    "n",
    "n_b",
    "oracle_size",
    "expected_size",
    "engine_factor_size",
    "engine_seconds",
    "oracle_seconds",
    "oracle_jitter",
    "max_rel_mean",
    "max_rel_var",
];

impl OracleComparison {
    pub fn record(&self) -> Vec<String> {
        use super::csvio::fmt_f64;
        vec![
            self.label.clone(),
            format!("{:?}", self.kind).to_lowercase(),
            self.h.to_string(),
            self.n.to_string(),
            self.n_b.to_string(),
            self.oracle_size.to_string(),
            self.expected_size.map_or(String::new(), |s| s.to_string()),
            self.engine_factor_size.to_string(),
            fmt_f64(self.engine_time.as_secs_f64()),
            fmt_f64(self.oracle_time.as_secs_f64()),
            fmt_f64(self.oracle_jitter),
            fmt_f64(self.max_rel_mean),
            fmt_f64(self.max_rel_var),
        ]
    }
}

/// Time the engine and the batched oracle on the same targets.
///
/// Accuracy is measured against the per-target oracle, whose dense
/// systems are far better conditioned than the batched one.
pub fn compare_oracle(
    label: &str,
    prior: &EmulatorPrior,
    set: &BoundarySet,
    x_d: &[Vec<f64>],
    d: &[f64],
    targets: &[Vec<f64>],
    check_accuracy: bool,
) -> Result<OracleComparison> {
    let kind = set_kind(set);
    let (n, n_b, h) = (x_d.len(), targets.len(), set.len());

    let t = Instant::now();
    let base = adjust_set(prior.clone(), set.clone())?;
    let em = Emulator::new(base, x_d.to_vec(), d.to_vec())?;
    let pe = em.predict(targets, false)?;
    let engine_time = t.elapsed();

    let t = Instant::now();
    let aug = build_augmented(x_d, d, set, targets)?;
    let batch = naive_update(prior, &aug, targets)?;
    let oracle_time = t.elapsed();

    let (mut max_rel_mean, mut max_rel_var) = (f64::NAN, f64::NAN);
    if check_accuracy {
        let po = naive_per_target(prior, x_d, d, set, targets)?;
        let sigma = prior.sigma2().sqrt();
        max_rel_mean = 0.0;
        max_rel_var = 0.0;
        for i in 0..n_b {
            max_rel_mean = max_rel_mean.max((pe.mean[i] - po.mean[i]).abs() / po.mean[i].abs().max(sigma));
            max_rel_var = max_rel_var.max((pe.variance[i] - po.variance[i]).abs() / po.variance[i].abs().max(prior.sigma2()));
        }
    }
    Ok(OracleComparison {
        label: label.to_string(),
        kind,
        h,
        n,
        n_b,
        oracle_size: aug.len(),
        expected_size: expected_oracle_size(kind, h, n, n_b),
        engine_factor_size: em.n(),
        engine_time,
        oracle_time,
        oracle_jitter: batch.stats.jitter,
        max_rel_mean,
        max_rel_var,
    })
}

/// `compare_oracle` on the configured model and boundaries.
pub fn compare_oracle_config(cfg: &ExperimentConfig, labels: &[String], n: usize, theta: Option<f64>) -> Result<OracleComparison> {
    let oc = cfg
        .oracle
        .clone()
        .ok_or_else(|| Error::Config("compare-oracle needs an `oracle` section".into()))?;
    let prior = cfg.prior_with(theta)?;
    let set = cfg.boundary_set(labels)?;
    let data = SweepData::generate(cfg.model, n, cfg.design.seed, oc.n_targets, oc.seed, cfg.design.restarts)?;
    compare_oracle(&labels.join(""), &prior, &set, &data.train_x, &data.train_y, &data.test_x, true)
}

/// A plotting plane of the 3D example: one coordinate fixed.
#[derive(Clone, Copy, Debug)]
pub struct Plane {
    pub name: &'static str,
    pub fixed: usize,
    pub value: f64,
}

/// The three planes `x2 = 0`, `x2 = -pi/8` and `x1 = -pi`.
pub const FIGURE_PLANES: [Plane; 3] = [
    Plane {
        name: "x2=0",
        fixed: 1,
        value: 0.0,
    },
    Plane {
        name: "x2=-pi/8",
        fixed: 1,
        value: -PI / 8.0,
    },
    Plane {
        name: "x1=-pi",
        fixed: 0,
        value: -PI,
    },
];

/// `m x m` grid of cell midpoints over the 3D domain with one coordinate fixed.
pub fn plane_grid(plane: Plane, m: usize) -> Vec<Vec<f64>> {
    let dom = crate::testbed::three_d::DOMAIN;
    let free: Vec<usize> = (0..3).filter(|&j| j != plane.fixed).collect();
    let at = |j: usize, i: usize| dom[j].0 + (i as f64 + 0.5) / m as f64 * (dom[j].1 - dom[j].0);
    let mut pts = Vec::with_capacity(m * m);
    for a in 0..m {
        for b in 0..m {
            let mut x = vec![0.0; 3];
            x[plane.fixed] = plane.value;
            x[free[0]] = at(free[0], a);
            x[free[1]] = at(free[1], b);
            pts.push(x);
        }
    }
    pts
}

/// `x1, x2, x3, f, mean, variance, s` over a plane.
pub fn plane_table(em: &Emulator, plane: Plane, m: usize) -> Result<(Table, DiagnosticsReport)> {
    let xs = plane_grid(plane, m);
    let f: Vec<f64> = xs.iter().map(|x| crate::testbed::three_d::eval_3d(x)).collect();
    let pred = em.predict(&xs, false)?;
    let sigma2 = em.base().prior().sigma2();
    let report = diagnostics(&pred.mean, &pred.variance, &f, sigma2)?;
    let s = standardized_errors(&pred.mean, &pred.variance, &f, sigma2)?;
    let header = ["x1", "x2", "x3", "f", "mean", "variance", "s"].map(String::from).to_vec();
    let rows = (0..xs.len())
        .map(|i| {
            let mut r = xs[i].clone();
            r.extend([f[i], pred.mean[i], pred.variance[i], s[i]]);
            r
        })
        .collect();
    Ok((Table { header, rows }, report))
}

//! Evaluation models and the registry that turns solver names back into
//! boundary solvers.

pub mod arabidopsis;
pub mod three_d;

use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{Boundary, BoundarySolver, BoundarySpec, SolverSpec};

/// Which testbed a config or emulator file refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    ThreeD,
    Arabidopsis,
}

impl Model {
    pub fn dim(self) -> usize {
        match self {
            Model::ThreeD => 3,
            Model::Arabidopsis => arabidopsis::N_PARAMS,
        }
    }

    /// Simulator output at a point in emulator units.
    pub fn evaluate(self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        match self {
            Model::ThreeD => Ok(three_d::eval_3d(x)),
            Model::Arabidopsis => arabidopsis::et_transformed(x),
        }
    }

    /// All named boundaries of the model.
    pub fn boundaries(self) -> Vec<Boundary> {
        match self {
            Model::ThreeD => three_d::boundaries_3d(),
            Model::Arabidopsis => arabidopsis::boundaries_arabidopsis(),
        }
    }

    /// Box on which designs are drawn.
    pub fn domain(self) -> Vec<(f64, f64)> {
        match self {
            Model::ThreeD => three_d::DOMAIN.to_vec(),
            Model::Arabidopsis => vec![(-1.0, 1.0); arabidopsis::N_PARAMS],
        }
    }
}

/// The builtin boundary registered under `name`, e.g. `three_d.K`.
pub fn builtin_boundary(name: &str) -> Option<Boundary> {
    let (model, label) = match name.split_once('.')? {
        ("three_d", l) => (Model::ThreeD, l),
        ("arabidopsis", l) => (Model::Arabidopsis, l),
        _ => return None,
    };
    model.boundaries().into_iter().find(|b| b.label() == label)
}

/// Rebuild a boundary from its serialized form. Table paths are resolved
/// against `base_dir`.
pub fn boundary_from_spec(spec: &BoundarySpec, p: usize, base_dir: &Path) -> Result<Boundary> {
    let solver: Arc<dyn BoundarySolver> = match &spec.solver {
        SolverSpec::Builtin(name) => {
            let b = builtin_boundary(name)
                .ok_or_else(|| Error::Config(format!("unknown builtin solver `{name}`")))?;
            if b.normal() != spec.normal_indices.as_slice() || b.alpha() != spec.alpha.as_slice() {
                return Err(Error::Config(format!(
                    "boundary `{}` does not match the geometry of builtin `{name}`",
                    spec.label
                )));
            }
            return Ok(b.relabeled(&spec.label));
        }
        SolverSpec::TrainingTable(path) => Arc::new(TableSolver::load(&base_dir.join(path), p)?),
    };
    Ok(Boundary::new(
        spec.label.clone(),
        p,
        spec.normal_indices.clone(),
        spec.alpha.clone(),
        solver,
    )?
    .with_spec(spec.solver.clone()))
}

/// Boundary solver backed by precomputed on-boundary runs.
///
/// The table is a headed CSV with `p` input columns followed by one output
/// column. Lookups match a row within `1e-12` in every coordinate.
#[derive(Clone, Debug)]
pub struct TableSolver {
    rows: Vec<(Vec<f64>, f64)>,
}

impl TableSolver {
    pub fn new(rows: Vec<(Vec<f64>, f64)>) -> Self {
        TableSolver { rows }
    }

    pub fn load(path: &Path, p: usize) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != p + 1 {
                return Err(Error::DimensionMismatch {
                    expected: p + 1,
                    got: rec.len(),
                });
            }
            let vals = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            rows.push((vals[..p].to_vec(), vals[p]));
        }
        Ok(TableSolver { rows })
    }
}

impl BoundarySolver for TableSolver {
    fn evaluate(&self, x: &[f64]) -> std::result::Result<f64, String> {
        self.rows
            .iter()
            .find(|(r, _)| r.iter().zip(x).all(|(a, b)| (a - b).abs() <= 1e-12))
            .map(|(_, v)| *v)
            .ok_or_else(|| format!("no table entry for {x:?}"))
    }
}

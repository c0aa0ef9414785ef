//! Versioned JSON files for fitted emulators.
//!
//! A file stores the prior, the boundary specs and the training data; the
//! emulator is refitted on load, which is deterministic.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::{adjust_set, Emulator, EmulatorPrior};
use crate::error::{Error, Result};
use crate::geometry::{validate_set, BoundarySpec};
use crate::testbed::{boundary_from_spec, Model};

pub const FORMAT: &str = "kbe-emulator";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmulatorFile {
    pub format: String,
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<Model>,
    pub prior: EmulatorPrior,
    pub boundaries: Vec<BoundarySpec>,
    pub design: Vec<Vec<f64>>,
    pub outputs: Vec<f64>,
}

impl EmulatorFile {
    /// Snapshot of a fitted emulator. Every boundary needs a solver spec.
    pub fn from_emulator(em: &Emulator, model: Option<Model>) -> Result<Self> {
        let boundaries = em
            .base()
            .boundary_set()
            .boundaries()
            .iter()
            .map(|b| {
                b.to_spec().ok_or_else(|| {
                    Error::Config(format!("boundary `{}` has no serializable solver", b.label()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EmulatorFile {
            format: FORMAT.into(),
            version: VERSION,
            model,
            prior: em.base().prior().clone(),
            boundaries,
            design: em.design().to_vec(),
            outputs: em.outputs().to_vec(),
        })
    }

    /// Refit the emulator; table solver paths resolve against `base_dir`.
    pub fn to_emulator(&self, base_dir: &Path) -> Result<Emulator> {
        let p = self.prior.p();
        let bs = self
            .boundaries
            .iter()
            .map(|s| boundary_from_spec(s, p, base_dir))
            .collect::<Result<Vec<_>>>()?;
        let base = adjust_set(self.prior.clone(), validate_set(bs)?)?;
        Emulator::new(base, self.design.clone(), self.outputs.clone())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f: EmulatorFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if f.format != FORMAT {
            return Err(Error::Config(format!("not an emulator file (format `{}`)", f.format)));
        }
        if f.version != VERSION {
            return Err(Error::Config(format!(
                "unsupported emulator file version {} (expected {VERSION})",
                f.version
            )));
        }
        Ok(f)
    }
}

/// Save an emulator fitted on a testbed model.
pub fn save_emulator(em: &Emulator, model: Option<Model>, path: &Path) -> Result<()> {
    EmulatorFile::from_emulator(em, model)?.save(path)
}

/// Load and refit an emulator; relative table paths resolve next to the file.
pub fn load_emulator(path: &Path) -> Result<(Emulator, Option<Model>)> {
    let f = EmulatorFile::load(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    Ok((f.to_emulator(dir)?, f.model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testbed::three_d::{boundary_set_3d, eval_3d, prior_3d};

    #[test]
    fn round_trip_predictions() {
        let base = adjust_set(prior_3d(), boundary_set_3d(&["K", "M"]).unwrap()).unwrap();
        let x = vec![vec![1.0, 0.2, -1.0], vec![-2.0, -0.3, 2.5], vec![0.5, 0.5, 0.5]];
        let d = x.iter().map(|v| eval_3d(v)).collect();
        let em = Emulator::new(base, x, d).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("em.json");
        save_emulator(&em, Some(Model::ThreeD), &path).unwrap();
        let (back, model) = load_emulator(&path).unwrap();
        assert_eq!(model, Some(Model::ThreeD));
        let xs = vec![vec![0.3, -0.1, 1.7], vec![2.0, 0.1, -0.4]];
        let (a, b) = (em.predict(&xs, false).unwrap(), back.predict(&xs, false).unwrap());
        assert_eq!(a.mean, b.mean);
        assert_eq!(a.variance, b.variance);
    }

    #[test]
    fn rejects_wrong_version() {
        let em = Emulator::new(crate::engine::BoundaryAdjustedPrior::unadjusted(prior_3d()), vec![], vec![]).unwrap();
        let mut f = EmulatorFile::from_emulator(&em, None).unwrap();
        f.version = 99;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("em.json");
        f.save(&path).unwrap();
        assert!(matches!(EmulatorFile::load(&path), Err(Error::Config(_))));
    }

    #[test]
    fn prior_validated_on_load() {
        let bad = r#"{"beta":0,"sigma2":-1,"kernel":{"family":"gaussian","theta":[1]}}"#;
        assert!(serde_json::from_str::<EmulatorPrior>(bad).is_err());
    }
}

//! Experiment manifests: a list of runs (frontend, ansatz, seed, noisy,
//! static) over one dataset, for multi-seed sweeps and group comparison.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use quanv_core::ansatz::RANDOM_DEFAULT_GATE_COUNT;
use quanv_core::error::{Error, Result};
use quanv_core::model::FrontendKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifestAnsatz {
    Se,
    Td,
    Random,
}

fn default_gate_count() -> usize {
    RANDOM_DEFAULT_GATE_COUNT
}

/// One model to train and evaluate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestRun {
    /// Unique run identifier; doubles as the run directory name.
    pub name: String,
    pub frontend: FrontendKind,
    #[serde(default)]
    pub ansatz: Option<ManifestAnsatz>,
    #[serde(default)]
    pub ansatz_seed: u64,
    #[serde(default = "default_gate_count")]
    pub gate_count: usize,
    pub seed: u64,
    #[serde(default)]
    pub noisy: bool,
    #[serde(default, rename = "static")]
    pub static_frontend: bool,
}

impl ManifestRun {
    /// Runs sharing a group key are aggregated together and paired by seed
    /// against the baseline.
    pub fn group_key(&self) -> String {
        let mut key = match (self.frontend, self.ansatz) {
            (FrontendKind::Classical, _) => "classical".to_string(),
            (FrontendKind::Quantum, Some(ManifestAnsatz::Se)) => "quantum-se".to_string(),
            (FrontendKind::Quantum, Some(ManifestAnsatz::Td)) => "quantum-td".to_string(),
            (FrontendKind::Quantum, Some(ManifestAnsatz::Random)) => "quantum-random".to_string(),
            (FrontendKind::Quantum, None) => "quantum".to_string(),
        };
        if self.noisy {
            key.push_str("-noisy");
        }
        if self.static_frontend {
            key.push_str("-static");
        }
        key
    }
}

/// Training overrides shared by every run in the manifest; anything omitted
/// uses the trainer defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ManifestTraining {
    #[serde(default)]
    pub epochs: Option<usize>,
    #[serde(default)]
    pub batch_size: Option<usize>,
    #[serde(default)]
    pub train_limit: Option<usize>,
    #[serde(default)]
    pub lr_max: Option<f64>,
    #[serde(default)]
    pub lr_min: Option<f64>,
    #[serde(default)]
    pub dropout: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub noisy_start_epoch: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    /// Dataset path (JSON Lines with sidecar), relative paths resolved
    /// against the manifest's directory.
    pub dataset: PathBuf,
    /// Directory receiving one run directory per manifest entry, resolved
    /// like `dataset`.
    pub output_dir: PathBuf,
    #[serde(default)]
    pub training: ManifestTraining,
    pub runs: Vec<ManifestRun>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(path)?;
        let mut manifest: Manifest = serde_json::from_str(&text)?;
        if let Some(dir) = path.parent() {
            if manifest.dataset.is_relative() {
                manifest.dataset = dir.join(&manifest.dataset);
            }
            if manifest.output_dir.is_relative() {
                manifest.output_dir = dir.join(&manifest.output_dir);
            }
        }
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs.is_empty() {
            return Err(Error::invalid("manifest lists no runs"));
        }
        let mut names = BTreeSet::new();
        for run in &self.runs {
            if !names.insert(run.name.clone()) {
                return Err(Error::invalid(format!(
                    "duplicate run identifier `{}`",
                    run.name
                )));
            }
            if run.frontend == FrontendKind::Quantum && run.ansatz.is_none() {
                return Err(Error::invalid(format!(
                    "run `{}` uses the quantum front end but names no ansatz",
                    run.name
                )));
            }
            if run.name.contains(std::path::MAIN_SEPARATOR) || run.name.is_empty() {
                return Err(Error::invalid(format!(
                    "run identifier `{}` must be a nonempty plain directory name",
                    run.name
                )));
            }
        }
        Ok(())
    }
}

pub mod compare;
pub mod evaluate;
pub mod generate;
pub mod train;

use std::path::{Path, PathBuf};

use clap::ValueEnum;

use quanv_core::ansatz::{AnsatzKind, RANDOM_DEFAULT_GATE_COUNT};
use quanv_core::error::{Error, Result};
use quanv_core::specgen::{load_jsonl, Dataset, Difficulty, SplitIndices};

/// Environment variable naming the default root for output artifacts.
pub const OUT_ROOT_ENV: &str = "QUANV_OUT_ROOT";

pub fn out_root() -> PathBuf {
    std::env::var_os(OUT_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FrontendArg {
    Quantum,
    Classical,
}

/// Ansatz selector; `random` uses `--ansatz-seed`/`--gate-count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnsatzArg {
    /// Strongly entangling (three Rot layers with a CNOT ring).
    Se,
    /// Simplified two-design (RY layers with staggered CZ pairs).
    Td,
    /// Seeded random arrangement of rotations and CNOTs.
    Random,
}

impl AnsatzArg {
    pub fn to_kind(self, ansatz_seed: u64, gate_count: usize) -> AnsatzKind {
        match self {
            AnsatzArg::Se => AnsatzKind::StronglyEntangling,
            AnsatzArg::Td => AnsatzKind::TwoDesign,
            AnsatzArg::Random => AnsatzKind::Random {
                seed: ansatz_seed,
                gate_count,
            },
        }
    }
}

pub fn default_gate_count() -> usize {
    RANDOM_DEFAULT_GATE_COUNT
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Train,
    Val,
    Test,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DifficultyArg {
    All,
    Easy,
    Medium,
    Hard,
}

impl DifficultyArg {
    pub fn to_filter(self) -> Option<Difficulty> {
        match self {
            DifficultyArg::All => None,
            DifficultyArg::Easy => Some(Difficulty::Easy),
            DifficultyArg::Medium => Some(Difficulty::Medium),
            DifficultyArg::Hard => Some(Difficulty::Hard),
        }
    }
}

/// Loads a dataset together with its split sidecar; the sidecar supplies the
/// master seed that pins test membership.
pub fn load_dataset_with_sidecar(dataset_path: &Path) -> Result<(Dataset, SplitIndices)> {
    let sidecar_path = SplitIndices::sidecar_path(dataset_path);
    if !sidecar_path.exists() {
        return Err(Error::invalid(format!(
            "split sidecar {} not found; run `quanv generate` first",
            sidecar_path.display()
        )));
    }
    let sidecar = SplitIndices::load(&sidecar_path)?;
    let dataset = load_jsonl(dataset_path, sidecar.master_seed)?;
    let n = dataset.spectra.len();
    if sidecar
        .train
        .iter()
        .chain(&sidecar.val)
        .chain(&sidecar.test)
        .any(|&i| i >= n)
    {
        return Err(Error::invalid(format!(
            "sidecar {} references indices beyond the dataset ({n} spectra)",
            sidecar_path.display()
        )));
    }
    Ok((dataset, sidecar))
}

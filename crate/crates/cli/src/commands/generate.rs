use std::path::PathBuf;

use clap::{Args, ValueEnum};

use quanv_core::error::Result;
use quanv_core::specgen::{
    build_hard_dataset, build_mixed_dataset, save_jsonl, stratified_split, Difficulty, SplitIndices,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DatasetKind {
    /// 1150 spectra: 550 hard, 350 medium, 250 easy (50 with no peaks).
    Mixed,
    /// 1000 spectra, all hard.
    Hard,
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Which dataset to build.
    #[arg(long, value_enum)]
    pub kind: DatasetKind,
    /// Master seed; fixes both the spectra and the test-split membership.
    #[arg(long)]
    pub seed: u64,
    /// Output path for the JSON Lines dataset (a `<stem>.split.json`
    /// sidecar is written next to it). Defaults to
    /// `$QUANV_OUT_ROOT/<kind>-seed<seed>.jsonl`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Train/val/test fractions.
    #[arg(long, num_args = 3, value_names = ["TRAIN", "VAL", "TEST"], default_values_t = [0.8, 0.1, 0.1])]
    pub fractions: Vec<f64>,
}

pub fn run(args: GenerateArgs) -> Result<()> {
    let out = args.out.unwrap_or_else(|| {
        let name = match args.kind {
            DatasetKind::Mixed => format!("mixed-seed{}.jsonl", args.seed),
            DatasetKind::Hard => format!("hard-seed{}.jsonl", args.seed),
        };
        super::out_root().join(name)
    });
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }

    let dataset = match args.kind {
        DatasetKind::Mixed => build_mixed_dataset(args.seed),
        DatasetKind::Hard => build_hard_dataset(args.seed),
    };
    let fractions = [args.fractions[0], args.fractions[1], args.fractions[2]];
    let split = stratified_split(&dataset, fractions, args.seed)?;
    for warning in &split.warnings {
        eprintln!("warning: {warning}");
    }

    save_jsonl(&dataset, &out)?;
    let sidecar = SplitIndices::sidecar_path(&out);
    split.save(&sidecar)?;

    let count_by = |d: Difficulty| dataset.spectra.iter().filter(|s| s.difficulty == d).count();
    let zero_peaks = dataset
        .spectra
        .iter()
        .filter(|s| s.annotation.count() == 0)
        .count();
    println!(
        "wrote {} spectra to {}",
        dataset.spectra.len(),
        out.display()
    );
    println!(
        "  difficulty: hard {} / medium {} / easy {}",
        count_by(Difficulty::Hard),
        count_by(Difficulty::Medium),
        count_by(Difficulty::Easy)
    );
    println!("  zero-peak spectra: {zero_peaks}");
    println!(
        "  split: train {} / val {} / test {} (sidecar {})",
        split.train.len(),
        split.val.len(),
        split.test.len(),
        sidecar.display()
    );
    Ok(())
}

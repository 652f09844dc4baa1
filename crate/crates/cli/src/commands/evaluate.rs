use std::path::PathBuf;

use clap::{Args, ValueEnum};

use quanv_core::error::{Error, Result};
use quanv_core::metrics::{evaluate_checkpoints, MetricsReport};
use quanv_core::sim::NoiseConfig;

use super::{DifficultyArg, SplitArg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseArg {
    /// Use whatever each checkpoint was trained with.
    Checkpoint,
    /// Force ideal simulation.
    Ideal,
    /// Force the damping channel (strength from --gamma).
    Damping,
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Checkpoint file(s); repeat to aggregate several runs.
    #[arg(long = "checkpoint", required_unless_present = "checkpoints")]
    pub checkpoint: Vec<PathBuf>,
    /// Glob adding further checkpoints, e.g. `runs/se-*/checkpoint.json`.
    #[arg(long)]
    pub checkpoints: Option<String>,
    /// Dataset produced by `quanv generate`.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Which split of the dataset to evaluate on.
    #[arg(long, value_enum, default_value_t = SplitArg::Test)]
    pub split: SplitArg,
    /// Restrict to one difficulty.
    #[arg(long, value_enum, default_value_t = DifficultyArg::All)]
    pub difficulty: DifficultyArg,
    /// Noise configuration at evaluation time.
    #[arg(long, value_enum, default_value_t = NoiseArg::Checkpoint)]
    pub noise: NoiseArg,
    /// Damping strength when --noise damping is selected.
    #[arg(long, default_value_t = 0.02)]
    pub gamma: f64,
    /// Report JSON path. Defaults to `$QUANV_OUT_ROOT/report.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the metrics table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

pub fn run(args: EvaluateArgs) -> Result<()> {
    let mut paths = args.checkpoint.clone();
    if let Some(pattern) = &args.checkpoints {
        let matches = glob::glob(pattern)
            .map_err(|e| Error::invalid(format!("bad glob pattern `{pattern}`: {e}")))?;
        for entry in matches {
            let path =
                entry.map_err(|e| Error::invalid(format!("glob error under `{pattern}`: {e}")))?;
            paths.push(path);
        }
    }
    paths.sort();
    paths.dedup();
    if paths.is_empty() {
        return Err(Error::invalid("no checkpoints matched"));
    }

    let (dataset, sidecar) = super::load_dataset_with_sidecar(&args.dataset)?;
    let indices: Vec<usize> = match args.split {
        SplitArg::Train => sidecar.train.clone(),
        SplitArg::Val => sidecar.val.clone(),
        SplitArg::Test => sidecar.test.clone(),
        SplitArg::All => (0..dataset.spectra.len()).collect(),
    };
    let noise_override = match args.noise {
        NoiseArg::Checkpoint => None,
        NoiseArg::Ideal => Some(NoiseConfig::ideal()),
        NoiseArg::Damping => Some(NoiseConfig::damping(args.gamma)?),
    };

    let report = evaluate_checkpoints(
        &paths,
        &dataset,
        &indices,
        noise_override,
        args.difficulty.to_filter(),
    )?;

    let out = args
        .out
        .clone()
        .unwrap_or_else(|| super::out_root().join("report.json"));
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    report.save(&out)?;
    if let Some(csv_path) = &args.csv {
        std::fs::write(csv_path, report_csv("evaluated", &report))?;
    }

    println!(
        "evaluated {} checkpoint(s) on {} spectra ({:?} split)",
        report.support,
        report.per_run.first().map_or(0, |r| r.n_spectra),
        args.split
    );
    print_report(&report);
    println!("report: {}", out.display());
    Ok(())
}

pub fn print_report(report: &MetricsReport) {
    let o = &report.overall;
    println!(
        "  F1 {:.4} (σ {:.3})  Recall {:.4} (σ {:.3})  Precision {:.4} (σ {:.3})",
        o.f1_weighted.mean,
        o.f1_weighted.std,
        o.recall_weighted.mean,
        o.recall_weighted.std,
        o.precision_weighted.mean,
        o.precision_weighted.std
    );
    println!(
        "  MAE {:.4} (σ {:.3})  MSE {:.4} (σ {:.3})  support {}",
        o.mae.mean, o.mae.std, o.mse.mean, o.mse.std, report.support
    );
    for (difficulty, block) in &report.per_difficulty {
        println!(
            "  [{difficulty}] F1 {:.4}  MAE {:.4}",
            block.f1_weighted.mean, block.mae.mean
        );
    }
}

/// One CSV row per model group, columns as in the results tables.
pub fn report_csv(model: &str, report: &MetricsReport) -> String {
    let mut csv = String::from(
        "model,f1_mean,f1_std,recall_mean,recall_std,precision_mean,precision_std,mae_mean,mae_std,mse_mean,mse_std,support\n",
    );
    csv.push_str(&csv_row(model, report));
    csv
}

pub fn csv_row(model: &str, report: &MetricsReport) -> String {
    let o = &report.overall;
    format!(
        "{model},{},{},{},{},{},{},{},{},{},{},{}\n",
        o.f1_weighted.mean,
        o.f1_weighted.std,
        o.recall_weighted.mean,
        o.recall_weighted.std,
        o.precision_weighted.mean,
        o.precision_weighted.std,
        o.mae.mean,
        o.mae.std,
        o.mse.mean,
        o.mse.std,
        report.support
    )
}

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use quanv_core::error::{Error, Result};
use quanv_core::metrics::{evaluate_checkpoints, wilcoxon_one_sided, MetricsReport};
use quanv_core::model::FrontendKind;
use quanv_core::trainer::save_run_artifacts;

use crate::manifest::{Manifest, ManifestAnsatz, ManifestRun};

use super::train::{ActivationArg, BackendArg, TrainArgs};
use super::{AnsatzArg, FrontendArg};

#[derive(Args)]
pub struct CompareArgs {
    /// Experiment manifest (JSON).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Train up to this many missing runs concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Output directory for comparison.json and table.csv. Defaults to the
    /// manifest's output_dir.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// One-sided p-values of a quantum group against the classical baseline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WilcoxonPair {
    /// Alternative: the group's F1 exceeds the baseline's.
    pub f1_greater_p: f64,
    /// Alternative: the group's MAE is below the baseline's.
    pub mae_lower_p: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupReport {
    pub runs: Vec<String>,
    pub seeds: Vec<u64>,
    pub report: MetricsReport,
    /// Absent on the baseline group itself.
    pub wilcoxon_vs_baseline: Option<WilcoxonPair>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub format_version: u32,
    pub dataset: PathBuf,
    pub baseline: String,
    pub groups: BTreeMap<String, GroupReport>,
}

pub fn run(args: CompareArgs) -> Result<()> {
    let manifest = Manifest::load(&args.manifest)?;
    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| manifest.output_dir.clone());
    std::fs::create_dir_all(&out_dir)?;

    ensure_runs_trained(&manifest, args.jobs.max(1))?;
    let report = compare_runs(&manifest)?;

    std::fs::write(
        out_dir.join("comparison.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    let mut csv = String::from(
        "model,f1_mean,f1_std,recall_mean,recall_std,precision_mean,precision_std,mae_mean,mae_std,mse_mean,mse_std,support\n",
    );
    for (name, group) in &report.groups {
        csv.push_str(&super::evaluate::csv_row(name, &group.report));
    }
    std::fs::write(out_dir.join("table.csv"), &csv)?;

    println!("baseline group: {}", report.baseline);
    for (name, group) in &report.groups {
        let o = &group.report.overall;
        print!(
            "  {name}: F1 {:.4} (σ {:.3})  MAE {:.4} (σ {:.3})  support {}",
            o.f1_weighted.mean, o.f1_weighted.std, o.mae.mean, o.mae.std, group.report.support
        );
        match &group.wilcoxon_vs_baseline {
            Some(w) => println!(
                "  p(F1 higher) {:.4}  p(MAE lower) {:.4}",
                w.f1_greater_p, w.mae_lower_p
            ),
            None => println!(),
        }
    }
    println!("comparison: {}", out_dir.join("comparison.json").display());
    Ok(())
}

fn run_dir(manifest: &Manifest, run: &ManifestRun) -> PathBuf {
    manifest.output_dir.join(&run.name)
}

fn train_args_for(manifest: &Manifest, run: &ManifestRun) -> TrainArgs {
    let t = &manifest.training;
    TrainArgs {
        dataset: manifest.dataset.clone(),
        frontend: match run.frontend {
            FrontendKind::Quantum => FrontendArg::Quantum,
            FrontendKind::Classical => FrontendArg::Classical,
        },
        ansatz: run.ansatz.map(|a| match a {
            ManifestAnsatz::Se => AnsatzArg::Se,
            ManifestAnsatz::Td => AnsatzArg::Td,
            ManifestAnsatz::Random => AnsatzArg::Random,
        }),
        ansatz_seed: run.ansatz_seed,
        gate_count: run.gate_count,
        seed: run.seed,
        epochs: t.epochs.unwrap_or(100),
        batch_size: t.batch_size.unwrap_or(16),
        lr_max: t.lr_max.unwrap_or(0.01),
        lr_min: t.lr_min.unwrap_or(1e-4),
        dropout: t.dropout.unwrap_or(0.1),
        noisy: run.noisy,
        noisy_start_epoch: t.noisy_start_epoch.unwrap_or(80),
        gamma: t.gamma.unwrap_or(0.02),
        static_frontend: run.static_frontend,
        spsa_all: false,
        spsa: vec![0.2, 0.1, 10.0, 0.602, 0.101],
        backend: BackendArg::Adjoint,
        train_limit: t.train_limit,
        activation: ActivationArg::Logistic,
        out: Some(run_dir(manifest, run)),
    }
}

/// Trains every manifest entry whose run directory lacks a checkpoint.
/// Entries share nothing, so missing runs execute on up to `jobs` threads.
fn ensure_runs_trained(manifest: &Manifest, jobs: usize) -> Result<()> {
    let missing: Vec<&ManifestRun> = manifest
        .runs
        .iter()
        .filter(|run| !run_dir(manifest, run).join("checkpoint.json").exists())
        .collect();
    if missing.is_empty() {
        return Ok(());
    }
    println!(
        "training {} missing run(s) with {} job(s)",
        missing.len(),
        jobs
    );

    let results: Vec<Result<()>> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for chunk in missing.chunks(jobs) {
            let mut batch = Vec::new();
            for run in chunk {
                let args = train_args_for(manifest, run);
                let name = run.name.clone();
                batch.push(scope.spawn(move || -> Result<()> {
                    let outcome = super::train::execute(&args)?;
                    save_run_artifacts(args.out.as_deref().expect("set above"), &outcome)?;
                    println!(
                        "  {name}: final train loss {:.4} ({:.1}s)",
                        outcome
                            .record
                            .train_loss
                            .last()
                            .copied()
                            .unwrap_or(f64::NAN),
                        outcome.wall_time_seconds
                    );
                    Ok(())
                }));
            }
            for handle in batch {
                handles.push(handle.join().expect("training thread panicked"));
            }
        }
        handles
    });
    for result in results {
        result?;
    }
    Ok(())
}

/// Groups the runs, aggregates metrics per group on the test split, and
/// tests each quantum group against the classical baseline.
fn compare_runs(manifest: &Manifest) -> Result<ComparisonReport> {
    let (dataset, sidecar) = super::load_dataset_with_sidecar(&manifest.dataset)?;

    // Group manifest entries, sorted by seed within each group.
    let mut groups: BTreeMap<String, Vec<&ManifestRun>> = BTreeMap::new();
    for run in &manifest.runs {
        groups.entry(run.group_key()).or_default().push(run);
    }
    if groups.len() < 2 {
        return Err(Error::invalid("comparison needs at least two model groups"));
    }
    for members in groups.values_mut() {
        members.sort_by_key(|r| r.seed);
    }

    // Paired seeds across every group.
    let baseline_key = "classical".to_string();
    if !groups.contains_key(&baseline_key) {
        return Err(Error::invalid(
            "comparison needs a plain classical group (frontend classical, not noisy/static)",
        ));
    }
    let seed_sets: Vec<Vec<u64>> = groups
        .values()
        .map(|runs| runs.iter().map(|r| r.seed).collect())
        .collect();
    if seed_sets.iter().any(|s| s != &seed_sets[0]) {
        return Err(Error::invalid(
            "groups have unpaired seeds; every group needs the same seed set",
        ));
    }

    let mut reports: BTreeMap<String, GroupReport> = BTreeMap::new();
    for (key, members) in &groups {
        let checkpoints: Vec<PathBuf> = members
            .iter()
            .map(|run| run_dir(manifest, run).join("checkpoint.json"))
            .collect();
        let report = evaluate_checkpoints(&checkpoints, &dataset, &sidecar.test, None, None)?;
        reports.insert(
            key.clone(),
            GroupReport {
                runs: members.iter().map(|r| r.name.clone()).collect(),
                seeds: members.iter().map(|r| r.seed).collect(),
                report,
                wilcoxon_vs_baseline: None,
            },
        );
    }

    let baseline_f1: Vec<f64> = reports[&baseline_key]
        .report
        .per_run
        .iter()
        .map(|r| r.f1_weighted)
        .collect();
    let baseline_mae: Vec<f64> = reports[&baseline_key]
        .report
        .per_run
        .iter()
        .map(|r| r.mae)
        .collect();
    for (key, group) in reports.iter_mut() {
        if *key == baseline_key {
            continue;
        }
        let f1: Vec<f64> = group.report.per_run.iter().map(|r| r.f1_weighted).collect();
        let mae: Vec<f64> = group.report.per_run.iter().map(|r| r.mae).collect();
        group.wilcoxon_vs_baseline = Some(WilcoxonPair {
            f1_greater_p: wilcoxon_one_sided(&f1, &baseline_f1)?,
            mae_lower_p: wilcoxon_one_sided(&baseline_mae, &mae)?,
        });
    }

    Ok(ComparisonReport {
        format_version: 1,
        dataset: manifest.dataset.clone(),
        baseline: baseline_key,
        groups: reports,
    })
}

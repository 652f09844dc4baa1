use std::path::PathBuf;

use clap::{Args, ValueEnum};

use quanv_core::error::{Error, Result};
use quanv_core::model::{Model, OutputActivation};
use quanv_core::sim::GradBackend;
use quanv_core::specgen::stratified_split;
use quanv_core::trainer::{save_run_artifacts, train, SpsaConfig, TrainConfig, TrainOutcome};

use super::{AnsatzArg, FrontendArg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    /// Parameter-shift rule (two circuit evaluations per angle).
    Shift,
    /// Adjoint reverse sweep (constant number of state passes).
    Adjoint,
    /// Central finite differences (approximate; for cross-checks).
    Fd,
}

impl BackendArg {
    fn to_backend(self) -> GradBackend {
        match self {
            BackendArg::Shift => GradBackend::ParamShift,
            BackendArg::Adjoint => GradBackend::Adjoint,
            BackendArg::Fd => GradBackend::FiniteDiff,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ActivationArg {
    /// Element-wise logistic on all 10 outputs (default semantics).
    Logistic,
    /// Joint softmax over the 10 outputs (fidelity experiments).
    Softmax,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Dataset produced by `quanv generate` (sidecar must sit next to it).
    #[arg(long)]
    pub dataset: PathBuf,
    /// Convolution front end.
    #[arg(long, value_enum)]
    pub frontend: FrontendArg,
    /// Quantum kernel circuit (required for the quantum front end).
    #[arg(long, value_enum)]
    pub ansatz: Option<AnsatzArg>,
    /// Seed of the random ansatz's gate arrangement.
    #[arg(long, default_value_t = 0)]
    pub ansatz_seed: u64,
    /// Gate count of the random ansatz.
    #[arg(long, default_value_t = super::default_gate_count())]
    pub gate_count: usize,
    /// Run seed: model initialization, shuffling, dropout, SPSA and the
    /// train/val re-split all derive from it.
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 16)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr_max: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub lr_min: f64,
    /// Dropout probability between the hidden and output layers.
    #[arg(long, default_value_t = 0.1)]
    pub dropout: f64,
    /// Simulate readout noise in the late training phase.
    #[arg(long)]
    pub noisy: bool,
    /// First epoch of the noisy phase.
    #[arg(long, default_value_t = 80)]
    pub noisy_start_epoch: usize,
    /// Amplitude-damping strength of the readout channel.
    #[arg(long, default_value_t = 0.02)]
    pub gamma: f64,
    /// Freeze the front end at its random initialization.
    #[arg(long)]
    pub static_frontend: bool,
    /// During the noisy phase, train every parameter by SPSA instead of
    /// only the circuit angles.
    #[arg(long)]
    pub spsa_all: bool,
    /// SPSA gain constants a, c, A, alpha, gamma.
    #[arg(long, num_args = 5, value_names = ["A0", "C0", "BIG_A", "ALPHA", "GAMMA"],
          default_values_t = [0.2, 0.1, 10.0, 0.602, 0.101])]
    pub spsa: Vec<f64>,
    /// Gradient backend for the quantum front end.
    #[arg(long, value_enum, default_value_t = BackendArg::Adjoint)]
    pub backend: BackendArg,
    /// Train on at most this many spectra from the train split.
    #[arg(long)]
    pub train_limit: Option<usize>,
    /// Output activation of the 10-way head.
    #[arg(long, value_enum, default_value_t = ActivationArg::Logistic)]
    pub activation: ActivationArg,
    /// Run directory for checkpoint.json, run.json, epochs.csv, meta.json.
    /// Defaults to `$QUANV_OUT_ROOT/run-<frontend>[-<ansatz>]-seed<seed>`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: TrainArgs) -> Result<()> {
    let outcome = execute(&args)?;
    let out = args.out.clone().unwrap_or_else(|| default_run_dir(&args));
    save_run_artifacts(&out, &outcome)?;
    let last = outcome.record.train_loss.len() - 1;
    println!(
        "trained {} epochs in {:.1}s: train loss {:.4} -> {:.4}, val loss {:.4}",
        outcome.record.train_loss.len(),
        outcome.wall_time_seconds,
        outcome.record.train_loss[0],
        outcome.record.train_loss[last],
        outcome.record.val_loss[last]
    );
    println!("run directory: {}", out.display());
    Ok(())
}

fn default_run_dir(args: &TrainArgs) -> PathBuf {
    let frontend = match args.frontend {
        FrontendArg::Quantum => "quantum",
        FrontendArg::Classical => "classical",
    };
    let ansatz = match args.ansatz {
        Some(AnsatzArg::Se) => "-se",
        Some(AnsatzArg::Td) => "-td",
        Some(AnsatzArg::Random) => "-random",
        None => "",
    };
    super::out_root().join(format!("run-{frontend}{ansatz}-seed{}", args.seed))
}

pub fn build_config(args: &TrainArgs) -> TrainConfig {
    TrainConfig {
        epochs: args.epochs,
        batch_size: args.batch_size,
        lr_max: args.lr_max,
        lr_min: args.lr_min,
        dropout: args.dropout,
        seed: args.seed,
        learnable_frontend: !args.static_frontend,
        noisy: args.noisy,
        noisy_start_epoch: args.noisy_start_epoch,
        gamma: args.gamma,
        spsa: SpsaConfig {
            a: args.spsa[0],
            c: args.spsa[1],
            big_a: args.spsa[2],
            alpha: args.spsa[3],
            gamma: args.spsa[4],
        },
        spsa_all: args.spsa_all,
        grad_backend: args.backend.to_backend(),
        train_limit: args.train_limit,
    }
}

pub fn execute(args: &TrainArgs) -> Result<TrainOutcome> {
    let (dataset, sidecar) = super::load_dataset_with_sidecar(&args.dataset)?;
    let config = build_config(args);
    config.validate()?;

    // Re-split train/val with the run seed; test membership is pinned by the
    // dataset's master seed and must reproduce the sidecar exactly.
    let split = stratified_split(&dataset, sidecar.fractions, config.seed)?;
    if split.test != sidecar.test {
        return Err(Error::invalid(
            "recomputed test split disagrees with the sidecar; dataset and sidecar do not match",
        ));
    }

    let activation = match args.activation {
        ActivationArg::Logistic => OutputActivation::Logistic,
        ActivationArg::Softmax => OutputActivation::Softmax,
    };
    let mut init_rng = config.init_rng();
    let model = match args.frontend {
        FrontendArg::Classical => Model::new_classical(activation, &mut init_rng),
        FrontendArg::Quantum => {
            let ansatz = args
                .ansatz
                .ok_or_else(|| Error::invalid("--ansatz is required with --frontend quantum"))?
                .to_kind(args.ansatz_seed, args.gate_count);
            Model::new_quantum(ansatz, activation, &mut init_rng)?
        }
    };

    train(model, &dataset, &split, &config)
}

//! Training loop: Adam with cosine annealing on exact gradients, an
//! ideal-to-noisy phase switch with SPSA for circuit angles, static or
//! learnable front ends, and run artifacts.
//!
//! # Seed layout
//!
//! Everything a run draws derives from `TrainConfig::seed` through fixed
//! substreams: 0 for model initialization, 1 for epoch shuffling, 2 for
//! dropout masks, 3 for SPSA perturbations, 4 for optional training-subset
//! selection. Two runs with equal seeds on the same dataset are
//! bit-identical.
//!
//! # Noisy protocol
//!
//! With `noisy` set, epochs before `noisy_start_epoch` run on the ideal
//! simulator with analytic gradients; from that epoch on, circuits evaluate
//! under the readout-damping channel. Parameter-shift and adjoint gradients
//! are not defined there, so circuit angles switch to SPSA while every
//! parameter outside the circuit keeps its exact backprop gradient (the
//! front-end outputs are treated as constants). `spsa_all` instead moves the
//! whole parameter vector under SPSA during the noisy phase.

mod optim;

pub use optim::{cosine_lr, Adam, Spsa, SpsaConfig};

use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::combined_loss;
use crate::model::{
    draw_dropout_mask, model_backward, model_forward, Checkpoint, Frontend, FrontendKind, Model,
    DROPOUT_P, HIDDEN_LEN,
};
use crate::rng::substream;
use crate::sim::{GradBackend, NoiseConfig};
use crate::specgen::{Dataset, SplitIndices};

const INIT_STREAM: u64 = 0;
const SHUFFLE_STREAM: u64 = 1;
const DROPOUT_STREAM: u64 = 2;
const SPSA_STREAM: u64 = 3;
const SUBSET_STREAM: u64 = 4;

/// Everything that parameterizes one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_max: f64,
    pub lr_min: f64,
    /// Dropout probability on the hidden layer (0 disables).
    pub dropout: f64,
    pub seed: u64,
    /// When false, front-end parameters (weights and channel biases) are
    /// excluded from the optimizer view and stay at their initialization.
    pub learnable_frontend: bool,
    pub noisy: bool,
    pub noisy_start_epoch: usize,
    /// Damping strength used during the noisy phase.
    pub gamma: f64,
    pub spsa: SpsaConfig,
    /// Train every parameter by SPSA during the noisy phase instead of only
    /// the circuit angles.
    pub spsa_all: bool,
    pub grad_backend: GradBackend,
    /// Optional cap on the number of training spectra (drawn once per run
    /// from the train split).
    pub train_limit: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 16,
            lr_max: 0.01,
            lr_min: 1e-4,
            dropout: DROPOUT_P,
            seed: 0,
            learnable_frontend: true,
            noisy: false,
            noisy_start_epoch: 80,
            gamma: NoiseConfig::DEFAULT_GAMMA,
            spsa: SpsaConfig::default(),
            spsa_all: false,
            grad_backend: GradBackend::Adjoint,
            train_limit: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be >= 1"));
        }
        if !(self.lr_min > 0.0 && self.lr_min <= self.lr_max) {
            return Err(Error::invalid(format!(
                "need 0 < lr_min <= lr_max, got {} / {}",
                self.lr_min, self.lr_max
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::invalid(format!(
                "dropout {} outside [0, 1)",
                self.dropout
            )));
        }
        if self.noisy && self.noisy_start_epoch > self.epochs {
            return Err(Error::invalid(format!(
                "noisy_start_epoch {} exceeds epochs {}",
                self.noisy_start_epoch, self.epochs
            )));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::invalid(format!(
                "gamma {} outside [0, 1]",
                self.gamma
            )));
        }
        Ok(())
    }

    /// The substream of `seed` reserved for model initialization, so static
    /// and learnable runs (and different modes generally) share identical
    /// initial weights.
    pub fn init_rng(&self) -> crate::rng::Prng {
        substream(self.seed, INIT_STREAM)
    }
}

/// Per-epoch curves of one finished run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub format_version: u32,
    pub seed: u64,
    pub frontend_kind: FrontendKind,
    pub ansatz: Option<crate::ansatz::AnsatzKind>,
    pub config: TrainConfig,
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    pub learning_rate: Vec<f64>,
}

/// A finished run: the trained model, its curves, and the wall time (kept
/// out of [`RunRecord`] so run artifacts stay byte-identical across
/// repeated invocations).
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Model,
    pub record: RunRecord,
    pub wall_time_seconds: f64,
}

/// Trains `model` on the dataset's train split, recording train and
/// validation loss every epoch.
pub fn train(
    mut model: Model,
    dataset: &Dataset,
    split: &SplitIndices,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if split.train.is_empty() || split.val.is_empty() {
        return Err(Error::invalid(
            "train and validation splits must be nonempty",
        ));
    }
    if config.noisy && model.kind() == FrontendKind::Classical {
        return Err(Error::invalid(
            "noisy training applies to quantum front ends only",
        ));
    }
    let max_index = split
        .train
        .iter()
        .chain(&split.val)
        .copied()
        .max()
        .unwrap_or(0);
    if max_index >= dataset.spectra.len() {
        return Err(Error::invalid(format!(
            "split references spectrum {max_index} but the dataset has {}",
            dataset.spectra.len()
        )));
    }

    let started = std::time::Instant::now();

    let mut train_indices: Vec<usize> = split.train.clone();
    if let Some(limit) = config.train_limit {
        if limit < train_indices.len() {
            let mut subset_rng = substream(config.seed, SUBSET_STREAM);
            train_indices.shuffle(&mut subset_rng);
            train_indices.truncate(limit);
            train_indices.sort_unstable();
        }
    }

    let mut shuffle_rng = substream(config.seed, SHUFFLE_STREAM);
    let mut dropout_rng = substream(config.seed, DROPOUT_STREAM);
    let mut spsa_rng = substream(config.seed, SPSA_STREAM);

    let n_weights = model.params.frontend_weights.len();
    let frontend_len = model.params.frontend_len();
    let flat_len = model.params.flat_len();
    let mut adam = Adam::new(flat_len);
    let mut spsa = Spsa::new(config.spsa);

    let mut record = RunRecord {
        format_version: 1,
        seed: config.seed,
        frontend_kind: model.kind(),
        ansatz: match &model.frontend {
            Frontend::Quantum { ansatz, .. } => Some(*ansatz),
            Frontend::Classical => None,
        },
        config: config.clone(),
        train_loss: Vec::with_capacity(config.epochs),
        val_loss: Vec::with_capacity(config.epochs),
        learning_rate: Vec::with_capacity(config.epochs),
    };

    for epoch in 0..config.epochs {
        let lr = cosine_lr(epoch, config.epochs, config.lr_max, config.lr_min);
        let noisy_phase = config.noisy && epoch >= config.noisy_start_epoch;
        let noise = if noisy_phase {
            NoiseConfig::damping(config.gamma)?
        } else {
            NoiseConfig::ideal()
        };

        train_indices.shuffle(&mut shuffle_rng);

        let mut epoch_loss = 0.0;
        for batch in train_indices.chunks(config.batch_size) {
            let masks: Vec<Option<[f64; HIDDEN_LEN]>> = batch
                .iter()
                .map(|_| {
                    (config.dropout > 0.0)
                        .then(|| draw_dropout_mask(&mut dropout_rng, config.dropout))
                })
                .collect();

            // In the noisy phase backprop must not differentiate through the
            // circuit; elsewhere the quantum weights only need gradients when
            // the front end is learnable at all.
            let weight_backend = if noisy_phase || !config.learnable_frontend {
                None
            } else {
                Some(config.grad_backend)
            };

            let mut grad_sum = vec![0.0; flat_len];
            let mut batch_loss = 0.0;
            for (&idx, mask) in batch.iter().zip(&masks) {
                let spectrum = &dataset.spectra[idx];
                let (pred, trace) = model_forward(&model, &spectrum.points, &noise, mask.as_ref())?;
                let (loss, dpred) = combined_loss(&pred, &spectrum.annotation);
                batch_loss += loss;
                let skip_backprop = noisy_phase && config.spsa_all;
                if !skip_backprop {
                    let grads = model_backward(&model, &trace, &dpred, weight_backend)?;
                    for (acc, g) in grad_sum.iter_mut().zip(grads.to_flat()) {
                        *acc += g;
                    }
                }
            }
            let scale = 1.0 / batch.len() as f64;
            for g in &mut grad_sum {
                *g *= scale;
            }
            epoch_loss += batch_loss;

            let mut flat = model.params.to_flat();
            if noisy_phase && config.spsa_all {
                let trainable = if config.learnable_frontend {
                    0
                } else {
                    frontend_len
                };
                let mut candidate = flat[trainable..].to_vec();
                let mut eval_model = model.clone();
                spsa.step(
                    &mut candidate,
                    |theta| {
                        let mut probe = flat.clone();
                        probe[trainable..].copy_from_slice(theta);
                        eval_model.params.from_flat(&probe)?;
                        batch_mean_loss(&eval_model, dataset, batch, &noise)
                    },
                    &mut spsa_rng,
                )?;
                flat[trainable..].copy_from_slice(&candidate);
            } else {
                let adam_from = if !config.learnable_frontend {
                    frontend_len
                } else if noisy_phase {
                    // Circuit angles move by SPSA below; channel biases and
                    // dense weights keep exact gradients.
                    n_weights
                } else {
                    0
                };
                adam.step_range(&mut flat, &grad_sum, lr, adam_from..flat_len)?;

                if noisy_phase && config.learnable_frontend {
                    let mut angles = flat[..n_weights].to_vec();
                    let mut eval_model = model.clone();
                    let tail = flat[n_weights..].to_vec();
                    spsa.step(
                        &mut angles,
                        |theta| {
                            let mut probe = theta.to_vec();
                            probe.extend_from_slice(&tail);
                            eval_model.params.from_flat(&probe)?;
                            batch_mean_loss(&eval_model, dataset, batch, &noise)
                        },
                        &mut spsa_rng,
                    )?;
                    flat[..n_weights].copy_from_slice(&angles);
                }
            }
            model.params.from_flat(&flat)?;
        }

        record.learning_rate.push(lr);
        record
            .train_loss
            .push(epoch_loss / train_indices.len() as f64);
        record
            .val_loss
            .push(batch_mean_loss(&model, dataset, &split.val, &noise)?);
    }

    Ok(TrainOutcome {
        model,
        record,
        wall_time_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Mean combined loss over `indices`, dropout disabled.
pub fn batch_mean_loss(
    model: &Model,
    dataset: &Dataset,
    indices: &[usize],
    noise: &NoiseConfig,
) -> Result<f64> {
    if indices.is_empty() {
        return Err(Error::invalid(
            "cannot evaluate loss over an empty index set",
        ));
    }
    let mut total = 0.0;
    for &idx in indices {
        let spectrum = &dataset.spectra[idx];
        let (pred, _) = model_forward(model, &spectrum.points, noise, None)?;
        total += combined_loss(&pred, &spectrum.annotation).0;
    }
    Ok(total / indices.len() as f64)
}

/// Side files written for every run: timestamps and wall time live here and
/// only here, keeping the other artifacts byte-reproducible.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMeta {
    pub wall_time_seconds: f64,
    pub created_unix_ms: u128,
}

/// Writes `checkpoint.json`, `run.json`, `epochs.csv` and `meta.json` into
/// `dir` (created if needed).
pub fn save_run_artifacts(dir: &Path, outcome: &TrainOutcome) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let noise = if outcome.record.config.noisy {
        NoiseConfig::damping(outcome.record.config.gamma)?
    } else {
        NoiseConfig::ideal()
    };
    Checkpoint::from_model(&outcome.model, &noise).save(&dir.join("checkpoint.json"))?;
    std::fs::write(
        dir.join("run.json"),
        serde_json::to_string_pretty(&outcome.record)?,
    )?;

    let mut csv = String::from("epoch,lr,train_loss,val_loss\n");
    for epoch in 0..outcome.record.train_loss.len() {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            epoch,
            outcome.record.learning_rate[epoch],
            outcome.record.train_loss[epoch],
            outcome.record.val_loss[epoch]
        ));
    }
    std::fs::write(dir.join("epochs.csv"), csv)?;

    let meta = RunMeta {
        wall_time_seconds: outcome.wall_time_seconds,
        created_unix_ms: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0),
    };
    std::fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

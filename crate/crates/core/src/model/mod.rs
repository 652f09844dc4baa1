//! The fixed network architecture with a pluggable convolution front end.
//!
//! Data flow: a 200-point spectrum through a 32-wide convolution (quantum
//! kernel or classical weights, stride 1, no padding, 5 channels) giving
//! 5×169 features, max pooling with kernel 5 down to 5×33, flattening to
//! 165, a 128-neuron ReLU layer with 10% train-time dropout, and a final
//! 10-output layer whose entries are squashed to [0, 1].
//!
//! Swapping the front end changes nothing else: both variants share the
//! pooling, head, shapes and training machinery.

mod backward;
mod forward;

pub use backward::{model_backward, ModelGrads};
pub use forward::{
    conv1d_forward, draw_dropout_mask, head_forward, maxpool, model_forward, quanv_forward,
    FeatureMap, ForwardTrace, PoolArgmax,
};

use serde::{Deserialize, Serialize};

use crate::ansatz::{init_params, AnsatzKind};
use crate::error::{Error, Result};
use crate::loss::PREDICTION_LEN;
use crate::rng::Prng;
use crate::sim::{CircuitSpec, NoiseConfig, DIM, N_QUBITS};

/// Number of measurement points per spectrum.
pub const SPECTRUM_LEN: usize = 200;
/// Convolution window width (the 5-qubit state space dimension).
pub const WINDOW_LEN: usize = DIM;
/// Output channels of the convolution (one per measured qubit).
pub const CHANNELS: usize = N_QUBITS;
/// Convolution output length per channel: 200 − 32 + 1.
pub const FEATURE_LEN: usize = SPECTRUM_LEN - WINDOW_LEN + 1;
/// Max-pooling kernel (and stride).
pub const POOL_LEN: usize = 5;
/// Pooled length per channel; the final 169 mod 5 = 4 elements are dropped.
pub const POOLED_LEN: usize = FEATURE_LEN / POOL_LEN;
/// Flattened feature size, 5·33.
pub const FLAT_LEN: usize = CHANNELS * POOLED_LEN;
/// Hidden dense layer width.
pub const HIDDEN_LEN: usize = 128;
/// Output size: 5 mask slots + 5 position slots.
pub const OUTPUT_LEN: usize = PREDICTION_LEN;
/// Train-time dropout probability on the hidden activations.
pub const DROPOUT_P: f64 = 0.1;

/// Current checkpoint schema version.
pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

/// Which convolution front end a model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrontendKind {
    Quantum,
    Classical,
}

/// Front-end architecture description (the trainable values live in
/// [`ModelParams`]).
#[derive(Debug, Clone, PartialEq)]
pub enum Frontend {
    Quantum {
        ansatz: AnsatzKind,
        circuit: CircuitSpec,
    },
    Classical,
}

impl Frontend {
    pub fn kind(&self) -> FrontendKind {
        match self {
            Frontend::Quantum { .. } => FrontendKind::Quantum,
            Frontend::Classical => FrontendKind::Classical,
        }
    }

    /// Length of the front end's weight vector (rotation angles or kernel
    /// entries, excluding the 5 channel biases).
    pub fn weight_len(&self) -> usize {
        match self {
            Frontend::Quantum { circuit, .. } => circuit.n_params,
            Frontend::Classical => CHANNELS * WINDOW_LEN,
        }
    }
}

/// Activation applied to the 10 raw outputs.
///
/// Element-wise logistic keeps every entry an independent value in [0, 1],
/// matching the 0.5 mask threshold and per-slot position semantics; a true
/// softmax (which makes the 10 entries sum to 1) is available for fidelity
/// experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    #[default]
    Logistic,
    Softmax,
}

/// All trainable values of one model.
///
/// The canonical flat ordering for optimizers is: front-end weights, the 5
/// front-end channel biases, dense1 weights (row-major `[hidden][input]`),
/// dense1 biases, dense2 weights (row-major `[output][hidden]`), dense2
/// biases. `to_flat`/`from_flat` round-trip losslessly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Rotation angles (quantum) or 5×32 kernel, row-major (classical).
    pub frontend_weights: Vec<f64>,
    /// Per-channel bias added before the front-end ReLU.
    pub frontend_biases: [f64; CHANNELS],
    /// 128×165, row-major.
    pub dense1_w: Vec<f64>,
    pub dense1_b: Vec<f64>,
    /// 10×128, row-major.
    pub dense2_w: Vec<f64>,
    pub dense2_b: Vec<f64>,
}

impl ModelParams {
    /// Zeroed parameters with the weight shape of `frontend`.
    pub fn zeros(frontend_weight_len: usize) -> Self {
        ModelParams {
            frontend_weights: vec![0.0; frontend_weight_len],
            frontend_biases: [0.0; CHANNELS],
            dense1_w: vec![0.0; HIDDEN_LEN * FLAT_LEN],
            dense1_b: vec![0.0; HIDDEN_LEN],
            dense2_w: vec![0.0; OUTPUT_LEN * HIDDEN_LEN],
            dense2_b: vec![0.0; OUTPUT_LEN],
        }
    }

    /// Number of front-end entries (weights + channel biases) at the start
    /// of the flat view; the static-frontend mode freezes exactly this
    /// prefix.
    pub fn frontend_len(&self) -> usize {
        self.frontend_weights.len() + CHANNELS
    }

    pub fn flat_len(&self) -> usize {
        self.frontend_len()
            + self.dense1_w.len()
            + self.dense1_b.len()
            + self.dense2_w.len()
            + self.dense2_b.len()
    }

    /// Canonical flat view for optimizers.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.flat_len());
        flat.extend_from_slice(&self.frontend_weights);
        flat.extend_from_slice(&self.frontend_biases);
        flat.extend_from_slice(&self.dense1_w);
        flat.extend_from_slice(&self.dense1_b);
        flat.extend_from_slice(&self.dense2_w);
        flat.extend_from_slice(&self.dense2_b);
        flat
    }

    /// Writes a flat vector back into the structured form.
    pub fn from_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.flat_len() {
            return Err(Error::invalid(format!(
                "flat parameter vector has length {}, want {}",
                flat.len(),
                self.flat_len()
            )));
        }
        let mut offset = 0;
        let mut take = |dst: &mut [f64]| {
            dst.copy_from_slice(&flat[offset..offset + dst.len()]);
            offset += dst.len();
        };
        take(&mut self.frontend_weights);
        take(&mut self.frontend_biases);
        take(&mut self.dense1_w);
        take(&mut self.dense1_b);
        take(&mut self.dense2_w);
        take(&mut self.dense2_b);
        Ok(())
    }
}

/// A complete model: front-end architecture, output activation and all
/// trainable values.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub frontend: Frontend,
    pub output_activation: OutputActivation,
    pub params: ModelParams,
}

impl Model {
    /// Fresh quantum-frontend model: ansatz angles uniform in [−π, π),
    /// channel biases zero, dense layers uniform in ±1/√fan_in with zero
    /// biases.
    pub fn new_quantum(
        ansatz: AnsatzKind,
        activation: OutputActivation,
        rng: &mut Prng,
    ) -> Result<Model> {
        let circuit = ansatz.build()?;
        let mut params = ModelParams::zeros(circuit.n_params);
        params.frontend_weights = init_params(&circuit, rng);
        init_dense(&mut params, rng);
        Ok(Model {
            frontend: Frontend::Quantum { ansatz, circuit },
            output_activation: activation,
            params,
        })
    }

    /// Fresh classical-frontend model: kernel uniform in ±1/√32, biases
    /// zero, dense layers as in [`Model::new_quantum`].
    pub fn new_classical(activation: OutputActivation, rng: &mut Prng) -> Model {
        let mut params = ModelParams::zeros(CHANNELS * WINDOW_LEN);
        let bound = 1.0 / (WINDOW_LEN as f64).sqrt();
        for w in &mut params.frontend_weights {
            *w = rand::Rng::random_range(rng, -bound..bound);
        }
        init_dense(&mut params, rng);
        Model {
            frontend: Frontend::Classical,
            output_activation: activation,
            params,
        }
    }

    pub fn kind(&self) -> FrontendKind {
        self.frontend.kind()
    }
}

fn init_dense(params: &mut ModelParams, rng: &mut Prng) {
    use rand::Rng;
    let bound1 = 1.0 / (FLAT_LEN as f64).sqrt();
    for w in &mut params.dense1_w {
        *w = rng.random_range(-bound1..bound1);
    }
    let bound2 = 1.0 / (HIDDEN_LEN as f64).sqrt();
    for w in &mut params.dense2_w {
        *w = rng.random_range(-bound2..bound2);
    }
}

/// On-disk model snapshot. JSON with shortest-round-trip float encoding, so
/// a load reproduces every weight bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub frontend_kind: FrontendKind,
    /// Ansatz descriptor for quantum front ends.
    pub ansatz: Option<AnsatzKind>,
    /// The exact circuit the model was trained with.
    pub circuit: Option<CircuitSpec>,
    pub output_activation: OutputActivation,
    /// Noise configuration the checkpoint was trained under; evaluation
    /// defaults to it.
    pub noise: NoiseConfig,
    pub params: ModelParams,
}

impl Checkpoint {
    pub fn from_model(model: &Model, noise: &NoiseConfig) -> Checkpoint {
        let (ansatz, circuit) = match &model.frontend {
            Frontend::Quantum { ansatz, circuit } => (Some(*ansatz), Some(circuit.clone())),
            Frontend::Classical => (None, None),
        };
        Checkpoint {
            format_version: CHECKPOINT_FORMAT_VERSION,
            frontend_kind: model.kind(),
            ansatz,
            circuit,
            output_activation: model.output_activation,
            noise: *noise,
            params: model.params.clone(),
        }
    }

    pub fn into_model(self) -> Result<Model> {
        let frontend = match self.frontend_kind {
            FrontendKind::Quantum => {
                let ansatz = self
                    .ansatz
                    .ok_or_else(|| Error::invalid("quantum checkpoint lacks ansatz descriptor"))?;
                let circuit = match self.circuit {
                    Some(c) => {
                        c.validate()?;
                        c
                    }
                    None => ansatz.build()?,
                };
                if circuit.n_params != self.params.frontend_weights.len() {
                    return Err(Error::invalid(format!(
                        "checkpoint has {} angles for a {}-parameter circuit",
                        self.params.frontend_weights.len(),
                        circuit.n_params
                    )));
                }
                Frontend::Quantum { ansatz, circuit }
            }
            FrontendKind::Classical => {
                if self.params.frontend_weights.len() != CHANNELS * WINDOW_LEN {
                    return Err(Error::invalid(format!(
                        "checkpoint kernel has {} entries, want {}",
                        self.params.frontend_weights.len(),
                        CHANNELS * WINDOW_LEN
                    )));
                }
                Frontend::Classical
            }
        };
        Ok(Model {
            frontend,
            output_activation: self.output_activation,
            params: self.params,
        })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Checkpoint> {
        let json = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&json)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn flat_view_round_trips_losslessly() {
        let mut rng = seeded(2);
        let model = Model::new_quantum(
            AnsatzKind::StronglyEntangling,
            OutputActivation::Logistic,
            &mut rng,
        )
        .unwrap();
        let flat = model.params.to_flat();
        assert_eq!(flat.len(), 45 + 5 + 128 * 165 + 128 + 10 * 128 + 10);
        let mut copy = ModelParams::zeros(45);
        copy.from_flat(&flat).unwrap();
        assert_eq!(copy, model.params);
        assert_eq!(copy.to_flat(), flat);
    }

    #[test]
    fn from_flat_rejects_wrong_length() {
        let mut params = ModelParams::zeros(45);
        let bad = vec![0.0; 7];
        assert!(params.from_flat(&bad).is_err());
    }

    #[test]
    fn checkpoint_round_trips_bit_exactly() {
        let mut rng = seeded(3);
        let model = Model::new_quantum(
            AnsatzKind::Random {
                seed: 5,
                gate_count: 30,
            },
            OutputActivation::Logistic,
            &mut rng,
        )
        .unwrap();
        let ckpt = Checkpoint::from_model(&model, &NoiseConfig::ideal());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("checkpoint.json");
        ckpt.save(&path).unwrap();
        let loaded = Checkpoint::load(&path).unwrap();
        assert_eq!(ckpt, loaded);
        let reloaded = loaded.into_model().unwrap();
        assert_eq!(reloaded, model);

        // Bit-exactness of the float encoding: serialize twice, compare bytes.
        let a = serde_json::to_string(&ckpt).unwrap();
        let b = serde_json::to_string(&Checkpoint::load(&path).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn classical_checkpoint_round_trips() {
        let mut rng = seeded(4);
        let model = Model::new_classical(OutputActivation::Softmax, &mut rng);
        let ckpt = Checkpoint::from_model(&model, &NoiseConfig::damping(0.05).unwrap());
        let json = serde_json::to_string(&ckpt).unwrap();
        let back: Checkpoint = serde_json::from_str(&json).unwrap();
        assert_eq!(back.into_model().unwrap(), model);
    }

    #[test]
    fn identical_seeds_give_identical_frontend_init() {
        // Static and learnable runs share initialization when seeded alike.
        let a = Model::new_quantum(
            AnsatzKind::TwoDesign,
            OutputActivation::Logistic,
            &mut seeded(11),
        )
        .unwrap();
        let b = Model::new_quantum(
            AnsatzKind::TwoDesign,
            OutputActivation::Logistic,
            &mut seeded(11),
        )
        .unwrap();
        assert_eq!(a.params.frontend_weights, b.params.frontend_weights);
    }
}

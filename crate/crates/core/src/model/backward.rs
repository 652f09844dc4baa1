//! Exact reverse-mode gradients through the full network.

use crate::error::Result;
use crate::model::{
    ForwardTrace, Frontend, Model, ModelParams, OutputActivation, CHANNELS, FEATURE_LEN, FLAT_LEN,
    HIDDEN_LEN, OUTPUT_LEN, POOLED_LEN, WINDOW_LEN,
};
use crate::sim::{circuit_vjp, GradBackend};

/// Gradient container; same shape and flat ordering as [`ModelParams`].
pub type ModelGrads = ModelParams;

/// Backpropagates `dloss_dpred` through the trace.
///
/// Dense layers use standard backprop, pooling routes gradients to argmax
/// positions, both ReLUs gate on their stored pre-activations. Front-end
/// weight gradients go through the classical convolution identities or,
/// for quantum kernels, the per-window circuit Jacobian contracted by the
/// chain rule.
///
/// `frontend_backend` picks the quantum differentiation method; `None`
/// treats front-end *weights* as constants (their gradient stays zero) while
/// still computing channel-bias and dense gradients — the configuration used
/// while the noisy-phase optimizer handles circuit angles by SPSA. Quantum
/// weight gradients require an ideal-circuit trace.
pub fn model_backward(
    model: &Model,
    trace: &ForwardTrace,
    dloss_dpred: &[f64; OUTPUT_LEN],
    frontend_backend: Option<GradBackend>,
) -> Result<ModelGrads> {
    let params = &model.params;
    let mut grads = ModelGrads::zeros(params.frontend_weights.len());

    // Output activation.
    let mut d_raw = [0.0; OUTPUT_LEN];
    match model.output_activation {
        OutputActivation::Logistic => {
            for k in 0..OUTPUT_LEN {
                let p = trace.prediction[k];
                d_raw[k] = dloss_dpred[k] * p * (1.0 - p);
            }
        }
        OutputActivation::Softmax => {
            let dot: f64 = dloss_dpred
                .iter()
                .zip(&trace.prediction)
                .map(|(g, p)| g * p)
                .sum();
            for k in 0..OUTPUT_LEN {
                d_raw[k] = trace.prediction[k] * (dloss_dpred[k] - dot);
            }
        }
    }

    // Output dense layer.
    let mut d_hidden_dropped = [0.0; HIDDEN_LEN];
    for k in 0..OUTPUT_LEN {
        grads.dense2_b[k] = d_raw[k];
        let w_row = &params.dense2_w[k * HIDDEN_LEN..(k + 1) * HIDDEN_LEN];
        let g_row = &mut grads.dense2_w[k * HIDDEN_LEN..(k + 1) * HIDDEN_LEN];
        for h in 0..HIDDEN_LEN {
            g_row[h] = d_raw[k] * trace.hidden_dropped[h];
            d_hidden_dropped[h] += d_raw[k] * w_row[h];
        }
    }

    // Dropout (inverted scaling was applied in forward) and hidden ReLU.
    let mut d_hidden_pre = [0.0; HIDDEN_LEN];
    for h in 0..HIDDEN_LEN {
        let mut g = d_hidden_dropped[h];
        if let Some(mask) = &trace.dropout_mask {
            g *= mask[h];
        }
        d_hidden_pre[h] = if trace.hidden_pre[h] > 0.0 { g } else { 0.0 };
    }

    // Hidden dense layer.
    let mut d_flat = [0.0; FLAT_LEN];
    for h in 0..HIDDEN_LEN {
        grads.dense1_b[h] = d_hidden_pre[h];
        let w_row = &params.dense1_w[h * FLAT_LEN..(h + 1) * FLAT_LEN];
        let g_row = &mut grads.dense1_w[h * FLAT_LEN..(h + 1) * FLAT_LEN];
        if d_hidden_pre[h] == 0.0 {
            continue;
        }
        for f in 0..FLAT_LEN {
            g_row[f] = d_hidden_pre[h] * trace.flat[f];
            d_flat[f] += d_hidden_pre[h] * w_row[f];
        }
    }

    // Un-flatten and un-pool: gradients flow to the argmax positions only.
    let mut d_feature = [[0.0; FEATURE_LEN]; CHANNELS];
    for c in 0..CHANNELS {
        for p in 0..POOLED_LEN {
            d_feature[c][trace.argmax[c][p]] += d_flat[c * POOLED_LEN + p];
        }
    }

    // Front-end ReLU gate.
    let mut d_pre = [[0.0; FEATURE_LEN]; CHANNELS];
    for c in 0..CHANNELS {
        for i in 0..FEATURE_LEN {
            if trace.pre_activation[c][i] > 0.0 {
                d_pre[c][i] = d_feature[c][i];
            }
        }
    }

    // Channel biases: the bias adds directly to every pre-activation.
    for c in 0..CHANNELS {
        grads.frontend_biases[c] = d_pre[c].iter().sum();
    }

    // Front-end weights.
    match &model.frontend {
        Frontend::Classical => {
            for c in 0..CHANNELS {
                let g_row = &mut grads.frontend_weights[c * WINDOW_LEN..(c + 1) * WINDOW_LEN];
                for i in 0..FEATURE_LEN {
                    let g = d_pre[c][i];
                    if g == 0.0 {
                        continue;
                    }
                    for (j, gw) in g_row.iter_mut().enumerate() {
                        *gw += g * trace.spectrum[i + j];
                    }
                }
            }
        }
        Frontend::Quantum { circuit, .. } => {
            if let Some(backend) = frontend_backend {
                if trace.noise.enabled {
                    return Err(crate::error::Error::unsupported(
                        "parameter-shift and adjoint gradients are defined for ideal circuits; \
                         train noisy circuits with SPSA",
                    ));
                }
                for i in 0..FEATURE_LEN {
                    let weights: [f64; CHANNELS] = std::array::from_fn(|c| d_pre[c][i]);
                    if weights.iter().all(|w| *w == 0.0) {
                        continue;
                    }
                    let window = &trace.spectrum[i..i + WINDOW_LEN];
                    let vjp =
                        circuit_vjp(window, circuit, &params.frontend_weights, &weights, backend)?;
                    for (g, v) in grads.frontend_weights.iter_mut().zip(&vjp) {
                        *g += v;
                    }
                }
            }
        }
    }

    Ok(grads)
}

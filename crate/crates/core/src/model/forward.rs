//! Forward pass: convolution front ends, pooling, dense head.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{
    Frontend, Model, OutputActivation, CHANNELS, FEATURE_LEN, FLAT_LEN, HIDDEN_LEN, OUTPUT_LEN,
    POOLED_LEN, POOL_LEN, SPECTRUM_LEN, WINDOW_LEN,
};
use crate::rng::Prng;
use crate::sim::{amplitude_embed, run_lowered, CircuitSpec, NoiseConfig, StateVector};

/// 5×169 per-channel convolution output.
pub type FeatureMap = [[f64; FEATURE_LEN]; CHANNELS];
/// Winning input index for each pooled cell.
pub type PoolArgmax = [[usize; POOLED_LEN]; CHANNELS];

/// Everything the backward pass needs from one forward evaluation.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub spectrum: Vec<f64>,
    /// Noise configuration the forward ran under; circuit-weight gradients
    /// are only defined for ideal traces.
    pub noise: NoiseConfig,
    /// Front-end output + channel bias, before the ReLU.
    pub pre_activation: FeatureMap,
    /// After the ReLU.
    pub feature_map: FeatureMap,
    pub argmax: PoolArgmax,
    pub flat: [f64; FLAT_LEN],
    pub hidden_pre: [f64; HIDDEN_LEN],
    pub hidden: [f64; HIDDEN_LEN],
    /// Inverted-dropout scale per hidden unit (0 or 1/keep); `None` at eval.
    pub dropout_mask: Option<[f64; HIDDEN_LEN]>,
    pub hidden_dropped: [f64; HIDDEN_LEN],
    pub prediction: [f64; OUTPUT_LEN],
}

fn check_spectrum(spectrum: &[f64]) -> Result<()> {
    if spectrum.len() != SPECTRUM_LEN {
        return Err(Error::invalid(format!(
            "spectrum length {}, want {SPECTRUM_LEN}",
            spectrum.len()
        )));
    }
    if spectrum.iter().any(|x| !x.is_finite()) {
        return Err(Error::numeric(
            "spectrum contains a non-finite value".to_string(),
        ));
    }
    Ok(())
}

/// Quantum convolution: for every 32-point window, embed, run the circuit,
/// measure the five Z expectations (damped when noise is enabled), add the
/// channel bias and clamp at zero.
pub fn quanv_forward(
    spectrum: &[f64],
    circuit: &CircuitSpec,
    angles: &[f64],
    biases: &[f64; CHANNELS],
    noise: &NoiseConfig,
) -> Result<FeatureMap> {
    let (_, post) = quanv_forward_full(spectrum, circuit, angles, biases, noise)?;
    Ok(post)
}

pub(crate) fn quanv_forward_full(
    spectrum: &[f64],
    circuit: &CircuitSpec,
    angles: &[f64],
    biases: &[f64; CHANNELS],
    noise: &NoiseConfig,
) -> Result<(FeatureMap, FeatureMap)> {
    check_spectrum(spectrum)?;
    if angles.len() != circuit.n_params {
        return Err(Error::invalid(format!(
            "circuit '{}' expects {} angles, got {}",
            circuit.label,
            circuit.n_params,
            angles.len()
        )));
    }
    crate::sim::check_finite_params(angles)?;
    noise.validate()?;

    let ops = circuit.lowered();
    let mut scratch = StateVector::zero_state();
    let mut pre = [[0.0; FEATURE_LEN]; CHANNELS];
    let mut post = [[0.0; FEATURE_LEN]; CHANNELS];
    for i in 0..FEATURE_LEN {
        let embedded = amplitude_embed(&spectrum[i..i + WINDOW_LEN])?;
        let mut z = run_lowered(&embedded, &ops, angles, &mut scratch);
        if noise.enabled {
            for zq in &mut z {
                *zq = crate::sim::readout_damping(*zq, noise.gamma);
            }
        }
        for c in 0..CHANNELS {
            let v = z[c] + biases[c];
            pre[c][i] = v;
            post[c][i] = v.max(0.0);
        }
    }
    Ok((pre, post))
}

/// Classical 1-D convolution (cross-correlation) with kernel size 32, stride
/// 1, no padding, five channels, then the same bias + ReLU as the quantum
/// front end.
pub fn conv1d_forward(
    spectrum: &[f64],
    kernel: &[f64],
    biases: &[f64; CHANNELS],
) -> Result<FeatureMap> {
    let (_, post) = conv1d_forward_full(spectrum, kernel, biases)?;
    Ok(post)
}

pub(crate) fn conv1d_forward_full(
    spectrum: &[f64],
    kernel: &[f64],
    biases: &[f64; CHANNELS],
) -> Result<(FeatureMap, FeatureMap)> {
    check_spectrum(spectrum)?;
    if kernel.len() != CHANNELS * WINDOW_LEN {
        return Err(Error::invalid(format!(
            "kernel has {} entries, want {}",
            kernel.len(),
            CHANNELS * WINDOW_LEN
        )));
    }
    let mut pre = [[0.0; FEATURE_LEN]; CHANNELS];
    let mut post = [[0.0; FEATURE_LEN]; CHANNELS];
    for c in 0..CHANNELS {
        let weights = &kernel[c * WINDOW_LEN..(c + 1) * WINDOW_LEN];
        for i in 0..FEATURE_LEN {
            let mut acc = biases[c];
            for (j, w) in weights.iter().enumerate() {
                acc += w * spectrum[i + j];
            }
            pre[c][i] = acc;
            post[c][i] = acc.max(0.0);
        }
    }
    Ok((pre, post))
}

/// Non-overlapping max pooling with kernel and stride 5. 169 = 5·33 + 4, so
/// the last four columns are dropped. Returns the pooled map and the winning
/// index per cell (first maximum on ties) for gradient routing.
pub fn maxpool(fm: &FeatureMap) -> ([[f64; POOLED_LEN]; CHANNELS], PoolArgmax) {
    let mut pooled = [[0.0; POOLED_LEN]; CHANNELS];
    let mut argmax = [[0usize; POOLED_LEN]; CHANNELS];
    for c in 0..CHANNELS {
        for p in 0..POOLED_LEN {
            let start = p * POOL_LEN;
            let mut best = fm[c][start];
            let mut best_idx = start;
            for i in start + 1..start + POOL_LEN {
                if fm[c][i] > best {
                    best = fm[c][i];
                    best_idx = i;
                }
            }
            pooled[c][p] = best;
            argmax[c][p] = best_idx;
        }
    }
    (pooled, argmax)
}

/// Flattens channel-major: `flat[c·33 + p] = pooled[c][p]`.
pub(crate) fn flatten(pooled: &[[f64; POOLED_LEN]; CHANNELS]) -> [f64; FLAT_LEN] {
    let mut flat = [0.0; FLAT_LEN];
    for c in 0..CHANNELS {
        flat[c * POOLED_LEN..(c + 1) * POOLED_LEN].copy_from_slice(&pooled[c]);
    }
    flat
}

/// Samples an inverted-dropout mask for drop probability `p`: each hidden
/// unit is kept with probability 1−p and scaled by 1/(1−p), so evaluation
/// needs no rescaling.
pub fn draw_dropout_mask(rng: &mut Prng, p: f64) -> [f64; HIDDEN_LEN] {
    debug_assert!((0.0..1.0).contains(&p));
    let keep = 1.0 - p;
    std::array::from_fn(|_| {
        if rng.random::<f64>() < keep {
            1.0 / keep
        } else {
            0.0
        }
    })
}

pub(crate) struct HeadTrace {
    pub hidden_pre: [f64; HIDDEN_LEN],
    pub hidden: [f64; HIDDEN_LEN],
    pub hidden_dropped: [f64; HIDDEN_LEN],
    pub prediction: [f64; OUTPUT_LEN],
}

pub(crate) fn head_forward_full(
    flat: &[f64; FLAT_LEN],
    dense1_w: &[f64],
    dense1_b: &[f64],
    dense2_w: &[f64],
    dense2_b: &[f64],
    dropout_mask: Option<&[f64; HIDDEN_LEN]>,
    activation: OutputActivation,
) -> HeadTrace {
    let mut hidden_pre = [0.0; HIDDEN_LEN];
    for h in 0..HIDDEN_LEN {
        let row = &dense1_w[h * FLAT_LEN..(h + 1) * FLAT_LEN];
        let mut acc = dense1_b[h];
        for (w, x) in row.iter().zip(flat.iter()) {
            acc += w * x;
        }
        hidden_pre[h] = acc;
    }
    let mut hidden = [0.0; HIDDEN_LEN];
    for h in 0..HIDDEN_LEN {
        hidden[h] = hidden_pre[h].max(0.0);
    }
    let mut hidden_dropped = hidden;
    if let Some(mask) = dropout_mask {
        for (v, m) in hidden_dropped.iter_mut().zip(mask) {
            *v *= m;
        }
    }
    let mut raw = [0.0; OUTPUT_LEN];
    for (k, r) in raw.iter_mut().enumerate() {
        let row = &dense2_w[k * HIDDEN_LEN..(k + 1) * HIDDEN_LEN];
        let mut acc = dense2_b[k];
        for (w, x) in row.iter().zip(hidden_dropped.iter()) {
            acc += w * x;
        }
        *r = acc;
    }
    let prediction = apply_output_activation(&raw, activation);
    HeadTrace {
        hidden_pre,
        hidden,
        hidden_dropped,
        prediction,
    }
}

fn apply_output_activation(
    raw: &[f64; OUTPUT_LEN],
    activation: OutputActivation,
) -> [f64; OUTPUT_LEN] {
    match activation {
        OutputActivation::Logistic => std::array::from_fn(|k| 1.0 / (1.0 + (-raw[k]).exp())),
        OutputActivation::Softmax => {
            let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let exps: [f64; OUTPUT_LEN] = std::array::from_fn(|k| (raw[k] - max).exp());
            let sum: f64 = exps.iter().sum();
            std::array::from_fn(|k| exps[k] / sum)
        }
    }
}

/// Dense head on a flattened feature vector: 165 → 128 with ReLU (and
/// optional train-time dropout) → 10, squashed to [0, 1].
pub fn head_forward(
    flat: &[f64; FLAT_LEN],
    model: &Model,
    dropout_mask: Option<&[f64; HIDDEN_LEN]>,
) -> [f64; OUTPUT_LEN] {
    head_forward_full(
        flat,
        &model.params.dense1_w,
        &model.params.dense1_b,
        &model.params.dense2_w,
        &model.params.dense2_b,
        dropout_mask,
        model.output_activation,
    )
    .prediction
}

/// Full forward pass. Passing a dropout mask marks a training-mode
/// evaluation; evaluation mode (`None`) is deterministic.
pub fn model_forward(
    model: &Model,
    spectrum: &[f64],
    noise: &NoiseConfig,
    dropout_mask: Option<&[f64; HIDDEN_LEN]>,
) -> Result<([f64; OUTPUT_LEN], ForwardTrace)> {
    let (pre, post) = match &model.frontend {
        Frontend::Quantum { circuit, .. } => quanv_forward_full(
            spectrum,
            circuit,
            &model.params.frontend_weights,
            &model.params.frontend_biases,
            noise,
        )?,
        Frontend::Classical => conv1d_forward_full(
            spectrum,
            &model.params.frontend_weights,
            &model.params.frontend_biases,
        )?,
    };
    let (pooled, argmax) = maxpool(&post);
    let flat = flatten(&pooled);
    let head = head_forward_full(
        &flat,
        &model.params.dense1_w,
        &model.params.dense1_b,
        &model.params.dense2_w,
        &model.params.dense2_b,
        dropout_mask,
        model.output_activation,
    );
    let trace = ForwardTrace {
        spectrum: spectrum.to_vec(),
        noise: *noise,
        pre_activation: pre,
        feature_map: post,
        argmax,
        flat,
        hidden_pre: head.hidden_pre,
        hidden: head.hidden,
        dropout_mask: dropout_mask.copied(),
        hidden_dropped: head.hidden_dropped,
        prediction: head.prediction,
    };
    Ok((head.prediction, trace))
}

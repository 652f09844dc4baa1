//! Multi-task loss: binary cross-entropy on the 5-slot peak mask plus a
//! permutation-invariant assignment loss on the 5 peak positions, and the
//! decoding of raw predictions into peak counts and positions.
//!
//! Following the combined objective, both arguments of the position term are
//! gated by the *predicted* mask: `H(m' ⊙ p, m' ⊙ p')` where `m'` is the
//! continuous predicted mask, `p` the true positions and `p'` the predicted
//! ones. The gradient therefore reaches the mask outputs through both sides
//! of the position term in addition to the cross-entropy.

use serde::{Deserialize, Serialize};

use crate::assignment;
use crate::error::{Error, Result};

/// Fixed number of peak slots in targets and predictions.
pub const MAX_PEAKS: usize = 5;

/// Prediction vector length: 5 mask slots followed by 5 position slots.
pub const PREDICTION_LEN: usize = 2 * MAX_PEAKS;

/// Numerical floor keeping `ln` finite in the cross-entropy.
pub const BCE_EPS: f64 = 1e-7;

/// Ground-truth annotation: a 5-slot presence mask and 5 normalized
/// positions, zero wherever the mask is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetLabel {
    pub mask: [u8; MAX_PEAKS],
    pub positions: [f64; MAX_PEAKS],
}

impl TargetLabel {
    pub fn new(mask: [u8; MAX_PEAKS], positions: [f64; MAX_PEAKS]) -> Result<Self> {
        let label = TargetLabel { mask, positions };
        label.validate()?;
        Ok(label)
    }

    pub fn empty() -> Self {
        TargetLabel {
            mask: [0; MAX_PEAKS],
            positions: [0.0; MAX_PEAKS],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, (&m, &p)) in self.mask.iter().zip(&self.positions).enumerate() {
            if m > 1 {
                return Err(Error::invalid(format!("mask slot {i} is {m}, want 0 or 1")));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!(
                    "position slot {i} is {p}, want [0, 1]"
                )));
            }
            if m == 0 && p != 0.0 {
                return Err(Error::invalid(format!(
                    "slot {i} has position {p} but mask 0; unmasked positions must be 0"
                )));
            }
        }
        Ok(())
    }

    /// Number of present peaks, Σ mask.
    pub fn count(&self) -> usize {
        self.mask.iter().map(|&m| m as usize).sum()
    }

    /// Positions gated by the mask (identical to `positions` on a valid
    /// label, kept explicit for symmetry with predictions).
    pub fn masked_positions(&self) -> [f64; MAX_PEAKS] {
        let mut out = [0.0; MAX_PEAKS];
        for i in 0..MAX_PEAKS {
            out[i] = self.mask[i] as f64 * self.positions[i];
        }
        out
    }
}

/// Mean binary cross-entropy over the 5 mask slots, with predictions clamped
/// to `[ε, 1−ε]` before the logs.
pub fn bce(pred_mask: &[f64; MAX_PEAKS], true_mask: &[u8; MAX_PEAKS]) -> f64 {
    let mut total = 0.0;
    for (&p, &y) in pred_mask.iter().zip(true_mask) {
        let p = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
        let y = y as f64;
        total -= y * p.ln() + (1.0 - y) * (1.0 - p).ln();
    }
    total / MAX_PEAKS as f64
}

/// Optimal assignment of predicted slots (rows) to target slots (columns),
/// minimizing the total cost.
pub fn hungarian_assignment(cost: &[[f64; MAX_PEAKS]; MAX_PEAKS]) -> [usize; MAX_PEAKS] {
    let rows: Vec<Vec<f64>> = cost.iter().map(|row| row.to_vec()).collect();
    let solved = assignment::solve(&rows);
    let mut out = [0usize; MAX_PEAKS];
    out.copy_from_slice(&solved);
    out
}

/// Mean squared error between two 5-vectors under the optimal slot
/// assignment (both already gated by the predicted mask).
pub fn hungarian_loss(
    pred_pos_masked: &[f64; MAX_PEAKS],
    true_pos_masked: &[f64; MAX_PEAKS],
) -> f64 {
    let (loss, _) = hungarian_loss_with_assignment(pred_pos_masked, true_pos_masked);
    loss
}

fn hungarian_loss_with_assignment(
    pred: &[f64; MAX_PEAKS],
    target: &[f64; MAX_PEAKS],
) -> (f64, [usize; MAX_PEAKS]) {
    let mut cost = [[0.0; MAX_PEAKS]; MAX_PEAKS];
    for i in 0..MAX_PEAKS {
        for j in 0..MAX_PEAKS {
            let d = pred[i] - target[j];
            cost[i][j] = d * d;
        }
    }
    let sigma = hungarian_assignment(&cost);
    let total: f64 = (0..MAX_PEAKS).map(|i| cost[i][sigma[i]]).sum();
    (total / MAX_PEAKS as f64, sigma)
}

/// Combined loss and its analytic gradient with respect to all 10 prediction
/// entries. The optimal assignment is held fixed when differentiating (it is
/// locally constant almost everywhere).
pub fn combined_loss(
    prediction: &[f64; PREDICTION_LEN],
    target: &TargetLabel,
) -> (f64, [f64; PREDICTION_LEN]) {
    let pred_mask: &[f64; MAX_PEAKS] = prediction[..MAX_PEAKS].try_into().expect("mask slice");
    let pred_pos: &[f64; MAX_PEAKS] = prediction[MAX_PEAKS..].try_into().expect("position slice");

    let mut grad = [0.0; PREDICTION_LEN];

    // Cross-entropy term; the clamp only guards the logs, the gradient is
    // taken at the clamped value and passed straight through.
    let bce_value = bce(pred_mask, &target.mask);
    for i in 0..MAX_PEAKS {
        let p = pred_mask[i].clamp(BCE_EPS, 1.0 - BCE_EPS);
        let y = target.mask[i] as f64;
        grad[i] += (-y / p + (1.0 - y) / (1.0 - p)) / MAX_PEAKS as f64;
    }

    // Position term: both sides gated by the predicted mask.
    let mut gated_pred = [0.0; MAX_PEAKS];
    let mut gated_true = [0.0; MAX_PEAKS];
    for i in 0..MAX_PEAKS {
        gated_pred[i] = pred_mask[i] * pred_pos[i];
        gated_true[i] = pred_mask[i] * target.positions[i];
    }
    let (h_value, sigma) = hungarian_loss_with_assignment(&gated_pred, &gated_true);

    let scale = 2.0 / MAX_PEAKS as f64;
    for i in 0..MAX_PEAKS {
        let residual = gated_pred[i] - gated_true[sigma[i]];
        // Through the predicted side w_i = m'_i · p'_i.
        grad[MAX_PEAKS + i] += scale * residual * pred_mask[i];
        grad[i] += scale * residual * pred_pos[i];
        // Through the gated target u_j = m'_j · p_j at j = σ(i).
        grad[sigma[i]] -= scale * residual * target.positions[sigma[i]];
    }

    (bce_value + h_value, grad)
}

/// Decoded prediction: thresholded mask, retained (mask-gated) positions and
/// the peak count.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub mask: [u8; MAX_PEAKS],
    /// `m_i · p_i` for every slot.
    pub positions: [f64; MAX_PEAKS],
    pub count: usize,
}

impl Decoded {
    /// Positions of the slots whose mask fired.
    pub fn retained(&self) -> Vec<f64> {
        self.mask
            .iter()
            .zip(&self.positions)
            .filter(|(&m, _)| m == 1)
            .map(|(_, &p)| p)
            .collect()
    }
}

/// Thresholds mask entries at 0.5 (an exact 0.5 counts as present), gates
/// positions by the binary mask, and sums the mask for the peak count.
pub fn decode(prediction: &[f64; PREDICTION_LEN]) -> Decoded {
    let mut mask = [0u8; MAX_PEAKS];
    let mut positions = [0.0; MAX_PEAKS];
    for i in 0..MAX_PEAKS {
        if prediction[i] >= 0.5 {
            mask[i] = 1;
            positions[i] = prediction[MAX_PEAKS + i];
        }
    }
    let count = mask.iter().map(|&m| m as usize).sum();
    Decoded {
        mask,
        positions,
        count,
    }
}

//! Evaluation: peak-counting classification metrics, position errors and
//! report aggregation across runs.

mod wilcoxon;

pub use wilcoxon::wilcoxon_one_sided;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assignment;
use crate::error::{Error, Result};
use crate::loss::{decode, Decoded, TargetLabel, MAX_PEAKS};
use crate::model::{model_forward, Checkpoint, Model};
use crate::sim::NoiseConfig;
use crate::specgen::{Dataset, Difficulty};

/// Peak-count classes 0..=5.
pub const COUNT_CLASSES: usize = MAX_PEAKS + 1;

/// Support-weighted precision/recall/F1 over the six peak-count classes.
/// Classes with an empty denominator contribute 0 (and zero-support classes
/// carry zero weight).
pub fn count_metrics(pred_counts: &[usize], true_counts: &[usize]) -> Result<(f64, f64, f64)> {
    if pred_counts.len() != true_counts.len() {
        return Err(Error::invalid(format!(
            "prediction/target length mismatch: {} vs {}",
            pred_counts.len(),
            true_counts.len()
        )));
    }
    if pred_counts.is_empty() {
        return Err(Error::invalid("count_metrics needs at least one sample"));
    }
    if pred_counts
        .iter()
        .chain(true_counts)
        .any(|c| *c >= COUNT_CLASSES)
    {
        return Err(Error::invalid(format!(
            "peak counts must lie in 0..{COUNT_CLASSES}"
        )));
    }

    let mut confusion = [[0usize; COUNT_CLASSES]; COUNT_CLASSES];
    for (&p, &t) in pred_counts.iter().zip(true_counts) {
        confusion[t][p] += 1;
    }

    let total = pred_counts.len() as f64;
    let (mut f1, mut recall, mut precision) = (0.0, 0.0, 0.0);
    for c in 0..COUNT_CLASSES {
        let tp = confusion[c][c] as f64;
        let support: usize = confusion[c].iter().sum();
        let predicted: usize = (0..COUNT_CLASSES).map(|t| confusion[t][c]).sum();
        let p_c = if predicted > 0 {
            tp / predicted as f64
        } else {
            0.0
        };
        let r_c = if support > 0 {
            tp / support as f64
        } else {
            0.0
        };
        let f_c = if p_c + r_c > 0.0 {
            2.0 * p_c * r_c / (p_c + r_c)
        } else {
            0.0
        };
        let weight = support as f64 / total;
        precision += weight * p_c;
        recall += weight * r_c;
        f1 += weight * f_c;
    }
    Ok((f1, recall, precision))
}

/// Mean absolute and mean squared position error over a set of decoded
/// predictions.
///
/// Within each spectrum the five mask-gated predicted slots are matched to
/// the five mask-gated target slots by optimal assignment — absolute-cost
/// for the MAE, squared-cost for the MSE, each independently optimal. Slot
/// pairs where neither side holds a peak are excluded from the average;
/// unmatched peaks on either side are penalized against the empty slot's 0.
pub fn position_errors(predictions: &[Decoded], targets: &[TargetLabel]) -> Result<(f64, f64)> {
    if predictions.len() != targets.len() {
        return Err(Error::invalid(format!(
            "prediction/target length mismatch: {} vs {}",
            predictions.len(),
            targets.len()
        )));
    }
    let mut abs_sum = 0.0;
    let mut abs_n = 0usize;
    let mut sq_sum = 0.0;
    let mut sq_n = 0usize;
    for (pred, target) in predictions.iter().zip(targets) {
        let u = &pred.positions;
        let v = target.masked_positions();

        let abs_cost: Vec<Vec<f64>> = (0..MAX_PEAKS)
            .map(|i| (0..MAX_PEAKS).map(|j| (u[i] - v[j]).abs()).collect())
            .collect();
        let sigma = assignment::solve(&abs_cost);
        for i in 0..MAX_PEAKS {
            if pred.mask[i] == 1 || target.mask[sigma[i]] == 1 {
                abs_sum += abs_cost[i][sigma[i]];
                abs_n += 1;
            }
        }

        let sq_cost: Vec<Vec<f64>> = (0..MAX_PEAKS)
            .map(|i| {
                (0..MAX_PEAKS)
                    .map(|j| (u[i] - v[j]) * (u[i] - v[j]))
                    .collect()
            })
            .collect();
        let sigma = assignment::solve(&sq_cost);
        for i in 0..MAX_PEAKS {
            if pred.mask[i] == 1 || target.mask[sigma[i]] == 1 {
                sq_sum += sq_cost[i][sigma[i]];
                sq_n += 1;
            }
        }
    }
    let mae = if abs_n > 0 {
        abs_sum / abs_n as f64
    } else {
        0.0
    };
    let mse = if sq_n > 0 { sq_sum / sq_n as f64 } else { 0.0 };
    Ok((mae, mse))
}

/// Metrics of a single model on a single evaluation set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub f1_weighted: f64,
    pub recall_weighted: f64,
    pub precision_weighted: f64,
    pub mae: f64,
    pub mse: f64,
    pub n_spectra: usize,
}

/// Evaluates one model over the given dataset indices (evaluation mode,
/// noise as configured), optionally restricted to one difficulty.
pub fn evaluate_model(
    model: &Model,
    dataset: &Dataset,
    indices: &[usize],
    noise: &NoiseConfig,
    difficulty: Option<Difficulty>,
) -> Result<RunMetrics> {
    let selected: Vec<usize> = indices
        .iter()
        .copied()
        .filter(|&i| difficulty.is_none_or(|d| dataset.spectra[i].difficulty == d))
        .collect();
    if selected.is_empty() {
        return Err(Error::invalid("evaluation set is empty after filtering"));
    }

    let mut decoded = Vec::with_capacity(selected.len());
    let mut targets = Vec::with_capacity(selected.len());
    for &i in &selected {
        let spectrum = &dataset.spectra[i];
        let (pred, _) = model_forward(model, &spectrum.points, noise, None)?;
        decoded.push(decode(&pred));
        targets.push(spectrum.annotation);
    }

    let pred_counts: Vec<usize> = decoded.iter().map(|d| d.count).collect();
    let true_counts: Vec<usize> = targets.iter().map(TargetLabel::count).collect();
    let (f1, recall, precision) = count_metrics(&pred_counts, &true_counts)?;
    let (mae, mse) = position_errors(&decoded, &targets)?;
    Ok(RunMetrics {
        f1_weighted: f1,
        recall_weighted: recall,
        precision_weighted: precision,
        mae,
        mse,
        n_spectra: selected.len(),
    })
}

/// Mean and standard deviation of one metric across runs (population σ, so
/// a single run reports σ = 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricStat {
    pub mean: f64,
    pub std: f64,
}

impl MetricStat {
    fn from_values(values: &[f64]) -> MetricStat {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        MetricStat {
            mean,
            std: var.sqrt(),
        }
    }
}

/// Aggregated metric block (overall or one difficulty subset).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedMetrics {
    pub f1_weighted: MetricStat,
    pub recall_weighted: MetricStat,
    pub precision_weighted: MetricStat,
    pub mae: MetricStat,
    pub mse: MetricStat,
}

fn aggregate(runs: &[RunMetrics]) -> AggregatedMetrics {
    let pick = |f: fn(&RunMetrics) -> f64| {
        MetricStat::from_values(&runs.iter().map(f).collect::<Vec<_>>())
    };
    AggregatedMetrics {
        f1_weighted: pick(|r| r.f1_weighted),
        recall_weighted: pick(|r| r.recall_weighted),
        precision_weighted: pick(|r| r.precision_weighted),
        mae: pick(|r| r.mae),
        mse: pick(|r| r.mse),
    }
}

/// Full evaluation report: aggregate over one or more run checkpoints with
/// per-difficulty breakdowns. `support` counts the aggregated runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub format_version: u32,
    pub support: usize,
    pub overall: AggregatedMetrics,
    pub per_difficulty: BTreeMap<Difficulty, AggregatedMetrics>,
    pub per_run: Vec<RunMetrics>,
}

impl MetricsReport {
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// Loads every checkpoint, evaluates it on the given indices and aggregates.
/// `noise_override` replaces each checkpoint's stored noise configuration;
/// `difficulty` restricts the evaluation set.
pub fn evaluate_checkpoints(
    checkpoints: &[PathBuf],
    dataset: &Dataset,
    indices: &[usize],
    noise_override: Option<NoiseConfig>,
    difficulty: Option<Difficulty>,
) -> Result<MetricsReport> {
    if checkpoints.is_empty() {
        return Err(Error::invalid("no checkpoints to evaluate"));
    }
    let mut per_run = Vec::with_capacity(checkpoints.len());
    let mut per_difficulty_runs: BTreeMap<Difficulty, Vec<RunMetrics>> = BTreeMap::new();
    for path in checkpoints {
        let checkpoint = Checkpoint::load(path)?;
        let noise = noise_override.unwrap_or(checkpoint.noise);
        let model = checkpoint.into_model()?;
        per_run.push(evaluate_model(
            &model, dataset, indices, &noise, difficulty,
        )?);

        let present: Vec<Difficulty> = {
            let mut ds: Vec<Difficulty> = indices
                .iter()
                .filter(|&&i| difficulty.is_none_or(|d| dataset.spectra[i].difficulty == d))
                .map(|&i| dataset.spectra[i].difficulty)
                .collect();
            ds.sort_unstable();
            ds.dedup();
            ds
        };
        for d in present {
            let run = evaluate_model(&model, dataset, indices, &noise, Some(d))?;
            per_difficulty_runs.entry(d).or_default().push(run);
        }
    }
    Ok(MetricsReport {
        format_version: 1,
        support: per_run.len(),
        overall: aggregate(&per_run),
        per_difficulty: per_difficulty_runs
            .into_iter()
            .map(|(d, runs)| (d, aggregate(&runs)))
            .collect(),
        per_run,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    #[test]
    fn perfect_predictions_score_one() {
        let counts = vec![0, 1, 2, 3, 4, 5, 3, 2];
        let (f1, recall, precision) = count_metrics(&counts, &counts).unwrap();
        assert_abs_diff_eq!(f1, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(recall, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(precision, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn fixed_wrong_class_on_balanced_two_class_sample() {
        // Truth is half 2s and half 3s, predictions all 3:
        // recall is 0 for class 2 and 1 for class 3 → weighted 0.5.
        let truth = vec![2, 2, 3, 3];
        let pred = vec![3, 3, 3, 3];
        let (_, recall, _) = count_metrics(&pred, &truth).unwrap();
        assert_abs_diff_eq!(recall, 0.5, epsilon = 1e-15);
    }

    /// Independently coded confusion-matrix oracle.
    fn oracle_weighted(pred: &[usize], truth: &[usize]) -> (f64, f64, f64) {
        let classes = 6;
        let mut f1w = 0.0;
        let mut rw = 0.0;
        let mut pw = 0.0;
        for c in 0..classes {
            let tp = pred
                .iter()
                .zip(truth)
                .filter(|(p, t)| **p == c && **t == c)
                .count() as f64;
            let fp = pred
                .iter()
                .zip(truth)
                .filter(|(p, t)| **p == c && **t != c)
                .count() as f64;
            let fn_ = pred
                .iter()
                .zip(truth)
                .filter(|(p, t)| **p != c && **t == c)
                .count() as f64;
            let support = tp + fn_;
            let prec = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
            let rec = if support > 0.0 { tp / support } else { 0.0 };
            let f1 = if prec + rec > 0.0 {
                2.0 * prec * rec / (prec + rec)
            } else {
                0.0
            };
            let w = support / truth.len() as f64;
            f1w += w * f1;
            rw += w * rec;
            pw += w * prec;
        }
        (f1w, rw, pw)
    }

    #[test]
    fn count_metrics_matches_confusion_oracle() {
        let mut rng = crate::rng::seeded(60);
        for _ in 0..1000 {
            let n = rng.random_range(1..40);
            let pred: Vec<usize> = (0..n).map(|_| rng.random_range(0..6)).collect();
            let truth: Vec<usize> = (0..n).map(|_| rng.random_range(0..6)).collect();
            let got = count_metrics(&pred, &truth).unwrap();
            let want = oracle_weighted(&pred, &truth);
            assert_abs_diff_eq!(got.0, want.0, epsilon = 1e-12);
            assert_abs_diff_eq!(got.1, want.1, epsilon = 1e-12);
            assert_abs_diff_eq!(got.2, want.2, epsilon = 1e-12);
        }
    }

    fn decoded(mask: [u8; 5], positions: [f64; 5]) -> Decoded {
        let mut gated = [0.0; 5];
        for i in 0..5 {
            gated[i] = mask[i] as f64 * positions[i];
        }
        Decoded {
            mask,
            positions: gated,
            count: mask.iter().map(|&m| m as usize).sum(),
        }
    }

    #[test]
    fn perfect_positions_have_zero_error() {
        let target = TargetLabel::new([1, 1, 0, 0, 0], [0.2, 0.8, 0.0, 0.0, 0.0]).unwrap();
        let pred = decoded([1, 1, 0, 0, 0], [0.2, 0.8, 0.0, 0.0, 0.0]);
        let (mae, mse) = position_errors(&[pred], &[target]).unwrap();
        assert_abs_diff_eq!(mae, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mse, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn single_peak_offset_contributes_its_distance() {
        let target = TargetLabel::new([1, 0, 0, 0, 0], [0.5, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let pred = decoded([1, 0, 0, 0, 0], [0.6, 0.0, 0.0, 0.0, 0.0]);
        let (mae, mse) = position_errors(&[pred], &[target]).unwrap();
        assert_abs_diff_eq!(mae, 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(mse, 0.01, epsilon = 1e-12);
    }

    #[test]
    fn position_errors_invariant_to_prediction_order() {
        let target = TargetLabel::new([1, 1, 1, 0, 0], [0.1, 0.5, 0.9, 0.0, 0.0]).unwrap();
        let a = decoded([1, 1, 1, 0, 0], [0.12, 0.48, 0.95, 0.0, 0.0]);
        let b = decoded([1, 1, 0, 1, 0], [0.95, 0.12, 0.0, 0.48, 0.0]);
        let ea = position_errors(&[a], &[target]).unwrap();
        let eb = position_errors(&[b], &[target]).unwrap();
        assert_abs_diff_eq!(ea.0, eb.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ea.1, eb.1, epsilon = 1e-12);
    }

    #[test]
    fn position_errors_match_brute_force_matcher() {
        // Brute force: best permutation over the gated 5-vectors with the
        // same pair-counting rule.
        let mut rng = crate::rng::seeded(61);
        for _ in 0..200 {
            let t_count = rng.random_range(0..=5);
            let mut t_mask = [0u8; 5];
            let mut t_pos = [0.0; 5];
            for i in 0..t_count {
                t_mask[i] = 1;
                t_pos[i] = rng.random_range(0.0..1.0);
            }
            let target = TargetLabel::new(t_mask, t_pos).unwrap();
            let p_mask: [u8; 5] = std::array::from_fn(|_| rng.random_range(0..2) as u8);
            let p_pos: [f64; 5] = std::array::from_fn(|_| rng.random_range(0.0..1.0));
            let pred = decoded(p_mask, p_pos);

            let v = target.masked_positions();

            // Brute force: the minimal total matching cost over all 120
            // permutations; inactive-inactive pairs cost 0 either way, so
            // the totals are comparable with the assignment route.
            let mut best_abs = f64::INFINITY;
            let mut best_sq = f64::INFINITY;
            let mut perm = [0usize; 5];
            permute(&mut perm, 0, &mut [false; 5], &mut |p| {
                let total_abs: f64 = (0..5).map(|i| (pred.positions[i] - v[p[i]]).abs()).sum();
                let total_sq: f64 = (0..5).map(|i| (pred.positions[i] - v[p[i]]).powi(2)).sum();
                best_abs = best_abs.min(total_abs);
                best_sq = best_sq.min(total_sq);
            });

            let abs_cost: Vec<Vec<f64>> = (0..5)
                .map(|i| (0..5).map(|j| (pred.positions[i] - v[j]).abs()).collect())
                .collect();
            let sigma = crate::assignment::solve(&abs_cost);
            let total: f64 = (0..5).map(|i| abs_cost[i][sigma[i]]).sum();
            assert_abs_diff_eq!(total, best_abs, epsilon = 1e-12);

            let sq_cost: Vec<Vec<f64>> = (0..5)
                .map(|i| (0..5).map(|j| (pred.positions[i] - v[j]).powi(2)).collect())
                .collect();
            let sigma_sq = crate::assignment::solve(&sq_cost);
            let total_sq: f64 = (0..5).map(|i| sq_cost[i][sigma_sq[i]]).sum();
            assert_abs_diff_eq!(total_sq, best_sq, epsilon = 1e-12);
        }
    }

    fn permute(
        perm: &mut [usize; 5],
        depth: usize,
        used: &mut [bool; 5],
        visit: &mut impl FnMut(&[usize; 5]),
    ) {
        if depth == 5 {
            visit(perm);
            return;
        }
        for v in 0..5 {
            if !used[v] {
                used[v] = true;
                perm[depth] = v;
                permute(perm, depth + 1, used, visit);
                used[v] = false;
            }
        }
    }

    #[test]
    fn evaluate_model_smoke() {
        use crate::model::{Model, OutputActivation};
        use crate::specgen::build_mixed_dataset;
        let dataset = build_mixed_dataset(3);
        let model = Model::new_classical(OutputActivation::Logistic, &mut crate::rng::seeded(1));
        let indices: Vec<usize> = (0..10).collect();
        let run = evaluate_model(&model, &dataset, &indices, &NoiseConfig::ideal(), None).unwrap();
        for v in [
            run.f1_weighted,
            run.recall_weighted,
            run.precision_weighted,
            run.mae,
            run.mse,
        ] {
            assert!(v.is_finite());
        }
        assert!((0.0..=1.0).contains(&run.f1_weighted));
        assert_eq!(run.n_spectra, 10);

        // Difficulty filter keeps only matching spectra.
        let hard_only = evaluate_model(
            &model,
            &dataset,
            &indices,
            &NoiseConfig::ideal(),
            Some(Difficulty::Hard),
        )
        .unwrap();
        assert_eq!(hard_only.n_spectra, 10); // the first 550 mixed spectra are hard

        let err = evaluate_model(
            &model,
            &dataset,
            &indices,
            &NoiseConfig::ideal(),
            Some(Difficulty::Easy),
        );
        assert!(err.is_err());
    }

    #[test]
    fn aggregation_of_identical_runs_has_zero_std() {
        let run = RunMetrics {
            f1_weighted: 0.9,
            recall_weighted: 0.89,
            precision_weighted: 0.91,
            mae: 0.04,
            mse: 0.004,
            n_spectra: 100,
        };
        let agg = aggregate(&[run, run, run]);
        assert_abs_diff_eq!(agg.f1_weighted.mean, 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(agg.f1_weighted.std, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(agg.mae.std, 0.0, epsilon = 1e-15);
    }
}

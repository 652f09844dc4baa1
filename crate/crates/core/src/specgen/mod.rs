//! Synthetic Lorentzian spectra with controllable difficulty.
//!
//! A spectrum is a sum of Lorentzian peaks sampled on a 200-point grid over
//! [0, 1], plus Gaussian noise, min-max normalized to [0, 1]. Peak count,
//! linewidth, intensity, noise level and placement behavior come from a
//! difficulty preset. To control overlap, the axis is subdivided into one
//! section per peak and each peak lands inside its own section at a position
//! drawn from the [`placement`] distribution.

mod placement;
mod split;

pub use placement::{lognormal_pdf, placement_pdf, PlacementDist};
pub use split::{stratified_split, SplitIndices};

use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::{TargetLabel, MAX_PEAKS};
use crate::model::SPECTRUM_LEN;
use crate::rng::{substream, Prng};

/// Difficulty tags attached to every generated spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl std::fmt::Display for Difficulty {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Difficulty::Easy => write!(f, "easy"),
            Difficulty::Medium => write!(f, "medium"),
            Difficulty::Hard => write!(f, "hard"),
        }
    }
}

/// Generation parameters of one difficulty level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultyPreset {
    pub difficulty: Difficulty,
    /// Inclusive peak count range.
    pub peak_count_range: (usize, usize),
    /// Full width at half maximum, drawn from `[lo, hi)`.
    pub linewidth_range: (f64, f64),
    /// Peak amplitude, drawn from `[lo, hi)`.
    pub intensity_range: (f64, f64),
    /// Standard deviation of the additive Gaussian noise, in raw intensity
    /// units (pre-normalization).
    pub noise_magnitude: f64,
    pub placement_mu: f64,
    pub placement_sigma: f64,
}

impl DifficultyPreset {
    /// Zero to two narrow, strong peaks placed toward section centers, with
    /// barely any noise.
    pub fn easy() -> Self {
        DifficultyPreset {
            difficulty: Difficulty::Easy,
            peak_count_range: (0, 2),
            linewidth_range: (0.02, 0.1),
            intensity_range: (500.0, 1000.0),
            noise_magnitude: 1.0,
            placement_mu: 1.0,
            placement_sigma: 0.96,
        }
    }

    /// Three to five peaks, slightly wider and noisier than easy.
    pub fn medium() -> Self {
        DifficultyPreset {
            difficulty: Difficulty::Medium,
            peak_count_range: (3, 5),
            linewidth_range: (0.025, 0.12),
            intensity_range: (500.0, 1000.0),
            noise_magnitude: 2.0,
            placement_mu: 1.0,
            placement_sigma: 0.96,
        }
    }

    /// Three to five wide, weak peaks pushed toward section edges under
    /// heavy noise.
    pub fn hard() -> Self {
        DifficultyPreset {
            difficulty: Difficulty::Hard,
            peak_count_range: (3, 5),
            linewidth_range: (0.1, 0.22),
            intensity_range: (100.0, 500.0),
            noise_magnitude: 14.0,
            placement_mu: 0.85,
            placement_sigma: 1.5,
        }
    }

    pub fn for_difficulty(difficulty: Difficulty) -> Self {
        match difficulty {
            Difficulty::Easy => Self::easy(),
            Difficulty::Medium => Self::medium(),
            Difficulty::Hard => Self::hard(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.peak_count_range.0 > self.peak_count_range.1 || self.peak_count_range.1 > MAX_PEAKS
        {
            return Err(Error::invalid(format!(
                "peak count range {:?} invalid (max {MAX_PEAKS})",
                self.peak_count_range
            )));
        }
        if self.linewidth_range.0 >= self.linewidth_range.1 || self.linewidth_range.0 <= 0.0 {
            return Err(Error::invalid("empty or non-positive linewidth range"));
        }
        if self.intensity_range.0 >= self.intensity_range.1 {
            return Err(Error::invalid("empty intensity range"));
        }
        if self.noise_magnitude < 0.0 {
            return Err(Error::invalid("negative noise magnitude"));
        }
        Ok(())
    }
}

/// One synthetic spectrum: 200 normalized samples plus its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub points: Vec<f64>,
    pub annotation: TargetLabel,
    pub difficulty: Difficulty,
    /// Substream index this spectrum was drawn from within its dataset.
    pub seed: u64,
}

/// Lorentzian lineshape `A / (1 + [2(ν − ν₀)/Γ]²)`.
fn lorentzian(nu: f64, amplitude: f64, center: f64, width: f64) -> f64 {
    let t = 2.0 * (nu - center) / width;
    amplitude / (1.0 + t * t)
}

/// Draws one spectrum from a preset.
///
/// Steps: draw the peak count, split [0, 1] into that many equal sections,
/// place one peak per section via the placement distribution, draw each
/// peak's width and amplitude, evaluate the Lorentzian sum on the 200-point
/// grid, add Gaussian noise, min-max normalize. A zero-peak draw yields a
/// pure-noise spectrum with an all-zero annotation.
pub fn generate_spectrum(
    preset: &DifficultyPreset,
    dist: &PlacementDist,
    rng: &mut Prng,
) -> Spectrum {
    let (lo, hi) = preset.peak_count_range;
    let n = rng.random_range(lo..=hi);

    let mut centers = Vec::with_capacity(n);
    let mut widths = Vec::with_capacity(n);
    let mut amplitudes = Vec::with_capacity(n);
    for k in 0..n {
        let within = dist.sample(rng);
        centers.push((k as f64 + within) / n as f64);
        widths.push(rng.random_range(preset.linewidth_range.0..preset.linewidth_range.1));
        amplitudes.push(rng.random_range(preset.intensity_range.0..preset.intensity_range.1));
    }

    let mut points = vec![0.0; SPECTRUM_LEN];
    for (i, y) in points.iter_mut().enumerate() {
        let nu = i as f64 / (SPECTRUM_LEN - 1) as f64;
        for k in 0..n {
            *y += lorentzian(nu, amplitudes[k], centers[k], widths[k]);
        }
    }
    if preset.noise_magnitude > 0.0 {
        let normal = Normal::new(0.0, preset.noise_magnitude).expect("validated noise magnitude");
        for y in &mut points {
            *y += normal.sample(rng);
        }
    }

    min_max_normalize(&mut points);

    let mut mask = [0u8; MAX_PEAKS];
    let mut positions = [0.0; MAX_PEAKS];
    centers.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (slot, &c) in centers.iter().enumerate() {
        mask[slot] = 1;
        positions[slot] = c;
    }
    let annotation = TargetLabel { mask, positions };
    debug_assert!(annotation.validate().is_ok());

    Spectrum {
        points,
        annotation,
        difficulty: preset.difficulty,
        seed: 0,
    }
}

fn min_max_normalize(points: &mut [f64]) {
    let min = points.iter().copied().fold(f64::INFINITY, f64::min);
    let max = points.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    if range < 1e-30 {
        points.fill(0.0);
        return;
    }
    for y in points.iter_mut() {
        *y = (*y - min) / range;
    }
}

/// A generated dataset: the spectra plus the master seed that reproduces
/// them (and pins the test-split membership).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub master_seed: u64,
    pub spectra: Vec<Spectrum>,
}

/// Mixed dataset composition, in storage order.
pub const MIXED_COMPOSITION: [(Difficulty, usize); 3] = [
    (Difficulty::Hard, 550),
    (Difficulty::Medium, 350),
    (Difficulty::Easy, 250),
];
/// Cap on zero-peak spectra in the mixed dataset.
pub const MIXED_ZERO_PEAK_CAP: usize = 50;
/// Hard dataset size.
pub const HARD_DATASET_LEN: usize = 1000;

/// Builds the 1150-spectrum mixed dataset: 550 hard, 350 medium, 250 easy,
/// with easy zero-peak draws beyond the 50th redrawn so exactly 50 spectra
/// carry no peak. Deterministic in `seed`; spectrum `i` draws from
/// substream `i`.
pub fn build_mixed_dataset(seed: u64) -> Dataset {
    let mut spectra = Vec::with_capacity(MIXED_COMPOSITION.iter().map(|(_, n)| n).sum());
    let mut stream = 0u64;
    let mut zero_peaks_seen = 0usize;
    for (difficulty, count) in MIXED_COMPOSITION {
        let preset = DifficultyPreset::for_difficulty(difficulty);
        let dist = PlacementDist::new(preset.placement_mu, preset.placement_sigma);
        for _ in 0..count {
            let mut rng = substream(seed, stream);
            let mut spectrum = generate_spectrum(&preset, &dist, &mut rng);
            if difficulty == Difficulty::Easy && spectrum.annotation.count() == 0 {
                if zero_peaks_seen < MIXED_ZERO_PEAK_CAP {
                    zero_peaks_seen += 1;
                } else {
                    while spectrum.annotation.count() == 0 {
                        spectrum = generate_spectrum(&preset, &dist, &mut rng);
                    }
                }
            }
            spectrum.seed = stream;
            spectra.push(spectrum);
            stream += 1;
        }
    }
    Dataset {
        master_seed: seed,
        spectra,
    }
}

/// Builds the 1000-spectrum hard dataset. Deterministic in `seed`.
pub fn build_hard_dataset(seed: u64) -> Dataset {
    let preset = DifficultyPreset::hard();
    let dist = PlacementDist::new(preset.placement_mu, preset.placement_sigma);
    let spectra = (0..HARD_DATASET_LEN as u64)
        .map(|stream| {
            let mut rng = substream(seed, stream);
            let mut spectrum = generate_spectrum(&preset, &dist, &mut rng);
            spectrum.seed = stream;
            spectrum
        })
        .collect();
    Dataset {
        master_seed: seed,
        spectra,
    }
}

/// JSON Lines record: one spectrum per line.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SpectrumRecord {
    points: Vec<f64>,
    mask: [u8; MAX_PEAKS],
    positions: [f64; MAX_PEAKS],
    difficulty: Difficulty,
    seed: u64,
}

/// Writes a dataset as JSON Lines.
pub fn save_jsonl(dataset: &Dataset, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    for s in &dataset.spectra {
        let record = SpectrumRecord {
            points: s.points.clone(),
            mask: s.annotation.mask,
            positions: s.annotation.positions,
            difficulty: s.difficulty,
            seed: s.seed,
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads spectra back from JSON Lines. `master_seed` is not stored in the
/// records; pass the seed recorded in the split sidecar (or 0 when only the
/// spectra matter).
pub fn load_jsonl(path: &Path, master_seed: u64) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut spectra = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: SpectrumRecord = serde_json::from_str(&line)?;
        if record.points.len() != SPECTRUM_LEN {
            return Err(Error::invalid(format!(
                "record has {} points, want {SPECTRUM_LEN}",
                record.points.len()
            )));
        }
        let annotation = TargetLabel::new(record.mask, record.positions)?;
        spectra.push(Spectrum {
            points: record.points,
            annotation,
            difficulty: record.difficulty,
            seed: record.seed,
        });
    }
    Ok(Dataset {
        master_seed,
        spectra,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn presets_match_published_parameters() {
        let easy = DifficultyPreset::easy();
        assert_eq!(easy.peak_count_range, (0, 2));
        assert_eq!(easy.linewidth_range, (0.02, 0.1));
        assert_eq!(easy.intensity_range, (500.0, 1000.0));
        assert_eq!(easy.noise_magnitude, 1.0);
        assert_eq!((easy.placement_mu, easy.placement_sigma), (1.0, 0.96));

        let medium = DifficultyPreset::medium();
        assert_eq!(medium.peak_count_range, (3, 5));
        assert_eq!(medium.linewidth_range, (0.025, 0.12));
        assert_eq!(medium.intensity_range, (500.0, 1000.0));
        assert_eq!(medium.noise_magnitude, 2.0);
        assert_eq!((medium.placement_mu, medium.placement_sigma), (1.0, 0.96));

        let hard = DifficultyPreset::hard();
        assert_eq!(hard.peak_count_range, (3, 5));
        assert_eq!(hard.linewidth_range, (0.1, 0.22));
        assert_eq!(hard.intensity_range, (100.0, 500.0));
        assert_eq!(hard.noise_magnitude, 14.0);
        assert_eq!((hard.placement_mu, hard.placement_sigma), (0.85, 1.5));

        for p in [easy, medium, hard] {
            p.validate().unwrap();
        }
    }

    #[test]
    fn noiseless_single_peak_has_argmax_at_center() {
        let preset = DifficultyPreset {
            difficulty: Difficulty::Easy,
            peak_count_range: (1, 1),
            noise_magnitude: 0.0,
            ..DifficultyPreset::easy()
        };
        let dist = PlacementDist::new(preset.placement_mu, preset.placement_sigma);
        for substream_id in 0..20u64 {
            let mut rng = substream(40, substream_id);
            let s = generate_spectrum(&preset, &dist, &mut rng);
            assert_eq!(s.annotation.count(), 1);
            let center = s.annotation.positions[0];
            let argmax = s
                .points
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0;
            let nearest = (center * (SPECTRUM_LEN - 1) as f64).round() as usize;
            assert!(
                argmax.abs_diff(nearest) <= 1,
                "argmax {argmax} vs nearest grid point {nearest}"
            );
        }
    }

    #[test]
    fn lorentzian_half_width_definition() {
        // At ν = ν₀ ± Γ/2 the lineshape evaluates to A/2.
        let (a, c, w) = (750.0, 0.43, 0.08);
        assert_abs_diff_eq!(lorentzian(c + w / 2.0, a, c, w), a / 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(lorentzian(c - w / 2.0, a, c, w), a / 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(lorentzian(c, a, c, w), a, epsilon = 1e-12);
    }

    #[test]
    fn noiseless_peak_value_close_to_amplitude() {
        // On the grid point nearest the center, the pre-normalization value
        // is within 1% of A for easy linewidths (grid offset only).
        let preset = DifficultyPreset {
            difficulty: Difficulty::Easy,
            peak_count_range: (1, 1),
            noise_magnitude: 0.0,
            ..DifficultyPreset::easy()
        };
        let dist = PlacementDist::new(preset.placement_mu, preset.placement_sigma);
        let mut rng = substream(41, 3);
        let (lo, hi) = preset.peak_count_range;
        let n = rng.random_range(lo..=hi);
        assert_eq!(n, 1);
        let within = dist.sample(&mut rng);
        let center = within; // single section spans [0, 1]
        let width = rng.random_range(preset.linewidth_range.0..preset.linewidth_range.1);
        let amplitude = rng.random_range(preset.intensity_range.0..preset.intensity_range.1);
        let nearest = (center * (SPECTRUM_LEN - 1) as f64).round() as usize;
        let nu = nearest as f64 / (SPECTRUM_LEN - 1) as f64;
        let value = lorentzian(nu, amplitude, center, width);
        assert!((value - amplitude).abs() / amplitude < 0.01);
    }

    #[test]
    fn hard_preset_draws_three_to_five_peaks() {
        let preset = DifficultyPreset::hard();
        let dist = PlacementDist::new(preset.placement_mu, preset.placement_sigma);
        for i in 0..100u64 {
            let mut rng = substream(42, i);
            let s = generate_spectrum(&preset, &dist, &mut rng);
            assert!((3..=5).contains(&s.annotation.count()));
        }
    }

    #[test]
    fn spectra_satisfy_type_invariants() {
        for difficulty in [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard] {
            let preset = DifficultyPreset::for_difficulty(difficulty);
            let dist = PlacementDist::new(preset.placement_mu, preset.placement_sigma);
            for i in 0..50u64 {
                let mut rng = substream(43, i);
                let s = generate_spectrum(&preset, &dist, &mut rng);
                assert_eq!(s.points.len(), SPECTRUM_LEN);
                assert!(s.points.iter().all(|y| (0.0..=1.0).contains(y)));
                s.annotation.validate().unwrap();
                // Stored positions sorted ascending in the leading slots.
                let c = s.annotation.count();
                for w in s.annotation.positions[..c].windows(2) {
                    assert!(w[0] <= w[1]);
                }
            }
        }
    }

    #[test]
    fn mixed_dataset_composition_and_zero_cap() {
        let dataset = build_mixed_dataset(7);
        assert_eq!(dataset.spectra.len(), 1150);
        let count_by = |d: Difficulty| dataset.spectra.iter().filter(|s| s.difficulty == d).count();
        assert_eq!(count_by(Difficulty::Hard), 550);
        assert_eq!(count_by(Difficulty::Medium), 350);
        assert_eq!(count_by(Difficulty::Easy), 250);
        let zero_peaks = dataset
            .spectra
            .iter()
            .filter(|s| s.annotation.count() == 0)
            .count();
        assert_eq!(zero_peaks, 50);
        // Only easy spectra can be peakless.
        assert!(dataset
            .spectra
            .iter()
            .filter(|s| s.annotation.count() == 0)
            .all(|s| s.difficulty == Difficulty::Easy));
    }

    #[test]
    fn mixed_dataset_deterministic() {
        let a = build_mixed_dataset(9);
        let b = build_mixed_dataset(9);
        assert_eq!(a, b);
        let c = build_mixed_dataset(10);
        assert_ne!(a, c);
    }

    #[test]
    fn hard_dataset_counts() {
        let dataset = build_hard_dataset(7);
        assert_eq!(dataset.spectra.len(), 1000);
        assert!(dataset
            .spectra
            .iter()
            .all(|s| s.difficulty == Difficulty::Hard));
        assert!(dataset
            .spectra
            .iter()
            .all(|s| (3..=5).contains(&s.annotation.count())));
    }

    #[test]
    fn jsonl_round_trip() {
        let dataset = build_hard_dataset(3);
        let small = Dataset {
            master_seed: dataset.master_seed,
            spectra: dataset.spectra[..25].to_vec(),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("spectra.jsonl");
        save_jsonl(&small, &path).unwrap();
        let loaded = load_jsonl(&path, small.master_seed).unwrap();
        assert_eq!(loaded, small);

        // Byte-identical on rewrite.
        let bytes_a = std::fs::read(&path).unwrap();
        save_jsonl(&loaded, &path).unwrap();
        let bytes_b = std::fs::read(&path).unwrap();
        assert_eq!(bytes_a, bytes_b);
    }
}

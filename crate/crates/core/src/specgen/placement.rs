//! Peak placement distribution within a section.
//!
//! Positions are drawn from a symmetric double log-normal density on [0, 1]:
//! `P(x) ∝ F(5x) + F(5 − 5x)` with `F` the log-normal pdf. Small σ
//! concentrates mass toward the section center (few overlaps); large σ
//! pushes it toward the edges so neighboring peaks can crowd together. The
//! scale factor 5 sets how deep into the section each lobe reaches.

use rand::Rng;

use crate::rng::Prng;

/// Log-normal probability density, zero outside its (0, ∞) support.
pub fn lognormal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let z = (x.ln() - mu) / sigma;
    (-0.5 * z * z).exp() / (x * sigma * (2.0 * std::f64::consts::PI).sqrt())
}

fn unnormalized(x: f64, mu: f64, sigma: f64) -> f64 {
    lognormal_pdf(5.0 * x, mu, sigma) + lognormal_pdf(5.0 - 5.0 * x, mu, sigma)
}

/// Composite Simpson quadrature over [a, b] with `n` (even) intervals.
pub(crate) fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    debug_assert!(n >= 2 && n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Number of table intervals used by the inverse-CDF sampler.
const TABLE_LEN: usize = 4096;

/// Normalized placement density with a precomputed cumulative table for
/// inverse-CDF sampling.
#[derive(Debug, Clone)]
pub struct PlacementDist {
    mu: f64,
    sigma: f64,
    norm: f64,
    /// CDF at knots k/TABLE_LEN, k = 0..=TABLE_LEN; cdf[0] = 0, cdf[end] = 1.
    cdf: Vec<f64>,
}

impl PlacementDist {
    pub fn new(mu: f64, sigma: f64) -> Self {
        let norm = simpson(|x| unnormalized(x, mu, sigma), 0.0, 1.0, 2 * TABLE_LEN);
        let mut cdf = Vec::with_capacity(TABLE_LEN + 1);
        cdf.push(0.0);
        let h = 1.0 / TABLE_LEN as f64;
        let mut acc = 0.0;
        let mut prev = unnormalized(0.0, mu, sigma);
        for k in 1..=TABLE_LEN {
            let next = unnormalized(k as f64 * h, mu, sigma);
            acc += 0.5 * (prev + next) * h;
            cdf.push(acc);
            prev = next;
        }
        // Rescale so the table ends at exactly 1; the trapezoid sum differs
        // from the Simpson norm by O(h²).
        let end = cdf[TABLE_LEN];
        for c in &mut cdf {
            *c /= end;
        }
        PlacementDist {
            mu,
            sigma,
            norm,
            cdf,
        }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Normalized density at `x` in [0, 1].
    pub fn pdf(&self, x: f64) -> f64 {
        unnormalized(x, self.mu, self.sigma) / self.norm
    }

    /// Draws a position in [0, 1] by inverse-CDF lookup with linear
    /// interpolation between table knots.
    pub fn sample(&self, rng: &mut Prng) -> f64 {
        let u: f64 = rng.random();
        // First knot with cdf >= u; u < 1 guarantees idx <= TABLE_LEN.
        let hi = self.cdf.partition_point(|&c| c < u).max(1);
        let lo = hi - 1;
        let span = self.cdf[hi] - self.cdf[lo];
        let frac = if span > 0.0 {
            (u - self.cdf[lo]) / span
        } else {
            0.0
        };
        (lo as f64 + frac) / TABLE_LEN as f64
    }
}

/// Density `P(x) = (F(5x) + F(5 − 5x)) / ∫₀¹ (F(5t) + F(5 − 5t)) dt`
/// without building a sampler table.
pub fn placement_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let norm = simpson(|t| unnormalized(t, mu, sigma), 0.0, 1.0, 2 * TABLE_LEN);
    unnormalized(x, mu, sigma) / norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use approx::assert_abs_diff_eq;

    #[test]
    fn lognormal_mode_value_and_support() {
        // At x = e^μ the exponent vanishes: F = 1/(e^μ σ √(2π)).
        for (mu, sigma) in [(1.0f64, 0.96), (0.85, 1.5), (0.0, 0.3)] {
            let x = mu.exp();
            let expected = 1.0 / (x * sigma * (2.0 * std::f64::consts::PI).sqrt());
            assert_abs_diff_eq!(lognormal_pdf(x, mu, sigma), expected, epsilon = 1e-12);
        }
        assert_eq!(lognormal_pdf(0.0, 1.0, 1.0), 0.0);
        assert_eq!(lognormal_pdf(-3.0, 1.0, 1.0), 0.0);
    }

    #[test]
    fn lognormal_integrates_to_one() {
        // ∫₀^∞ F(x) dx via the substitution u = ln x, which turns the
        // heavy-tailed integrand into a rapidly decaying one the quadrature
        // can exhaust: ∫ F(e^u)·e^u du over u ∈ μ ± 12σ.
        for (mu, sigma) in [(1.0, 0.96), (0.85, 1.5)] {
            let integral = simpson(
                |u: f64| lognormal_pdf(u.exp(), mu, sigma) * u.exp(),
                mu - 12.0 * sigma,
                mu + 12.0 * sigma,
                100_000,
            );
            assert_abs_diff_eq!(integral, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn lognormal_decays_beyond_mode() {
        let mode = (1.0f64 - 0.96f64 * 0.96).exp(); // argmax of the pdf
        let mut prev = lognormal_pdf(mode, 1.0, 0.96);
        for k in 1..50 {
            let x = mode + k as f64 * 0.5;
            let next = lognormal_pdf(x, 1.0, 0.96);
            assert!(next < prev);
            prev = next;
        }
    }

    #[test]
    fn placement_is_symmetric() {
        for (mu, sigma) in [(1.0, 0.96), (0.85, 1.5)] {
            let dist = PlacementDist::new(mu, sigma);
            for x in [0.0, 0.03, 0.17, 0.25, 0.4, 0.5] {
                assert!((dist.pdf(x) - dist.pdf(1.0 - x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn placement_integrates_to_one() {
        for (mu, sigma) in [(1.0, 0.96), (0.85, 1.5)] {
            let dist = PlacementDist::new(mu, sigma);
            let integral = simpson(|x| dist.pdf(x), 0.0, 1.0, 200_000);
            assert_abs_diff_eq!(integral, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn hard_parameters_concentrate_toward_edges() {
        let dist = PlacementDist::new(0.85, 1.5);
        assert!(dist.pdf(0.05) > dist.pdf(0.5));
    }

    #[test]
    fn easy_parameters_concentrate_toward_center() {
        let dist = PlacementDist::new(1.0, 0.96);
        assert!(dist.pdf(0.5) > dist.pdf(0.02));
    }

    #[test]
    fn samples_stay_in_unit_interval_and_reproduce() {
        let dist = PlacementDist::new(0.85, 1.5);
        let a: Vec<f64> = {
            let mut rng = seeded(5);
            (0..1000).map(|_| dist.sample(&mut rng)).collect()
        };
        assert!(a.iter().all(|x| (0.0..=1.0).contains(x)));
        let b: Vec<f64> = {
            let mut rng = seeded(5);
            (0..1000).map(|_| dist.sample(&mut rng)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn sampler_matches_analytic_cdf() {
        // Kolmogorov–Smirnov distance between the empirical CDF of 1e5
        // samples and a quadrature CDF of the density.
        let dist = PlacementDist::new(1.0, 0.96);
        let n = 100_000;
        let mut rng = seeded(12);
        let mut samples: Vec<f64> = (0..n).map(|_| dist.sample(&mut rng)).collect();
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());

        // Quadrature CDF on a fine grid, then linear interpolation.
        let grid = 20_000usize;
        let h = 1.0 / grid as f64;
        let mut cdf = vec![0.0; grid + 1];
        for k in 1..=grid {
            cdf[k] = cdf[k - 1] + simpson(|x| dist.pdf(x), (k - 1) as f64 * h, k as f64 * h, 8);
        }
        let scale = cdf[grid];
        let analytic = |x: f64| {
            let pos = (x / h).min(grid as f64);
            let k = pos.floor() as usize;
            let frac = pos - k as f64;
            let lo = cdf[k];
            let hi = cdf[(k + 1).min(grid)];
            (lo + frac * (hi - lo)) / scale
        };

        let mut ks: f64 = 0.0;
        for (i, &x) in samples.iter().enumerate() {
            let f = analytic(x);
            let above = (i + 1) as f64 / n as f64 - f;
            let below = f - i as f64 / n as f64;
            ks = ks.max(above).max(below);
        }
        assert!(ks < 0.01, "KS statistic {ks}");
    }
}

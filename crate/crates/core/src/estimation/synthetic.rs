//! Seeded synthetic data for exercising the fits.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use super::{decay_model_counts, DataSeries};
use crate::error::{invalid, Result};
use crate::spectroscopy::reabsorbed_unchecked;

/// Binning of a coincidence histogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramLayout {
    /// Left edge of the first bin (s).
    pub start: f64,
    pub bin_width: f64,
    pub n_bins: usize,
}

impl HistogramLayout {
    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_bins)
            .map(|i| self.start + (i as f64 + 0.5) * self.bin_width)
            .collect()
    }
}

/// Coincidence histogram of an exponential decay holding `total_counts`
/// expected counts over the whole decay. Bins are Poisson sampled when a
/// seed is given and hold the exact expectation otherwise.
pub fn decay_histogram(
    layout: &HistogramLayout,
    gamma_p: f64,
    t0: f64,
    total_counts: f64,
    seed: Option<u64>,
) -> Result<DataSeries> {
    if !(gamma_p > 0.0 && layout.bin_width > 0.0 && total_counts > 0.0) || layout.n_bins < 4 {
        return Err(invalid("histogram needs positive rate, bin width, counts and at least four bins"));
    }
    let centers = layout.centers();
    // total_counts = ∫ A/w e^{−Γ(t−t0)} dt = A/(wΓ)
    let amplitude = total_counts * layout.bin_width * gamma_p;
    let expected = decay_model_counts(&centers, layout.bin_width, gamma_p, t0, amplitude);
    let counts = match seed {
        None => expected,
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            expected
                .iter()
                .map(|&m| {
                    if m > 0.0 {
                        Poisson::new(m).expect("positive mean").sample(&mut rng)
                    } else {
                        0.0
                    }
                })
                .collect()
        }
    };
    DataSeries::new(centers, counts, None)
}

/// FP scan of the reabsorbed Lorentzian with multiplicative Gaussian noise of
/// relative size `rel_noise` (none when `seed` is `None`).
pub fn reabsorption_scan(
    detunings: &[f64],
    od: f64,
    gamma_p: f64,
    gamma_a: f64,
    scale: f64,
    rel_noise: f64,
    seed: Option<u64>,
) -> Result<DataSeries> {
    if !(od >= 0.0 && gamma_p > 0.0 && gamma_a > 0.0 && scale > 0.0 && rel_noise >= 0.0) {
        return Err(invalid("invalid reabsorption scan parameters"));
    }
    let clean: Vec<f64> = detunings
        .iter()
        .map(|w| reabsorbed_unchecked(*w, od, gamma_p, gamma_a, scale))
        .collect();
    let y = match seed {
        None => clean,
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let normal = Normal::new(0.0, rel_noise).map_err(|e| invalid(e.to_string()))?;
            clean
                .iter()
                .map(|v| (v * (1.0 + normal.sample(&mut rng))).max(0.0))
                .collect()
        }
    };
    DataSeries::new(detunings.to_vec(), y, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expected_histogram_holds_total() {
        let layout = HistogramLayout { start: -5.0, bin_width: 0.25, n_bins: 400 };
        let h = decay_histogram(&layout, 0.5, 0.1, 1000.0, None).unwrap();
        let sum: f64 = h.y.iter().sum();
        // the tail beyond the last bin is e^{-0.5·94.9}
        assert!((sum - 1000.0).abs() < 1e-9);
        assert!(h.y.iter().take(20).all(|v| *v == 0.0));
    }

    #[test]
    fn seeded_is_reproducible() {
        let layout = HistogramLayout { start: 0.0, bin_width: 1.0, n_bins: 50 };
        let a = decay_histogram(&layout, 0.2, 0.0, 1e4, Some(7)).unwrap();
        let b = decay_histogram(&layout, 0.2, 0.0, 1e4, Some(7)).unwrap();
        let c = decay_histogram(&layout, 0.2, 0.0, 1e4, Some(8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.y.iter().all(|v| v.fract() == 0.0));
    }
}

//! Bandwidth and compression figures of merit.
//!
//! Power spectra are treated as piecewise-constant densities: sample `k`
//! covers `[ω_k − Δω/2, ω_k + Δω/2]`. The cumulative energy is then
//! piecewise linear in ω, which is what the B50 window edges interpolate.

use crate::error::{invalid, Result};
use crate::sampling::AxisPair;
use crate::wavepacket::SpectralWavepacket;

/// Local maxima above this fraction of the global peak, lying outside the
/// main half-maximum lobe, make a FWHM ambiguous.
pub const SECONDARY_PEAK_FRACTION: f64 = 0.01;

/// Smallest contiguous window holding half of the total energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthReport {
    pub b50: f64,
    pub window_lo: f64,
    pub window_hi: f64,
    /// `None` when the spectrum has significant secondary maxima.
    pub fwhm: Option<f64>,
    pub peak_density: f64,
    pub total_energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FwhmReport {
    pub width: f64,
    pub lo: f64,
    pub hi: f64,
    pub ambiguous: bool,
}

/// Before/after comparison of two spectra on the same grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressionReport {
    pub before: BandwidthReport,
    pub after: BandwidthReport,
    /// `b50_before / b50_after`.
    pub b50_ratio: f64,
    /// `peak_after / peak_before`.
    pub peak_ratio: f64,
}

pub fn power_spectrum(spectrum: &SpectralWavepacket) -> Vec<f64> {
    spectrum.intensity()
}

/// B50 bandwidth of a sampled power spectrum on the frequency axis of `axes`.
pub fn bandwidth_b50(spectrum: &[f64], axes: &AxisPair) -> Result<BandwidthReport> {
    if spectrum.len() != axes.n_samples() {
        return Err(invalid(format!(
            "spectrum has {} samples, grid has {}",
            spectrum.len(),
            axes.n_samples()
        )));
    }
    let window = smallest_half_energy_window(spectrum, axes.frequency_min(), axes.frequency_step())?;
    let fwhm = fwhm(spectrum, axes).ok().filter(|f| !f.ambiguous).map(|f| f.width);
    Ok(BandwidthReport {
        b50: window.hi - window.lo,
        window_lo: window.lo,
        window_hi: window.hi,
        fwhm,
        peak_density: spectrum.iter().copied().fold(0.0, f64::max),
        total_energy: window.total,
    })
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Window {
    pub lo: f64,
    pub hi: f64,
    pub total: f64,
}

/// Two-pointer sweep over the cumulative energy.
///
/// The width of a half-energy window is piecewise linear in its left edge,
/// with breakpoints where either edge crosses a bin boundary. The minimum is
/// therefore attained with one edge on a boundary, and both families are
/// swept in a single pass each.
pub(crate) fn smallest_half_energy_window(
    density: &[f64],
    first_center: f64,
    step: f64,
) -> Result<Window> {
    if density.is_empty() {
        return Err(invalid("empty spectrum"));
    }
    if density.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(invalid("spectrum must be finite and non-negative"));
    }
    let n = density.len();
    let mut cumulative = Vec::with_capacity(n + 1);
    cumulative.push(0.0);
    let mut acc = 0.0;
    for p in density {
        acc += p * step;
        cumulative.push(acc);
    }
    let total = acc;
    if !(total > 0.0) {
        return Err(invalid("spectrum has zero total energy"));
    }
    let half = 0.5 * total;
    let edge = |i: usize| first_center - 0.5 * step + i as f64 * step;

    let mut best: Option<(f64, f64)> = None;
    let mut consider = |lo: f64, hi: f64| {
        let width = hi - lo;
        best = match best {
            None => Some((lo, hi)),
            Some((blo, bhi)) => {
                let bw = bhi - blo;
                let tol = 1e-12 * bw.abs().max(step);
                if width < bw - tol || ((width - bw).abs() <= tol && lo < blo) {
                    Some((lo, hi))
                } else {
                    Some((blo, bhi))
                }
            }
        }
    };

    // left edge on a boundary
    let mut j = 1;
    for i in 0..n {
        let target = cumulative[i] + half;
        if target > total {
            break;
        }
        j = j.max(i + 1);
        while j < n && cumulative[j] < target {
            j += 1;
        }
        let dens = density[j - 1] * step;
        let frac = if dens > 0.0 {
            ((target - cumulative[j - 1]) / dens).clamp(0.0, 1.0)
        } else {
            1.0
        };
        consider(edge(i), edge(j - 1) + frac * step);
    }

    // right edge on a boundary
    let mut i = 0;
    for j in 1..=n {
        let target = cumulative[j] - half;
        if target < 0.0 {
            continue;
        }
        while i + 1 < j && cumulative[i + 1] <= target {
            i += 1;
        }
        let dens = density[i] * step;
        let frac = if dens > 0.0 {
            ((target - cumulative[i]) / dens).clamp(0.0, 1.0)
        } else {
            0.0
        };
        consider(edge(i) + frac * step, edge(j));
    }

    let (lo, hi) = best.expect("a half-energy window always exists for positive total");
    Ok(Window { lo, hi, total })
}

/// Full width at half of the global maximum, linearly interpolated.
pub fn fwhm(samples: &[f64], axes: &AxisPair) -> Result<FwhmReport> {
    if samples.len() != axes.n_samples() {
        return Err(invalid("sample count does not match grid"));
    }
    fwhm_on(samples, axes.frequency_min(), axes.frequency_step())
}

/// FWHM of samples on a uniform axis starting at `origin` with spacing `step`.
pub fn fwhm_on(samples: &[f64], origin: f64, step: f64) -> Result<FwhmReport> {
    if samples.len() < 3 {
        return Err(invalid("need at least three samples for a width"));
    }
    let (peak_idx, peak) = samples
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty");
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    if !(peak > min) || !peak.is_finite() {
        return Err(invalid("flat or non-finite profile has no half maximum"));
    }
    let half = 0.5 * peak;
    let x = |i: usize| origin + i as f64 * step;

    let mut r = peak_idx;
    while r + 1 < samples.len() && samples[r + 1] >= half {
        r += 1;
    }
    let hi = if r + 1 < samples.len() {
        let (a, b) = (samples[r], samples[r + 1]);
        x(r) + (a - half) / (a - b) * step
    } else {
        x(r)
    };
    let mut l = peak_idx;
    while l > 0 && samples[l - 1] >= half {
        l -= 1;
    }
    let lo = if l > 0 {
        let (a, b) = (samples[l], samples[l - 1]);
        x(l) - (a - half) / (a - b) * step
    } else {
        x(l)
    };

    let floor = SECONDARY_PEAK_FRACTION * peak;
    let ambiguous = (1..samples.len() - 1)
        .filter(|&k| k < l || k > r)
        .any(|k| samples[k] >= floor && samples[k] > samples[k - 1] && samples[k] >= samples[k + 1]);

    Ok(FwhmReport { width: hi - lo, lo, hi, ambiguous })
}

/// Bandwidth and peak-density ratios between two spectra.
pub fn compression_report(
    before: &SpectralWavepacket,
    after: &SpectralWavepacket,
) -> Result<CompressionReport> {
    before.axes().ensure_same(after.axes())?;
    let axes = before.axes();
    let b = bandwidth_b50(&power_spectrum(before), axes)?;
    let a = bandwidth_b50(&power_spectrum(after), axes)?;
    Ok(CompressionReport {
        before: b,
        after: a,
        b50_ratio: b.b50 / a.b50,
        peak_ratio: a.peak_density / b.peak_density,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::make_axis_pair;
    use std::f64::consts::PI;

    fn lorentzian(axes: &AxisPair, fwhm: f64) -> Vec<f64> {
        let g = 0.5 * fwhm;
        axes.frequencies().iter().map(|w| g / PI / (w * w + g * g)).collect()
    }

    #[test]
    fn lorentzian_b50_equals_fwhm() {
        let axes = make_axis_pair(1 << 16, 120.0, -12.0).unwrap();
        let report = bandwidth_b50(&lorentzian(&axes, 1.0), &axes).unwrap();
        let step = axes.frequency_step();
        assert!((report.b50 - 1.0).abs() < step);
        assert!((report.window_lo + 0.5).abs() < step);
        assert!((report.fwhm.unwrap() - 1.0).abs() < step);
        assert!((report.peak_density - 2.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn window_holds_half_the_energy() {
        let axes = make_axis_pair(256, 25.6, 0.0).unwrap();
        let spec: Vec<f64> = (0..256).map(|k| ((k as f64) * 0.37).sin().abs() + 0.01).collect();
        let r = bandwidth_b50(&spec, &axes).unwrap();
        // integrate the piecewise-constant density across the window
        let step = axes.frequency_step();
        let inside: f64 = (0..256)
            .map(|k| {
                let (a, b) = (axes.frequency(k) - 0.5 * step, axes.frequency(k) + 0.5 * step);
                let overlap = (b.min(r.window_hi) - a.max(r.window_lo)).max(0.0);
                spec[k] * overlap
            })
            .sum();
        assert!((inside - 0.5 * r.total_energy).abs() < 1e-12 * r.total_energy);
        assert!((r.window_hi - r.window_lo - r.b50).abs() < 1e-15);
    }

    #[test]
    fn identical_boxes_pick_leftmost() {
        // powers of two keep the cumulative sums exact
        let axes = make_axis_pair(64, 2.0 * PI, 0.0).unwrap();
        assert_eq!(axes.frequency_step(), 1.0);
        let mut spec = vec![0.0; 64];
        for k in 10..14 {
            spec[k] = 1.0;
        }
        for k in 40..44 {
            spec[k] = 1.0;
        }
        let r = bandwidth_b50(&spec, &axes).unwrap();
        assert_eq!(r.b50, 4.0);
        assert_eq!(r.window_lo, axes.frequency(10) - 0.5);
    }

    #[test]
    fn scale_invariant() {
        let axes = make_axis_pair(512, 51.2, 0.0).unwrap();
        let spec = lorentzian(&axes, 0.8);
        let a = bandwidth_b50(&spec, &axes).unwrap();
        let scaled: Vec<f64> = spec.iter().map(|p| p * 37.5).collect();
        let b = bandwidth_b50(&scaled, &axes).unwrap();
        assert!((a.b50 - b.b50).abs() < 1e-12 * a.b50);
    }

    #[test]
    fn rejects_bad_input() {
        let axes = make_axis_pair(16, 16.0, 0.0).unwrap();
        assert!(bandwidth_b50(&[0.0; 16], &axes).is_err());
        assert!(bandwidth_b50(&[1.0; 8], &axes).is_err());
        let mut neg = [1.0; 16];
        neg[3] = -1.0;
        assert!(bandwidth_b50(&neg, &axes).is_err());
        assert!(fwhm(&[2.0; 16], &axes).is_err());
    }

    #[test]
    fn gaussian_fwhm() {
        let axes = make_axis_pair(4096, 409.6, 0.0).unwrap();
        let sigma = 0.9;
        let s: Vec<f64> = axes.frequencies().iter().map(|w| (-w * w / (2.0 * sigma * sigma)).exp()).collect();
        let r = fwhm(&s, &axes).unwrap();
        let expected = 2.0 * (2.0 * 2f64.ln()).sqrt() * sigma;
        assert!((r.width - expected).abs() < 1e-3 * expected);
        assert!(!r.ambiguous);
    }

    #[test]
    fn side_lobes_flag_ambiguity() {
        let axes = make_axis_pair(1024, 102.4, 0.0).unwrap();
        let s: Vec<f64> = axes
            .frequencies()
            .iter()
            .map(|w| (-w * w).exp() + 0.05 * (-(w - 4.0) * (w - 4.0) * 4.0).exp())
            .collect();
        assert!(fwhm(&s, &axes).unwrap().ambiguous);
        assert!(bandwidth_b50(&s, &axes).unwrap().fwhm.is_none());
    }
}

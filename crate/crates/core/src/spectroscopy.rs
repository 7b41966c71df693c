//! Fabry-Pérot scanning spectroscopy and the source reabsorption lineshape.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::metrics::{fwhm_on, FwhmReport};
use crate::units::mhz_to_rad_per_s;
use crate::wavepacket::SpectralWavepacket;

/// Default atomic linewidth Γa used by the reabsorption model, 6.06 MHz.
pub fn default_gamma_a() -> f64 {
    mhz_to_rad_per_s(6.06)
}

/// Scanning-cavity linewidth (FWHM of its transmission line) in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FPParams {
    pub gamma_fp: f64,
}

impl FPParams {
    pub fn new(gamma_fp: f64) -> Result<Self> {
        if !(gamma_fp > 0.0 && gamma_fp.is_finite()) {
            return Err(invalid(format!("gamma_fp must be positive, got {gamma_fp}")));
        }
        Ok(Self { gamma_fp })
    }
}

/// Transmitted energy per scan detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub detunings: Vec<f64>,
    pub rates: Vec<f64>,
}

impl ScanResult {
    pub fn peak(&self) -> f64 {
        self.rates.iter().copied().fold(0.0, f64::max)
    }

    /// Rates divided by the peak of `reference`.
    pub fn relative_to(&self, reference: &ScanResult) -> ScanResult {
        let norm = reference.peak();
        ScanResult {
            detunings: self.detunings.clone(),
            rates: self.rates.iter().map(|r| r / norm).collect(),
        }
    }

    /// FWHM of the scanned profile. Requires uniformly spaced detunings.
    pub fn fwhm(&self) -> Result<FwhmReport> {
        let step = uniform_step(&self.detunings)?;
        fwhm_on(&self.rates, self.detunings[0], step)
    }
}

fn uniform_step(xs: &[f64]) -> Result<f64> {
    if xs.len() < 3 {
        return Err(invalid("need at least three detunings"));
    }
    let step = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    let uniform = xs
        .windows(2)
        .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step.abs());
    if !(step > 0.0) || !uniform {
        return Err(invalid("detunings must be increasing and uniformly spaced"));
    }
    Ok(step)
}

/// Lorentzian transmission `(Γ/2)² / (ω² + (Γ/2)²)` with unit peak.
pub fn fp_transmission_profile(omega: f64, fp: &FPParams) -> f64 {
    let h = 0.5 * fp.gamma_fp;
    h * h / (omega * omega + h * h)
}

/// `n` detunings spread evenly over `[-half_span, half_span]`.
pub fn symmetric_detunings(half_span: f64, n: usize) -> Result<Vec<f64>> {
    if !(half_span > 0.0 && half_span.is_finite()) || n < 2 {
        return Err(invalid("detuning list must have positive width and at least two points"));
    }
    let step = 2.0 * half_span / (n - 1) as f64;
    Ok((0..n).map(|i| -half_span + i as f64 * step).collect())
}

/// Transmitted rate `Σ |Ψ(ω)|² L(ω − ω_d) Δω` for each scan detuning `ω_d`.
pub fn scan(spectrum: &SpectralWavepacket, fp: &FPParams, detunings: &[f64]) -> Result<ScanResult> {
    if detunings.is_empty() {
        return Err(invalid("empty detuning list"));
    }
    let axes = spectrum.axes();
    if let Some(d) = detunings.iter().find(|d| !axes.contains_frequency(**d)) {
        return Err(invalid(format!("scan detuning {d} lies outside the frequency grid")));
    }
    let power = spectrum.intensity();
    let freqs = axes.frequencies();
    let step = axes.frequency_step();
    let rates = detunings
        .par_iter()
        .map(|&d| {
            power
                .iter()
                .zip(&freqs)
                .map(|(p, w)| p * fp_transmission_profile(w - d, fp))
                .sum::<f64>()
                * step
        })
        .collect();
    Ok(ScanResult {
        detunings: detunings.to_vec(),
        rates,
    })
}

/// Lorentzian of FWHM Γp with area `scale`, times the resonant absorption
/// factor `exp(−OD Γa² / (4ω² + Γa²))`.
pub fn reabsorbed_spectrum(
    omega: f64,
    od: f64,
    gamma_p: f64,
    gamma_a: f64,
    scale: f64,
) -> Result<f64> {
    if !(od >= 0.0) {
        return Err(invalid(format!("optical density must be >= 0, got {od}")));
    }
    if !(gamma_p > 0.0 && gamma_a > 0.0) {
        return Err(invalid("linewidths must be positive"));
    }
    Ok(reabsorbed_unchecked(omega, od, gamma_p, gamma_a, scale))
}

#[inline]
pub(crate) fn reabsorbed_unchecked(omega: f64, od: f64, gamma_p: f64, gamma_a: f64, scale: f64) -> f64 {
    let w2 = 4.0 * omega * omega;
    lorentzian_part(omega, gamma_p, scale) * (-od * gamma_a * gamma_a / (w2 + gamma_a * gamma_a)).exp()
}

/// The Lorentzian factor alone, `(A/π)·2Γp/(4ω² + Γp²)`.
pub fn lorentzian_part(omega: f64, gamma_p: f64, scale: f64) -> f64 {
    scale / PI * 2.0 * gamma_p / (4.0 * omega * omega + gamma_p * gamma_p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::make_axis_pair;
    use num_complex::Complex64;

    #[test]
    fn transmission_profile_points() {
        let fp = FPParams::new(2.0).unwrap();
        assert_eq!(fp_transmission_profile(0.0, &fp), 1.0);
        assert!((fp_transmission_profile(1.0, &fp) - 0.5).abs() < 1e-15);
        assert!((fp_transmission_profile(-1.0, &fp) - 0.5).abs() < 1e-15);
        assert!(FPParams::new(0.0).is_err());
    }

    #[test]
    fn transmission_profile_area() {
        // ∫ L dω = π Γ/2; midpoint rule on [-X, X] plus the analytic tail 2·(Γ/2)²/X
        let fp = FPParams::new(1.3).unwrap();
        let x = 2000.0;
        let n = 4_000_000;
        let h = 2.0 * x / n as f64;
        let body: f64 = (0..n).map(|i| fp_transmission_profile(-x + (i as f64 + 0.5) * h, &fp)).sum::<f64>() * h;
        let tail = 2.0 * (0.65f64).powi(2) / x;
        assert!((body + tail - PI * 1.3 / 2.0).abs() < 1e-8);
    }

    fn lorentz_packet(axes: crate::sampling::AxisPair, fwhm: f64) -> SpectralWavepacket {
        // amplitude whose power is a unit-area Lorentzian
        let g = 0.5 * fwhm;
        let samples = axes.frequencies().iter().map(|w| Complex64::new((g / PI / (w * w + g * g)).sqrt(), 0.0)).collect();
        SpectralWavepacket::new(axes, samples).unwrap()
    }

    #[test]
    fn scan_is_symmetric_in_linewidths() {
        let axes = make_axis_pair(1 << 14, 400.0, -40.0).unwrap();
        let d = symmetric_detunings(3.0, 31).unwrap();
        let a = scan(&lorentz_packet(axes, 1.0), &FPParams::new(0.3).unwrap(), &d).unwrap();
        let b = scan(&lorentz_packet(axes, 0.3), &FPParams::new(1.0).unwrap(), &d).unwrap();
        // unit-area spectrum × unit-peak filter vs the swap differ by the ratio of areas
        let ratio = (PI * 0.3 / 2.0) / (PI * 1.0 / 2.0);
        for (x, y) in a.rates.iter().zip(&b.rates) {
            assert!((x - y * ratio).abs() < 2e-3 * x, "{x} {y}");
        }
    }

    #[test]
    fn scan_is_linear_and_bounded() {
        let axes = make_axis_pair(4096, 200.0, -20.0).unwrap();
        let p = lorentz_packet(axes, 1.0);
        let fp = FPParams::new(0.2).unwrap();
        let d = symmetric_detunings(2.0, 21).unwrap();
        let a = scan(&p, &fp, &d).unwrap();
        let b = scan(&p.scaled(Complex64::new(3f64.sqrt(), 0.0)), &fp, &d).unwrap();
        for (x, y) in a.rates.iter().zip(&b.rates) {
            assert!((3.0 * x - y).abs() < 1e-12 * y);
        }
        assert!(a.peak() <= p.energy());
    }

    #[test]
    fn scan_rejects_out_of_band() {
        let axes = make_axis_pair(64, 64.0, 0.0).unwrap();
        let p = lorentz_packet(axes, 1.0);
        let fp = FPParams::new(0.2).unwrap();
        assert!(scan(&p, &fp, &[100.0]).is_err());
        assert!(scan(&p, &fp, &[]).is_err());
        assert!(symmetric_detunings(0.0, 11).is_err());
        assert!(symmetric_detunings(1.0, 1).is_err());
    }

    #[test]
    fn reabsorption_limits() {
        let (gp, ga, a) = (2.0, 0.5, 1.7);
        for w in [-3.0, 0.0, 0.4] {
            let pure = a / PI * 2.0 * gp / (4.0 * w * w + gp * gp);
            assert!((reabsorbed_spectrum(w, 0.0, gp, ga, a).unwrap() - pure).abs() < 1e-15);
            assert!(reabsorbed_spectrum(w, 1.2, gp, ga, a).unwrap() < pure);
        }
        let center = reabsorbed_spectrum(0.0, 1.2, gp, ga, a).unwrap();
        assert!((center - a / PI * 2.0 / gp * (-1.2f64).exp()).abs() < 1e-15);
        let far = 1e4;
        let ratio = reabsorbed_spectrum(far, 1.2, gp, ga, a).unwrap() / lorentzian_part(far, gp, a);
        assert!((ratio - 1.0).abs() < 1e-8);
        assert!(reabsorbed_spectrum(0.0, -0.1, gp, ga, a).is_err());
    }
}

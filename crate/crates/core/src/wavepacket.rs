//! Single-photon complex envelopes on a sampled grid.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::sampling::AxisPair;

/// Spans shorter than this many `1/Γp` truncate a noticeable part of the decay.
pub const MIN_SPAN_FACTOR: f64 = 40.0;

/// Complex temporal envelope ψ(t), in units of s^{-1/2}.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalWavepacket {
    axes: AxisPair,
    samples: Vec<Complex64>,
}

/// Complex spectral amplitude Ψ(ω), in units of (rad/s)^{-1/2}.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralWavepacket {
    axes: AxisPair,
    samples: Vec<Complex64>,
}

macro_rules! packet_common {
    ($ty:ident, $step:ident, $coord:ident) => {
        impl $ty {
            pub fn new(axes: AxisPair, samples: Vec<Complex64>) -> Result<Self> {
                if samples.len() != axes.n_samples() {
                    return Err(invalid(format!(
                        "expected {} samples, got {}",
                        axes.n_samples(),
                        samples.len()
                    )));
                }
                Ok(Self { axes, samples })
            }

            pub fn axes(&self) -> &AxisPair {
                &self.axes
            }

            pub fn samples(&self) -> &[Complex64] {
                &self.samples
            }

            pub fn into_samples(self) -> Vec<Complex64> {
                self.samples
            }

            /// Σ|·|² times the sample spacing.
            pub fn energy(&self) -> f64 {
                total_energy(&self.samples, self.axes.$step())
            }

            /// |·|² per sample.
            pub fn intensity(&self) -> Vec<f64> {
                self.samples.iter().map(|z| z.norm_sqr()).collect()
            }

            pub fn scaled(&self, factor: Complex64) -> Self {
                Self {
                    axes: self.axes,
                    samples: self.samples.iter().map(|z| z * factor).collect(),
                }
            }

            /// Sample coordinate (time or angular frequency) of index `i`.
            pub fn coordinate(&self, i: usize) -> f64 {
                self.axes.$coord(i)
            }
        }
    };
}

packet_common!(TemporalWavepacket, time_step, time);
packet_common!(SpectralWavepacket, frequency_step, frequency);

/// Parameters of the heralded exponential photon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonParams {
    /// Decay constant / Lorentzian FWHM Γp in rad/s.
    pub gamma_p: f64,
    /// Herald time in seconds.
    pub t0: f64,
}

impl PhotonParams {
    pub fn new(gamma_p: f64, t0: f64) -> Result<Self> {
        if !(gamma_p > 0.0 && gamma_p.is_finite()) {
            return Err(invalid(format!("gamma_p must be positive, got {gamma_p}")));
        }
        if !t0.is_finite() {
            return Err(invalid("t0 must be finite"));
        }
        Ok(Self { gamma_p, t0 })
    }
}

/// Heralded photon `√Γp e^{−Γp(t−t0)/2} Θ(t−t0)`, rescaled to unit discrete energy.
pub fn heralded_exponential(params: PhotonParams, axes: AxisPair) -> Result<TemporalWavepacket> {
    let raw = heralded_exponential_unnormalized(params, axes)?;
    let energy = raw.energy();
    Ok(raw.scaled(Complex64::new(energy.sqrt().recip(), 0.0)))
}

/// Exact samples of the heralded envelope without discrete renormalization.
///
/// When `t0` falls on a sample, that sample carries Θ(0) = ½ so the jump is
/// represented by its midpoint. Off-grid heralds simply start at the next
/// sample.
pub fn heralded_exponential_unnormalized(
    params: PhotonParams,
    axes: AxisPair,
) -> Result<TemporalWavepacket> {
    let PhotonParams { gamma_p, t0 } = params;
    if !axes.contains_time(t0) {
        return Err(invalid(format!("herald time {t0} lies outside the time grid")));
    }
    if axes.time_span() * gamma_p < MIN_SPAN_FACTOR {
        log::warn!(
            "time span {:.1}/Γp is below {MIN_SPAN_FACTOR}/Γp; the decay will be truncated",
            axes.time_span() * gamma_p
        );
    }
    let amp = gamma_p.sqrt();
    let jump = axes.exact_index(t0);
    let samples = (0..axes.n_samples())
        .map(|i| {
            let dt = axes.time(i) - t0;
            let value = if Some(i) == jump {
                0.5 * amp
            } else if dt > 0.0 {
                amp * (-0.5 * gamma_p * dt).exp()
            } else {
                0.0
            };
            Complex64::new(value, 0.0)
        })
        .collect();
    TemporalWavepacket::new(axes, samples)
}

/// Analytic spectrum of the heralded photon, `√Γp e^{iωt0} / (√(2π)(Γp/2 − iω))`.
pub fn heralded_spectrum_analytic(omega: f64, params: PhotonParams) -> Complex64 {
    let denom = Complex64::new(0.5 * params.gamma_p, -omega);
    Complex64::from_polar((params.gamma_p / (2.0 * PI)).sqrt(), omega * params.t0) / denom
}

/// Σ|z|²·step.
pub fn total_energy(samples: &[Complex64], step: f64) -> f64 {
    samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * step
}

/// Unwrapped temporal phase of `psi`.
///
/// Samples whose intensity is below `intensity_floor · max|ψ|²` are `None`;
/// each such gap restarts the unwrapping.
pub fn extract_phase(psi: &TemporalWavepacket, intensity_floor: f64) -> Result<Vec<Option<f64>>> {
    if !(intensity_floor >= 0.0) {
        return Err(invalid(format!("intensity floor must be >= 0, got {intensity_floor}")));
    }
    let intensity = psi.intensity();
    let peak = intensity.iter().copied().fold(0.0, f64::max);
    let threshold = intensity_floor * peak;
    let mut out = Vec::with_capacity(intensity.len());
    let mut prev: Option<f64> = None;
    let mut any = false;
    for (z, &i) in psi.samples().iter().zip(&intensity) {
        if i <= threshold || i == 0.0 {
            out.push(None);
            prev = None;
            continue;
        }
        any = true;
        let raw = z.arg();
        let value = match prev {
            None => raw,
            Some(p) => {
                let mut v = raw;
                while v - p > PI {
                    v -= 2.0 * PI;
                }
                while v - p < -PI {
                    v += 2.0 * PI;
                }
                v
            }
        };
        prev = Some(value);
        out.push(Some(value));
    }
    if any {
        Ok(out)
    } else {
        Err(Error::EmptyPhase)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{bandwidth_b50, fwhm, power_spectrum};
    use crate::sampling::{forward_transform, make_axis_pair};

    fn unit_axes() -> AxisPair {
        AxisPair::default_for(1.0, 0.0).unwrap()
    }

    #[test]
    fn heralded_values() {
        let axes = make_axis_pair(4096, 64.0, -8.0).unwrap();
        let p = PhotonParams::new(1.0, 0.0).unwrap();
        let psi = heralded_exponential_unnormalized(p, axes).unwrap();
        let at = |t: f64| psi.samples()[axes.exact_index(t).unwrap()].re;
        // first sample after the herald is ψ(0⁺) ≈ 1
        let after = psi.samples()[axes.exact_index(0.0).unwrap() + 1].re;
        assert!((after - (-0.5 * axes.time_step()).exp()).abs() < 1e-15);
        assert!((at(2.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((at(2.0) - 0.3679).abs() < 1e-4);
        assert_eq!(at(0.0), 0.5);
        assert!(psi.samples()[..axes.exact_index(0.0).unwrap()].iter().all(|z| *z == Complex64::new(0.0, 0.0)));

        let norm = heralded_exponential(p, axes).unwrap();
        assert!((norm.energy() - 1.0).abs() < 1e-12);
        // Δt·(1/4 + Σ_{n≥1} e^{−nΔt}), about 1 − Δt/4
        let dt = axes.time_step();
        let expected = dt * (0.25 + (-dt).exp() / -(-dt).exp_m1());
        assert!((psi.energy() - expected).abs() < 1e-12);
        assert!(psi.energy() < 1.0);
    }

    #[test]
    fn herald_outside_grid_rejected() {
        let axes = make_axis_pair(64, 6.4, 0.0).unwrap();
        let p = PhotonParams::new(1.0, -1.0).unwrap();
        assert!(heralded_exponential(p, axes).is_err());
        assert!(PhotonParams::new(0.0, 0.0).is_err());
    }

    #[test]
    fn herald_shift_moves_envelope_only() {
        let axes = make_axis_pair(4096, 100.0, -10.0).unwrap();
        let a = heralded_exponential(PhotonParams::new(1.0, 0.0).unwrap(), axes).unwrap();
        let shift = 5.0;
        let b = heralded_exponential(PhotonParams::new(1.0, shift).unwrap(), axes).unwrap();
        let offset = (shift / axes.time_step()).round() as usize;
        for i in 0..3000 {
            assert!((a.samples()[i] - b.samples()[i + offset]).norm() < 1e-12);
        }
        let sa = forward_transform(&a).unwrap();
        let sb = forward_transform(&b).unwrap();
        for (x, y) in sa.samples().iter().zip(sb.samples()) {
            assert!((x.norm() - y.norm()).abs() < 1e-6 * sa.samples().iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }

    #[test]
    fn heralded_spectrum_is_lorentzian() {
        let axes = unit_axes();
        let psi = heralded_exponential(PhotonParams::new(1.0, 0.0).unwrap(), axes).unwrap();
        let spec = forward_transform(&psi).unwrap();
        let power = power_spectrum(&spec);
        // |Ψ|² = (1/2π)/(ω² + 1/4), checked over the central band
        for k in (0..axes.n_samples()).step_by(97) {
            let w = axes.frequency(k);
            if w.abs() > 20.0 {
                continue;
            }
            let expected = 1.0 / (2.0 * PI) / (w * w + 0.25);
            assert!((power[k] - expected).abs() < 2e-3 * expected, "w={w}");
        }
        let step = axes.frequency_step();
        let width = fwhm(&power, &axes).unwrap();
        assert!((width.width - 1.0).abs() < step);
        assert!(!width.ambiguous);
        let report = bandwidth_b50(&power, &axes).unwrap();
        assert!((report.b50 - 1.0).abs() < step);
        assert!((report.b50 - width.width).abs() < step);
    }

    #[test]
    fn energy_scaling_and_parseval() {
        let axes = make_axis_pair(2048, 60.0, -5.0).unwrap();
        let psi = heralded_exponential(PhotonParams::new(1.0, 0.0).unwrap(), axes).unwrap();
        let doubled = psi.scaled(Complex64::new(2.0, 0.0));
        assert!((doubled.energy() - 4.0 * psi.energy()).abs() < 1e-12);
        let spec = forward_transform(&psi).unwrap();
        assert!((spec.energy() - psi.energy()).abs() < 1e-12);
    }

    #[test]
    fn phase_of_real_packet_is_zero() {
        let axes = make_axis_pair(1024, 50.0, -5.0).unwrap();
        let psi = heralded_exponential(PhotonParams::new(1.0, 0.0).unwrap(), axes).unwrap();
        let phase = extract_phase(&psi, 1e-12).unwrap();
        assert!(phase.iter().flatten().all(|p| p.abs() < 1e-15));
        assert!(phase[0].is_none());
    }

    #[test]
    fn phase_slope_of_carrier() {
        let axes = make_axis_pair(1024, 50.0, -5.0).unwrap();
        let psi = heralded_exponential(PhotonParams::new(0.2, 0.0).unwrap(), axes).unwrap();
        let w1 = 1.7;
        let shifted: Vec<Complex64> = psi
            .samples()
            .iter()
            .enumerate()
            .map(|(i, z)| z * Complex64::from_polar(1.0, w1 * axes.time(i)))
            .collect();
        let shifted = TemporalWavepacket::new(axes, shifted).unwrap();
        let phase = extract_phase(&shifted, 1e-10).unwrap();
        let defined: Vec<(usize, f64)> = phase.iter().enumerate().filter_map(|(i, p)| p.map(|p| (i, p))).collect();
        for w in defined.windows(2) {
            let slope = (w[1].1 - w[0].1) / (axes.time(w[1].0) - axes.time(w[0].0));
            assert!((slope - w1).abs() < 1e-9);
        }
    }

    #[test]
    fn phase_of_zero_packet_is_error() {
        let axes = make_axis_pair(64, 6.4, 0.0).unwrap();
        let psi = TemporalWavepacket::new(axes, vec![Complex64::new(0.0, 0.0); 64]).unwrap();
        assert!(matches!(extract_phase(&psi, 0.0), Err(Error::EmptyPhase)));
        assert!(extract_phase(&psi, -1.0).is_err());
    }
}

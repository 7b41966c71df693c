//! Asymmetric-cavity reflection and the electro-optic phase modulator.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::sampling::AxisPair;
use crate::wavepacket::{extract_phase, SpectralWavepacket, TemporalWavepacket};

/// Cavity linewidth Γc and detuning Δω = ω0 − ωc, both in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    pub gamma_c: f64,
    pub detuning: f64,
}

impl CavityParams {
    pub fn new(gamma_c: f64, detuning: f64) -> Result<Self> {
        if !(gamma_c > 0.0 && gamma_c.is_finite()) {
            return Err(invalid(format!("gamma_c must be positive, got {gamma_c}")));
        }
        if !detuning.is_finite() {
            return Err(invalid("detuning must be finite"));
        }
        Ok(Self { gamma_c, detuning })
    }

    pub fn resonant(gamma_c: f64) -> Result<Self> {
        Self::new(gamma_c, 0.0)
    }
}

/// Reflection coefficient `−(Γc + 2iδ)/(Γc − 2iδ)` at offset `delta = ω − ωc`.
pub fn cavity_transfer(delta: f64, gamma_c: f64) -> Result<Complex64> {
    if !(gamma_c > 0.0) {
        return Err(invalid(format!("gamma_c must be positive, got {gamma_c}")));
    }
    Ok(transfer_unchecked(delta, gamma_c))
}

#[inline]
fn transfer_unchecked(delta: f64, gamma_c: f64) -> Complex64 {
    -Complex64::new(gamma_c, 2.0 * delta) / Complex64::new(gamma_c, -2.0 * delta)
}

/// Multiply a spectrum by the cavity reflection coefficient.
///
/// Spectral samples are offsets from the photon carrier ω0, so the cavity
/// sees `δ = ω + Δω`.
pub fn reflect_off_cavity(
    spectrum: &SpectralWavepacket,
    cavity: &CavityParams,
) -> Result<SpectralWavepacket> {
    if !(cavity.gamma_c > 0.0) {
        return Err(invalid(format!("gamma_c must be positive, got {}", cavity.gamma_c)));
    }
    let axes = *spectrum.axes();
    let samples = spectrum
        .samples()
        .iter()
        .enumerate()
        .map(|(k, z)| z * transfer_unchecked(axes.frequency(k) + cavity.detuning, cavity.gamma_c))
        .collect();
    SpectralWavepacket::new(axes, samples)
}

/// Closed-form resonant envelope
/// `√Γp [2Γc e^{−Γc t/2} − (Γp+Γc) e^{−Γp t/2}] / (Γp − Γc) · Θ(t)`.
///
/// This is the dispersed packet up to a global sign; removing its sign
/// changes gives the compressed packet.
pub fn dispersed_envelope_analytic(t: f64, gamma_p: f64, gamma_c: f64) -> Result<f64> {
    if !(gamma_p > 0.0 && gamma_c > 0.0) {
        return Err(invalid("linewidths must be positive"));
    }
    if gamma_p == gamma_c {
        return Err(Error::DegenerateParameters(format!(
            "closed form is singular at gamma_p = gamma_c = {gamma_p}"
        )));
    }
    if t <= 0.0 {
        return Ok(0.0);
    }
    let bracket = 2.0 * gamma_c * (-0.5 * gamma_c * t).exp()
        - (gamma_p + gamma_c) * (-0.5 * gamma_p * t).exp();
    Ok(gamma_p.sqrt() * bracket / (gamma_p - gamma_c))
}

/// Zero of the resonant dispersed envelope, `2 ln((Γp+Γc)/(2Γc)) / (Γp − Γc)`.
pub fn binary_flip_time(gamma_p: f64, gamma_c: f64) -> Result<f64> {
    if !(gamma_c > 0.0) {
        return Err(invalid(format!("gamma_c must be positive, got {gamma_c}")));
    }
    if !(gamma_p > gamma_c) {
        return Err(invalid(format!(
            "flip time requires gamma_p > gamma_c (got {gamma_p} <= {gamma_c})"
        )));
    }
    Ok(2.0 * ((gamma_p + gamma_c) / (2.0 * gamma_c)).ln() / (gamma_p - gamma_c))
}

/// Time-dependent phase applied by the modulator.
#[derive(Debug, Clone, PartialEq)]
pub enum ModulatorSchedule {
    /// Multiply every sample at or after `flip_time` by `e^{i·step}`.
    BinaryFlip { flip_time: f64, step: f64 },
    /// Multiply each sample by `e^{i·phase[n]}`.
    Conjugate { phase: Vec<f64> },
}

impl ModulatorSchedule {
    /// π flip at `flip_time`.
    pub fn binary(flip_time: f64) -> Self {
        Self::BinaryFlip { flip_time, step: PI }
    }

    /// Phase `φe = −φ′` that cancels the temporal phase of `psi`.
    ///
    /// Samples below the intensity floor hold the last defined phase (zero
    /// before the first defined sample).
    pub fn conjugate_of(psi: &TemporalWavepacket, intensity_floor: f64) -> Result<Self> {
        let phase = extract_phase(psi, intensity_floor)?;
        let mut held = 0.0;
        let phase = phase
            .into_iter()
            .map(|p| {
                if let Some(p) = p {
                    held = -p;
                }
                held
            })
            .collect();
        Ok(Self::Conjugate { phase })
    }

    fn validate(&self, axes: &AxisPair) -> Result<()> {
        match self {
            Self::BinaryFlip { flip_time, step } => {
                if !axes.contains_time(*flip_time) {
                    return Err(invalid(format!("flip time {flip_time} lies outside the grid")));
                }
                if !step.is_finite() {
                    return Err(invalid("phase step must be finite"));
                }
            }
            Self::Conjugate { phase } => {
                if phase.len() != axes.n_samples() {
                    return Err(invalid(format!(
                        "phase schedule has {} samples, grid has {}",
                        phase.len(),
                        axes.n_samples()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Apply the modulator phase to a temporal packet.
pub fn apply_modulator(
    psi: &TemporalWavepacket,
    schedule: &ModulatorSchedule,
) -> Result<TemporalWavepacket> {
    let axes = *psi.axes();
    schedule.validate(&axes)?;
    let samples = match schedule {
        ModulatorSchedule::BinaryFlip { flip_time, step } => {
            let start = axes.first_index_at_or_after(*flip_time);
            let factor = Complex64::from_polar(1.0, *step);
            psi.samples()
                .iter()
                .enumerate()
                .map(|(i, z)| if i >= start { z * factor } else { *z })
                .collect()
        }
        ModulatorSchedule::Conjugate { phase } => psi
            .samples()
            .iter()
            .zip(phase)
            .map(|(z, p)| z * Complex64::from_polar(1.0, *p))
            .collect(),
    };
    TemporalWavepacket::new(axes, samples)
}

/// Time of the first local minimum of |ψ|² after the intensity peak.
///
/// For the resonant dispersed packet this is the zero used by the binary
/// flip; off resonance the minimum no longer reaches zero.
pub fn first_intensity_minimum(psi: &TemporalWavepacket) -> Option<f64> {
    let intensity = psi.intensity();
    let peak = intensity
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)?;
    let mut i = peak;
    while i + 1 < intensity.len() && intensity[i + 1] <= intensity[i] {
        i += 1;
    }
    if i + 1 == intensity.len() {
        return None;
    }
    Some(psi.coordinate(i))
}

//! Minimization of the compressed B50 bandwidth over cavity and modulator settings.
//!
//! Search coordinates are dimensionless: linewidths and detunings in units of
//! Γp, flip times in units of 1/Γp.

use rayon::prelude::*;

use crate::elements::{
    apply_modulator, binary_flip_time, reflect_off_cavity, CavityParams, ModulatorSchedule,
};
use crate::error::{invalid, Error, Result};
use crate::metrics::{bandwidth_b50, power_spectrum};
use crate::sampling::{AxisPair, FourierPair};
use crate::simplex::{self, Bounds, SimplexOptions};
use crate::wavepacket::{heralded_exponential, PhotonParams, SpectralWavepacket, TemporalWavepacket};

/// Relative intensity below which the conjugate schedule holds its phase.
pub const CONJUGATE_FLOOR: f64 = 1e-10;

/// Refinement tolerance on every search coordinate.
pub const REFINE_TOLERANCE: f64 = 1e-4;

/// What the phase modulator does after the cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Modulation {
    /// Modulator off: the packet is only dispersed.
    None,
    /// π flip `flip_time` seconds after the herald.
    BinaryFlip { flip_time: f64 },
    /// Cancel the full temporal phase of the dispersed packet.
    Conjugate,
}

/// Heralded photon → cavity → modulator, with the input spectrum cached.
#[derive(Debug)]
pub struct CompressionPipeline {
    photon: PhotonParams,
    fourier: FourierPair,
    input: SpectralWavepacket,
}

/// Every stage of one pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub input_spectrum: SpectralWavepacket,
    pub dispersed: TemporalWavepacket,
    pub modulated: TemporalWavepacket,
    pub output_spectrum: SpectralWavepacket,
}

impl CompressionPipeline {
    pub fn new(photon: PhotonParams, axes: AxisPair) -> Result<Self> {
        let fourier = FourierPair::new(axes);
        let psi = heralded_exponential(photon, axes)?;
        let input = fourier.forward(&psi)?;
        Ok(Self { photon, fourier, input })
    }

    pub fn photon(&self) -> PhotonParams {
        self.photon
    }

    pub fn axes(&self) -> &AxisPair {
        self.fourier.axes()
    }

    pub fn input_spectrum(&self) -> &SpectralWavepacket {
        &self.input
    }

    pub fn run(&self, cavity: &CavityParams, modulation: &Modulation) -> Result<PipelineOutput> {
        let reflected = reflect_off_cavity(&self.input, cavity)?;
        let dispersed = self.fourier.inverse(&reflected)?;
        let modulated = match modulation {
            Modulation::None => dispersed.clone(),
            Modulation::BinaryFlip { flip_time } => apply_modulator(
                &dispersed,
                &ModulatorSchedule::binary(self.photon.t0 + flip_time),
            )?,
            Modulation::Conjugate => apply_modulator(
                &dispersed,
                &ModulatorSchedule::conjugate_of(&dispersed, CONJUGATE_FLOOR)?,
            )?,
        };
        let output_spectrum = self.fourier.forward(&modulated)?;
        Ok(PipelineOutput {
            input_spectrum: self.input.clone(),
            dispersed,
            modulated,
            output_spectrum,
        })
    }

    /// B50 of the output spectrum in rad/s.
    pub fn objective(&self, cavity: &CavityParams, modulation: &Modulation) -> Result<f64> {
        let out = self.run(cavity, modulation)?;
        Ok(bandwidth_b50(&power_spectrum(&out.output_spectrum), self.axes())?.b50)
    }
}

/// One-shot objective: B50 (rad/s) after cavity `(gamma_c, detuning)` and
/// the given modulation, for a photon heralded at t = 0.
pub fn objective(
    gamma_c: f64,
    detuning: f64,
    modulation: &Modulation,
    gamma_p: f64,
    axes: AxisPair,
) -> Result<f64> {
    let pipeline = CompressionPipeline::new(PhotonParams::new(gamma_p, 0.0)?, axes)?;
    pipeline.objective(&CavityParams::new(gamma_c, detuning)?, modulation)
}

/// How the flip is chosen during a search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlipMode {
    /// Binary flip at the zero of the resonant envelope for the trial Γc.
    Analytic,
    /// Binary flip time searched over `range` (units of 1/Γp).
    Free { range: (f64, f64) },
    Conjugate,
    Off,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub gamma_c_range: (f64, f64),
    pub detuning_range: (f64, f64),
    pub flip_mode: FlipMode,
    /// Grid points along Γc, Δω and flip time. Ignored on degenerate axes.
    pub resolution: [usize; 3],
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            gamma_c_range: (0.05, 1.0),
            detuning_range: (-0.5, 0.5),
            flip_mode: FlipMode::Analytic,
            resolution: [25, 21, 1],
        }
    }
}

impl SearchSpace {
    /// A single point.
    pub fn point(gamma_c: f64, detuning: f64, flip_mode: FlipMode) -> Self {
        Self {
            gamma_c_range: (gamma_c, gamma_c),
            detuning_range: (detuning, detuning),
            flip_mode,
            resolution: [1, 1, 1],
        }
    }

    fn axes(&self) -> Vec<(f64, f64, usize)> {
        let mut axes = vec![
            (self.gamma_c_range.0, self.gamma_c_range.1, self.resolution[0]),
            (self.detuning_range.0, self.detuning_range.1, self.resolution[1]),
        ];
        if let FlipMode::Free { range } = self.flip_mode {
            axes.push((range.0, range.1, self.resolution[2]));
        }
        axes
    }

    pub fn validate(&self) -> Result<()> {
        for (lo, hi, n) in self.axes() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(invalid(format!("search range [{lo}, {hi}] is empty or not finite")));
            }
            if lo < hi && n < 3 {
                return Err(invalid(format!("resolution {n} on [{lo}, {hi}] is below 3")));
            }
        }
        if self.gamma_c_range.0 <= 0.0 {
            return Err(invalid("gamma_c range must be positive"));
        }
        Ok(())
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if lo == hi {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Grid,
    Refine,
}

/// One objective evaluation, in Γp units.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub stage: Stage,
    pub gamma_c: f64,
    pub detuning: f64,
    pub flip_time: Option<f64>,
    /// `None` when the evaluation failed.
    pub b50: Option<f64>,
    pub error: Option<String>,
}

/// Best point found, in Γp units.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub gamma_c_opt: f64,
    pub detuning_opt: f64,
    pub flip_time_opt: Option<f64>,
    pub b50_opt: f64,
    pub evaluation_count: usize,
    pub trace: Vec<Evaluation>,
}

impl Optimum {
    pub fn failures(&self) -> impl Iterator<Item = &Evaluation> {
        self.trace.iter().filter(|e| e.b50.is_none())
    }
}

struct Search<'a> {
    pipeline: &'a CompressionPipeline,
    gamma_p: f64,
    mode: FlipMode,
}

impl Search<'_> {
    /// Evaluate the dimensionless point `x = [Γc, Δω, (flip time)]`.
    fn evaluate(&self, x: &[f64], stage: Stage) -> Evaluation {
        let (gc, dw) = (x[0], x[1]);
        let flip = match self.mode {
            FlipMode::Analytic => binary_flip_time(1.0, gc).map(Some),
            FlipMode::Free { .. } => Ok(Some(x[2])),
            FlipMode::Conjugate | FlipMode::Off => Ok(None),
        };
        let result = flip.and_then(|flip| {
            let modulation = match (self.mode, flip) {
                (FlipMode::Conjugate, _) => Modulation::Conjugate,
                (_, Some(t)) => Modulation::BinaryFlip { flip_time: t / self.gamma_p },
                (_, None) => Modulation::None,
            };
            let cavity = CavityParams::new(gc * self.gamma_p, dw * self.gamma_p)?;
            let b50 = self.pipeline.objective(&cavity, &modulation)? / self.gamma_p;
            Ok((flip, b50))
        });
        match result {
            Ok((flip_time, b50)) => Evaluation {
                stage,
                gamma_c: gc,
                detuning: dw,
                flip_time,
                b50: Some(b50),
                error: None,
            },
            Err(e) => Evaluation {
                stage,
                gamma_c: gc,
                detuning: dw,
                flip_time: None,
                b50: None,
                error: Some(e.to_string()),
            },
        }
    }
}

/// Grid scan over `space` followed by simplex refinement from the best grid point.
///
/// Failed evaluations are kept in the trace and skipped. The result is never
/// worse than the best grid point.
pub fn minimize(space: &SearchSpace, pipeline: &CompressionPipeline) -> Result<Optimum> {
    space.validate()?;
    let search = Search {
        pipeline,
        gamma_p: pipeline.photon().gamma_p,
        mode: space.flip_mode,
    };

    let axes = space.axes();
    let grids: Vec<Vec<f64>> = axes.iter().map(|&(lo, hi, n)| linspace(lo, hi, n)).collect();
    let mut points: Vec<Vec<f64>> = vec![Vec::new()];
    for grid in &grids {
        points = points
            .iter()
            .flat_map(|p| grid.iter().map(move |v| [p.as_slice(), &[*v]].concat()))
            .collect();
    }

    let mut trace: Vec<Evaluation> = points
        .par_iter()
        .map(|x| search.evaluate(x, Stage::Grid))
        .collect();

    let best_grid = trace
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.b50.map(|v| (i, v)))
        .fold(None, |acc: Option<(usize, f64)>, (i, v)| match acc {
            Some((_, best)) if best <= v => acc,
            _ => Some((i, v)),
        });
    let Some((best_idx, best_value)) = best_grid else {
        let first = trace.first().and_then(|e| e.error.clone()).unwrap_or_default();
        return Err(Error::OptimizationFailed(format!(
            "all {} grid evaluations failed (first error: {first})",
            trace.len()
        )));
    };

    let start = points[best_idx].clone();
    let steps: Vec<f64> = axes
        .iter()
        .map(|&(lo, hi, n)| if lo == hi { 0.0 } else { (hi - lo) / (n - 1) as f64 })
        .collect();
    let bounds = Bounds {
        lower: axes.iter().map(|a| a.0).collect(),
        upper: axes.iter().map(|a| a.1).collect(),
    };
    let options = SimplexOptions {
        max_iterations: 2_000,
        xtol_rel: 0.0,
        xtol_abs: REFINE_TOLERANCE,
        restart: true,
    };
    // nothing to refine on a single point
    let refined = steps.iter().any(|s| *s > 0.0).then(|| simplex::minimize(
        |x| {
            let e = search.evaluate(x, Stage::Refine);
            let v = e.b50.unwrap_or(f64::INFINITY);
            trace.push(e);
            v
        },
        &start,
        &steps,
        &bounds,
        &options,
    ));

    let (x, b50) = match refined {
        Some(outcome) if outcome.value < best_value => (outcome.x, outcome.value),
        _ => (start, best_value),
    };
    let flip_time_opt = match space.flip_mode {
        FlipMode::Analytic => binary_flip_time(1.0, x[0]).ok(),
        FlipMode::Free { .. } => Some(x[2]),
        FlipMode::Conjugate | FlipMode::Off => None,
    };
    Ok(Optimum {
        gamma_c_opt: x[0],
        detuning_opt: x[1],
        flip_time_opt,
        b50_opt: b50,
        evaluation_count: trace.len(),
        trace,
    })
}

/// The modulation a search point stands for, with flip times in seconds.
pub fn modulation_for(optimum: &Optimum, mode: FlipMode, gamma_p: f64) -> Modulation {
    match (mode, optimum.flip_time_opt) {
        (FlipMode::Conjugate, _) => Modulation::Conjugate,
        (FlipMode::Off, _) | (_, None) => Modulation::None,
        (_, Some(t)) => Modulation::BinaryFlip { flip_time: t / gamma_p },
    }
}

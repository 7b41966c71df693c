//! Cavity-based spectral compression of heralded single photons.
//!
//! A heralded photon with an exponentially decaying envelope is reflected off
//! a single-sided optical cavity, which imprints a frequency-dependent phase
//! and turns it into a chirped, dispersed packet. A time-dependent phase
//! modulator then removes that chirp, concentrating the energy into a
//! narrower spectrum. The crate simulates this pipeline on a discrete
//! time/frequency grid, measures bandwidths, optimizes the cavity linewidth
//! and detuning, emulates Fabry-Pérot scanning spectroscopy and fits the
//! resulting experimental-style data.
//!
//! All rates are angular frequencies in rad/s and all times are in seconds;
//! see [`units`] for conversions from MHz linewidths and nanoseconds.
//!
//! ```
//! use cavity_compression::prelude::*;
//!
//! let gamma_p = 1.0;
//! let axes = AxisPair::with_span_factor(1 << 12, 120.0, gamma_p, 0.0).unwrap();
//! let pipeline = CompressionPipeline::new(PhotonParams::new(gamma_p, 0.0).unwrap(), axes).unwrap();
//! let flip = binary_flip_time(gamma_p, 0.25).unwrap();
//! let b50 = pipeline
//!     .objective(&CavityParams::resonant(0.25).unwrap(), &Modulation::BinaryFlip { flip_time: flip })
//!     .unwrap();
//! assert!(b50 < 0.35);
//! ```

pub mod cli;
pub mod elements;
pub mod error;
pub mod estimation;
pub mod metrics;
pub mod optimizer;
pub mod sampling;
pub mod simplex;
pub mod spectroscopy;
pub mod units;
pub mod wavepacket;

pub use error::{Error, Result};

/// Commonly used types and functions.
pub mod prelude {
    pub use crate::elements::{
        apply_modulator, binary_flip_time, cavity_transfer, dispersed_envelope_analytic,
        reflect_off_cavity, CavityParams, ModulatorSchedule,
    };
    pub use crate::error::{Error, Result};
    pub use crate::estimation::{
        fit_exponential_decay, fit_reabsorption, least_squares, DataSeries, FitResult, ParamSpec,
    };
    pub use crate::metrics::{bandwidth_b50, compression_report, fwhm, power_spectrum, BandwidthReport};
    pub use crate::optimizer::{
        minimize, objective, CompressionPipeline, FlipMode, Modulation, Optimum, SearchSpace,
    };
    pub use crate::sampling::{forward_transform, inverse_transform, make_axis_pair, AxisPair, FourierPair};
    pub use crate::spectroscopy::{fp_transmission_profile, reabsorbed_spectrum, scan, FPParams, ScanResult};
    pub use crate::wavepacket::{
        heralded_exponential, heralded_exponential_unnormalized, PhotonParams, SpectralWavepacket,
        TemporalWavepacket,
    };
}

//! Multi-band spectral subtraction on magnitude and phase spectra.
//!
//! The crate implements four related speech enhancers:
//!
//! * **MSS**: single-band magnitude subtraction with the noisy phase kept.
//! * **MPSS**: single-band subtraction on both the magnitude and phase spectra.
//! * **MBMSS**: magnitude subtraction over linearly spaced bands, each with its
//!   own SNR-driven over-subtraction factor and a frequency-dependent tweak.
//! * **MBMPSS**: the multi-band scheme applied to magnitude and phase in
//!   parallel, recombined before the inverse transform.
//!
//! The floating-point path is the reference. A 16-bit fixed-point CORDIC path
//! ([`cordic`]) emulates the hardware magnitude/phase extraction and sin/cos
//! synthesis blocks, and [`cordic::LatencyModel`] accounts for the pipeline
//! delay of each block.
//!
//! Frame-level work is data parallel. With the default `parallel` feature the
//! frame loop and the evaluation sweep run on rayon; without it every
//! [`Execution`] mode falls back to a sequential loop.
//!
//! ```
//! use mbmpss::{enhance, Algorithm, EnhancerConfig, TimeSignal};
//!
//! let noisy = TimeSignal::new(vec![0.0; 8 * 256], 8000).unwrap();
//! let config = EnhancerConfig::new(Algorithm::Mbmpss);
//! let clean = enhance(&noisy, &config).unwrap();
//! assert_eq!(clean.len(), noisy.len());
//! ```

pub mod cordic;
pub mod enhancer;
mod error;
pub mod evaluation;
pub mod multiband;
pub mod noise;
mod par;
pub mod spectral;
pub mod synth;
pub mod wav;

pub use enhancer::{
    enhance, enhance_frame, enhance_with, enhance_with_profile, recombine_bands,
    subtract_band_magnitude, subtract_band_phase, Algorithm, Arithmetic, BandOutput,
    EnhancedFrame, EnhancerConfig, Gamma, PhaseAlpha, Window,
};
pub use error::{Error, Result};
pub use multiband::{BandGains, BandPartition, SnrMode};
pub use noise::NoiseProfile;
pub use par::Execution;
pub use spectral::{ComplexSpectrum, Frame, MagPhaseSpectrum, TimeSignal};

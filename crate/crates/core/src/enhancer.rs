//! The four subtraction algorithms and the frame pipeline around them.
//!
//! Per frame: FFT, polar split, per-band gains, magnitude subtraction (all
//! variants) and phase subtraction (MPSS, MBMPSS), recombination with
//! conjugate symmetry, polar-to-rectangular, IFFT. Frames are independent once
//! the noise profile is frozen, so the frame loop runs through [`Execution`].

use std::fmt;
use std::str::FromStr;

use crate::cordic::{self, DEFAULT_ITERATIONS};
use crate::multiband::{self, gains_from_values, half_spectrum_range, BandGains, BandPartition, SnrMode};
use crate::noise::{self, NoiseProfile, DEFAULT_NOISE_FRAMES};
use crate::par::{self, Execution};
use crate::spectral::{self, check_power_of_two, wrap_phase, ComplexSpectrum, Frame, MagPhaseSpectrum, TimeSignal};
use crate::{Error, Result};

pub const DEFAULT_FRAME_LEN: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Mss,
    Mpss,
    Mbmss,
    Mbmpss,
}

impl Algorithm {
    /// Report order used by the comparison harness.
    pub const ALL: [Algorithm; 4] = [Algorithm::Mss, Algorithm::Mbmss, Algorithm::Mpss, Algorithm::Mbmpss];

    pub fn is_multiband(self) -> bool {
        matches!(self, Algorithm::Mbmss | Algorithm::Mbmpss)
    }

    pub fn subtracts_phase(self) -> bool {
        matches!(self, Algorithm::Mpss | Algorithm::Mbmpss)
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Mss => "MSS",
            Algorithm::Mpss => "MPSS",
            Algorithm::Mbmss => "MBMSS",
            Algorithm::Mbmpss => "MBMPSS",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mss" => Ok(Algorithm::Mss),
            "mpss" => Ok(Algorithm::Mpss),
            "mbmss" => Ok(Algorithm::Mbmss),
            "mbmpss" => Ok(Algorithm::Mbmpss),
            other => Err(Error::InvalidConfig(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// Exponent applied to magnitudes before subtraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Gamma {
    #[default]
    Magnitude,
    Power,
}

impl Gamma {
    pub fn exponent(self) -> i32 {
        match self {
            Gamma::Magnitude => 1,
            Gamma::Power => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Arithmetic {
    #[default]
    FloatReference,
    /// Polar conversions through the 16-bit CORDIC emulation.
    FixedCordic,
}

/// Source of the over-subtraction factor on the phase path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseAlpha {
    /// Phase α from the SNR of the phase spectra themselves.
    #[default]
    PerPath,
    /// Reuse the magnitude path's α.
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    #[default]
    Rectangular,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnhancerConfig {
    pub algorithm: Algorithm,
    pub frame_len: usize,
    /// Requested band count; MSS and MPSS always use one band.
    pub n_bands: usize,
    pub noise_frames: usize,
    /// Spectral floor as a fraction of the noisy magnitude.
    pub beta: f64,
    pub gamma: Gamma,
    pub snr_mode: SnrMode,
    pub arithmetic: Arithmetic,
    pub cordic_iterations: u32,
    pub phase_alpha: PhaseAlpha,
    pub window: Window,
    /// Exponential refresh of the noise magnitudes after the leading frames.
    pub noise_update_weight: f64,
}

impl EnhancerConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            frame_len: DEFAULT_FRAME_LEN,
            n_bands: if algorithm.is_multiband() { multiband::DEFAULT_BANDS } else { 1 },
            noise_frames: DEFAULT_NOISE_FRAMES,
            beta: 0.0,
            gamma: Gamma::default(),
            snr_mode: SnrMode::default(),
            arithmetic: Arithmetic::default(),
            cordic_iterations: DEFAULT_ITERATIONS,
            phase_alpha: PhaseAlpha::default(),
            window: Window::default(),
            noise_update_weight: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if check_power_of_two(self.frame_len).is_err() {
            return Err(Error::InvalidConfig(format!(
                "frame length must be a power of two (got {})",
                self.frame_len
            )));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidConfig(format!("beta {} outside [0, 1]", self.beta)));
        }
        if self.noise_frames == 0 {
            return Err(Error::InvalidConfig("noise frame count must be at least 1".into()));
        }
        if self.n_bands == 0 || self.n_bands > self.frame_len / 2 {
            return Err(Error::InvalidConfig(format!(
                "band count {} must be in 1..={}",
                self.n_bands,
                self.frame_len / 2
            )));
        }
        if !(0.0..=1.0).contains(&self.noise_update_weight) {
            return Err(Error::InvalidConfig("noise update weight outside [0, 1]".into()));
        }
        if !(1..=cordic::MAX_ITERATIONS).contains(&self.cordic_iterations) {
            return Err(Error::InvalidConfig(format!(
                "CORDIC iterations must be in 1..={}",
                cordic::MAX_ITERATIONS
            )));
        }
        Ok(())
    }

    /// Band count actually used by the algorithm.
    pub fn effective_bands(&self) -> usize {
        if self.algorithm.is_multiband() {
            self.n_bands
        } else {
            1
        }
    }

    /// Copy with the band count forced for single-band algorithms, plus a
    /// warning for each adjusted field.
    pub fn normalized(&self) -> (Self, Vec<String>) {
        let mut out = self.clone();
        let mut warnings = Vec::new();
        if !self.algorithm.is_multiband() && self.n_bands != 1 {
            warnings.push(format!("bands forced to 1 for {}", self.algorithm));
            out.n_bands = 1;
        }
        (out, warnings)
    }

    pub fn partition(&self) -> Result<BandPartition> {
        multiband::partition(self.frame_len / 2, self.effective_bands())
    }
}

impl Default for EnhancerConfig {
    fn default() -> Self {
        Self::new(Algorithm::Mbmpss)
    }
}

/// Magnitude subtraction with flooring:
/// `s^γ = max(y^γ - αδ·n^γ, (β·y)^γ)`.
pub fn subtract_band_magnitude(
    y_mag: &[f64],
    n_mag: &[f64],
    alpha: f64,
    delta: f64,
    beta: f64,
    gamma: Gamma,
) -> Result<Vec<f64>> {
    if y_mag.len() != n_mag.len() {
        return Err(Error::LengthMismatch { expected: y_mag.len(), actual: n_mag.len() });
    }
    let factor = alpha * delta;
    Ok(y_mag
        .iter()
        .zip(n_mag)
        .map(|(&y, &n)| {
            let floor = beta * y;
            match gamma {
                Gamma::Magnitude => {
                    let s = y - factor * n;
                    if s <= floor {
                        floor
                    } else {
                        s
                    }
                }
                Gamma::Power => {
                    let s = y * y - factor * n * n;
                    if s <= floor * floor {
                        floor
                    } else {
                        s.sqrt()
                    }
                }
            }
        })
        .collect())
}

/// Phase subtraction: `wrap(φy - αδ·φn)` into `(-π, π]`.
pub fn subtract_band_phase(y_phase: &[f64], n_phase: &[f64], alpha: f64, delta: f64) -> Result<Vec<f64>> {
    if y_phase.len() != n_phase.len() {
        return Err(Error::LengthMismatch { expected: y_phase.len(), actual: n_phase.len() });
    }
    let factor = alpha * delta;
    Ok(y_phase
        .iter()
        .zip(n_phase)
        .map(|(&y, &n)| wrap_phase(y - factor * n))
        .collect())
}

/// One band's processed half-spectrum bins, `begin..=end`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandOutput {
    pub begin: usize,
    pub end: usize,
    pub magnitudes: Vec<f64>,
    pub phases: Vec<f64>,
}

/// Concatenates band outputs covering bins `0..=N/2` and restores the
/// negative-frequency half by conjugate symmetry.
///
/// The DC and Nyquist bins are self-conjugate, so their phase is snapped to 0
/// or π, whichever is closer.
pub fn recombine_bands(bands: &[BandOutput], frame_len: usize, frame_index: usize) -> Result<MagPhaseSpectrum> {
    check_power_of_two(frame_len)?;
    let half = frame_len / 2;
    let mut magnitudes = vec![0.0; frame_len];
    let mut phases = vec![0.0; frame_len];
    let mut next = 0;
    for band in bands {
        if band.begin != next {
            return Err(Error::BandTiling(format!("expected band starting at bin {next}, found {}", band.begin)));
        }
        if band.end < band.begin || band.end > half {
            return Err(Error::BandTiling(format!("band {}..={} out of range", band.begin, band.end)));
        }
        let width = band.end - band.begin + 1;
        if band.magnitudes.len() != width || band.phases.len() != width {
            return Err(Error::BandTiling(format!(
                "band {}..={} carries {} magnitudes and {} phases",
                band.begin,
                band.end,
                band.magnitudes.len(),
                band.phases.len()
            )));
        }
        magnitudes[band.begin..=band.end].copy_from_slice(&band.magnitudes);
        phases[band.begin..=band.end].copy_from_slice(&band.phases);
        next = band.end + 1;
    }
    if next != half + 1 {
        return Err(Error::BandTiling(format!("bands end at bin {}, expected {half}", next as isize - 1)));
    }
    for k in [0, half] {
        phases[k] = if phases[k].abs() <= std::f64::consts::FRAC_PI_2 { 0.0 } else { std::f64::consts::PI };
    }
    for k in 1..half {
        magnitudes[frame_len - k] = magnitudes[k];
        phases[frame_len - k] = wrap_phase(-phases[k]);
    }
    MagPhaseSpectrum::new(magnitudes, phases, frame_index)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnhancedFrame {
    pub mag_phase: MagPhaseSpectrum,
    /// Gains used on the magnitude path.
    pub per_band_gains: BandGains,
    /// Gains used on the phase path, when the algorithm subtracts phase.
    pub phase_gains: Option<BandGains>,
    pub frame_index: usize,
}

pub(crate) struct PathOutput {
    values: Vec<Vec<f64>>,
    gains: Option<BandGains>,
}

pub(crate) fn magnitude_path(
    frame: &MagPhaseSpectrum,
    profile: &NoiseProfile,
    config: &EnhancerConfig,
    partition: &BandPartition,
    sample_rate: f64,
) -> Result<PathOutput> {
    let gains = gains_from_values(&frame.magnitudes, profile.noise_mag(), partition, sample_rate, config.snr_mode)?;
    let values = (0..partition.n_bands())
        .map(|band| {
            let range = half_spectrum_range(partition, band);
            subtract_band_magnitude(
                &frame.magnitudes[range.clone()],
                &profile.noise_mag()[range],
                gains.alpha[band],
                gains.delta[band],
                config.beta,
                config.gamma,
            )
        })
        .collect::<Result<_>>()?;
    Ok(PathOutput { values, gains: Some(gains) })
}

pub(crate) fn phase_path(
    frame: &MagPhaseSpectrum,
    profile: &NoiseProfile,
    config: &EnhancerConfig,
    partition: &BandPartition,
    sample_rate: f64,
) -> Result<PathOutput> {
    let ranges = (0..partition.n_bands()).map(|band| half_spectrum_range(partition, band));
    if !config.algorithm.subtracts_phase() {
        let values = ranges.map(|r| frame.phases[r].to_vec()).collect();
        return Ok(PathOutput { values, gains: None });
    }
    let gains = match config.phase_alpha {
        PhaseAlpha::PerPath => {
            let y: Vec<f64> = frame.phases.iter().map(|p| p.abs()).collect();
            let n: Vec<f64> = profile.noise_phase().iter().map(|p| p.abs()).collect();
            gains_from_values(&y, &n, partition, sample_rate, config.snr_mode)?
        }
        PhaseAlpha::Shared => {
            gains_from_values(&frame.magnitudes, profile.noise_mag(), partition, sample_rate, config.snr_mode)?
        }
    };
    let values = ranges
        .enumerate()
        .map(|(band, r)| {
            subtract_band_phase(&frame.phases[r.clone()], &profile.noise_phase()[r], gains.alpha[band], gains.delta[band])
        })
        .collect::<Result<_>>()?;
    Ok(PathOutput { values, gains: Some(gains) })
}

pub(crate) fn assemble(
    frame: &MagPhaseSpectrum,
    partition: &BandPartition,
    mag: PathOutput,
    phase: PathOutput,
) -> Result<EnhancedFrame> {
    let bands: Vec<BandOutput> = mag
        .values
        .into_iter()
        .zip(phase.values)
        .enumerate()
        .map(|(band, (magnitudes, phases))| {
            let range = half_spectrum_range(partition, band);
            BandOutput { begin: *range.start(), end: *range.end(), magnitudes, phases }
        })
        .collect();
    let mag_phase = recombine_bands(&bands, frame.len(), frame.frame_index)?;
    Ok(EnhancedFrame {
        mag_phase,
        per_band_gains: mag.gains.expect("magnitude path always reports gains"),
        phase_gains: phase.gains,
        frame_index: frame.frame_index,
    })
}

/// Applies the configured algorithm to one polar frame.
///
/// The magnitude and phase paths read only the input frame and profile, so
/// their results do not depend on evaluation order.
pub fn enhance_frame(
    frame: &MagPhaseSpectrum,
    profile: &NoiseProfile,
    config: &EnhancerConfig,
    partition: &BandPartition,
    sample_rate: f64,
) -> Result<EnhancedFrame> {
    multiband::check_lengths(frame, profile, partition)?;
    if partition.n_bands() != config.effective_bands() {
        return Err(Error::InvalidConfig(format!(
            "partition has {} bands but {} uses {}",
            partition.n_bands(),
            config.algorithm,
            config.effective_bands()
        )));
    }
    let mag = magnitude_path(frame, profile, config, partition, sample_rate)?;
    let phase = phase_path(frame, profile, config, partition, sample_rate)?;
    assemble(frame, partition, mag, phase)
}

/// Output of [`enhance_detailed`].
#[derive(Debug, Clone)]
pub struct Enhancement {
    pub signal: TimeSignal,
    pub frames: Vec<EnhancedFrame>,
    pub profile: NoiseProfile,
}

fn analyze(frame: &Frame, config: &EnhancerConfig) -> Result<MagPhaseSpectrum> {
    let spectrum = spectral::fft(frame)?;
    match config.arithmetic {
        Arithmetic::FloatReference => Ok(spectral::to_mag_phase(&spectrum)),
        Arithmetic::FixedCordic => cordic::to_mag_phase_fixed(&spectrum, config.cordic_iterations),
    }
}

fn synthesize(mp: &MagPhaseSpectrum, config: &EnhancerConfig) -> Result<Frame> {
    let spectrum: ComplexSpectrum = match config.arithmetic {
        Arithmetic::FloatReference => spectral::from_mag_phase(mp),
        Arithmetic::FixedCordic => cordic::from_mag_phase_fixed(mp, config.cordic_iterations)?,
    };
    spectral::ifft(&spectrum)
}

fn prepare(signal: &TimeSignal, config: &EnhancerConfig) -> Result<(EnhancerConfig, Vec<Frame>)> {
    config.validate()?;
    let (config, _) = config.normalized();
    let needed = config.noise_frames * config.frame_len;
    if signal.len() < needed {
        return Err(Error::SignalTooShort { len: signal.len(), needed });
    }
    let frames = spectral::segment(signal, config.frame_len)?;
    Ok((config, frames))
}

/// Enhances `signal`, estimating noise from its leading frames.
pub fn enhance(signal: &TimeSignal, config: &EnhancerConfig) -> Result<TimeSignal> {
    enhance_with(signal, config, Execution::default())
}

pub fn enhance_with(signal: &TimeSignal, config: &EnhancerConfig, exec: Execution) -> Result<TimeSignal> {
    Ok(enhance_detailed(signal, config, None, exec)?.signal)
}

/// Enhances `signal` against a caller-supplied noise profile.
pub fn enhance_with_profile(
    signal: &TimeSignal,
    config: &EnhancerConfig,
    profile: &NoiseProfile,
    exec: Execution,
) -> Result<TimeSignal> {
    Ok(enhance_detailed(signal, config, Some(profile), exec)?.signal)
}

/// Full pipeline, also returning per-frame gains and the profile used.
pub fn enhance_detailed(
    signal: &TimeSignal,
    config: &EnhancerConfig,
    profile: Option<&NoiseProfile>,
    exec: Execution,
) -> Result<Enhancement> {
    let (config, frames) = prepare(signal, config)?;
    let partition = config.partition()?;
    let sample_rate = signal.sample_rate() as f64;

    let spectra = par::try_map(exec, &frames, |f| analyze(f, &config))?;
    let profile = match profile {
        Some(p) => {
            if p.len() != config.frame_len {
                return Err(Error::LengthMismatch { expected: config.frame_len, actual: p.len() });
            }
            p.clone()
        }
        None => noise::estimate_noise(&spectra, config.noise_frames)?,
    };

    let enhanced = if config.noise_update_weight > 0.0 {
        // profile evolves frame to frame, so the profiles are built first
        let mut current = profile.clone();
        let mut per_frame = Vec::with_capacity(spectra.len());
        for (i, spectrum) in spectra.iter().enumerate() {
            per_frame.push((spectrum, current.clone()));
            if i >= config.noise_frames {
                current = noise::update_noise(&current, spectrum, config.noise_update_weight)?;
            }
        }
        par::try_map(exec, &per_frame, |(s, p)| enhance_frame(s, p, &config, &partition, sample_rate))?
    } else {
        par::try_map(exec, &spectra, |s| enhance_frame(s, &profile, &config, &partition, sample_rate))?
    };

    let time_frames = par::try_map(exec, &enhanced, |e| synthesize(&e.mag_phase, &config))?;
    let mut samples = Vec::with_capacity(frames.len() * config.frame_len);
    for (frame, source) in time_frames.iter().zip(&frames) {
        samples.extend_from_slice(&frame.samples[..source.valid_len]);
    }
    samples.truncate(signal.len());
    Ok(Enhancement {
        signal: TimeSignal::new(samples, signal.sample_rate())?,
        frames: enhanced,
        profile,
    })
}

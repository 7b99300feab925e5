//! Fixed-point CORDIC emulation of the magnitude/phase extraction (vectoring)
//! and sin/cos synthesis (rotation) blocks, plus the pipeline latency model.
//!
//! Inputs and outputs are 16-bit two's complement samples, Q2.13 by default,
//! which covers `(-π, π]` and unit-scale magnitudes. Internally the datapath
//! carries [`WORK_FRAC_BITS`] fractional bits in 64-bit registers; every shift
//! truncates (arithmetic shift right), and results are truncated back to the
//! 16-bit output format. The CORDIC gain is removed with one final multiply by
//! a precomputed `1/K`.

use std::f64::consts::PI;
use std::ops::Add;
use std::sync::OnceLock;
use std::time::Duration;

use num_complex::Complex64;

use crate::spectral::{wrap_phase, ComplexSpectrum, MagPhaseSpectrum};
use crate::{Error, Result};

pub const TOTAL_BITS: u32 = 16;
pub const DEFAULT_FRAC_BITS: u32 = 13;
/// Largest fractional split for which `π` still fits in 16 bits.
pub const MAX_FRAC_BITS: u32 = 13;
pub const DEFAULT_ITERATIONS: u32 = 16;
pub const MAX_ITERATIONS: u32 = 30;
pub const WORK_FRAC_BITS: u32 = 30;

const WORK_ONE: i64 = 1 << WORK_FRAC_BITS;

/// A 16-bit two's complement fixed-point value with `frac_bits` fractional bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FixedPointSample {
    raw: i16,
    frac_bits: u32,
}

impl FixedPointSample {
    pub fn from_raw(raw: i16, frac_bits: u32) -> Result<Self> {
        check_frac_bits(frac_bits)?;
        Ok(Self { raw, frac_bits })
    }

    /// Quantizes with round-to-nearest and saturation.
    pub fn from_f64(value: f64, frac_bits: u32) -> Result<Self> {
        check_frac_bits(frac_bits)?;
        let scaled = (value * (1u32 << frac_bits) as f64).round();
        let raw = scaled.clamp(i16::MIN as f64, i16::MAX as f64) as i16;
        Ok(Self { raw, frac_bits })
    }

    /// Q2.13 quantization of `value`.
    pub fn q13(value: f64) -> Self {
        Self::from_f64(value, DEFAULT_FRAC_BITS).expect("default format is valid")
    }

    pub fn raw(self) -> i16 {
        self.raw
    }

    pub fn frac_bits(self) -> u32 {
        self.frac_bits
    }

    pub fn to_f64(self) -> f64 {
        self.raw as f64 / (1u32 << self.frac_bits) as f64
    }

    /// Value of one least significant bit.
    pub fn lsb(self) -> f64 {
        1.0 / (1u32 << self.frac_bits) as f64
    }

    fn to_work(self) -> i64 {
        (self.raw as i64) << (WORK_FRAC_BITS - self.frac_bits)
    }

    fn from_work(work: i64, frac_bits: u32) -> Self {
        let truncated = work >> (WORK_FRAC_BITS - frac_bits);
        let raw = truncated.clamp(i16::MIN as i64, i16::MAX as i64) as i16;
        Self { raw, frac_bits }
    }
}

fn check_frac_bits(frac_bits: u32) -> Result<()> {
    if frac_bits > MAX_FRAC_BITS {
        return Err(Error::InvalidConfig(format!(
            "fractional bits must be at most {MAX_FRAC_BITS}, got {frac_bits}"
        )));
    }
    Ok(())
}

fn check_iterations(iterations: u32) -> Result<()> {
    if !(1..=MAX_ITERATIONS).contains(&iterations) {
        return Err(Error::InvalidConfig(format!(
            "CORDIC iterations must be in 1..={MAX_ITERATIONS}, got {iterations}"
        )));
    }
    Ok(())
}

struct Tables {
    /// `atan(2^-i)` in work format.
    atan: [i64; MAX_ITERATIONS as usize],
    /// `1/K_n` in work format, where `K_n` is the gain after `n` iterations.
    inv_gain: [i64; MAX_ITERATIONS as usize + 1],
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut atan = [0i64; MAX_ITERATIONS as usize];
        let mut inv_gain = [WORK_ONE; MAX_ITERATIONS as usize + 1];
        let mut gain = 1.0f64;
        for i in 0..MAX_ITERATIONS as usize {
            let t = (-(i as f64)).exp2();
            atan[i] = (t.atan() * WORK_ONE as f64).round() as i64;
            gain *= (1.0 + t * t).sqrt();
            inv_gain[i + 1] = (WORK_ONE as f64 / gain).round() as i64;
        }
        Tables { atan, inv_gain }
    })
}

/// Gain `Π sqrt(1 + 2^-2i)` accumulated over `iterations` micro-rotations.
pub fn cordic_gain(iterations: u32) -> f64 {
    (0..iterations)
        .map(|i| (1.0 + (-2.0 * i as f64).exp2()).sqrt())
        .product()
}

fn work_pi() -> i64 {
    (PI * WORK_ONE as f64).round() as i64
}

fn compensate(x: i64, iterations: u32) -> i64 {
    ((x as i128 * tables().inv_gain[iterations as usize] as i128) >> WORK_FRAC_BITS) as i64
}

/// Vectoring mode: drives `im` to zero, returning `(magnitude, phase)`.
///
/// The phase is in radians in the same fixed-point format as the inputs.
/// `(0, 0)` yields `(0, 0)`. Magnitudes beyond the output range saturate.
pub fn cordic_vectoring(
    re: FixedPointSample,
    im: FixedPointSample,
    iterations: u32,
) -> Result<(FixedPointSample, FixedPointSample)> {
    check_iterations(iterations)?;
    if re.frac_bits != im.frac_bits {
        return Err(Error::InvalidConfig("re/im fixed-point formats differ".into()));
    }
    let frac = re.frac_bits;
    let (x, z) = vectoring_work(re.to_work(), im.to_work(), iterations);
    let magnitude = FixedPointSample::from_work(compensate(x, iterations), frac);
    let phase = FixedPointSample::from_work(z, frac);
    Ok((magnitude, phase))
}

/// Runs the vectoring iterations on work-format values; returns the
/// uncompensated magnitude and the accumulated angle.
fn vectoring_work(mut x: i64, mut y: i64, iterations: u32) -> (i64, i64) {
    if x == 0 && y == 0 {
        return (0, 0);
    }
    let pi = work_pi();
    let mut z = 0i64;
    // left half-plane: rotate by π so the iterations converge
    if x < 0 {
        z = if y >= 0 { pi } else { -pi };
        x = -x;
        y = -y;
    }
    let atan = &tables().atan;
    for i in 0..iterations as usize {
        let (dx, dy) = (y >> i, x >> i);
        if y < 0 {
            x -= dx;
            y += dy;
            z -= atan[i];
        } else {
            x += dx;
            y -= dy;
            z += atan[i];
        }
    }
    // keep (-π, π]
    if z <= -pi {
        z += 2 * pi;
    } else if z > pi {
        z -= 2 * pi;
    }
    (x, z)
}

/// Rotation mode: returns gain-compensated `(cos θ, sin θ)`.
///
/// `theta` must already be reduced into `(-π, π]`.
pub fn cordic_rotation(
    theta: FixedPointSample,
    iterations: u32,
) -> Result<(FixedPointSample, FixedPointSample)> {
    check_iterations(iterations)?;
    let frac = theta.frac_bits;
    let (c, s) = rotation_work(theta.to_work(), iterations);
    Ok((FixedPointSample::from_work(c, frac), FixedPointSample::from_work(s, frac)))
}

fn rotation_work(mut z: i64, iterations: u32) -> (i64, i64) {
    let half_pi = work_pi() / 2;
    let mut negate = false;
    if z > half_pi {
        z -= work_pi();
        negate = true;
    } else if z < -half_pi {
        z += work_pi();
        negate = true;
    }
    let atan = &tables().atan;
    let (mut x, mut y) = (WORK_ONE, 0i64);
    for i in 0..iterations as usize {
        let (dx, dy) = (y >> i, x >> i);
        if z >= 0 {
            x -= dx;
            y += dy;
            z -= atan[i];
        } else {
            x += dx;
            y -= dy;
            z += atan[i];
        }
    }
    let (c, s) = (compensate(x, iterations), compensate(y, iterations));
    if negate {
        (-c, -s)
    } else {
        (c, s)
    }
}

/// Polar conversion of a whole spectrum through the fixed-point datapath.
///
/// The frame is block-scaled by a power of two so the largest component sits
/// below 1.0 before quantization, and the exponent is restored afterwards.
pub fn to_mag_phase_fixed(
    spectrum: &ComplexSpectrum,
    iterations: u32,
) -> Result<MagPhaseSpectrum> {
    check_iterations(iterations)?;
    let exponent = block_exponent(&spectrum.bins);
    let scale = (-(exponent as f64)).exp2();
    let unscale = (exponent as f64).exp2();
    let mut magnitudes = Vec::with_capacity(spectrum.len());
    let mut phases = Vec::with_capacity(spectrum.len());
    for c in &spectrum.bins {
        let re = FixedPointSample::q13(c.re * scale);
        let im = FixedPointSample::q13(c.im * scale);
        let (mag, phase) = cordic_vectoring(re, im, iterations)?;
        let mag = mag.to_f64() * unscale;
        magnitudes.push(mag);
        phases.push(if mag == 0.0 { 0.0 } else { wrap_phase(phase.to_f64()) });
    }
    MagPhaseSpectrum::new(magnitudes, phases, spectrum.frame_index)
}

/// Rectangular reconstruction using CORDIC sin/cos and a floating multiply by
/// the magnitude.
pub fn from_mag_phase_fixed(mp: &MagPhaseSpectrum, iterations: u32) -> Result<ComplexSpectrum> {
    check_iterations(iterations)?;
    let bins = mp
        .magnitudes
        .iter()
        .zip(&mp.phases)
        .map(|(&mag, &phase)| {
            let (cos, sin) = cordic_rotation(FixedPointSample::q13(wrap_phase(phase)), iterations)?;
            Ok(Complex64::new(mag * cos.to_f64(), mag * sin.to_f64()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComplexSpectrum { bins, frame_index: mp.frame_index })
}

fn block_exponent(bins: &[Complex64]) -> i32 {
    let peak = bins
        .iter()
        .map(|c| c.re.abs().max(c.im.abs()))
        .fold(0.0f64, f64::max);
    if peak == 0.0 {
        return 0;
    }
    // smallest e with peak * 2^-e < 1
    let mut e = peak.log2().floor() as i32 + 1;
    while peak * (-(e as f64)).exp2() >= 1.0 {
        e += 1;
    }
    e
}

/// Per-block unit delays of the hardware pipeline.
///
/// Magnitude and phase operations run concurrently, so the operation delay is
/// counted once.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatencyModel {
    pub fft_delay: u64,
    pub magphase_delay: u64,
    pub op_delay: u64,
    pub sincos_delay: u64,
    pub ifft_delay: u64,
    pub clock_hz: u64,
}

impl Default for LatencyModel {
    fn default() -> Self {
        Self {
            fft_delay: 278,
            magphase_delay: 13,
            op_delay: 24,
            sincos_delay: 11,
            ifft_delay: 278,
            clock_hz: 100_000_000,
        }
    }
}

impl LatencyModel {
    pub fn with_clock_hz(self, clock_hz: u64) -> Self {
        Self { clock_hz, ..self }
    }

    pub fn blocks(&self) -> [(&'static str, u64); 5] {
        [
            ("FFT", self.fft_delay),
            ("Magnitude-phase extraction", self.magphase_delay),
            ("Magnitude/phase operation", self.op_delay),
            ("CORDIC SinCos", self.sincos_delay),
            ("IFFT", self.ifft_delay),
        ]
    }
}

impl Add for LatencyModel {
    type Output = LatencyModel;

    /// Blockwise sum; the clock of `self` is kept.
    fn add(self, rhs: Self) -> Self {
        Self {
            fft_delay: self.fft_delay + rhs.fft_delay,
            magphase_delay: self.magphase_delay + rhs.magphase_delay,
            op_delay: self.op_delay + rhs.op_delay,
            sincos_delay: self.sincos_delay + rhs.sincos_delay,
            ifft_delay: self.ifft_delay + rhs.ifft_delay,
            clock_hz: self.clock_hz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineDelay {
    pub units: u64,
    pub seconds: f64,
}

impl PipelineDelay {
    pub fn micros(&self, clock_hz: u64) -> f64 {
        (self.units as f64 * 1e6) / clock_hz as f64
    }

    pub fn duration(&self) -> Duration {
        Duration::from_secs_f64(self.seconds)
    }
}

pub fn total_pipeline_delay(model: &LatencyModel) -> Result<PipelineDelay> {
    if model.clock_hz == 0 {
        return Err(Error::InvalidConfig("clock frequency must be positive".into()));
    }
    let units = model.blocks().iter().map(|(_, d)| d).sum::<u64>();
    Ok(PipelineDelay {
        units,
        seconds: units as f64 / model.clock_hz as f64,
    })
}

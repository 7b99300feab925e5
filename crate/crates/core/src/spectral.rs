//! Framing, radix-2 FFT and rectangular/polar spectrum conversion.
//!
//! Conventions used throughout the crate:
//!
//! * frames are non-overlapping with a rectangular window;
//! * the forward transform is unnormalized, `X[k] = sum x[m] e^{-j2πkm/N}`,
//!   and the inverse carries the `1/N`;
//! * phases live in `(-π, π]` and the phase of a zero bin is `0`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::{Error, Result};

/// Mono audio at a fixed sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl TimeSignal {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidSignal("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidSignal(format!("non-finite sample at index {i}")));
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean-square power.
    pub fn power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64
    }
}

/// One block of `N` time-domain samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub samples: Vec<f64>,
    pub index: usize,
    /// Number of leading samples taken from the signal; the rest is zero padding.
    pub valid_len: usize,
}

impl Frame {
    pub fn new(samples: Vec<f64>, index: usize) -> Self {
        let valid_len = samples.len();
        Self { samples, index, valid_len }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_partial(&self) -> bool {
        self.valid_len < self.samples.len()
    }
}

/// Rectangular-form spectrum of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    pub bins: Vec<Complex64>,
    pub frame_index: usize,
}

impl ComplexSpectrum {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}

/// Polar-form spectrum of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MagPhaseSpectrum {
    pub magnitudes: Vec<f64>,
    pub phases: Vec<f64>,
    pub frame_index: usize,
}

impl MagPhaseSpectrum {
    pub fn new(magnitudes: Vec<f64>, phases: Vec<f64>, frame_index: usize) -> Result<Self> {
        if magnitudes.len() != phases.len() {
            return Err(Error::LengthMismatch {
                expected: magnitudes.len(),
                actual: phases.len(),
            });
        }
        Ok(Self { magnitudes, phases, frame_index })
    }

    pub fn zeros(len: usize, frame_index: usize) -> Self {
        Self {
            magnitudes: vec![0.0; len],
            phases: vec![0.0; len],
            frame_index,
        }
    }

    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }
}

/// Maps an angle into `(-π, π]`.
pub fn wrap_phase(angle: f64) -> f64 {
    if angle > -PI && angle <= PI {
        return angle;
    }
    let wrapped = angle.rem_euclid(TAU);
    if wrapped > PI {
        wrapped - TAU
    } else {
        wrapped
    }
}

pub(crate) fn check_power_of_two(len: usize) -> Result<()> {
    if len >= 2 && len.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::NotPowerOfTwo(len))
    }
}

/// Splits a signal into contiguous, non-overlapping frames.
///
/// A trailing partial frame is zero-padded and marked via [`Frame::valid_len`].
pub fn segment(signal: &TimeSignal, frame_len: usize) -> Result<Vec<Frame>> {
    check_power_of_two(frame_len)?;
    if signal.is_empty() {
        return Err(Error::SignalTooShort { len: 0, needed: 1 });
    }
    Ok(signal
        .samples()
        .chunks(frame_len)
        .enumerate()
        .map(|(index, chunk)| {
            let mut samples = chunk.to_vec();
            samples.resize(frame_len, 0.0);
            Frame { samples, index, valid_len: chunk.len() }
        })
        .collect())
}

/// In-place iterative radix-2 decimation-in-time FFT (forward, unnormalized).
pub fn fft_in_place(data: &mut [Complex64]) -> Result<()> {
    let n = data.len();
    check_power_of_two(n)?;

    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            data.swap(i, j);
        }
    }

    // twiddles for the full size; stage `len` strides through them
    let twiddles: Vec<Complex64> = (0..n / 2)
        .map(|k| Complex64::from_polar(1.0, -TAU * k as f64 / n as f64))
        .collect();

    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = twiddles[k * stride];
                let a = data[start + k];
                let b = data[start + k + half] * w;
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
    Ok(())
}

/// In-place inverse FFT including the `1/N` normalization.
pub fn ifft_in_place(data: &mut [Complex64]) -> Result<()> {
    data.iter_mut().for_each(|c| *c = c.conj());
    fft_in_place(data)?;
    let scale = 1.0 / data.len() as f64;
    data.iter_mut().for_each(|c| *c = c.conj() * scale);
    Ok(())
}

/// Forward transform of a real frame.
///
/// The output is made exactly Hermitian: bin `N-k` is the conjugate of bin `k`
/// bit for bit, and the DC and Nyquist bins are purely real.
pub fn fft(frame: &Frame) -> Result<ComplexSpectrum> {
    let mut bins: Vec<Complex64> = frame.samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_in_place(&mut bins)?;
    let n = bins.len();
    bins[0].im = 0.0;
    bins[n / 2].im = 0.0;
    for k in 1..n / 2 {
        bins[n - k] = bins[k].conj();
    }
    Ok(ComplexSpectrum { bins, frame_index: frame.index })
}

/// Inverse transform back to a real frame. Any imaginary residue is dropped.
pub fn ifft(spectrum: &ComplexSpectrum) -> Result<Frame> {
    let mut bins = spectrum.bins.clone();
    ifft_in_place(&mut bins)?;
    Ok(Frame::new(bins.into_iter().map(|c| c.re).collect(), spectrum.frame_index))
}

pub fn to_mag_phase(spectrum: &ComplexSpectrum) -> MagPhaseSpectrum {
    let (magnitudes, phases) = spectrum
        .bins
        .iter()
        .map(|c| {
            let mag = c.re.hypot(c.im);
            let phase = if mag == 0.0 { 0.0 } else { wrap_phase(c.im.atan2(c.re)) };
            (mag, phase)
        })
        .unzip();
    MagPhaseSpectrum { magnitudes, phases, frame_index: spectrum.frame_index }
}

pub fn from_mag_phase(mp: &MagPhaseSpectrum) -> ComplexSpectrum {
    let bins = mp
        .magnitudes
        .iter()
        .zip(&mp.phases)
        .map(|(&mag, &phase)| {
            let (sin, cos) = phase.sin_cos();
            Complex64::new(mag * cos, mag * sin)
        })
        .collect();
    ComplexSpectrum { bins, frame_index: mp.frame_index }
}

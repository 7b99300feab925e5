//! Linear band partitioning and the per-band subtraction gains.
//!
//! Each band gets an over-subtraction factor `α` driven by its segmental SNR
//! and a tweaking factor `δ` keyed on the band's upper frequency edge.

use crate::noise::NoiseProfile;
use crate::spectral::MagPhaseSpectrum;
use crate::{Error, Result};

pub const DEFAULT_BANDS: usize = 4;
/// Segmental SNR is clamped to `±SNR_CLAMP_DB`.
pub const SNR_CLAMP_DB: f64 = 40.0;
pub const ALPHA_MIN: f64 = 1.0;
pub const ALPHA_MAX: f64 = 5.0;

/// How the per-band SNR is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnrMode {
    /// `10 log10(Σ|Y|² / Σ|N|²)` over the band.
    #[default]
    EnergyRatio,
    /// `20 log10(max|Y| / max|N|)`, the comparator/register formulation.
    MaxAmplitude,
}

/// Inclusive `(begin, end)` bin ranges tiling `[0, n_bins - 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BandPartition {
    edges: Vec<(usize, usize)>,
    n_bins: usize,
}

impl BandPartition {
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn n_bands(&self) -> usize {
        self.edges.len()
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    /// Frequency of the bin just above `band`'s last bin for an `fft_len`-point
    /// transform: `(end + 1) * fs / fft_len`.
    pub fn upper_edge_hz(&self, band: usize, fft_len: usize, sample_rate: f64) -> f64 {
        (self.edges[band].1 + 1) as f64 * sample_rate / fft_len as f64
    }
}

/// Equal-width bands of `⌊n_bins / n_bands⌋` bins; the last absorbs the remainder.
pub fn partition(n_bins: usize, n_bands: usize) -> Result<BandPartition> {
    if n_bands == 0 || n_bands > n_bins {
        return Err(Error::InvalidBandCount { bands: n_bands, bins: n_bins });
    }
    let width = n_bins / n_bands;
    let edges = (0..n_bands)
        .map(|i| {
            let begin = i * width;
            let end = if i + 1 == n_bands { n_bins - 1 } else { begin + width - 1 };
            (begin, end)
        })
        .collect();
    Ok(BandPartition { edges, n_bins })
}

pub fn segmental_snr(signal_mag: &[f64], noise_mag: &[f64], mode: SnrMode) -> Result<f64> {
    if signal_mag.len() != noise_mag.len() {
        return Err(Error::LengthMismatch { expected: signal_mag.len(), actual: noise_mag.len() });
    }
    if signal_mag.is_empty() {
        return Err(Error::InvalidConfig("segmental SNR over an empty band".into()));
    }
    let (signal, noise, scale) = match mode {
        SnrMode::EnergyRatio => (
            signal_mag.iter().map(|y| y * y).sum::<f64>(),
            noise_mag.iter().map(|n| n * n).sum::<f64>(),
            10.0,
        ),
        SnrMode::MaxAmplitude => (
            signal_mag.iter().fold(0.0f64, |m, y| m.max(y.abs())),
            noise_mag.iter().fold(0.0f64, |m, n| m.max(n.abs())),
            20.0,
        ),
    };
    if noise == 0.0 {
        return Ok(SNR_CLAMP_DB);
    }
    if signal == 0.0 {
        return Ok(-SNR_CLAMP_DB);
    }
    Ok((scale * (signal / noise).log10()).clamp(-SNR_CLAMP_DB, SNR_CLAMP_DB))
}

/// `α = 4 - (3/20)·SNR`, limited to `[1, 5]`.
pub fn over_subtraction_factor(snr_db: f64) -> f64 {
    (4.0 - 0.15 * snr_db).clamp(ALPHA_MIN, ALPHA_MAX)
}

/// `δ` for a band whose upper edge is `band_upper_hz`.
///
/// Below 1 kHz: 1. From 1 kHz to `fs/2 - 2 kHz` inclusive: 2.5. Above: 1.5.
pub fn tweaking_factor(band_upper_hz: f64, sample_rate: f64) -> Result<f64> {
    let nyquist = sample_rate / 2.0;
    if band_upper_hz.is_nan() || band_upper_hz <= 0.0 || band_upper_hz > nyquist {
        return Err(Error::AboveNyquist { freq_hz: band_upper_hz, nyquist_hz: nyquist });
    }
    Ok(if band_upper_hz < 1000.0 {
        1.0
    } else if band_upper_hz <= nyquist - 2000.0 {
        2.5
    } else {
        1.5
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandGains {
    pub alpha: Vec<f64>,
    pub delta: Vec<f64>,
    pub snr_db: Vec<f64>,
}

impl BandGains {
    pub fn n_bands(&self) -> usize {
        self.alpha.len()
    }
}

/// Bin range of `band` within the half spectrum `0..=N/2`: the last band also
/// owns the Nyquist bin.
pub(crate) fn half_spectrum_range(
    partition: &BandPartition,
    band: usize,
) -> std::ops::RangeInclusive<usize> {
    let (begin, end) = partition.edges[band];
    if band + 1 == partition.n_bands() {
        begin..=partition.n_bins
    } else {
        begin..=end
    }
}

/// Gains from arbitrary per-bin signal and noise values over the half spectrum.
///
/// `delta` is forced to 1 for a single band spanning the whole spectrum.
pub(crate) fn gains_from_values(
    signal: &[f64],
    noise: &[f64],
    partition: &BandPartition,
    sample_rate: f64,
    mode: SnrMode,
) -> Result<BandGains> {
    let fft_len = 2 * partition.n_bins;
    let n_bands = partition.n_bands();
    let mut gains = BandGains {
        alpha: Vec::with_capacity(n_bands),
        delta: Vec::with_capacity(n_bands),
        snr_db: Vec::with_capacity(n_bands),
    };
    for band in 0..n_bands {
        let range = half_spectrum_range(partition, band);
        let snr = segmental_snr(&signal[range.clone()], &noise[range], mode)?;
        let delta = if n_bands == 1 {
            1.0
        } else {
            tweaking_factor(partition.upper_edge_hz(band, fft_len, sample_rate), sample_rate)?
        };
        gains.snr_db.push(snr);
        gains.alpha.push(over_subtraction_factor(snr));
        gains.delta.push(delta);
    }
    Ok(gains)
}

pub(crate) fn check_lengths(
    frame: &MagPhaseSpectrum,
    profile: &NoiseProfile,
    partition: &BandPartition,
) -> Result<()> {
    if frame.len() != profile.len() {
        return Err(Error::LengthMismatch { expected: frame.len(), actual: profile.len() });
    }
    if frame.len() != 2 * partition.n_bins() {
        return Err(Error::LengthMismatch {
            expected: 2 * partition.n_bins(),
            actual: frame.len(),
        });
    }
    Ok(())
}

/// Magnitude-spectrum gains for one frame.
///
/// The partition covers the `N/2` positive bins of an `N`-point frame.
pub fn band_gains(
    frame: &MagPhaseSpectrum,
    profile: &NoiseProfile,
    partition: &BandPartition,
    sample_rate: f64,
    mode: SnrMode,
) -> Result<BandGains> {
    check_lengths(frame, profile, partition)?;
    gains_from_values(&frame.magnitudes, profile.noise_mag(), partition, sample_rate, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn partition_examples() {
        assert_eq!(
            partition(128, 4).unwrap().edges(),
            &[(0, 31), (32, 63), (64, 95), (96, 127)]
        );
        assert_eq!(
            partition(130, 4).unwrap().edges(),
            &[(0, 31), (32, 63), (64, 95), (96, 129)]
        );
        assert_eq!(partition(8, 1).unwrap().edges(), &[(0, 7)]);
        assert!(partition(4, 5).is_err());
        assert!(partition(4, 0).is_err());
    }

    #[test]
    fn snr_examples() {
        let n = [0.5, 1.0, 2.0, 0.25];
        let y2: Vec<f64> = n.iter().map(|x| 2.0 * x).collect();
        for mode in [SnrMode::EnergyRatio, SnrMode::MaxAmplitude] {
            assert_eq!(segmental_snr(&n, &n, mode).unwrap(), 0.0);
            assert_abs_diff_eq!(segmental_snr(&y2, &n, mode).unwrap(), 6.0206, epsilon = 1e-4);
            assert_eq!(segmental_snr(&n, &[0.0; 4], mode).unwrap(), 40.0);
            assert_eq!(segmental_snr(&[0.0; 4], &n, mode).unwrap(), -40.0);
        }
        assert!(segmental_snr(&n, &n[..3], SnrMode::EnergyRatio).is_err());
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(over_subtraction_factor(-10.0), 5.0);
        assert_eq!(over_subtraction_factor(0.0), 4.0);
        assert_abs_diff_eq!(over_subtraction_factor(20.0), 1.0, epsilon = 1e-15);
        assert_eq!(over_subtraction_factor(30.0), 1.0);
        assert_abs_diff_eq!(over_subtraction_factor(-5.0), 4.75, epsilon = 1e-15);
    }

    #[test]
    fn delta_examples() {
        assert_eq!(tweaking_factor(500.0, 8000.0).unwrap(), 1.0);
        assert_eq!(tweaking_factor(1500.0, 8000.0).unwrap(), 2.5);
        assert_eq!(tweaking_factor(3500.0, 8000.0).unwrap(), 1.5);
        assert_eq!(tweaking_factor(1000.0, 8000.0).unwrap(), 2.5);
        assert_eq!(tweaking_factor(2000.0, 8000.0).unwrap(), 2.5);
        assert!(tweaking_factor(4500.0, 8000.0).is_err());
        assert!(tweaking_factor(0.0, 8000.0).is_err());
    }

    fn mp(mags: Vec<f64>) -> MagPhaseSpectrum {
        let n = mags.len();
        MagPhaseSpectrum::new(mags, vec![0.0; n], 0).unwrap()
    }

    #[test]
    fn band_gains_examples() {
        let mags: Vec<f64> = (0..256).map(|i| 1.0 + (i % 7) as f64).collect();
        let frame = mp(mags.clone());
        let part = partition(128, 4).unwrap();

        let same = NoiseProfile::new(mags, vec![0.0; 256], 5).unwrap();
        let g = band_gains(&frame, &same, &part, 8000.0, SnrMode::EnergyRatio).unwrap();
        assert_eq!(g.snr_db, vec![0.0; 4]);
        assert_eq!(g.alpha, vec![4.0; 4]);
        assert_eq!(g.delta, vec![2.5, 2.5, 1.5, 1.5]);

        let zero = NoiseProfile::zeros(256);
        let g = band_gains(&frame, &zero, &part, 8000.0, SnrMode::MaxAmplitude).unwrap();
        assert_eq!(g.snr_db, vec![40.0; 4]);
        assert_eq!(g.alpha, vec![1.0; 4]);

        assert!(band_gains(&mp(vec![1.0; 128]), &zero, &part, 8000.0, SnrMode::EnergyRatio).is_err());
    }

    proptest! {
        #[test]
        fn partition_tiles(n_bins in 1usize..=512, frac in 0.0f64..1.0) {
            let n_bands = 1 + ((n_bins - 1) as f64 * frac) as usize;
            let p = partition(n_bins, n_bands).unwrap();
            prop_assert_eq!(p.n_bands(), n_bands);
            let mut next = 0;
            for &(b, e) in p.edges() {
                prop_assert_eq!(b, next);
                prop_assert!(b <= e);
                next = e + 1;
            }
            prop_assert_eq!(next, n_bins);
        }

        #[test]
        fn alpha_monotone_and_bounded(a in -60.0f64..60.0, b in -60.0f64..60.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let (fa, fb) = (over_subtraction_factor(lo), over_subtraction_factor(hi));
            prop_assert!(fb <= fa);
            prop_assert!((1.0..=5.0).contains(&fa));
            prop_assert!((fa - fb).abs() <= 0.15 * (hi - lo) + 1e-12);
        }

        #[test]
        fn snr_scale_invariant(
            pairs in prop::collection::vec((0.01f64..10.0, 0.01f64..10.0), 1..20),
            c in 0.01f64..100.0,
        ) {
            let (y, n): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let cy: Vec<f64> = y.iter().map(|v| v * c).collect();
            let cn: Vec<f64> = n.iter().map(|v| v * c).collect();
            for mode in [SnrMode::EnergyRatio, SnrMode::MaxAmplitude] {
                let a = segmental_snr(&y, &n, mode).unwrap();
                let b = segmental_snr(&cy, &cn, mode).unwrap();
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }

        #[test]
        fn delta_values(f in 1.0f64..8000.0, wide in any::<bool>()) {
            let fs = if wide { 16000.0 } else { 8000.0 };
            if f <= fs / 2.0 {
                let d = tweaking_factor(f, fs).unwrap();
                prop_assert!(d == 1.0 || d == 1.5 || d == 2.5);
            } else {
                prop_assert!(tweaking_factor(f, fs).is_err());
            }
        }

        #[test]
        fn band_gains_invariants(
            mags in prop::collection::vec(0.0f64..5.0, 64),
            noise in prop::collection::vec(0.0f64..5.0, 64),
            bands in 1usize..=8,
            max_mode in any::<bool>(),
        ) {
            let mode = if max_mode { SnrMode::MaxAmplitude } else { SnrMode::EnergyRatio };
            let part = partition(32, bands).unwrap();
            let profile = NoiseProfile::new(noise, vec![0.0; 64], 1).unwrap();
            let g = band_gains(&mp(mags), &profile, &part, 16000.0, mode).unwrap();
            prop_assert_eq!(g.n_bands(), bands);
            for (&a, &d) in g.alpha.iter().zip(&g.delta) {
                prop_assert!((1.0..=5.0).contains(&a));
                prop_assert!(d == 1.0 || d == 1.5 || d == 2.5);
            }
        }
    }
}

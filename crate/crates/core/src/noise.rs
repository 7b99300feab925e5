//! Noise spectrum estimation from the leading noise-only frames.
//!
//! The first `k` spectra are "written" into the profile; every later frame
//! passes through untouched. Magnitudes are averaged arithmetically, phases
//! circularly (angle of the mean unit phasor).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::spectral::{wrap_phase, MagPhaseSpectrum};
use crate::{Error, Result};

/// Default number of leading frames assumed to be noise only.
pub const DEFAULT_NOISE_FRAMES: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseProfile {
    noise_mag: Vec<f64>,
    noise_phase: Vec<f64>,
    frames_used: usize,
}

impl NoiseProfile {
    pub fn new(noise_mag: Vec<f64>, noise_phase: Vec<f64>, frames_used: usize) -> Result<Self> {
        if noise_mag.len() != noise_phase.len() {
            return Err(Error::LengthMismatch {
                expected: noise_mag.len(),
                actual: noise_phase.len(),
            });
        }
        if frames_used == 0 {
            return Err(Error::InvalidConfig("noise profile needs at least one frame".into()));
        }
        if noise_mag.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::InvalidConfig("noise magnitudes must be finite and >= 0".into()));
        }
        if noise_phase.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidConfig("noise phases must be finite".into()));
        }
        let noise_phase = noise_phase.into_iter().map(wrap_phase).collect();
        Ok(Self { noise_mag, noise_phase, frames_used })
    }

    /// All-zero profile: subtraction becomes the identity.
    pub fn zeros(len: usize) -> Self {
        Self {
            noise_mag: vec![0.0; len],
            noise_phase: vec![0.0; len],
            frames_used: 1,
        }
    }

    pub fn noise_mag(&self) -> &[f64] {
        &self.noise_mag
    }

    pub fn noise_phase(&self) -> &[f64] {
        &self.noise_phase
    }

    pub fn frames_used(&self) -> usize {
        self.frames_used
    }

    pub fn len(&self) -> usize {
        self.noise_mag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.noise_mag.is_empty()
    }

    /// Plain-text table, one `bin magnitude phase` row per bin.
    pub fn to_table(&self) -> String {
        let mut out = format!("# frames_used {}\n# bin magnitude phase\n", self.frames_used);
        for (bin, (m, p)) in self.noise_mag.iter().zip(&self.noise_phase).enumerate() {
            let _ = writeln!(out, "{bin} {m:e} {p:e}");
        }
        out
    }

    pub fn from_table(text: &str) -> Result<Self> {
        let mut frames_used = None;
        let mut mags = Vec::new();
        let mut phases = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(v) = comment.trim().strip_prefix("frames_used") {
                    frames_used = Some(v.trim().parse::<usize>().map_err(|e| {
                        Error::MalformedProfile(format!("line {}: {e}", lineno + 1))
                    })?);
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [bin, mag, phase] = fields[..] else {
                return Err(Error::MalformedProfile(format!(
                    "line {}: expected 3 columns",
                    lineno + 1
                )));
            };
            let parse_err = |e: &dyn std::fmt::Display| {
                Error::MalformedProfile(format!("line {}: {e}", lineno + 1))
            };
            let bin: usize = bin.parse().map_err(|e| parse_err(&e))?;
            if bin != mags.len() {
                return Err(Error::MalformedProfile(format!(
                    "line {}: expected bin {}, found {bin}",
                    lineno + 1,
                    mags.len()
                )));
            }
            mags.push(mag.parse::<f64>().map_err(|e| parse_err(&e))?);
            phases.push(phase.parse::<f64>().map_err(|e| parse_err(&e))?);
        }
        Self::new(mags, phases, frames_used.unwrap_or(1))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_table())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_table(&fs::read_to_string(path)?)
    }
}

/// Builds the profile from the first `k` spectra.
pub fn estimate_noise(frames: &[MagPhaseSpectrum], k: usize) -> Result<NoiseProfile> {
    if k == 0 {
        return Err(Error::InvalidConfig("noise frame count must be at least 1".into()));
    }
    if frames.len() < k {
        return Err(Error::InsufficientNoiseFrames { needed: k, available: frames.len() });
    }
    let leading = &frames[..k];
    let n = leading[0].len();
    if let Some(bad) = leading.iter().find(|f| f.len() != n) {
        return Err(Error::LengthMismatch { expected: n, actual: bad.len() });
    }

    if k == 1 {
        return NoiseProfile::new(leading[0].magnitudes.clone(), leading[0].phases.clone(), 1);
    }

    let mut mag_sum = vec![0.0; n];
    let mut cos_sum = vec![0.0; n];
    let mut sin_sum = vec![0.0; n];
    for frame in leading {
        for b in 0..n {
            mag_sum[b] += frame.magnitudes[b];
            let (s, c) = frame.phases[b].sin_cos();
            cos_sum[b] += c;
            sin_sum[b] += s;
        }
    }
    let noise_mag = mag_sum.into_iter().map(|m| m / k as f64).collect();
    let noise_phase = sin_sum
        .iter()
        .zip(&cos_sum)
        .map(|(&s, &c)| if s == 0.0 && c == 0.0 { 0.0 } else { wrap_phase(s.atan2(c)) })
        .collect();
    NoiseProfile::new(noise_mag, noise_phase, k)
}

/// Exponential refresh of the magnitude estimate. Phases are left frozen.
///
/// `weight = 0` keeps the profile as is.
pub fn update_noise(profile: &NoiseProfile, frame: &MagPhaseSpectrum, weight: f64) -> Result<NoiseProfile> {
    if !(0.0..=1.0).contains(&weight) {
        return Err(Error::InvalidConfig(format!("update weight {weight} outside [0, 1]")));
    }
    if frame.len() != profile.len() {
        return Err(Error::LengthMismatch { expected: profile.len(), actual: frame.len() });
    }
    if weight == 0.0 {
        return Ok(profile.clone());
    }
    let noise_mag = profile
        .noise_mag
        .iter()
        .zip(&frame.magnitudes)
        .map(|(&old, &new)| if weight == 1.0 { new } else { (1.0 - weight) * old + weight * new })
        .collect();
    Ok(NoiseProfile {
        noise_mag,
        noise_phase: profile.noise_phase.clone(),
        frames_used: profile.frames_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn spectrum(mags: Vec<f64>, phases: Vec<f64>) -> MagPhaseSpectrum {
        MagPhaseSpectrum::new(mags, phases, 0).unwrap()
    }

    #[test]
    fn single_frame_profile_is_that_frame() {
        let f = spectrum(vec![1.0, 2.5, 0.0], vec![0.3, -2.0, PI]);
        let p = estimate_noise(&[f.clone(), spectrum(vec![9.0; 3], vec![0.0; 3])], 1).unwrap();
        assert_eq!(p.noise_mag(), &f.magnitudes[..]);
        assert_eq!(p.noise_phase(), &f.phases[..]);
        assert_eq!(p.frames_used(), 1);
    }

    #[test]
    fn magnitude_mean_and_circular_phase_mean() {
        let frames = [spectrum(vec![2.0], vec![3.1]), spectrum(vec![4.0], vec![-3.1])];
        let p = estimate_noise(&frames, 2).unwrap();
        assert_eq!(p.noise_mag()[0], 3.0);
        assert_abs_diff_eq!(p.noise_phase()[0], PI, epsilon = 1e-12);
    }

    #[test]
    fn insufficient_frames_is_an_error() {
        let frames = [spectrum(vec![1.0], vec![0.0])];
        assert!(matches!(
            estimate_noise(&frames, 5),
            Err(Error::InsufficientNoiseFrames { needed: 5, available: 1 })
        ));
        assert!(estimate_noise(&frames, 0).is_err());
    }

    #[test]
    fn update_weights() {
        let p = NoiseProfile::new(vec![2.0, 1.0], vec![0.1, 0.2], 5).unwrap();
        let f = spectrum(vec![4.0, 3.0], vec![1.0, 1.0]);
        assert_eq!(update_noise(&p, &f, 0.0).unwrap(), p);
        assert_eq!(update_noise(&p, &f, 1.0).unwrap().noise_mag(), &[4.0, 3.0]);
        assert_eq!(update_noise(&p, &f, 0.5).unwrap().noise_mag()[0], 3.0);
        assert!(update_noise(&p, &f, 1.5).is_err());
    }

    #[test]
    fn table_round_trip() {
        let p = NoiseProfile::new(vec![0.1, 3.0e-9, 12.75], vec![-3.0, PI, 0.0], 5).unwrap();
        let q = NoiseProfile::from_table(&p.to_table()).unwrap();
        assert_eq!(p, q);
        assert!(NoiseProfile::from_table("0 1.0\n").is_err());
        assert!(NoiseProfile::from_table("1 1.0 0.0\n").is_err());
    }

    fn arb_frames() -> impl Strategy<Value = Vec<MagPhaseSpectrum>> {
        (1usize..6, 1usize..9).prop_flat_map(|(k, n)| {
            prop::collection::vec(
                (prop::collection::vec(0.0f64..10.0, n), prop::collection::vec(-PI..PI, n))
                    .prop_map(|(m, p)| MagPhaseSpectrum::new(m, p, 0).unwrap()),
                k,
            )
        })
    }

    proptest! {
        #[test]
        fn profile_invariants(frames in arb_frames()) {
            let k = frames.len();
            let p = estimate_noise(&frames, k).unwrap();
            prop_assert_eq!(p.len(), frames[0].len());
            prop_assert!(p.noise_mag().iter().all(|&m| m >= 0.0));
            prop_assert!(p.noise_phase().iter().all(|&x| x > -PI && x <= PI));
            prop_assert_eq!(p.frames_used(), k);
        }

        #[test]
        fn permutation_invariant(frames in arb_frames()) {
            let k = frames.len();
            let mut reversed = frames.clone();
            reversed.reverse();
            let a = estimate_noise(&frames, k).unwrap();
            let b = estimate_noise(&reversed, k).unwrap();
            for (x, y) in a.noise_mag().iter().zip(b.noise_mag()) {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
            }
            for (x, y) in a.noise_phase().iter().zip(b.noise_phase()) {
                let d = wrap_phase(x - y).abs();
                prop_assert!(d <= 1e-9);
            }
        }

        #[test]
        fn identical_frames_reproduce_frame(frames in arb_frames(), copies in 1usize..6) {
            let f = frames[0].clone();
            let repeated = vec![f.clone(); copies];
            let p = estimate_noise(&repeated, copies).unwrap();
            for (x, y) in p.noise_mag().iter().zip(&f.magnitudes) {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + y));
            }
            for (x, y) in p.noise_phase().iter().zip(&f.phases) {
                prop_assert!(wrap_phase(x - y).abs() <= 1e-9);
            }
        }
    }
}

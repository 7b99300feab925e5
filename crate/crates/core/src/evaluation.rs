//! Noise mixing at a target SNR, reference-based output SNR and the
//! four-algorithm comparison sweep.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::enhancer::{enhance_with, Algorithm, EnhancerConfig};
use crate::par::{self, Execution};
use crate::spectral::TimeSignal;
use crate::{Error, Result};

/// Output SNR reported when the processed signal matches the reference exactly.
pub const OUTPUT_SNR_CLAMP_DB: f64 = 100.0;

fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Noise repeated cyclically (or truncated) to `len` samples.
fn fit_noise(noise: &[f64], len: usize) -> Vec<f64> {
    noise.iter().cycle().take(len).copied().collect()
}

/// Returns `clean + g·noise` with `g` chosen so that the clean-to-noise power
/// ratio equals `target_snr_db`.
pub fn mix_at_snr(clean: &TimeSignal, noise: &TimeSignal, target_snr_db: f64) -> Result<TimeSignal> {
    let (mixture, _) = mix_components(clean, noise, target_snr_db)?;
    Ok(mixture)
}

/// Like [`mix_at_snr`], also returning the scaled noise that was added.
pub fn mix_components(
    clean: &TimeSignal,
    noise: &TimeSignal,
    target_snr_db: f64,
) -> Result<(TimeSignal, TimeSignal)> {
    if clean.sample_rate() != noise.sample_rate() {
        return Err(Error::InvalidSignal(format!(
            "sample rates differ: clean {} Hz, noise {} Hz",
            clean.sample_rate(),
            noise.sample_rate()
        )));
    }
    if !target_snr_db.is_finite() {
        return Err(Error::InvalidConfig(format!("target SNR {target_snr_db} is not finite")));
    }
    let clean_energy = energy(clean.samples());
    if clean_energy == 0.0 {
        return Err(Error::DegenerateMix("clean signal is silent".into()));
    }
    if noise.is_empty() {
        return Err(Error::DegenerateMix("noise signal is empty".into()));
    }
    let fitted = fit_noise(noise.samples(), clean.len());
    let noise_energy = energy(&fitted);
    if noise_energy == 0.0 {
        return Err(Error::DegenerateMix("noise signal is silent".into()));
    }
    let gain = (clean_energy / (noise_energy * 10f64.powf(target_snr_db / 10.0))).sqrt();
    let scaled: Vec<f64> = fitted.into_iter().map(|n| gain * n).collect();
    let mixture = clean.samples().iter().zip(&scaled).map(|(c, n)| c + n).collect();
    Ok((
        TimeSignal::new(mixture, clean.sample_rate())?,
        TimeSignal::new(scaled, clean.sample_rate())?,
    ))
}

/// Power ratio of two signals in dB.
pub fn power_ratio_db(signal: &TimeSignal, noise: &TimeSignal) -> f64 {
    10.0 * (energy(signal.samples()) / energy(noise.samples())).log10()
}

/// `10 log10(Σ clean² / Σ (processed - clean)²)`, clamped to ±100 dB.
pub fn output_snr(clean: &TimeSignal, processed: &TimeSignal) -> Result<f64> {
    if clean.len() != processed.len() {
        return Err(Error::LengthMismatch { expected: clean.len(), actual: processed.len() });
    }
    let signal = energy(clean.samples());
    let error: f64 = clean
        .samples()
        .iter()
        .zip(processed.samples())
        .map(|(c, p)| (p - c) * (p - c))
        .sum();
    if error == 0.0 {
        return Ok(OUTPUT_SNR_CLAMP_DB);
    }
    if signal == 0.0 {
        return Ok(-OUTPUT_SNR_CLAMP_DB);
    }
    Ok((10.0 * (signal / error).log10()).clamp(-OUTPUT_SNR_CLAMP_DB, OUTPUT_SNR_CLAMP_DB))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrRow {
    pub noise: String,
    pub input_snr_db: f64,
    pub algorithm: String,
    pub output_snr_db: f64,
}

/// One row per (noise, input level, algorithm).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SnrReport {
    pub rows: Vec<SnrRow>,
}

impl SnrReport {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        if self.rows.is_empty() {
            buf.extend_from_slice(b"noise,input_snr_db,algorithm,output_snr_db\n");
        } else {
            self.write_csv(&mut buf)?;
        }
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let rows = r.deserialize().collect::<std::result::Result<Vec<SnrRow>, _>>()?;
        Ok(Self { rows })
    }

    /// Output SNR for one cell, if present.
    pub fn output_for(&self, input_snr_db: f64, algorithm: Algorithm) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.input_snr_db == input_snr_db && r.algorithm == algorithm.name())
            .map(|r| r.output_snr_db)
    }
}

/// Mixes `clean` with `noise` at each level, runs all four algorithms and
/// measures the output SNR against `clean`.
///
/// `base` supplies every setting except the algorithm. Cells may run
/// concurrently; rows come back ordered by level, then [`Algorithm::ALL`].
pub fn compare(
    clean: &TimeSignal,
    noise: &TimeSignal,
    noise_name: &str,
    input_snrs_db: &[f64],
    base: &EnhancerConfig,
    exec: Execution,
) -> Result<SnrReport> {
    let mixtures = input_snrs_db
        .iter()
        .map(|&snr| mix_at_snr(clean, noise, snr))
        .collect::<Result<Vec<_>>>()?;

    let cells: Vec<(usize, Algorithm)> = (0..input_snrs_db.len())
        .flat_map(|i| Algorithm::ALL.into_iter().map(move |a| (i, a)))
        .collect();

    let rows = par::try_map(exec, &cells, |&(level, algorithm)| {
        let mut config = base.clone();
        config.algorithm = algorithm;
        if !algorithm.is_multiband() {
            config.n_bands = 1;
        }
        // cells already run in parallel; keep the frame loop sequential
        let enhanced = enhance_with(&mixtures[level], &config, Execution::Sequential)?;
        Ok::<_, Error>(SnrRow {
            noise: noise_name.to_string(),
            input_snr_db: input_snrs_db[level],
            algorithm: algorithm.name().to_string(),
            output_snr_db: output_snr(clean, &enhanced)?,
        })
    })?;
    Ok(SnrReport { rows })
}

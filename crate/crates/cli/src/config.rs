//! Optional TOML config file. Every key is optional; command-line flags win
//! over the file, which wins over library defaults.

use std::fs;
use std::path::Path;

use clap::ValueEnum;
use mbmpss::{Algorithm, Arithmetic, EnhancerConfig, Gamma, PhaseAlpha, SnrMode};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmArg {
    Mss,
    Mbmss,
    Mpss,
    Mbmpss,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Mss => Algorithm::Mss,
            AlgorithmArg::Mbmss => Algorithm::Mbmss,
            AlgorithmArg::Mpss => Algorithm::Mpss,
            AlgorithmArg::Mbmpss => Algorithm::Mbmpss,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnrModeArg {
    Energy,
    MaxAmplitude,
}

impl From<SnrModeArg> for SnrMode {
    fn from(m: SnrModeArg) -> Self {
        match m {
            SnrModeArg::Energy => SnrMode::EnergyRatio,
            SnrModeArg::MaxAmplitude => SnrMode::MaxAmplitude,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithmeticArg {
    Float,
    Cordic,
}

impl From<ArithmeticArg> for Arithmetic {
    fn from(a: ArithmeticArg) -> Self {
        match a {
            ArithmeticArg::Float => Arithmetic::FloatReference,
            ArithmeticArg::Cordic => Arithmetic::FixedCordic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaArg {
    Magnitude,
    Power,
}

impl From<GammaArg> for Gamma {
    fn from(g: GammaArg) -> Self {
        match g {
            GammaArg::Magnitude => Gamma::Magnitude,
            GammaArg::Power => Gamma::Power,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseAlphaArg {
    PerPath,
    Shared,
}

impl From<PhaseAlphaArg> for PhaseAlpha {
    fn from(p: PhaseAlphaArg) -> Self {
        match p {
            PhaseAlphaArg::PerPath => PhaseAlpha::PerPath,
            PhaseAlphaArg::Shared => PhaseAlpha::Shared,
        }
    }
}

/// Enhancer settings, used both for the `[enhancer]` table of the config file
/// and for command-line overrides.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, clap::Args)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct EnhancerSettings {
    #[arg(long, value_enum)]
    pub algorithm: Option<AlgorithmArg>,
    /// Number of sub-bands (multi-band algorithms only)
    #[arg(long)]
    pub bands: Option<usize>,
    /// Frame length in samples, a power of two
    #[arg(long)]
    pub frame: Option<usize>,
    /// Spectral floor, in [0, 1]
    #[arg(long)]
    pub beta: Option<f64>,
    /// Leading frames used for the noise estimate
    #[arg(long)]
    pub noise_frames: Option<usize>,
    #[arg(long, value_enum)]
    pub snr_mode: Option<SnrModeArg>,
    #[arg(long, value_enum)]
    pub arithmetic: Option<ArithmeticArg>,
    #[arg(long, value_enum)]
    pub gamma: Option<GammaArg>,
    #[arg(long, value_enum)]
    pub phase_alpha: Option<PhaseAlphaArg>,
    /// Weight of the running noise update after the leading frames
    #[arg(long)]
    pub noise_update: Option<f64>,
    #[arg(long)]
    pub cordic_iterations: Option<u32>,
}

impl EnhancerSettings {
    /// Fields set in `self` win over `lower`.
    pub fn over(self, lower: EnhancerSettings) -> EnhancerSettings {
        EnhancerSettings {
            algorithm: self.algorithm.or(lower.algorithm),
            bands: self.bands.or(lower.bands),
            frame: self.frame.or(lower.frame),
            beta: self.beta.or(lower.beta),
            noise_frames: self.noise_frames.or(lower.noise_frames),
            snr_mode: self.snr_mode.or(lower.snr_mode),
            arithmetic: self.arithmetic.or(lower.arithmetic),
            gamma: self.gamma.or(lower.gamma),
            phase_alpha: self.phase_alpha.or(lower.phase_alpha),
            noise_update: self.noise_update.or(lower.noise_update),
            cordic_iterations: self.cordic_iterations.or(lower.cordic_iterations),
        }
    }

    pub fn to_config(&self) -> EnhancerConfig {
        let algorithm = self.algorithm.map(Algorithm::from).unwrap_or(Algorithm::Mbmpss);
        let mut config = EnhancerConfig::new(algorithm);
        if let Some(v) = self.bands {
            config.n_bands = v;
        }
        if let Some(v) = self.frame {
            config.frame_len = v;
        }
        if let Some(v) = self.beta {
            config.beta = v;
        }
        if let Some(v) = self.noise_frames {
            config.noise_frames = v;
        }
        if let Some(v) = self.snr_mode {
            config.snr_mode = v.into();
        }
        if let Some(v) = self.arithmetic {
            config.arithmetic = v.into();
        }
        if let Some(v) = self.gamma {
            config.gamma = v.into();
        }
        if let Some(v) = self.phase_alpha {
            config.phase_alpha = v.into();
        }
        if let Some(v) = self.noise_update {
            config.noise_update_weight = v;
        }
        if let Some(v) = self.cordic_iterations {
            config.cordic_iterations = v;
        }
        config
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub enhancer: EnhancerSettings,
    pub clock_mhz: Option<f64>,
    pub seed: Option<u64>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_override_defaults() {
        let file = FileConfig::parse(
            r#"
            clock_mhz = 50
            [enhancer]
            algorithm = "mpss"
            beta = 0.02
            snr-mode = "max-amplitude"
            "#,
        )
        .unwrap();
        let flags = EnhancerSettings { beta: Some(0.1), ..Default::default() };
        let config = flags.over(file.enhancer).to_config();
        assert_eq!(config.algorithm, Algorithm::Mpss);
        assert_eq!(config.beta, 0.1);
        assert_eq!(config.snr_mode, SnrMode::MaxAmplitude);
        assert_eq!(config.frame_len, 256);
        assert_eq!(file.clock_mhz, Some(50.0));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(FileConfig::parse("[enhancer]\nbogus = 1\n").is_err());
        assert!(FileConfig::parse("[enhancer]\nalgorithm = \"wiener\"\n").is_err());
    }

    #[test]
    fn empty_file_means_defaults() {
        let file = FileConfig::parse("").unwrap();
        assert_eq!(file.enhancer.to_config(), EnhancerConfig::default());
    }
}

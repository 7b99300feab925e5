mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mbmpss::cordic::{total_pipeline_delay, LatencyModel};
use mbmpss::enhancer::enhance_detailed;
use mbmpss::evaluation::{compare, mix_components, power_ratio_db};
use mbmpss::synth::{speech_surrogate, white_noise, SurrogateParams};
use mbmpss::wav::{read_wav, write_wav};
use mbmpss::{Error, Execution, TimeSignal};

use config::{EnhancerSettings, FileConfig};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "mbmpss", version, about = "Multi-band magnitude and phase spectral subtraction")]
struct Cli {
    /// TOML config file; command-line flags take precedence over it
    #[arg(long, global = true, env = "MBMPSS_CONFIG")]
    config: Option<PathBuf>,
    /// Process frames and comparison cells on one thread
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enhance a noisy WAV file
    Enhance {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        settings: EnhancerSettings,
    },
    /// Mix clean speech with noise at a target SNR
    Mix {
        clean: PathBuf,
        noise: PathBuf,
        output: PathBuf,
        /// Target SNR in dB
        #[arg(long, allow_hyphen_values = true)]
        snr: f64,
    },
    /// Run all four algorithms over a list of input SNRs and write a CSV report
    Compare {
        clean: PathBuf,
        noise: PathBuf,
        /// Comma-separated input SNRs in dB
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-3,0,3,8,10")]
        snrs: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Label for the noise column; defaults to the noise file stem
        #[arg(long)]
        noise_name: Option<String>,
        #[command(flatten)]
        settings: EnhancerSettings,
    },
    /// Print the per-block pipeline delays and the total
    Latency {
        #[arg(long)]
        clock_mhz: Option<f64>,
    },
    /// Write a seeded synthetic signal
    Synth {
        #[command(subcommand)]
        kind: SynthKind,
    },
}

#[derive(Debug, Subcommand)]
enum SynthKind {
    /// Harmonic speech surrogate with a silent lead-in
    Speech {
        output: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 8000)]
        rate: u32,
        #[arg(long, default_value_t = 3.0)]
        duration: f64,
    },
    /// Gaussian white noise
    White {
        output: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 8000)]
        rate: u32,
        #[arg(long, default_value_t = 3.0)]
        duration: f64,
        #[arg(long, default_value_t = 0.1)]
        std_dev: f64,
    },
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::NotPowerOfTwo(_) | Error::InvalidBandCount { .. } => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Data(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DATA)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path).map_err(Failure::Usage)?,
        None => FileConfig::default(),
    };
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };

    match cli.command {
        Command::Enhance { input, output, settings } => {
            let (config, warnings) = settings.over(file.enhancer).to_config().normalized();
            for w in warnings {
                eprintln!("warning: {w}");
            }
            config.validate()?;
            let noisy = load(&input)?;
            let result = enhance_detailed(&noisy, &config, None, exec)?;
            write_wav(&result.signal, &output)?;

            println!(
                "{}: {} frames of {} samples at {} Hz -> {}",
                config.algorithm,
                result.frames.len(),
                config.frame_len,
                noisy.sample_rate(),
                output.display()
            );
            if let Some(first) = result.frames.first() {
                let gains = &first.per_band_gains;
                println!("first frame:");
                println!("  band  snr_db   alpha  delta");
                for b in 0..gains.n_bands() {
                    println!(
                        "  {b:>4}  {:>6.2}  {:>6.3}  {:>5.2}",
                        gains.snr_db[b], gains.alpha[b], gains.delta[b]
                    );
                }
            }
        }
        Command::Mix { clean, noise, output, snr } => {
            let clean = load(&clean)?;
            let noise = load(&noise)?;
            let (mixture, scaled_noise) = mix_components(&clean, &noise, snr)?;
            write_wav(&mixture, &output)?;
            println!(
                "target {snr:.2} dB, measured {:.4} dB -> {}",
                power_ratio_db(&clean, &scaled_noise),
                output.display()
            );
        }
        Command::Compare { clean, noise, snrs, out, noise_name, settings } => {
            let base = settings.over(file.enhancer).to_config();
            base.validate()?;
            let name = noise_name.unwrap_or_else(|| stem(&noise));
            let clean = load(&clean)?;
            let noise = load(&noise)?;
            let report = compare(&clean, &noise, &name, &snrs, &base, exec)?;
            let writer = std::fs::File::create(&out).map_err(|e| Failure::Data(format!("{}: {e}", out.display())))?;
            report.write_csv(writer)?;
            println!("{:>9}  {:>7}  {:>7}", "input_db", "alg", "out_db");
            for row in &report.rows {
                println!("{:>9.2}  {:>7}  {:>7.2}", row.input_snr_db, row.algorithm, row.output_snr_db);
            }
            println!("{} rows -> {}", report.rows.len(), out.display());
        }
        Command::Latency { clock_mhz } => {
            let mhz = clock_mhz.or(file.clock_mhz).unwrap_or(100.0);
            if !(mhz.is_finite() && mhz > 0.0) {
                return Err(Failure::Usage(format!("clock must be positive (got {mhz} MHz)")));
            }
            let clock_hz = (mhz * 1e6).round() as u64;
            let model = LatencyModel::default().with_clock_hz(clock_hz);
            let total = total_pipeline_delay(&model)?;
            for (name, delay) in model.blocks() {
                println!("{name:<28} {delay:>5}");
            }
            println!("{} units, {} us", total.units, fmt_micros(total.micros(clock_hz)));
        }
        Command::Synth { kind } => {
            let (signal, output) = match kind {
                SynthKind::Speech { output, seed, rate, duration } => {
                    let params = SurrogateParams {
                        sample_rate: rate,
                        duration_s: duration,
                        seed: seed.or(file.seed).unwrap_or(SurrogateParams::default().seed),
                        ..SurrogateParams::default()
                    };
                    check_synth(rate, duration)?;
                    (speech_surrogate(&params), output)
                }
                SynthKind::White { output, seed, rate, duration, std_dev } => {
                    check_synth(rate, duration)?;
                    if !(std_dev.is_finite() && std_dev >= 0.0) {
                        return Err(Failure::Usage(format!("invalid standard deviation {std_dev}")));
                    }
                    let len = (duration * rate as f64).round() as usize;
                    (white_noise(rate, len, std_dev, seed.or(file.seed).unwrap_or(0)), output)
                }
            };
            write_wav(&signal, &output)?;
            println!("{} samples at {} Hz -> {}", signal.len(), signal.sample_rate(), output.display());
        }
    }
    Ok(())
}

fn load(path: &Path) -> Result<TimeSignal, Failure> {
    read_wav(path)
        .map(|w| w.into_signal())
        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn check_synth(rate: u32, duration: f64) -> Result<(), Failure> {
    if rate == 0 || !(duration.is_finite() && duration > 0.0) {
        return Err(Failure::Usage("rate and duration must be positive".into()));
    }
    Ok(())
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "noise".into())
}

/// Microseconds with trailing zeros trimmed: 6.04, 3.02, 12.
fn fmt_micros(us: f64) -> String {
    let s = format!("{us:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

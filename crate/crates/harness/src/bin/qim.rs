use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use qim_core::capture::{load_capture, save_capture, CaptureFormat};
use qim_core::qim::{step_from_signal, DEFAULT_DC_ALPHA};
use qim_core::{BitMessage, DitherSign, QimConfig, Variant};
use qim_harness::runner::{decode_adapted, embed_adapted};
use qim_harness::{emit_csv, emit_series, emit_spectrum, run_plan, run_spectrum, ExperimentPlan, Figure};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "qim", version, about = "Embed data in broadcast baseband signals with QIM")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep plan and write results.csv plus BER, throughput and
    /// distortion series.
    Run {
        plan: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the plan seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write the PSD of the pulse-shaped composite for each variant and N.
    Spectrum {
        plan: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Embed a hex-encoded message into a recorded capture.
    EmbedFile {
        /// Capture to embed into (.f32 with JSON sidecar, or .wav).
        #[arg(long)]
        host: PathBuf,
        /// Text file holding the message as hex.
        #[arg(long)]
        message: PathBuf,
        /// Embedding settings (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Output capture; same formats as the host.
        #[arg(long)]
        out: PathBuf,
        /// Where to write the key needed by decode-file. Defaults to
        /// `<out>.key.toml`.
        #[arg(long)]
        key: Option<PathBuf>,
    },
    /// Recover a message from a capture using the key from embed-file.
    DecodeFile {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        key: PathBuf,
        /// Hex output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Settings for embed-file. The step defaults to `2·max|s|/N` of the host.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbedSettings {
    levels: usize,
    variant: Variant,
    alpha: Option<f64>,
    #[serde(default = "one")]
    samples_per_bit: usize,
    step: Option<f64>,
    #[serde(default)]
    dither_sign: DitherSign,
}

fn one() -> usize {
    1
}

/// Everything the receiver needs besides the capture.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Key {
    message_bits: usize,
    config: QimConfig,
}

fn load_plan(path: &Path, seed: Option<u64>) -> anyhow::Result<ExperimentPlan> {
    let mut plan = ExperimentPlan::load(path).with_context(|| format!("loading plan {}", path.display()))?;
    if let Some(s) = seed {
        plan.seed = s;
    }
    Ok(plan)
}

fn run(plan: &Path, out: &Path, seed: Option<u64>) -> anyhow::Result<()> {
    let plan = load_plan(plan, seed)?;
    let results = run_plan(&plan)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let csv = out.join("results.csv");
    emit_csv(&results, &csv)?;
    let mut files = 1;
    for figure in [Figure::Ber, Figure::Throughput, Figure::Distortion] {
        files += emit_series(&results, figure, out)?.len();
    }
    let flagged: Vec<_> = results.iter().filter(|r| r.is_flagged()).collect();
    for r in flagged.iter().take(5) {
        eprintln!(
            "warning: {} N={} snr={} rate={} trial {}: {}",
            r.variant,
            r.levels,
            r.snr_db,
            r.bit_rate_bps,
            r.trial,
            r.error.as_deref().unwrap_or("")
        );
    }
    if flagged.len() > 5 {
        eprintln!("warning: {} more flagged rows", flagged.len() - 5);
    }
    println!("{} rows, {} files written to {}", results.len(), files, out.display());
    Ok(())
}

fn spectrum(plan: &Path, out: &Path, seed: Option<u64>) -> anyhow::Result<()> {
    let plan = load_plan(plan, seed)?;
    let results = run_spectrum(&plan)?;
    emit_spectrum(&results, out)?;
    for r in &results {
        println!(
            "{} N={}: out-of-band peak {:.1} dB below main lobe",
            r.variant, r.levels, -r.out_of_band_db
        );
    }
    Ok(())
}

fn read_message(path: &Path) -> anyhow::Result<BitMessage> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cleaned: String = text.split_whitespace().collect();
    let bytes = hex::decode(&cleaned).with_context(|| format!("{} is not valid hex", path.display()))?;
    if bytes.is_empty() {
        bail!("{} holds an empty message", path.display());
    }
    Ok(BitMessage::from_bytes(&bytes)?)
}

fn embed_file(host: &Path, message: &Path, config: &Path, out: &Path, key: Option<PathBuf>) -> anyhow::Result<()> {
    let capture = load_capture(host, CaptureFormat::from_path(host)?)?;
    let msg = read_message(message)?;
    let text = fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let settings: EmbedSettings = toml::from_str(&text).with_context(|| format!("parsing {}", config.display()))?;
    let step = match settings.step {
        Some(s) => s,
        None => step_from_signal(&capture, settings.levels)?,
    };
    let alpha = settings.alpha.unwrap_or(if settings.variant.is_compensated() {
        DEFAULT_DC_ALPHA
    } else {
        1.0
    });
    let cfg = QimConfig::new(settings.levels, step, settings.variant)
        .with_alpha(alpha)
        .with_samples_per_bit(settings.samples_per_bit)
        .with_dither_sign(settings.dither_sign);
    let composite = embed_adapted(&capture, &msg, &cfg)?;
    save_capture(&composite, out, CaptureFormat::from_path(out)?)?;
    let key_path = key.unwrap_or_else(|| {
        let mut p = out.as_os_str().to_owned();
        p.push(".key.toml");
        PathBuf::from(p)
    });
    let key = Key {
        message_bits: msg.len(),
        config: cfg,
    };
    fs::write(&key_path, toml::to_string(&key)?).with_context(|| format!("writing {}", key_path.display()))?;
    println!("embedded {} bits; key written to {}", msg.len(), key_path.display());
    Ok(())
}

fn decode_file(input: &Path, key: &Path, out: Option<PathBuf>) -> anyhow::Result<()> {
    let capture = load_capture(input, CaptureFormat::from_path(input)?)?;
    let text = fs::read_to_string(key).with_context(|| format!("reading {}", key.display()))?;
    let key: Key = toml::from_str(&text).with_context(|| format!("parsing {}", key.display()))?;
    let msg = decode_adapted(&capture, key.message_bits, &key.config)?;
    let encoded = hex::encode(msg.to_bytes());
    match out {
        Some(path) => fs::write(&path, format!("{encoded}\n")).with_context(|| format!("writing {}", path.display()))?,
        None => println!("{encoded}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { plan, out, seed } => run(&plan, &out, seed),
        Command::Spectrum { plan, out, seed } => spectrum(&plan, &out, seed),
        Command::EmbedFile {
            host,
            message,
            config,
            out,
            key,
        } => embed_file(&host, &message, &config, &out, key),
        Command::DecodeFile { input, key, out } => decode_file(&input, &key, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

//! Recorded-capture files.
//!
//! Raw captures are little-endian `f32`, interleaved I/Q for complex buffers,
//! with a JSON sidecar next to them holding `{sample_rate, domain}`. Real
//! audio-rate buffers can also be stored as 16-bit PCM mono WAV.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QimError, Result};
use crate::signal::{Domain, Samples, SignalBuffer};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaptureFormat {
    RawF32,
    Wav,
}

impl CaptureFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("f32") => Ok(CaptureFormat::RawF32),
            Some("wav") => Ok(CaptureFormat::Wav),
            other => Err(QimError::UnsupportedFormat(format!(
                "extension {:?} of {}",
                other.unwrap_or(""),
                path.display()
            ))),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    sample_rate: f64,
    domain: Domain,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn malformed(path: &Path, reason: impl Into<String>) -> QimError {
    QimError::MalformedCapture {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

pub fn save_capture(buffer: &SignalBuffer, path: &Path, format: CaptureFormat) -> Result<()> {
    match format {
        CaptureFormat::RawF32 => {
            let mut bytes = Vec::with_capacity(buffer.len() * 8);
            match buffer.samples() {
                Samples::Real(v) => {
                    for &x in v {
                        bytes.extend_from_slice(&(x as f32).to_le_bytes());
                    }
                }
                Samples::Complex(v) => {
                    for c in v {
                        bytes.extend_from_slice(&(c.re as f32).to_le_bytes());
                        bytes.extend_from_slice(&(c.im as f32).to_le_bytes());
                    }
                }
            }
            fs::write(path, bytes)?;
            let sidecar = Sidecar {
                sample_rate: buffer.sample_rate(),
                domain: buffer.domain(),
            };
            let json = serde_json::to_string_pretty(&sidecar)
                .map_err(|e| QimError::InvalidParameter(e.to_string()))?;
            fs::write(sidecar_path(path), json)?;
            Ok(())
        }
        CaptureFormat::Wav => {
            let samples = buffer
                .as_real()
                .map_err(|_| QimError::UnsupportedFormat("WAV holds real signals only".into()))?;
            if let Some(x) = samples.iter().find(|x| x.abs() > 1.0) {
                return Err(QimError::InvalidParameter(format!(
                    "WAV samples must lie in [-1, 1], found {x}"
                )));
            }
            let rate = buffer.sample_rate();
            if rate.fract() != 0.0 || rate > u32::MAX as f64 {
                return Err(QimError::UnsupportedFormat(format!(
                    "WAV needs an integer sample rate, got {rate}"
                )));
            }
            let wav_spec = hound::WavSpec {
                channels: 1,
                sample_rate: rate as u32,
                bits_per_sample: 16,
                sample_format: hound::SampleFormat::Int,
            };
            let mut writer = hound::WavWriter::create(path, wav_spec).map_err(|e| malformed(path, e.to_string()))?;
            for &x in samples {
                writer
                    .write_sample((x * i16::MAX as f64).round() as i16)
                    .map_err(|e| malformed(path, e.to_string()))?;
            }
            writer.finalize().map_err(|e| malformed(path, e.to_string()))?;
            Ok(())
        }
    }
}

pub fn load_capture(path: &Path, format: CaptureFormat) -> Result<SignalBuffer> {
    match format {
        CaptureFormat::RawF32 => {
            let bytes = fs::read(path)?;
            if bytes.is_empty() {
                return Err(malformed(path, "empty file"));
            }
            if bytes.len() % 4 != 0 {
                return Err(malformed(path, "length is not a multiple of 4 bytes"));
            }
            let sc = sidecar_path(path);
            if !sc.exists() {
                return Err(QimError::MissingSidecar(sc));
            }
            let sidecar: Sidecar = serde_json::from_str(&fs::read_to_string(&sc)?)
                .map_err(|e| malformed(&sc, e.to_string()))?;
            let values: Vec<f64> = bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
                .collect();
            let samples = match sidecar.domain {
                Domain::Real => Samples::Real(values),
                Domain::Complex => {
                    if !values.len().is_multiple_of(2) {
                        return Err(malformed(path, "odd number of values for I/Q data"));
                    }
                    Samples::Complex(values.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect())
                }
            };
            SignalBuffer::new(samples, sidecar.sample_rate).map_err(|e| malformed(path, e.to_string()))
        }
        CaptureFormat::Wav => {
            let mut reader = hound::WavReader::open(path).map_err(|e| malformed(path, e.to_string()))?;
            let spec = reader.spec();
            if spec.channels != 1 || spec.bits_per_sample != 16 || spec.sample_format != hound::SampleFormat::Int {
                return Err(malformed(path, "expected 16-bit PCM mono"));
            }
            let samples = reader
                .samples::<i16>()
                .map(|s| s.map(|v| v as f64 / i16::MAX as f64))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| malformed(path, e.to_string()))?;
            if samples.is_empty() {
                return Err(malformed(path, "no samples"));
            }
            SignalBuffer::real(samples, spec.sample_rate as f64)
        }
    }
}

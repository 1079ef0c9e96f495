//! Figures of merit for the host and the embedded link.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{QimError, Result};
use crate::qim::BitMessage;
use crate::signal::{Samples, SignalBuffer};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionReport {
    /// Mean squared host perturbation.
    pub d_s: f64,
    /// Perturbation energy as a percentage of host energy.
    pub d_norm: f64,
    pub psnr_db: f64,
}

impl DistortionReport {
    pub fn measure(host: &SignalBuffer, composite: &SignalBuffer) -> Result<Self> {
        let d_s = distortion(host, composite)?;
        Ok(Self {
            d_s,
            d_norm: normalized_distortion(host, composite)?,
            psnr_db: psnr(host, d_s)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkReport {
    pub ber: f64,
    pub bit_errors: usize,
    pub bits_tested: usize,
    pub throughput_bps: f64,
    pub capacity_bps_per_hz: f64,
}

fn squared_errors(host: &SignalBuffer, composite: &SignalBuffer) -> Result<(f64, f64)> {
    if host.len() != composite.len() {
        return Err(QimError::LengthMismatch {
            left: host.len(),
            right: composite.len(),
        });
    }
    match (host.samples(), composite.samples()) {
        (Samples::Real(s), Samples::Real(x)) => Ok(s
            .iter()
            .zip(x)
            .fold((0.0, 0.0), |(e, p), (a, b)| (e + (a - b) * (a - b), p + a * a))),
        (Samples::Complex(s), Samples::Complex(x)) => Ok(s
            .iter()
            .zip(x)
            .fold((0.0, 0.0), |(e, p), (a, b)| (e + (a - b).norm_sqr(), p + a.norm_sqr()))),
        _ => Err(QimError::DomainMismatch {
            expected: host.domain(),
            actual: composite.domain(),
        }),
    }
}

/// Mean of `|sᵢ − xᵢ|²`.
pub fn distortion(host: &SignalBuffer, composite: &SignalBuffer) -> Result<f64> {
    let (err, _) = squared_errors(host, composite)?;
    Ok(err / host.len().max(1) as f64)
}

/// `100 · Σ|sᵢ − xᵢ|² / Σ|sᵢ|²`.
pub fn normalized_distortion(host: &SignalBuffer, composite: &SignalBuffer) -> Result<f64> {
    let (err, power) = squared_errors(host, composite)?;
    if power == 0.0 {
        return Err(QimError::ZeroPowerHost);
    }
    Ok(100.0 * err / power)
}

fn capacity(ratio_num: f64, noise_power: f64) -> Result<f64> {
    if !(noise_power > 0.0) {
        return Err(QimError::InvalidParameter(format!(
            "noise power must be positive, got {noise_power}"
        )));
    }
    if !(ratio_num >= 0.0) {
        return Err(QimError::InvalidParameter(format!("power {ratio_num} must be non-negative")));
    }
    Ok(0.5 * (1.0 + ratio_num / noise_power).log2())
}

/// Embedded-message capacity `½·log₂(1 + D_s/σ_n²)` per real sample.
pub fn qim_capacity(d_s: f64, noise_power: f64) -> Result<f64> {
    capacity(d_s, noise_power)
}

/// Host capacity `½·log₂(1 + σ_s²/σ_n²)` per real sample.
pub fn host_capacity(host_power: f64, noise_power: f64) -> Result<f64> {
    capacity(host_power, noise_power)
}

/// `10·log₁₀(max|s|² / D_s)`, `+inf` when `D_s = 0`.
pub fn psnr(host: &SignalBuffer, d_s: f64) -> Result<f64> {
    if !(d_s >= 0.0) {
        return Err(QimError::InvalidParameter(format!("distortion {d_s} must be non-negative")));
    }
    if d_s == 0.0 {
        return Ok(f64::INFINITY);
    }
    let peak = host.peak_magnitude();
    Ok(10.0 * (peak * peak / d_s).log10())
}

pub fn bit_errors(sent: &BitMessage, received: &BitMessage) -> Result<usize> {
    if sent.len() != received.len() {
        return Err(QimError::LengthMismatch {
            left: sent.len(),
            right: received.len(),
        });
    }
    Ok(sent
        .bits()
        .iter()
        .zip(received.bits())
        .filter(|(a, b)| a != b)
        .count())
}

/// Hamming distance over length.
pub fn ber(sent: &BitMessage, received: &BitMessage) -> Result<f64> {
    Ok(bit_errors(sent, received)? as f64 / sent.len() as f64)
}

/// SNR in dB of `recovered` against `reference` after a least-squares gain
/// and offset fit. Used to grade demodulated audio.
pub fn audio_snr_db(reference: &[f64], recovered: &[f64]) -> Result<f64> {
    if reference.len() != recovered.len() {
        return Err(QimError::LengthMismatch {
            left: reference.len(),
            right: recovered.len(),
        });
    }
    let n = reference.len() as f64;
    let mr = reference.iter().sum::<f64>() / n;
    let mx = recovered.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (r, x) in reference.iter().zip(recovered) {
        sxy += (r - mr) * (x - mx);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        return Err(QimError::DegenerateSignal("recovered audio is constant"));
    }
    let gain = sxy / sxx;
    let (mut signal, mut noise) = (0.0, 0.0);
    for (r, x) in reference.iter().zip(recovered) {
        signal += (r - mr).powi(2);
        noise += (r - mr - gain * (x - mx)).powi(2);
    }
    Ok(10.0 * (signal / noise).log10())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Hann,
    Rectangular,
}

impl Window {
    fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            // periodic Hann, the usual choice for spectral averaging
            Window::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    /// Bin centre frequencies in Hz, ascending.
    pub freqs: Vec<f64>,
    /// Power in dB relative to the strongest bin.
    pub db: Vec<f64>,
    /// Number of averaged segments.
    pub segments: usize,
}

impl Psd {
    pub fn peak_db_outside(&self, keep: impl Fn(f64) -> bool) -> Option<f64> {
        self.freqs
            .iter()
            .zip(&self.db)
            .filter(|(f, _)| keep(**f))
            .map(|(_, d)| *d)
            .reduce(f64::max)
    }
}

/// Welch power spectral density with 50 % overlap.
///
/// Real signals give a one-sided spectrum over `[0, fs/2]`, complex signals a
/// two-sided spectrum over `[−fs/2, fs/2)`.
pub fn psd(signal: &SignalBuffer, nfft: usize, window: Window) -> Result<Psd> {
    if nfft < 2 || !nfft.is_power_of_two() {
        return Err(QimError::InvalidParameter(format!("nfft must be a power of two, got {nfft}")));
    }
    if signal.len() < nfft {
        return Err(QimError::SignalTooShort {
            len: signal.len(),
            nfft,
        });
    }
    let data: Vec<Complex64> = match signal.samples() {
        Samples::Real(v) => v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        Samples::Complex(v) => v.clone(),
    };
    let w = window.coefficients(nfft);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(nfft);
    let hop = nfft / 2;
    let mut acc = vec![0.0; nfft];
    let mut segments = 0;
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    let mut start = 0;
    while start + nfft <= data.len() {
        for (b, (x, wi)) in buf.iter_mut().zip(data[start..start + nfft].iter().zip(&w)) {
            *b = x * wi;
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        segments += 1;
        start += hop;
    }
    let fs = signal.sample_rate();
    let bin = fs / nfft as f64;
    let (freqs, power): (Vec<f64>, Vec<f64>) = match signal.samples() {
        Samples::Real(_) => (0..=nfft / 2)
            .map(|k| {
                let p = if k == 0 || k == nfft / 2 { acc[k] } else { acc[k] + acc[nfft - k] };
                (k as f64 * bin, p)
            })
            .unzip(),
        Samples::Complex(_) => (0..nfft)
            .map(|i| {
                let k = (i + nfft / 2) % nfft;
                let f = i as f64 * bin - fs / 2.0;
                (f, acc[k])
            })
            .unzip(),
    };
    let peak = power.iter().cloned().fold(0.0_f64, f64::max);
    let db = power
        .iter()
        .map(|&p| {
            if peak > 0.0 {
                10.0 * (p.max(peak * 1e-30) / peak).log10()
            } else {
                0.0
            }
        })
        .collect();
    Ok(Psd { freqs, db, segments })
}

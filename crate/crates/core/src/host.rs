//! Synthetic broadcast hosts (AM, FM, pulse-shaped 8-PAM) and the legacy
//! receivers that demodulate them.

use std::f64::consts::PI;
use std::path::PathBuf;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::capture::{load_capture, CaptureFormat};
use crate::dsp::{
    analytic_signal, band_limit, filter_same, lowpass_taps, lowpass_transition_hz, rrc_taps, PULSE_SHAPING_TAPS,
};
use crate::error::{QimError, Result};
use crate::signal::{Domain, Samples, SignalBuffer};

/// One-sided span of the 8-PAM pulse-shaping filter, in symbols.
pub const RRC_SPAN_SYMBOLS: usize = 8;

/// The eight normalized PAM amplitudes.
pub const PAM8_LEVELS: [f64; 8] = [
    -1.0,
    -5.0 / 7.0,
    -3.0 / 7.0,
    -1.0 / 7.0,
    1.0 / 7.0,
    3.0 / 7.0,
    5.0 / 7.0,
    1.0,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum HostKind {
    /// `(1 + μ·a(t))·cos(2π f₀ t)`
    Am { carrier_hz: f64, mod_index: f64 },
    /// `cos(2π f₀ t + 2π k_f ∫a)`
    Fm { carrier_hz: f64, deviation_hz: f64 },
    /// RRC-shaped 8-PAM, offset by a quarter of the symbol rate so the
    /// complex baseband carries energy on both axes.
    Pam8 {
        symbol_rate: f64,
        #[serde(default = "default_rolloff")]
        rolloff: f64,
    },
}

fn default_rolloff() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AudioSource {
    Tone { freq_hz: f64 },
    NoiseBand { low_hz: f64, high_hz: f64 },
    /// A recorded capture used as the host itself.
    File { path: PathBuf },
}

impl AudioSource {
    fn max_freq(&self) -> f64 {
        match self {
            AudioSource::Tone { freq_hz } => *freq_hz,
            AudioSource::NoiseBand { high_hz, .. } => *high_hz,
            AudioSource::File { .. } => 0.0,
        }
    }
}

impl Default for AudioSource {
    fn default() -> Self {
        AudioSource::Tone { freq_hz: 1000.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HostSpec {
    pub sample_rate: f64,
    #[serde(flatten)]
    pub kind: HostKind,
    #[serde(default)]
    pub source: AudioSource,
}

impl HostSpec {
    /// 8 kHz AM with a speech-band noise program at full modulation.
    pub fn am_default() -> Self {
        Self {
            sample_rate: 8_000.0,
            kind: HostKind::Am {
                carrier_hz: 1_800.0,
                mod_index: 1.0,
            },
            source: AudioSource::NoiseBand {
                low_hz: 300.0,
                high_hz: 1_500.0,
            },
        }
    }

    /// 200 kHz FM carrying a 300 Hz to 3 kHz noise program.
    pub fn fm_default() -> Self {
        Self {
            sample_rate: 200_000.0,
            kind: HostKind::Fm {
                carrier_hz: 12_500.0,
                deviation_hz: 7_500.0,
            },
            source: AudioSource::NoiseBand {
                low_hz: 300.0,
                high_hz: 3_000.0,
            },
        }
    }

    /// 8-PAM at 100 ksym/s sampled at 400 kHz.
    pub fn pam8_default() -> Self {
        Self {
            sample_rate: 400_000.0,
            kind: HostKind::Pam8 {
                symbol_rate: 100_000.0,
                rolloff: 0.2,
            },
            source: AudioSource::default(),
        }
    }

    pub fn domain(&self) -> Domain {
        match self.kind {
            HostKind::Pam8 { .. } => Domain::Complex,
            _ => Domain::Real,
        }
    }

    /// Upper edge of the occupied channel: carrier plus Carson half-bandwidth
    /// for FM, carrier plus audio bandwidth for AM, shaped band edge for PAM.
    pub fn channel_edge_hz(&self) -> f64 {
        let audio = self.source.max_freq();
        match self.kind {
            HostKind::Am { carrier_hz, .. } => carrier_hz + audio,
            HostKind::Fm {
                carrier_hz,
                deviation_hz,
            } => carrier_hz + deviation_hz + audio,
            HostKind::Pam8 {
                symbol_rate,
                rolloff,
            } => symbol_rate * (1.0 + rolloff) / 2.0 + symbol_rate / 4.0,
        }
    }

    /// Occupied band `[low, high]` in Hz. For the complex 8-PAM baseband the
    /// edges are signed frequencies around the quarter-rate offset.
    pub fn channel_band_hz(&self) -> (f64, f64) {
        let audio = self.source.max_freq();
        match self.kind {
            HostKind::Am { carrier_hz, .. } => (carrier_hz - audio, carrier_hz + audio),
            HostKind::Fm {
                carrier_hz,
                deviation_hz,
            } => (carrier_hz - deviation_hz - audio, carrier_hz + deviation_hz + audio),
            HostKind::Pam8 {
                symbol_rate,
                rolloff,
            } => {
                let half = symbol_rate * (1.0 + rolloff) / 2.0;
                (symbol_rate / 4.0 - half, symbol_rate / 4.0 + half)
            }
        }
    }

    pub fn samples_per_symbol(&self) -> Result<usize> {
        match self.kind {
            HostKind::Pam8 { symbol_rate, .. } => {
                let sps = self.sample_rate / symbol_rate;
                if (sps - sps.round()).abs() > 1e-9 {
                    return Err(QimError::InvalidParameter(format!(
                        "sample rate {} is not an integer multiple of symbol rate {symbol_rate}",
                        self.sample_rate
                    )));
                }
                Ok(sps.round() as usize)
            }
            _ => Err(QimError::InvalidParameter("only 8-PAM hosts have symbols".into())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fs = self.sample_rate;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(QimError::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        positive("sample_rate", fs)?;
        match &self.source {
            AudioSource::Tone { freq_hz } => positive("tone frequency", *freq_hz)?,
            AudioSource::NoiseBand { low_hz, high_hz } => {
                if !(*low_hz >= 0.0 && high_hz > low_hz) {
                    return Err(QimError::InvalidParameter(format!(
                        "noise band [{low_hz}, {high_hz}] is empty"
                    )));
                }
            }
            AudioSource::File { .. } => {}
        }
        let audio = self.source.max_freq();
        match self.kind {
            HostKind::Am {
                carrier_hz,
                mod_index,
            } => {
                positive("carrier_hz", carrier_hz)?;
                if !(mod_index > 0.0 && mod_index <= 1.0) {
                    return Err(QimError::InvalidParameter(format!(
                        "AM modulation index must lie in (0, 1], got {mod_index}"
                    )));
                }
                if carrier_hz > fs / 4.0 {
                    return Err(QimError::Aliasing(format!(
                        "AM carrier {carrier_hz} Hz exceeds sample_rate/4 = {} Hz",
                        fs / 4.0
                    )));
                }
                if audio >= carrier_hz {
                    return Err(QimError::Aliasing(format!(
                        "audio bandwidth {audio} Hz folds the lower sideband through DC"
                    )));
                }
            }
            HostKind::Fm {
                carrier_hz,
                deviation_hz,
            } => {
                positive("carrier_hz", carrier_hz)?;
                positive("deviation_hz", deviation_hz)?;
                let half_band = deviation_hz + audio;
                if carrier_hz + half_band > fs / 2.0 {
                    return Err(QimError::Aliasing(format!(
                        "FM band edge {} Hz exceeds Nyquist {} Hz",
                        carrier_hz + half_band,
                        fs / 2.0
                    )));
                }
                if carrier_hz < half_band {
                    return Err(QimError::Aliasing(format!(
                        "FM lower band edge {} Hz folds through DC",
                        carrier_hz - half_band
                    )));
                }
            }
            HostKind::Pam8 {
                symbol_rate,
                rolloff,
            } => {
                positive("symbol_rate", symbol_rate)?;
                if !(rolloff > 0.0 && rolloff <= 1.0) {
                    return Err(QimError::InvalidParameter(format!(
                        "roll-off must lie in (0, 1], got {rolloff}"
                    )));
                }
                if symbol_rate > fs / 2.0 {
                    return Err(QimError::Aliasing(format!(
                        "symbol rate {symbol_rate} exceeds sample_rate/2 = {}",
                        fs / 2.0
                    )));
                }
                self.samples_per_symbol()?;
            }
        }
        Ok(())
    }
}

/// A synthesized host together with the program it carries: the audio
/// `a(t)` for AM/FM, the transmitted symbols for 8-PAM, empty for captures.
#[derive(Debug, Clone)]
pub struct HostRealization {
    pub signal: SignalBuffer,
    pub baseband: Vec<f64>,
}

fn audio(source: &AudioSource, n: usize, fs: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match *source {
        AudioSource::Tone { freq_hz } => (0..n)
            .map(|i| (2.0 * PI * freq_hz * i as f64 / fs).sin())
            .collect(),
        AudioSource::NoiseBand { low_hz, high_hz } => {
            let white: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let mut band = band_limit(&white, low_hz, high_hz, fs);
            let peak = band.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            if peak > 0.0 {
                band.iter_mut().for_each(|x| *x /= peak);
            }
            band
        }
        AudioSource::File { .. } => vec![0.0; n],
    }
}

fn pam8(n: usize, sps: usize, rolloff: f64, rng: &mut ChaCha8Rng) -> (Vec<Complex64>, Vec<f64>) {
    let taps = rrc_taps(rolloff, sps, RRC_SPAN_SYMBOLS);
    let delay = RRC_SPAN_SYMBOLS * sps;
    let in_range = n.div_ceil(sps);
    let first = -(RRC_SPAN_SYMBOLS as isize);
    let last = (in_range + RRC_SPAN_SYMBOLS) as isize;
    let mut shaped = vec![0.0; n];
    let mut symbols = Vec::with_capacity(in_range);
    for k in first..last {
        let sym = PAM8_LEVELS[rng.random_range(0..8)];
        if k >= 0 && (k as usize) < in_range {
            symbols.push(sym);
        }
        let start = k * sps as isize - delay as isize;
        for (j, &h) in taps.iter().enumerate() {
            let idx = start + j as isize;
            if idx >= 0 && (idx as usize) < n {
                shaped[idx as usize] += sym * h;
            }
        }
    }
    let step = PI / (2.0 * sps as f64);
    let signal = shaped
        .iter()
        .enumerate()
        .map(|(i, &p)| Complex64::from_polar(p, step * i as f64))
        .collect();
    (signal, symbols)
}

fn sample_count(duration: f64, fs: f64) -> Result<usize> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(QimError::InvalidParameter(format!(
            "duration must be positive, got {duration}"
        )));
    }
    Ok(((duration * fs).round() as usize).max(1))
}

/// Synthesizes `duration` seconds of host signal. Identical
/// `(spec, duration, seed)` give identical buffers.
pub fn synthesize_host(spec: &HostSpec, duration: f64, seed: u64) -> Result<SignalBuffer> {
    synthesize_host_detailed(spec, duration, seed).map(|h| h.signal)
}

pub fn synthesize_host_detailed(spec: &HostSpec, duration: f64, seed: u64) -> Result<HostRealization> {
    spec.validate()?;
    let fs = spec.sample_rate;
    let n = sample_count(duration, fs)?;
    if let AudioSource::File { path } = &spec.source {
        let capture = load_capture(path, CaptureFormat::from_path(path)?)?;
        if capture.domain() != spec.domain() {
            return Err(QimError::DomainMismatch {
                expected: spec.domain(),
                actual: capture.domain(),
            });
        }
        if (capture.sample_rate() - fs).abs() > 1e-9 * fs {
            return Err(QimError::InvalidParameter(format!(
                "capture sample rate {} differs from host spec {fs}",
                capture.sample_rate()
            )));
        }
        return Ok(HostRealization {
            signal: capture.truncated(n),
            baseband: Vec::new(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match spec.kind {
        HostKind::Am {
            carrier_hz,
            mod_index,
        } => {
            let a = audio(&spec.source, n, fs, &mut rng);
            let s = a
                .iter()
                .enumerate()
                .map(|(i, &x)| (1.0 + mod_index * x) * (2.0 * PI * carrier_hz * i as f64 / fs).cos())
                .collect();
            Ok(HostRealization {
                signal: SignalBuffer::real(s, fs)?,
                baseband: a,
            })
        }
        HostKind::Fm {
            carrier_hz,
            deviation_hz,
        } => {
            let a = audio(&spec.source, n, fs, &mut rng);
            let mut integral = 0.0;
            let s = a
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let phase = 2.0 * PI * carrier_hz * i as f64 / fs + 2.0 * PI * deviation_hz * integral;
                    integral += x / fs;
                    phase.cos()
                })
                .collect();
            Ok(HostRealization {
                signal: SignalBuffer::real(s, fs)?,
                baseband: a,
            })
        }
        HostKind::Pam8 { rolloff, .. } => {
            let sps = spec.samples_per_symbol()?;
            let (s, symbols) = pam8(n, sps, rolloff, &mut rng);
            Ok(HostRealization {
                signal: SignalBuffer::complex(s, fs)?,
                baseband: symbols,
            })
        }
    }
}

fn slice_pam8(x: f64) -> f64 {
    PAM8_LEVELS
        .iter()
        .copied()
        .min_by(|a, b| (x - a).abs().total_cmp(&(x - b).abs()))
        .unwrap_or(0.0)
}

/// Legacy receiver for each host kind.
///
/// AM returns the envelope with its mean removed, FM returns the
/// discriminator output scaled back to `a(t)`, and 8-PAM returns the sliced
/// symbol stream (one value per symbol, sample rate = symbol rate).
pub fn demodulate(received: &SignalBuffer, spec: &HostSpec) -> Result<SignalBuffer> {
    spec.validate()?;
    if received.domain() != spec.domain() {
        return Err(QimError::DomainMismatch {
            expected: spec.domain(),
            actual: received.domain(),
        });
    }
    let fs = received.sample_rate();
    match spec.kind {
        HostKind::Am { .. } => {
            let z = analytic_signal(received.as_real()?);
            let env: Vec<f64> = z.iter().map(|c| c.norm()).collect();
            let mean = env.iter().sum::<f64>() / env.len().max(1) as f64;
            SignalBuffer::real(env.iter().map(|e| e - mean).collect(), fs)
        }
        HostKind::Fm {
            carrier_hz,
            deviation_hz,
        } => {
            let z = analytic_signal(received.as_real()?);
            let mut out = Vec::with_capacity(z.len());
            for i in 0..z.len() {
                let f = if i == 0 {
                    0.0
                } else {
                    (z[i] * z[i - 1].conj()).arg() * fs / (2.0 * PI)
                };
                out.push((f - carrier_hz) / deviation_hz);
            }
            if out.len() > 1 {
                out[0] = out[1];
            }
            SignalBuffer::real(out, fs)
        }
        HostKind::Pam8 {
            symbol_rate,
            rolloff,
        } => {
            let sps = spec.samples_per_symbol()?;
            let step = PI / (2.0 * sps as f64);
            let y = received.as_complex()?;
            let baseband: Vec<f64> = y
                .iter()
                .enumerate()
                .map(|(i, &c)| (c * Complex64::from_polar(1.0, -step * i as f64)).re)
                .collect();
            let matched = filter_same(&baseband, &rrc_taps(rolloff, sps, RRC_SPAN_SYMBOLS));
            let symbols = matched.iter().step_by(sps).map(|&x| slice_pam8(x)).collect();
            SignalBuffer::real(symbols, symbol_rate)
        }
    }
}

/// Confines a composite to the host channel with a
/// [`PULSE_SHAPING_TAPS`]-tap windowed-sinc filter.
///
/// Cutoffs sit half a transition width outside the channel band, so the
/// passband is flat up to the band edges and the stopband starts one
/// transition width beyond them. Real hosts go through a band-pass built from
/// two low-passes; the complex baseband is shifted to DC, low-passed and
/// shifted back.
pub fn pulse_shape(signal: &SignalBuffer, spec: &HostSpec) -> Result<SignalBuffer> {
    if signal.domain() != spec.domain() {
        return Err(QimError::DomainMismatch {
            expected: spec.domain(),
            actual: signal.domain(),
        });
    }
    let fs = signal.sample_rate();
    let (low, high) = spec.channel_band_hz();
    let margin = lowpass_transition_hz(PULSE_SHAPING_TAPS, fs) / 2.0;
    let (low, high) = (low - margin, high + margin);
    let samples = match signal.samples() {
        Samples::Real(v) => {
            let upper = lowpass_taps(PULSE_SHAPING_TAPS, high.min(fs / 2.0), fs);
            let taps: Vec<f64> = if low > 0.0 {
                let lower = lowpass_taps(PULSE_SHAPING_TAPS, low, fs);
                upper.iter().zip(&lower).map(|(a, b)| a - b).collect()
            } else {
                upper
            };
            Samples::Real(filter_same(v, &taps))
        }
        Samples::Complex(v) => {
            let centre = (low + high) / 2.0;
            let w = 2.0 * PI * centre / fs;
            let taps = lowpass_taps(PULSE_SHAPING_TAPS, (high - low) / 2.0, fs);
            let shifted: Vec<Complex64> = v
                .iter()
                .enumerate()
                .map(|(i, c)| c * Complex64::from_polar(1.0, -w * i as f64))
                .collect();
            Samples::Complex(
                filter_same(&shifted, &taps)
                    .into_iter()
                    .enumerate()
                    .map(|(i, c)| c * Complex64::from_polar(1.0, w * i as f64))
                    .collect(),
            )
        }
    };
    SignalBuffer::new(samples, fs)
}

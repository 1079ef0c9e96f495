//! Quantization index modulation: dithered quantizers, the four embedding
//! variants and the minimum-distance decoder.
//!
//! A bit `m` is carried by moving a host sample `s` onto the co-set
//! `Δ·Z + d_m` of a uniform quantizer. The two co-sets sit `Δ/2` apart on each
//! axis. The distortion-compensated variants quantize `α·s` and add back
//! `(1 − α)·s`; at the receiver the compensated composite is scaled by `α`
//! again, which maps it back onto the co-set grid up to a self-noise term of at
//! most `(1 − α)·Δ/2` per axis.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QimError, Result};
use crate::signal::{Domain, Samples, SignalBuffer};

/// Distortion-compensation factor used when none is given explicitly.
pub const DEFAULT_DC_ALPHA: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Scalar,
    ScalarDc,
    Lattice,
    LatticeDc,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Scalar,
        Variant::ScalarDc,
        Variant::Lattice,
        Variant::LatticeDc,
    ];

    pub fn is_lattice(self) -> bool {
        matches!(self, Variant::Lattice | Variant::LatticeDc)
    }

    pub fn is_compensated(self) -> bool {
        matches!(self, Variant::ScalarDc | Variant::LatticeDc)
    }

    /// Sample domain the variant operates on.
    pub fn domain(self) -> Domain {
        if self.is_lattice() {
            Domain::Complex
        } else {
            Domain::Real
        }
    }

    /// The non-compensated variant with the same quantizer geometry.
    pub fn plain(self) -> Variant {
        match self {
            Variant::Scalar | Variant::ScalarDc => Variant::Scalar,
            Variant::Lattice | Variant::LatticeDc => Variant::Lattice,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Scalar => "scalar",
            Variant::ScalarDc => "scalar-dc",
            Variant::Lattice => "lattice",
            Variant::LatticeDc => "lattice-dc",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = QimError;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| QimError::InvalidParameter(format!("unknown variant {s:?}")))
    }
}

/// Sign of the 1-bit dither; the 0-bit dither takes the opposite sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DitherSign {
    #[default]
    PositiveD1,
    NegativeD1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QimConfig {
    /// Number of base quantization levels N.
    pub levels: usize,
    /// Quantizer step Δ in host-sample units.
    pub step: f64,
    /// Distortion-compensation factor; ignored by the plain variants.
    pub alpha: f64,
    pub variant: Variant,
    #[serde(default)]
    pub dither_sign: DitherSign,
    /// Consecutive host samples carrying one message bit.
    pub samples_per_bit: usize,
}

impl QimConfig {
    pub fn new(levels: usize, step: f64, variant: Variant) -> Self {
        Self {
            levels,
            step,
            alpha: if variant.is_compensated() {
                DEFAULT_DC_ALPHA
            } else {
                1.0
            },
            variant,
            dither_sign: DitherSign::PositiveD1,
            samples_per_bit: 1,
        }
    }

    /// Config whose step is derived from the host peak for `levels` levels.
    pub fn for_host(host: &SignalBuffer, levels: usize, variant: Variant) -> Result<Self> {
        let step = step_from_signal(host, levels)?;
        Ok(Self::new(levels, step, variant))
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_samples_per_bit(mut self, k: usize) -> Self {
        self.samples_per_bit = k;
        self
    }

    pub fn with_dither_sign(mut self, sign: DitherSign) -> Self {
        self.dither_sign = sign;
        self
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels < 2 {
            return Err(QimError::InvalidParameter(format!(
                "levels must be at least 2, got {}",
                self.levels
            )));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(QimError::InvalidParameter(format!(
                "step must be positive and finite, got {}",
                self.step
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(QimError::InvalidParameter(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if self.samples_per_bit == 0 {
            return Err(QimError::InvalidParameter(
                "samples_per_bit must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Scale applied to samples before quantization and before decoding.
    fn compensation(&self) -> f64 {
        if self.variant.is_compensated() {
            self.alpha
        } else {
            1.0
        }
    }
}

/// Spreading factor K for a bit rate: `floor(sample_rate / bit_rate)`.
pub fn samples_per_bit(sample_rate: f64, bit_rate: f64) -> Result<usize> {
    if !(bit_rate > 0.0 && sample_rate > 0.0) {
        return Err(QimError::InvalidParameter(format!(
            "bit rate {bit_rate} and sample rate {sample_rate} must be positive"
        )));
    }
    let k = (sample_rate / bit_rate).floor();
    if k < 1.0 {
        return Err(QimError::InvalidParameter(format!(
            "bit rate {bit_rate} exceeds sample rate {sample_rate}"
        )));
    }
    Ok(k as usize)
}

/// Ordered message bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMessage {
    bits: Vec<bool>,
}

impl BitMessage {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(QimError::InvalidParameter("message must hold at least one bit".into()));
        }
        Ok(Self { bits })
    }

    /// Bits of `bytes`, most significant bit first.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::new(
            bytes
                .iter()
                .flat_map(|b| (0..8).rev().map(move |i| (b >> i) & 1 == 1))
                .collect(),
        )
    }

    /// Packs bits MSB first; a trailing partial byte is zero padded.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.bits
            .chunks(8)
            .map(|c| {
                c.iter()
                    .enumerate()
                    .fold(0u8, |acc, (i, &b)| acc | ((b as u8) << (7 - i)))
            })
            .collect()
    }

    pub fn random(len: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::new((0..len).map(|_| rng.random::<bool>()).collect())
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Dither offsets for the 1-bit and 0-bit quantizers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DitherPair {
    Scalar { d1: f64, d0: f64 },
    Lattice { d1: Complex64, d0: Complex64 },
}

impl DitherPair {
    pub fn d1(&self) -> Sample {
        match *self {
            DitherPair::Scalar { d1, .. } => Sample::Real(d1),
            DitherPair::Lattice { d1, .. } => Sample::Complex(d1),
        }
    }

    pub fn d0(&self) -> Sample {
        match *self {
            DitherPair::Scalar { d0, .. } => Sample::Real(d0),
            DitherPair::Lattice { d0, .. } => Sample::Complex(d0),
        }
    }

    pub fn for_bit(&self, bit: bool) -> Sample {
        if bit {
            self.d1()
        } else {
            self.d0()
        }
    }
}

/// A single real or complex sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sample {
    Real(f64),
    Complex(Complex64),
}

impl Sample {
    pub fn domain(&self) -> Domain {
        match self {
            Sample::Real(_) => Domain::Real,
            Sample::Complex(_) => Domain::Complex,
        }
    }
}

/// Sample types the quantizer family operates on. Complex samples are
/// quantized per component on the same grid.
pub trait QimSample:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    const DOMAIN: Domain;

    fn quantize_to(self, step: f64) -> Self;

    fn is_finite_sample(self) -> bool;

    fn dist_sqr(self, other: Self) -> f64;

    fn dither(pair: &DitherPair, bit: bool) -> Result<Self>;

    fn render(self) -> String;
}

impl QimSample for f64 {
    const DOMAIN: Domain = Domain::Real;

    #[inline]
    fn quantize_to(self, step: f64) -> f64 {
        step * (self / step).round()
    }

    fn is_finite_sample(self) -> bool {
        self.is_finite()
    }

    #[inline]
    fn dist_sqr(self, other: f64) -> f64 {
        let d = self - other;
        d * d
    }

    fn dither(pair: &DitherPair, bit: bool) -> Result<f64> {
        match *pair {
            DitherPair::Scalar { d1, d0 } => Ok(if bit { d1 } else { d0 }),
            DitherPair::Lattice { .. } => Err(QimError::DomainMismatch {
                expected: Domain::Complex,
                actual: Domain::Real,
            }),
        }
    }

    fn render(self) -> String {
        self.to_string()
    }
}

impl QimSample for Complex64 {
    const DOMAIN: Domain = Domain::Complex;

    #[inline]
    fn quantize_to(self, step: f64) -> Complex64 {
        Complex64::new(self.re.quantize_to(step), self.im.quantize_to(step))
    }

    fn is_finite_sample(self) -> bool {
        self.is_finite()
    }

    #[inline]
    fn dist_sqr(self, other: Complex64) -> f64 {
        (self - other).norm_sqr()
    }

    fn dither(pair: &DitherPair, bit: bool) -> Result<Complex64> {
        match *pair {
            DitherPair::Lattice { d1, d0 } => Ok(if bit { d1 } else { d0 }),
            DitherPair::Scalar { .. } => Err(QimError::DomainMismatch {
                expected: Domain::Real,
                actual: Domain::Complex,
            }),
        }
    }

    fn render(self) -> String {
        self.to_string()
    }
}

fn check_step(step: f64) -> Result<()> {
    if step > 0.0 && step.is_finite() {
        Ok(())
    } else {
        Err(QimError::InvalidParameter(format!(
            "step must be positive and finite, got {step}"
        )))
    }
}

/// Uniform quantizer `Δ·round(s/Δ)`, rounding half away from zero.
pub fn quantize(s: f64, step: f64) -> Result<f64> {
    check_step(step)?;
    if !s.is_finite() {
        return Err(QimError::InvalidSample {
            index: 0,
            value: s.to_string(),
        });
    }
    Ok(s.quantize_to(step))
}

/// Step size `2·max|s|/N`. Complex hosts use the larger per-component peak
/// so both axes share one grid.
pub fn step_from_signal(host: &SignalBuffer, levels: usize) -> Result<f64> {
    if levels < 2 {
        return Err(QimError::InvalidParameter(format!(
            "levels must be at least 2, got {levels}"
        )));
    }
    if host.is_empty() {
        return Err(QimError::DegenerateSignal("empty host"));
    }
    let peak = host.peak_component();
    if peak == 0.0 {
        return Err(QimError::DegenerateSignal("all-zero host gives a zero step"));
    }
    Ok(2.0 * peak / levels as f64)
}

pub fn make_dither(config: &QimConfig) -> Result<DitherPair> {
    config.validate()?;
    let quarter = config.step / 4.0;
    let half = config.step / 2.0;
    let d1 = match config.dither_sign {
        DitherSign::PositiveD1 => quarter,
        DitherSign::NegativeD1 => -quarter,
    };
    let d0 = if d1 <= 0.0 { d1 + half } else { d1 - half };
    Ok(if config.variant.is_lattice() {
        DitherPair::Lattice {
            d1: Complex64::new(d1, d1),
            d0: Complex64::new(d0, d0),
        }
    } else {
        DitherPair::Scalar { d1, d0 }
    })
}

#[inline]
fn embed_one<S: QimSample>(s: S, d: S, step: f64, alpha: Option<f64>) -> S {
    match alpha {
        Some(a) => (s * a - d).quantize_to(step) + s * (1.0 - a) + d,
        None => (s - d).quantize_to(step) + d,
    }
}

fn embed_typed<S: QimSample>(s: S, bit: bool, config: &QimConfig, dither: &DitherPair) -> Result<S> {
    if !s.is_finite_sample() {
        return Err(QimError::InvalidSample {
            index: 0,
            value: s.render(),
        });
    }
    let d = S::dither(dither, bit)?;
    let alpha = config.variant.is_compensated().then_some(config.alpha);
    Ok(embed_one(s, d, config.step, alpha))
}

/// Embeds one bit into one sample.
///
/// Plain variants return `Q(s − d_m) + d_m`; compensated variants return
/// `Q(α·s − d_m) + (1 − α)·s + d_m`.
pub fn embed_sample(s: Sample, bit: bool, config: &QimConfig, dither: &DitherPair) -> Result<Sample> {
    config.validate()?;
    if s.domain() != config.variant.domain() {
        return Err(QimError::DomainMismatch {
            expected: config.variant.domain(),
            actual: s.domain(),
        });
    }
    match s {
        Sample::Real(x) => embed_typed(x, bit, config, dither).map(Sample::Real),
        Sample::Complex(x) => embed_typed(x, bit, config, dither).map(Sample::Complex),
    }
}

fn embed_slice<S: QimSample>(host: &[S], msg: &BitMessage, config: &QimConfig, dither: &DitherPair) -> Result<Vec<S>> {
    let k = config.samples_per_bit;
    let d1 = S::dither(dither, true)?;
    let d0 = S::dither(dither, false)?;
    let alpha = config.variant.is_compensated().then_some(config.alpha);
    let mut out = host.to_vec();
    for (window, &bit) in out.chunks_mut(k).zip(msg.bits()) {
        let d = if bit { d1 } else { d0 };
        for s in window {
            *s = embed_one(*s, d, config.step, alpha);
        }
    }
    Ok(out)
}

fn check_domain(buffer: &SignalBuffer, config: &QimConfig) -> Result<()> {
    let expected = config.variant.domain();
    if buffer.domain() != expected {
        return Err(QimError::DomainMismatch {
            expected,
            actual: buffer.domain(),
        });
    }
    Ok(())
}

/// Embeds `msg` into the first `L·K` host samples, bit `i` spread over
/// samples `[iK, (i+1)K)`. Remaining samples pass through unchanged.
pub fn embed_message(host: &SignalBuffer, msg: &BitMessage, config: &QimConfig) -> Result<SignalBuffer> {
    config.validate()?;
    check_domain(host, config)?;
    let needed = msg.len() * config.samples_per_bit;
    if host.len() < needed {
        return Err(QimError::CapacityExceeded {
            bits: msg.len(),
            samples_per_bit: config.samples_per_bit,
            needed,
            available: host.len(),
        });
    }
    let dither = make_dither(config)?;
    let samples = match host.samples() {
        Samples::Real(v) => Samples::Real(embed_slice(v, msg, config, &dither)?),
        Samples::Complex(v) => Samples::Complex(embed_slice(v, msg, config, &dither)?),
    };
    SignalBuffer::new(samples, host.sample_rate())
}

/// Minimum-distance decision between two re-quantized candidates.
/// Returns `true` (bit 1) only when `q1` is strictly closer; ties go to 0.
pub fn min_distance_bit<S: QimSample>(y: &[S], q0: &[S], q1: &[S]) -> bool {
    let d0: f64 = y.iter().zip(q0).map(|(a, b)| a.dist_sqr(*b)).sum();
    let d1: f64 = y.iter().zip(q1).map(|(a, b)| a.dist_sqr(*b)).sum();
    d1 < d0
}

/// Re-quantizes received samples with the dithered quantizer for `bit`.
///
/// For compensated variants the samples are first scaled by `α`, so the
/// returned points live on the `α·y` scale.
pub fn requantize<S: QimSample>(y: &[S], bit: bool, config: &QimConfig) -> Result<Vec<S>> {
    config.validate()?;
    let dither = make_dither(config)?;
    let d = S::dither(&dither, bit)?;
    let a = config.compensation();
    Ok(y.iter()
        .map(|&v| (v * a - d).quantize_to(config.step) + d)
        .collect())
}

fn decode_slice<S: QimSample>(y: &[S], msg_len: usize, config: &QimConfig, dither: &DitherPair) -> Result<Vec<bool>> {
    let k = config.samples_per_bit;
    let d1 = S::dither(dither, true)?;
    let d0 = S::dither(dither, false)?;
    let a = config.compensation();
    let step = config.step;
    Ok(y[..msg_len * k]
        .chunks(k)
        .map(|window| {
            let mut dist0 = 0.0;
            let mut dist1 = 0.0;
            for &v in window {
                let z = v * a;
                dist0 += z.dist_sqr((z - d0).quantize_to(step) + d0);
                dist1 += z.dist_sqr((z - d1).quantize_to(step) + d1);
            }
            dist1 < dist0
        })
        .collect())
}

/// Recovers `msg_len` bits with the minimum-distance rule, summing squared
/// distances over each `K`-sample window.
///
/// Compensated variants decode `α·y` against the plain dithered quantizers,
/// which is the same decision as comparing `y` against the `Δ/α` grid.
pub fn decode_message(received: &SignalBuffer, msg_len: usize, config: &QimConfig) -> Result<BitMessage> {
    config.validate()?;
    check_domain(received, config)?;
    if msg_len == 0 {
        return Err(QimError::InvalidParameter("message length must be at least 1".into()));
    }
    let needed = msg_len * config.samples_per_bit;
    if received.len() < needed {
        return Err(QimError::TruncatedMessage {
            needed,
            available: received.len(),
        });
    }
    let dither = make_dither(config)?;
    let bits = match received.samples() {
        Samples::Real(v) => decode_slice(v, msg_len, config, &dither)?,
        Samples::Complex(v) => decode_slice(v, msg_len, config, &dither)?,
    };
    BitMessage::new(bits)
}

/// Distortion-compensation factor `D_s / (D_s + σ_n²)`, clamped to `(0, 1]`.
pub fn optimal_alpha(distortion: f64, noise_power: f64) -> Result<f64> {
    if !(distortion >= 0.0) || !(noise_power >= 0.0) {
        return Err(QimError::InvalidParameter(format!(
            "distortion {distortion} and noise power {noise_power} must be non-negative"
        )));
    }
    if distortion == 0.0 && noise_power == 0.0 {
        return Err(QimError::UndefinedAlpha);
    }
    if noise_power.is_infinite() {
        return Ok(f64::MIN_POSITIVE);
    }
    let alpha = if distortion.is_infinite() {
        1.0
    } else {
        distortion / (distortion + noise_power)
    };
    Ok(alpha.clamp(f64::MIN_POSITIVE, 1.0))
}

//! Additive white Gaussian noise calibrated against the original host power.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{QimError, Result};
use crate::signal::{Samples, SignalBuffer};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    /// Host power over noise power in dB; `+inf` disables the noise.
    pub snr_db: f64,
    pub seed: u64,
}

impl ChannelConfig {
    pub fn new(snr_db: f64, seed: u64) -> Self {
        Self { snr_db, seed }
    }

    pub fn noiseless() -> Self {
        Self::new(f64::INFINITY, 0)
    }

    pub fn is_noiseless(&self) -> bool {
        self.snr_db == f64::INFINITY
    }
}

/// `σ_s² / 10^(snr/10)`; zero for the noiseless sentinel.
pub fn noise_power(host_power: f64, snr_db: f64) -> Result<f64> {
    if !(host_power > 0.0 && host_power.is_finite()) {
        return Err(QimError::InvalidHostPower(host_power));
    }
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(QimError::InvalidParameter(format!("snr_db must be finite or +inf, got {snr_db}")));
    }
    if snr_db == f64::INFINITY {
        return Ok(0.0);
    }
    Ok(host_power / 10f64.powf(snr_db / 10.0))
}

/// Adds i.i.d. zero-mean Gaussian noise of total power `σ_n²`. Complex
/// buffers get `σ_n²/2` on each of I and Q.
pub fn apply_awgn(signal: &SignalBuffer, host_power: f64, config: &ChannelConfig) -> Result<SignalBuffer> {
    let power = noise_power(host_power, config.snr_db)?;
    if power == 0.0 {
        return Ok(signal.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let samples = match signal.samples() {
        Samples::Real(v) => {
            let sigma = power.sqrt();
            Samples::Real(
                v.iter()
                    .map(|&x| x + sigma * rng.sample::<f64, _>(StandardNormal))
                    .collect(),
            )
        }
        Samples::Complex(v) => {
            let sigma = (power / 2.0).sqrt();
            Samples::Complex(
                v.iter()
                    .map(|&x| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        x + Complex64::new(sigma * re, sigma * im)
                    })
                    .collect(),
            )
        }
    };
    SignalBuffer::new(samples, signal.sample_rate())
}

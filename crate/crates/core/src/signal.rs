//! Uniformly sampled real or complex baseband buffers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QimError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Real,
    Complex,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Samples {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl Samples {
    pub fn len(&self) -> usize {
        match self {
            Samples::Real(v) => v.len(),
            Samples::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn domain(&self) -> Domain {
        match self {
            Samples::Real(_) => Domain::Real,
            Samples::Complex(_) => Domain::Complex,
        }
    }
}

/// A host, composite or received waveform together with its sample rate.
///
/// Construction checks that the rate is positive and every sample is finite,
/// so downstream code never has to re-validate.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalBuffer {
    samples: Samples,
    sample_rate: f64,
}

impl SignalBuffer {
    pub fn new(samples: Samples, sample_rate: f64) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(QimError::InvalidParameter(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        match &samples {
            Samples::Real(v) => {
                if let Some((i, x)) = v.iter().enumerate().find(|(_, x)| !x.is_finite()) {
                    return Err(QimError::InvalidSample {
                        index: i,
                        value: x.to_string(),
                    });
                }
            }
            Samples::Complex(v) => {
                if let Some((i, x)) = v.iter().enumerate().find(|(_, x)| !x.is_finite()) {
                    return Err(QimError::InvalidSample {
                        index: i,
                        value: x.to_string(),
                    });
                }
            }
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn real(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        Self::new(Samples::Real(samples), sample_rate)
    }

    pub fn complex(samples: Vec<Complex64>, sample_rate: f64) -> Result<Self> {
        Self::new(Samples::Complex(samples), sample_rate)
    }

    pub fn samples(&self) -> &Samples {
        &self.samples
    }

    pub fn into_samples(self) -> Samples {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn domain(&self) -> Domain {
        self.samples.domain()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn as_real(&self) -> Result<&[f64]> {
        match &self.samples {
            Samples::Real(v) => Ok(v),
            Samples::Complex(_) => Err(QimError::DomainMismatch {
                expected: Domain::Real,
                actual: Domain::Complex,
            }),
        }
    }

    pub fn as_complex(&self) -> Result<&[Complex64]> {
        match &self.samples {
            Samples::Complex(v) => Ok(v),
            Samples::Real(_) => Err(QimError::DomainMismatch {
                expected: Domain::Complex,
                actual: Domain::Real,
            }),
        }
    }

    /// Mean of |s|² over the buffer.
    pub fn power(&self) -> f64 {
        let n = self.len().max(1) as f64;
        match &self.samples {
            Samples::Real(v) => v.iter().map(|x| x * x).sum::<f64>() / n,
            Samples::Complex(v) => v.iter().map(|x| x.norm_sqr()).sum::<f64>() / n,
        }
    }

    /// Largest sample magnitude. For complex buffers this is the largest
    /// per-component magnitude, which is what sets the quantizer grid.
    pub fn peak_component(&self) -> f64 {
        match &self.samples {
            Samples::Real(v) => v.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
            Samples::Complex(v) => v
                .iter()
                .fold(0.0_f64, |m, x| m.max(x.re.abs()).max(x.im.abs())),
        }
    }

    /// Largest |s| (modulus for complex samples).
    pub fn peak_magnitude(&self) -> f64 {
        match &self.samples {
            Samples::Real(v) => v.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
            Samples::Complex(v) => v.iter().fold(0.0_f64, |m, x| m.max(x.norm())),
        }
    }

    pub fn truncated(&self, len: usize) -> SignalBuffer {
        let samples = match &self.samples {
            Samples::Real(v) => Samples::Real(v[..len.min(v.len())].to_vec()),
            Samples::Complex(v) => Samples::Complex(v[..len.min(v.len())].to_vec()),
        };
        SignalBuffer {
            samples,
            sample_rate: self.sample_rate,
        }
    }

    /// In-phase component of a complex buffer as a real buffer.
    pub fn in_phase(&self) -> Result<SignalBuffer> {
        let v = self.as_complex()?;
        Ok(SignalBuffer {
            samples: Samples::Real(v.iter().map(|x| x.re).collect()),
            sample_rate: self.sample_rate,
        })
    }

    /// Replaces the in-phase component, keeping quadrature.
    pub fn with_in_phase(&self, in_phase: &SignalBuffer) -> Result<SignalBuffer> {
        let v = self.as_complex()?;
        let re = in_phase.as_real()?;
        if re.len() != v.len() {
            return Err(QimError::LengthMismatch {
                left: v.len(),
                right: re.len(),
            });
        }
        Ok(SignalBuffer {
            samples: Samples::Complex(
                v.iter()
                    .zip(re)
                    .map(|(c, &r)| Complex64::new(r, c.im))
                    .collect(),
            ),
            sample_rate: self.sample_rate,
        })
    }

    /// Packs consecutive real samples `(s[2i], s[2i+1])` into one complex
    /// sample at half the rate, so a real signal can carry a 2-D lattice.
    pub fn paired(&self) -> Result<SignalBuffer> {
        let v = self.as_real()?;
        if v.len() % 2 != 0 {
            return Err(QimError::InvalidParameter(format!(
                "pairing needs an even number of samples, got {}",
                v.len()
            )));
        }
        Ok(SignalBuffer {
            samples: Samples::Complex(v.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect()),
            sample_rate: self.sample_rate / 2.0,
        })
    }

    /// Inverse of [`SignalBuffer::paired`].
    pub fn unpaired(&self) -> Result<SignalBuffer> {
        let v = self.as_complex()?;
        Ok(SignalBuffer {
            samples: Samples::Real(v.iter().flat_map(|c| [c.re, c.im]).collect()),
            sample_rate: self.sample_rate * 2.0,
        })
    }
}

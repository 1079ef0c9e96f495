//! Experiment plans, stored as TOML.
//!
//! ```toml
//! seed = 7
//! trials = 10
//! message_length = 10000
//! variants = ["scalar", "scalar-dc"]
//! levels = [8, 10, 12]
//! snr_db = [10.0, 12.0, inf]
//! bit_rates = [200.0]
//! alpha = "optimal"          # or a number in (0, 1]
//!
//! [host]
//! kind = "am"
//! sample_rate = 8000.0
//! carrier_hz = 1800.0
//! mod_index = 1.0
//! source = { type = "noise-band", low_hz = 300.0, high_hz = 1500.0 }
//! ```

use std::path::Path;

use qim_core::qim::{samples_per_bit, DEFAULT_DC_ALPHA};
use qim_core::{HostSpec, Variant};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AlphaRepr", into = "AlphaRepr")]
pub enum AlphaSetting {
    Fixed(f64),
    /// `D_s / (D_s + σ_n²)` evaluated per cell.
    Optimal,
}

impl Default for AlphaSetting {
    fn default() -> Self {
        AlphaSetting::Fixed(DEFAULT_DC_ALPHA)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum AlphaRepr {
    Number(f64),
    Word(String),
}

impl TryFrom<AlphaRepr> for AlphaSetting {
    type Error = String;

    fn try_from(r: AlphaRepr) -> std::result::Result<Self, String> {
        match r {
            AlphaRepr::Number(a) => Ok(AlphaSetting::Fixed(a)),
            AlphaRepr::Word(w) if w == "optimal" => Ok(AlphaSetting::Optimal),
            AlphaRepr::Word(w) => Err(format!("alpha must be a number or \"optimal\", got {w:?}")),
        }
    }
}

impl From<AlphaSetting> for AlphaRepr {
    fn from(a: AlphaSetting) -> Self {
        match a {
            AlphaSetting::Fixed(v) => AlphaRepr::Number(v),
            AlphaSetting::Optimal => AlphaRepr::Word("optimal".into()),
        }
    }
}

fn default_trials() -> usize {
    10
}

fn default_message_length() -> usize {
    10_000
}

fn default_nfft() -> usize {
    1024
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Message bits per cell and trial.
    #[serde(default = "default_message_length")]
    pub message_length: usize,
    pub variants: Vec<Variant>,
    pub levels: Vec<usize>,
    /// `inf` disables the channel noise.
    pub snr_db: Vec<f64>,
    pub bit_rates: Vec<f64>,
    #[serde(default)]
    pub alpha: AlphaSetting,
    /// Band-limit the composite before the channel.
    #[serde(default)]
    pub pulse_shape: bool,
    /// Host length per trial; by default just long enough for the slowest
    /// bit rate.
    #[serde(default)]
    pub host_duration_s: Option<f64>,
    #[serde(default = "default_nfft")]
    pub spectrum_nfft: usize,
    pub host: HostSpec,
}

/// One point of the grid, before trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub variant: Variant,
    pub levels: usize,
    pub snr_db: f64,
    pub bit_rate: f64,
}

impl ExperimentPlan {
    pub fn from_toml(text: &str) -> Result<Self> {
        let plan: ExperimentPlan = toml::from_str(text)?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plans always serialize")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::InvalidPlan(m));
        if self.variants.is_empty() || self.levels.is_empty() || self.snr_db.is_empty() || self.bit_rates.is_empty()
        {
            return bad("variants, levels, snr_db and bit_rates must all be non-empty".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.message_length == 0 {
            return bad("message_length must be at least 1".into());
        }
        if let Some(&n) = self.levels.iter().find(|&&n| n < 2) {
            return bad(format!("levels must be at least 2, got {n}"));
        }
        if let Some(s) = self.snr_db.iter().find(|s| s.is_nan() || **s == f64::NEG_INFINITY) {
            return bad(format!("snr_db entries must be finite or inf, got {s}"));
        }
        if let Some(r) = self.bit_rates.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return bad(format!("bit rates must be positive, got {r}"));
        }
        if let AlphaSetting::Fixed(a) = self.alpha {
            if !(a > 0.0 && a <= 1.0) {
                return bad(format!("alpha must lie in (0, 1], got {a}"));
            }
        }
        if let Some(d) = self.host_duration_s {
            if !(d > 0.0 && d.is_finite()) {
                return bad(format!("host_duration_s must be positive, got {d}"));
            }
        }
        if self.spectrum_nfft < 2 || !self.spectrum_nfft.is_power_of_two() {
            return bad(format!("spectrum_nfft must be a power of two, got {}", self.spectrum_nfft));
        }
        self.host.validate()?;
        Ok(())
    }

    /// Grid cells in output order: variant, then levels, SNR, bit rate.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &variant in &self.variants {
            for &levels in &self.levels {
                for &snr_db in &self.snr_db {
                    for &bit_rate in &self.bit_rates {
                        cells.push(Cell {
                            index: cells.len(),
                            variant,
                            levels,
                            snr_db,
                            bit_rate,
                        });
                    }
                }
            }
        }
        cells
    }

    /// Host samples needed by the slowest feasible bit rate.
    pub fn required_samples(&self) -> usize {
        self.bit_rates
            .iter()
            .filter_map(|&r| samples_per_bit(self.host.sample_rate, r).ok())
            .max()
            .unwrap_or(1)
            * self.message_length
    }

    pub fn host_duration(&self) -> f64 {
        self.host_duration_s
            .unwrap_or(self.required_samples() as f64 / self.host.sample_rate)
    }
}

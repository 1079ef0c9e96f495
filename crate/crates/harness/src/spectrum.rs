//! Transmit spectrum of pulse-shaped composites.

use std::fs;
use std::path::{Path, PathBuf};

use qim_core::dsp::{lowpass_transition_hz, PULSE_SHAPING_TAPS};
use qim_core::metrics::{psd, Psd, Window};
use qim_core::Variant;

use crate::error::{HarnessError, Result};
use crate::output::{series_file_name, write_dat, Figure};
use crate::plan::{AlphaSetting, ExperimentPlan};
use crate::runner::{embed_cell, trial_inputs};

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub variant: Variant,
    pub levels: usize,
    pub psd: Psd,
    /// Strongest out-of-band bin relative to the main-lobe peak, in dB.
    pub out_of_band_db: f64,
}

/// Frequencies counted as out of band: beyond the channel edges by more
/// than the shaping filter's transition width.
pub fn out_of_band(plan: &ExperimentPlan) -> impl Fn(f64) -> bool {
    let (low, high) = plan.host.channel_band_hz();
    let guard = lowpass_transition_hz(PULSE_SHAPING_TAPS, plan.host.sample_rate);
    move |f: f64| f > high + guard || f < low - guard
}

/// PSD of the noiseless, pulse-shaped composite for every (variant, N)
/// pair, using trial 0's host and the first bit rate and SNR of the plan.
pub fn run_spectrum(plan: &ExperimentPlan) -> Result<Vec<SpectrumResult>> {
    plan.validate()?;
    let mut shaped = plan.clone();
    shaped.trials = 1;
    shaped.pulse_shape = true;
    let inputs = trial_inputs(&shaped)?;
    let host = inputs[0].host.clone().map_err(HarnessError::InvalidPlan)?;
    let oob = out_of_band(plan);
    let mut out = Vec::new();
    for cell in shaped.cells().into_iter().filter(|c| c.snr_db == plan.snr_db[0] && c.bit_rate == plan.bit_rates[0]) {
        let mut alpha = match plan.alpha {
            AlphaSetting::Fixed(a) => Some(a),
            AlphaSetting::Optimal => None,
        };
        let e = embed_cell(&shaped, &cell, &host, &inputs[0].message, &mut alpha)?;
        let p = psd(&e.composite, plan.spectrum_nfft, Window::Hann)?;
        let out_of_band_db = p.peak_db_outside(&oob).unwrap_or(f64::NEG_INFINITY);
        out.push(SpectrumResult {
            variant: cell.variant,
            levels: cell.levels,
            psd: p,
            out_of_band_db,
        });
    }
    Ok(out)
}

pub fn emit_spectrum(results: &[SpectrumResult], dir: &Path) -> Result<Vec<PathBuf>> {
    if results.is_empty() {
        return Err(HarnessError::EmptyResults);
    }
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    results
        .iter()
        .map(|r| {
            let path = dir.join(series_file_name(Figure::Spectrum, r.variant, &r.levels.to_string()));
            let points: Vec<(f64, f64)> = r.psd.freqs.iter().copied().zip(r.psd.db.iter().copied()).collect();
            write_dat(&path, &points)?;
            Ok(path)
        })
        .collect()
}

//! Grid execution: synthesize, embed, shape, add noise, decode, measure.

use qim_core::channel::noise_power;
use qim_core::host::pulse_shape;
use qim_core::metrics::{self, DistortionReport};
use qim_core::qim::samples_per_bit;
use qim_core::{
    apply_awgn, decode_message, embed_message, optimal_alpha, synthesize_host, BitMessage, ChannelConfig, Domain,
    QimConfig, QimError, Samples, SignalBuffer, Variant,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::plan::{AlphaSetting, Cell, ExperimentPlan};
use crate::seeds;

/// One row per (cell, trial). Measurements are `None` on flagged rows,
/// which carry the reason in `error`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub variant: Variant,
    pub levels: usize,
    pub alpha: Option<f64>,
    pub snr_db: f64,
    pub bit_rate_bps: f64,
    pub trial: usize,
    pub samples_per_bit: Option<usize>,
    pub step: Option<f64>,
    pub bits: Option<usize>,
    pub bit_errors: Option<usize>,
    pub ber: Option<f64>,
    pub d_s: Option<f64>,
    pub d_norm: Option<f64>,
    pub psnr_db: Option<f64>,
    /// Goodput `bit_rate · (1 − BER)`.
    pub throughput_bps: Option<f64>,
    pub capacity_bits_per_sample: Option<f64>,
    pub error: Option<String>,
}

impl SweepResult {
    fn flagged(cell: &Cell, trial: usize, alpha: Option<f64>, reason: String) -> Self {
        Self {
            variant: cell.variant,
            levels: cell.levels,
            alpha,
            snr_db: cell.snr_db,
            bit_rate_bps: cell.bit_rate,
            trial,
            samples_per_bit: None,
            step: None,
            bits: None,
            bit_errors: None,
            ber: None,
            d_s: None,
            d_norm: None,
            psnr_db: None,
            throughput_bps: None,
            capacity_bits_per_sample: None,
            error: Some(reason),
        }
    }

    pub fn is_flagged(&self) -> bool {
        self.error.is_some()
    }
}

/// Rounds to the 9 significant digits written to CSV, so that parsing an
/// emitted file reproduces the in-memory rows exactly.
pub(crate) fn canonical(v: f64) -> f64 {
    if v.is_finite() {
        format!("{v:.8e}").parse().unwrap_or(v)
    } else {
        v
    }
}

/// Per-trial inputs shared by all cells.
pub(crate) struct TrialInputs {
    pub host: std::result::Result<SignalBuffer, String>,
    pub message: BitMessage,
}

pub(crate) fn trial_inputs(plan: &ExperimentPlan) -> Result<Vec<TrialInputs>> {
    let duration = plan.host_duration();
    (0..plan.trials)
        .map(|t| {
            let host = synthesize_host(&plan.host, duration, seeds::host_seed(plan.seed, t)).map_err(|e| e.to_string());
            let message = BitMessage::random(plan.message_length, seeds::message_seed(plan.seed, t))?;
            Ok(TrialInputs { host, message })
        })
        .collect()
}

/// Mean squared perturbation on the in-phase and quadrature axes.
fn axis_distortion(host: &SignalBuffer, composite: &SignalBuffer) -> (f64, f64) {
    let n = host.len().max(1) as f64;
    match (host.samples(), composite.samples()) {
        (Samples::Real(s), Samples::Real(x)) => (s.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / n, 0.0),
        (Samples::Complex(s), Samples::Complex(x)) => {
            let (mut i, mut q) = (0.0, 0.0);
            for (a, b) in s.iter().zip(x) {
                i += (a.re - b.re).powi(2);
                q += (a.im - b.im).powi(2);
            }
            (i / n, q / n)
        }
        _ => (f64::NAN, f64::NAN),
    }
}

/// Capacity per host sample, summing `½·log₂(1 + D/σ²)` over the real
/// dimensions a sample carries.
fn capacity_per_sample(host: &SignalBuffer, composite: &SignalBuffer, noise: f64) -> qim_core::Result<f64> {
    if noise == 0.0 {
        return Ok(f64::INFINITY);
    }
    let (di, dq) = axis_distortion(host, composite);
    match host.domain() {
        Domain::Real => metrics::qim_capacity(di, noise),
        Domain::Complex => Ok(metrics::qim_capacity(di, noise / 2.0)? + metrics::qim_capacity(dq, noise / 2.0)?),
    }
}

fn resolve_alpha(setting: AlphaSetting, variant: Variant, step: f64, noise_per_axis: f64) -> qim_core::Result<f64> {
    if !variant.is_compensated() {
        return Ok(1.0);
    }
    match setting {
        AlphaSetting::Fixed(a) => Ok(a),
        AlphaSetting::Optimal => optimal_alpha(step * step / 12.0, noise_per_axis),
    }
}

/// How a variant meets a host of the other domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adapter {
    Direct,
    /// Scalar variant on a complex host: only the in-phase axis carries data.
    InPhase,
    /// Lattice variant on a real host: consecutive sample pairs form I/Q.
    Paired,
}

impl Adapter {
    pub fn for_host(domain: Domain, variant: Variant) -> Self {
        match (domain, variant.is_lattice()) {
            (Domain::Complex, false) => Adapter::InPhase,
            (Domain::Real, true) => Adapter::Paired,
            _ => Adapter::Direct,
        }
    }

    /// Host samples per unit of `QimConfig::samples_per_bit`.
    pub fn samples_per_unit(self) -> usize {
        if self == Adapter::Paired {
            2
        } else {
            1
        }
    }
}

/// Embeds `msg`, adapting the host to the variant's domain.
pub fn embed_adapted(host: &SignalBuffer, msg: &BitMessage, config: &QimConfig) -> qim_core::Result<SignalBuffer> {
    match Adapter::for_host(host.domain(), config.variant) {
        Adapter::Direct => embed_message(host, msg, config),
        Adapter::InPhase => host.with_in_phase(&embed_message(&host.in_phase()?, msg, config)?),
        Adapter::Paired => embed_message(&host.paired()?, msg, config)?.unpaired(),
    }
}

pub fn decode_adapted(received: &SignalBuffer, bits: usize, config: &QimConfig) -> qim_core::Result<BitMessage> {
    match Adapter::for_host(received.domain(), config.variant) {
        Adapter::Direct => decode_message(received, bits, config),
        Adapter::InPhase => decode_message(&received.in_phase()?, bits, config),
        Adapter::Paired => {
            let even = received.truncated(received.len() & !1);
            decode_message(&even.paired()?, bits, config)
        }
    }
}

pub(crate) struct Embedded {
    pub host: SignalBuffer,
    pub composite: SignalBuffer,
    pub config: QimConfig,
    pub noise: f64,
}

/// Builds the transmit composite for one cell.
pub(crate) fn embed_cell(
    plan: &ExperimentPlan,
    cell: &Cell,
    full_host: &SignalBuffer,
    msg: &BitMessage,
    alpha_slot: &mut Option<f64>,
) -> qim_core::Result<Embedded> {
    let unit = Adapter::for_host(full_host.domain(), cell.variant).samples_per_unit();
    let k = samples_per_bit(plan.host.sample_rate / unit as f64, cell.bit_rate)?;
    let needed = msg.len() * k * unit;
    if full_host.len() < needed {
        return Err(QimError::CapacityExceeded {
            bits: msg.len(),
            samples_per_bit: k,
            needed,
            available: full_host.len(),
        });
    }
    let host = full_host.truncated(needed);
    let noise = noise_power(host.power(), cell.snr_db)?;
    let noise_per_axis = match host.domain() {
        Domain::Real => noise,
        Domain::Complex => noise / 2.0,
    };
    let mut config = QimConfig::for_host(&host, cell.levels, cell.variant)?.with_samples_per_bit(k);
    let alpha = resolve_alpha(plan.alpha, cell.variant, config.step, noise_per_axis)?;
    *alpha_slot = Some(alpha);
    config = config.with_alpha(alpha);
    let mut composite = embed_adapted(&host, msg, &config)?;
    if plan.pulse_shape {
        composite = pulse_shape(&composite, &plan.host)?;
    }
    Ok(Embedded {
        host,
        composite,
        config,
        noise,
    })
}

fn run_one(plan: &ExperimentPlan, cell: &Cell, trial: usize, inputs: &TrialInputs) -> SweepResult {
    let fixed_alpha = match plan.alpha {
        AlphaSetting::Fixed(a) if cell.variant.is_compensated() => Some(a),
        _ if !cell.variant.is_compensated() => Some(1.0),
        _ => None,
    };
    let full_host = match &inputs.host {
        Ok(h) => h,
        Err(e) => return SweepResult::flagged(cell, trial, fixed_alpha, e.clone()),
    };
    let mut alpha = fixed_alpha;
    let outcome = (|| -> qim_core::Result<SweepResult> {
        let msg = &inputs.message;
        let e = embed_cell(plan, cell, full_host, msg, &mut alpha)?;
        let channel = ChannelConfig::new(cell.snr_db, seeds::noise_seed(plan.seed, cell.index, trial));
        let received = apply_awgn(&e.composite, e.host.power(), &channel)?;
        let decoded = decode_adapted(&received, msg.len(), &e.config)?;
        let errors = metrics::bit_errors(msg, &decoded)?;
        let ber = errors as f64 / msg.len() as f64;
        let report = DistortionReport::measure(&e.host, &e.composite)?;
        let capacity = capacity_per_sample(&e.host, &e.composite, e.noise)?;
        Ok(SweepResult {
            variant: cell.variant,
            levels: cell.levels,
            alpha: Some(canonical(e.config.alpha)),
            snr_db: cell.snr_db,
            bit_rate_bps: cell.bit_rate,
            trial,
            samples_per_bit: Some(e.host.len() / msg.len()),
            step: Some(canonical(e.config.step)),
            bits: Some(msg.len()),
            bit_errors: Some(errors),
            ber: Some(canonical(ber)),
            d_s: Some(canonical(report.d_s)),
            d_norm: Some(canonical(report.d_norm)),
            psnr_db: Some(canonical(report.psnr_db)),
            throughput_bps: Some(canonical(cell.bit_rate * (1.0 - ber))),
            capacity_bits_per_sample: Some(canonical(capacity)),
            error: None,
        })
    })();
    outcome.unwrap_or_else(|e| SweepResult::flagged(cell, trial, alpha.map(canonical), e.to_string()))
}

/// Runs every cell of the plan `trials` times. Cells that cannot run (for
/// example a message longer than the host allows) produce flagged rows and
/// the sweep continues.
pub fn run_plan(plan: &ExperimentPlan) -> Result<Vec<SweepResult>> {
    plan.validate()?;
    let inputs = trial_inputs(plan)?;
    let jobs: Vec<(Cell, usize)> = plan
        .cells()
        .into_iter()
        .flat_map(|c| (0..plan.trials).map(move |t| (c, t)))
        .collect();
    Ok(jobs
        .par_iter()
        .map(|(cell, trial)| run_one(plan, cell, *trial, &inputs[*trial]))
        .collect())
}

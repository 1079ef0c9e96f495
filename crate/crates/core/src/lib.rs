//! Quantization index modulation over RF host signals.
//!
//! The crate embeds a bit stream into sampled AM, FM or 8-PAM hosts with
//! dithered scalar or lattice quantizers, passes the composite through an
//! AWGN channel and decodes it again by minimum distance.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capture;
pub mod channel;
pub mod dsp;
pub mod error;
pub mod host;
pub mod metrics;
pub mod qim;
pub mod signal;

pub use channel::{apply_awgn, ChannelConfig};
pub use error::{QimError, Result};
pub use host::{demodulate, synthesize_host, AudioSource, HostKind, HostSpec};
pub use qim::{
    decode_message, embed_message, optimal_alpha, quantize, step_from_signal, BitMessage, DitherSign, QimConfig,
    Variant,
};
pub use signal::{Domain, Samples, SignalBuffer};

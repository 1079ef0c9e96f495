//! Filters and transforms shared by the host models and the spectral metrics.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Taps of the pulse-shaping low-pass used before spectral checks.
pub const PULSE_SHAPING_TAPS: usize = 127;

/// Root-raised-cosine taps spanning `±span` symbols, normalized to unit
/// energy so a matched pair has unit gain at the symbol instant.
pub fn rrc_taps(rolloff: f64, samples_per_symbol: usize, span: usize) -> Vec<f64> {
    let sps = samples_per_symbol as f64;
    let half = (span * samples_per_symbol) as isize;
    let b = rolloff;
    let mut taps: Vec<f64> = (-half..=half)
        .map(|n| {
            let t = n as f64 / sps;
            if t == 0.0 {
                1.0 - b + 4.0 * b / PI
            } else if b > 0.0 && ((4.0 * b * t).abs() - 1.0).abs() < 1e-9 {
                b / 2f64.sqrt()
                    * ((1.0 + 2.0 / PI) * (PI / (4.0 * b)).sin()
                        + (1.0 - 2.0 / PI) * (PI / (4.0 * b)).cos())
            } else {
                ((PI * t * (1.0 - b)).sin() + 4.0 * b * t * (PI * t * (1.0 + b)).cos())
                    / (PI * t * (1.0 - (4.0 * b * t).powi(2)))
            }
        })
        .collect();
    let energy = taps.iter().map(|h| h * h).sum::<f64>().sqrt();
    taps.iter_mut().for_each(|h| *h /= energy);
    taps
}

/// Blackman-windowed sinc low-pass with unit DC gain.
pub fn lowpass_taps(num_taps: usize, cutoff_hz: f64, sample_rate: f64) -> Vec<f64> {
    let fc = cutoff_hz / sample_rate;
    let m = (num_taps - 1) as f64;
    let mut taps: Vec<f64> = (0..num_taps)
        .map(|i| {
            let x = i as f64 - m / 2.0;
            let sinc = if x == 0.0 {
                2.0 * fc
            } else {
                (2.0 * PI * fc * x).sin() / (PI * x)
            };
            let w = 0.42 - 0.5 * (2.0 * PI * i as f64 / m).cos() + 0.08 * (4.0 * PI * i as f64 / m).cos();
            sinc * w
        })
        .collect();
    let gain: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|h| *h /= gain);
    taps
}

/// Transition width of [`lowpass_taps`] (Blackman window main-lobe estimate).
pub fn lowpass_transition_hz(num_taps: usize, sample_rate: f64) -> f64 {
    5.5 * sample_rate / num_taps as f64
}

/// Linear convolution trimmed to the input length with the filter centered
/// (zero group delay for odd, symmetric taps).
pub fn filter_same<T>(input: &[T], taps: &[f64]) -> Vec<T>
where
    T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let n = input.len();
    let center = taps.len() / 2;
    (0..n)
        .map(|i| {
            let mut acc = T::default();
            for (j, &h) in taps.iter().enumerate() {
                // output[i] = sum_j h[j] * x[i + center - j]
                let idx = i as isize + center as isize - j as isize;
                if idx >= 0 && (idx as usize) < n {
                    acc = acc + input[idx as usize] * h;
                }
            }
            acc
        })
        .collect()
}

/// Analytic signal via the frequency-domain Hilbert transform.
pub fn analytic_signal(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    for (k, c) in buf.iter_mut().enumerate() {
        let gain = if k == 0 || (n.is_multiple_of(2) && k == half) {
            1.0
        } else if k < n.div_ceil(2) {
            2.0
        } else {
            0.0
        };
        *c *= gain;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Keeps only spectral content between `low_hz` and `high_hz`.
pub fn band_limit(x: &[f64], low_hz: f64, high_hz: f64, sample_rate: f64) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let bin = k.min(n - k) as f64 * sample_rate / n as f64;
        if bin < low_hz || bin > high_hz {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

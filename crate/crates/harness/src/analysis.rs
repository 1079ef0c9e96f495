//! Curve extraction and crossing points.

use std::collections::BTreeMap;

use qim_core::Variant;

use crate::runner::SweepResult;

/// Mean BER against SNR for one (variant, N, bit rate) curve, sorted by SNR.
/// Flagged rows and the noiseless sentinel are left out.
pub fn ber_curve(results: &[SweepResult], variant: Variant, levels: usize, bit_rate: f64) -> Vec<(f64, f64)> {
    mean_by_snr(
        results
            .iter()
            .filter(|r| r.variant == variant && r.levels == levels && r.bit_rate_bps == bit_rate),
        |r| r.ber,
    )
}

pub(crate) fn mean_by_snr<'a>(
    rows: impl Iterator<Item = &'a SweepResult>,
    value: impl Fn(&SweepResult) -> Option<f64>,
) -> Vec<(f64, f64)> {
    let mut acc: BTreeMap<u64, (f64, f64, usize)> = BTreeMap::new();
    for r in rows.filter(|r| r.snr_db.is_finite()) {
        if let Some(v) = value(r) {
            // order-preserving key for finite floats
            let bits = r.snr_db.to_bits();
            let key = if r.snr_db >= 0.0 { bits | (1 << 63) } else { !bits };
            let e = acc.entry(key).or_insert((r.snr_db, 0.0, 0));
            e.1 += v;
            e.2 += 1;
        }
    }
    acc.into_values().map(|(x, s, n)| (x, s / n as f64)).collect()
}

/// SNR at which a BER curve falls through `target`, interpolated linearly in
/// `log10(BER)` against dB. Uses the last downward crossing so Monte-Carlo
/// wiggles at high BER do not matter. A zero BER end point falls back to
/// linear interpolation in BER.
pub fn snr_at_ber(curve: &[(f64, f64)], target: f64) -> Option<f64> {
    let mut found = None;
    for w in curve.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if y0 >= target && y1 < target {
            let t = if y1 > 0.0 {
                (y0.log10() - target.log10()) / (y0.log10() - y1.log10())
            } else {
                (y0 - target) / (y0 - y1)
            };
            found = Some(x0 + t * (x1 - x0));
        }
    }
    found
}

/// Horizontal gap `snr(worse) − snr(better)` at `target`.
pub fn gap_db(worse: &[(f64, f64)], better: &[(f64, f64)], target: f64) -> Option<f64> {
    Some(snr_at_ber(worse, target)? - snr_at_ber(better, target)?)
}

/// Number of places where mean BER rises with SNR while above `floor`.
pub fn inversions(curve: &[(f64, f64)], floor: f64) -> usize {
    curve.windows(2).filter(|w| w[1].1 > w[0].1 && w[0].1 >= floor).count()
}

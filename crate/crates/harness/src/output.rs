//! CSV results and gnuplot-ready `.dat` series.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use qim_core::Variant;

use crate::analysis::mean_by_snr;
use crate::error::{HarnessError, Result};
use crate::runner::SweepResult;

pub const CSV_HEADER: [&str; 17] = [
    "variant",
    "levels",
    "alpha",
    "snr_db",
    "bit_rate_bps",
    "trial",
    "samples_per_bit",
    "step",
    "bits",
    "bit_errors",
    "ber",
    "d_s",
    "d_norm",
    "psnr_db",
    "throughput_bps",
    "capacity_bits_per_sample",
    "error",
];

/// BER ceiling under which a bit rate counts as sustained.
pub const SUSTAINED_BER: f64 = 1e-2;

pub fn format_float(v: f64) -> String {
    format!("{v:.8e}")
}

fn opt_float(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

fn opt_int(v: Option<usize>) -> String {
    v.map(|n| n.to_string()).unwrap_or_default()
}

pub fn write_csv<W: std::io::Write>(results: &[SweepResult], out: W) -> Result<()> {
    if results.is_empty() {
        return Err(HarnessError::EmptyResults);
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in results {
        w.write_record([
            r.variant.name().to_string(),
            r.levels.to_string(),
            opt_float(r.alpha),
            format_float(r.snr_db),
            format_float(r.bit_rate_bps),
            r.trial.to_string(),
            opt_int(r.samples_per_bit),
            opt_float(r.step),
            opt_int(r.bits),
            opt_int(r.bit_errors),
            opt_float(r.ber),
            opt_float(r.d_s),
            opt_float(r.d_norm),
            opt_float(r.psnr_db),
            opt_float(r.throughput_bps),
            opt_float(r.capacity_bits_per_sample),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::io("<csv>", e))?;
    Ok(())
}

/// Writes one row per result with a header. Floats carry 9 significant
/// digits; flagged rows leave the measurement columns empty.
pub fn emit_csv(results: &[SweepResult], path: &Path) -> Result<()> {
    if results.is_empty() {
        return Err(HarnessError::EmptyResults);
    }
    let file = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_csv(results, std::io::BufWriter::new(file))
}

pub fn parse_csv(path: &Path) -> Result<Vec<SweepResult>> {
    let bad = |reason: String| HarnessError::MalformedResults {
        path: path.to_path_buf(),
        reason,
    };
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let ctx = |col: usize, e: &dyn std::fmt::Display| bad(format!("row {}: {}: {e}", line + 1, CSV_HEADER[col]));
        let f = |i: usize| -> Result<f64> { field(i).parse::<f64>().map_err(|e| ctx(i, &e)) };
        let n = |i: usize| -> Result<usize> { field(i).parse::<usize>().map_err(|e| ctx(i, &e)) };
        let of = |i: usize| -> Result<Option<f64>> {
            if field(i).is_empty() {
                Ok(None)
            } else {
                f(i).map(Some)
            }
        };
        let on = |i: usize| -> Result<Option<usize>> {
            if field(i).is_empty() {
                Ok(None)
            } else {
                n(i).map(Some)
            }
        };
        out.push(SweepResult {
            variant: field(0).parse::<Variant>().map_err(|e| ctx(0, &e))?,
            levels: n(1)?,
            alpha: of(2)?,
            snr_db: f(3)?,
            bit_rate_bps: f(4)?,
            trial: n(5)?,
            samples_per_bit: on(6)?,
            step: of(7)?,
            bits: on(8)?,
            bit_errors: on(9)?,
            ber: of(10)?,
            d_s: of(11)?,
            d_norm: of(12)?,
            psnr_db: of(13)?,
            throughput_bps: of(14)?,
            capacity_bits_per_sample: of(15)?,
            error: Some(field(16).to_string()).filter(|s| !s.is_empty()),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Normalized distortion against N, one curve per variant.
    Distortion,
    /// Mean BER against SNR, one curve per (variant, N).
    Ber,
    /// Best sustained goodput against SNR, one curve per (variant, N).
    Throughput,
    /// PSD of the pulse-shaped composite; see [`crate::spectrum`].
    Spectrum,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Distortion => "distortion",
            Figure::Ber => "ber",
            Figure::Throughput => "throughput",
            Figure::Spectrum => "spectrum",
        }
    }
}

pub fn series_file_name(figure: Figure, variant: Variant, levels: &str) -> String {
    format!("{}_{}_N{}.dat", figure.name(), variant.name(), levels)
}

pub(crate) fn write_dat(path: &Path, points: &[(f64, f64)]) -> Result<()> {
    let mut text = String::new();
    for (x, y) in points {
        text.push_str(&format_float(*x));
        text.push(' ');
        text.push_str(&format_float(*y));
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// Curves of `figure` keyed by file name, in file-name order.
pub fn series(results: &[SweepResult], figure: Figure) -> Result<BTreeMap<String, Vec<(f64, f64)>>> {
    if results.is_empty() {
        return Err(HarnessError::EmptyResults);
    }
    let mut curves: Vec<(Variant, usize)> = Vec::new();
    let mut rates: Vec<f64> = Vec::new();
    for r in results {
        if !curves.contains(&(r.variant, r.levels)) {
            curves.push((r.variant, r.levels));
        }
        if !rates.contains(&r.bit_rate_bps) {
            rates.push(r.bit_rate_bps);
        }
    }
    let mut out = BTreeMap::new();
    match figure {
        Figure::Ber => {
            for &(variant, levels) in &curves {
                for &rate in &rates {
                    // one BER curve per bit rate; the rate tag only appears
                    // when a plan sweeps several
                    let tag = if rates.len() > 1 {
                        format!("{levels}_R{rate}")
                    } else {
                        levels.to_string()
                    };
                    let rows = results
                        .iter()
                        .filter(|r| r.variant == variant && r.levels == levels && r.bit_rate_bps == rate);
                    out.insert(series_file_name(figure, variant, &tag), mean_by_snr(rows, |r| r.ber));
                }
            }
        }
        Figure::Throughput => {
            for &(variant, levels) in &curves {
                let mut best: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
                for &rate in &rates {
                    let rows = || {
                        results
                            .iter()
                            .filter(move |r| r.variant == variant && r.levels == levels && r.bit_rate_bps == rate)
                    };
                    let ber = mean_by_snr(rows(), |r| r.ber);
                    let goodput = mean_by_snr(rows(), |r| r.throughput_bps);
                    for ((snr, b), (_, g)) in ber.iter().zip(&goodput) {
                        let key = snr.to_bits() ^ if *snr >= 0.0 { 1 << 63 } else { u64::MAX };
                        let e = best.entry(key).or_insert((*snr, 0.0));
                        if *b < SUSTAINED_BER && *g > e.1 {
                            e.1 = *g;
                        }
                    }
                }
                out.insert(series_file_name(figure, variant, &levels.to_string()), best.into_values().collect());
            }
        }
        Figure::Distortion => {
            let mut variants: Vec<Variant> = Vec::new();
            for &(v, _) in &curves {
                if !variants.contains(&v) {
                    variants.push(v);
                }
            }
            for variant in variants {
                let mut levels: Vec<usize> = curves.iter().filter(|c| c.0 == variant).map(|c| c.1).collect();
                levels.sort_unstable();
                let points: Vec<(f64, f64)> = levels
                    .iter()
                    .map(|&n| {
                        let vals: Vec<f64> = results
                            .iter()
                            .filter(|r| r.variant == variant && r.levels == n)
                            .filter_map(|r| r.d_norm)
                            .collect();
                        (n as f64, vals.iter().sum::<f64>() / vals.len() as f64)
                    })
                    .filter(|p| p.1.is_finite())
                    .collect();
                let tag = format!("{}-{}", levels[0], levels[levels.len() - 1]);
                out.insert(series_file_name(figure, variant, &tag), points);
            }
        }
        Figure::Spectrum => {
            return Err(HarnessError::InvalidPlan(
                "spectrum series come from the spectrum command, not from sweep rows".into(),
            ))
        }
    }
    Ok(out)
}

/// Writes one `(x, y)` file per curve into `dir` and returns the paths.
pub fn emit_series(results: &[SweepResult], figure: Figure, dir: &Path) -> Result<Vec<PathBuf>> {
    let curves = series(results, figure)?;
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    curves
        .iter()
        .map(|(name, points)| {
            let path = dir.join(name);
            write_dat(&path, points)?;
            Ok(path)
        })
        .collect()
}

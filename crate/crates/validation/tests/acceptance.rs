//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use qim_core::metrics::{ber, distortion};
use qim_core::{
    apply_awgn, decode_message, embed_message, optimal_alpha, BitMessage, ChannelConfig, HostSpec, QimConfig,
    SignalBuffer, Variant,
};
use qim_harness::analysis::{ber_curve, gap_db, snr_at_ber};
use qim_harness::runner::{decode_adapted, embed_adapted};
use qim_harness::spectrum::run_spectrum;
use qim_harness::{run_plan, AlphaSetting, ExperimentPlan, SweepResult};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TARGET_BER: f64 = 1e-2;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn plan(host: HostSpec, variants: Vec<Variant>, levels: Vec<usize>, snr_db: Vec<f64>, bit_rates: Vec<f64>) -> ExperimentPlan {
    ExperimentPlan {
        seed: 2024,
        trials: 10,
        message_length: 10_000,
        variants,
        levels,
        snr_db,
        bit_rates,
        alpha: AlphaSetting::Fixed(0.7),
        pulse_shape: false,
        host_duration_s: None,
        spectrum_nfft: 1024,
        host,
    }
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

fn uniform(n: usize, amplitude: f64, seed: u64) -> SignalBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SignalBuffer::real((0..n).map(|_| rng.random_range(-amplitude..amplitude)).collect(), 1.0).unwrap()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "n/a".into())
}

fn noiseless_round_trip() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut cells = 0;
    for host in [HostSpec::am_default(), HostSpec::fm_default(), HostSpec::pam8_default()] {
        let rate = host.sample_rate / 2.0;
        let mut p = plan(host, Variant::ALL.to_vec(), vec![2, 4, 8, 16, 22, 48], vec![f64::INFINITY], vec![rate]);
        p.trials = 1;
        for r in run_plan(&p).unwrap() {
            cells += 1;
            if r.ber != Some(0.0) {
                failures.push(format!("{:?} {} N={}: {:?} {:?}", p.host.kind, r.variant, r.levels, r.ber, r.error));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures.is_empty() && secs < 60.0,
        format!("{cells} cells of 10^4 bits, {} non-zero, {secs:.1} s {}", failures.len(), failures.join("; ")),
    )
}

fn step_squared_law() -> Outcome {
    let host = uniform(100_000, 1.0, 7);
    let msg = BitMessage::random(host.len(), 8).unwrap();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for levels in [8, 16, 48] {
        let cfg = QimConfig::for_host(&host, levels, Variant::Scalar).unwrap();
        let x = embed_message(&host, &msg, &cfg).unwrap();
        let ratio = distortion(&host, &x).unwrap() / (cfg.step * cfg.step / 12.0);
        worst = worst.max((ratio - 1.0).abs());
        parts.push(format!("N={levels}: {ratio:.4}"));
    }
    outcome(worst <= 0.05, format!("D/(step^2/12) {}", parts.join(", ")))
}

fn unit_alpha_reduction() -> Outcome {
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for (spec, pairs) in [
        (HostSpec::am_default(), vec![(Variant::Scalar, Variant::ScalarDc), (Variant::Lattice, Variant::LatticeDc)]),
        (HostSpec::pam8_default(), vec![(Variant::Scalar, Variant::ScalarDc), (Variant::Lattice, Variant::LatticeDc)]),
    ] {
        let host = qim_core::synthesize_host(&spec, 20_000.0 / spec.sample_rate, 3).unwrap();
        let msg = BitMessage::random(5_000, 4).unwrap();
        for (plain, dc) in pairs {
            for levels in [2, 8, 22] {
                let cfg = QimConfig::for_host(&host, levels, plain).unwrap().with_samples_per_bit(2);
                let dc_cfg = cfg.clone().with_variant(dc).with_alpha(1.0);
                let a = embed_adapted(&host, &msg, &cfg).unwrap();
                let b = embed_adapted(&host, &msg, &dc_cfg).unwrap();
                let noisy = apply_awgn(&a, host.power(), &ChannelConfig::new(12.0, 5)).unwrap();
                let da = decode_adapted(&noisy, msg.len(), &cfg).unwrap();
                let db = decode_adapted(&noisy, msg.len(), &dc_cfg).unwrap();
                checked += 1;
                if a != b || da != db {
                    mismatches.push(format!("{plain} N={levels}"));
                }
            }
        }
    }
    outcome(mismatches.is_empty(), format!("{checked} configurations, mismatches: {mismatches:?}"))
}

/// BER for every alpha in the sweep with a shared host, message and noise.
fn alpha_sweep(noise_ratio: f64) -> (f64, f64, Vec<(f64, f64)>) {
    let bits = 1_000_000;
    let amplitude = 20.0;
    let host = uniform(bits, amplitude, 11);
    let msg = BitMessage::random(bits, 12).unwrap();
    let step = 1.0;
    let d = step * step / 12.0;
    let sigma2 = d * noise_ratio;
    let power = host.power();
    let snr = 10.0 * (power / sigma2).log10();
    let expected = optimal_alpha(d, sigma2).unwrap();
    let mut curve = Vec::new();
    for i in 0..19 {
        let alpha = 0.1 + 0.05 * i as f64;
        let cfg = QimConfig::new(40, step, Variant::ScalarDc).with_alpha(alpha);
        let x = embed_message(&host, &msg, &cfg).unwrap();
        let y = apply_awgn(&x, power, &ChannelConfig::new(snr, 13)).unwrap();
        let got = decode_message(&y, bits, &cfg).unwrap();
        curve.push((alpha, ber(&msg, &got).unwrap()));
    }
    let best = curve.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    (expected, best.0, curve)
}

fn optimal_alpha_peak() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    // sigma_n^2 = D*3/7 puts the optimum at 0.7, sigma_n^2 = D at 0.5
    for ratio in [3.0 / 7.0, 1.0] {
        let (expected, best, _) = alpha_sweep(ratio);
        ok &= (best - expected).abs() <= 0.1 + 1e-9;
        parts.push(format!("alpha*={expected:.2} empirical argmin={best:.2}"));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(ok && secs < 300.0, format!("{}, {secs:.1} s", parts.join("; ")))
}

fn am_sweep() -> Vec<SweepResult> {
    run_plan(&plan(
        HostSpec::am_default(),
        vec![Variant::Scalar, Variant::ScalarDc],
        vec![8, 10, 12, 14, 16],
        grid(6.0, 26.0, 0.5),
        vec![200.0],
    ))
    .unwrap()
}

fn level_trend(rows: &[SweepResult]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [10, 12, 14, 16] {
        let gap = gap_db(
            &ber_curve(rows, Variant::ScalarDc, n, 200.0),
            &ber_curve(rows, Variant::ScalarDc, n - 2, 200.0),
            TARGET_BER,
        );
        ok &= gap.is_some_and(|g| (g - 2.0).abs() <= 1.0);
        parts.push(format!("{n}->{}: {} dB", n - 2, fmt_opt(gap)));
    }
    outcome(ok, parts.join(", "))
}

fn dc_advantage(rows: &[SweepResult]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [8, 10, 12, 14, 16] {
        let gap = gap_db(
            &ber_curve(rows, Variant::Scalar, n, 200.0),
            &ber_curve(rows, Variant::ScalarDc, n, 200.0),
            TARGET_BER,
        );
        ok &= gap.is_some_and(|g| (g - 2.0).abs() <= 1.5);
        parts.push(format!("N={n}: {} dB", fmt_opt(gap)));
    }
    outcome(ok, parts.join(", "))
}

fn pam8_sweep() -> Vec<SweepResult> {
    run_plan(&plan(
        HostSpec::pam8_default(),
        vec![Variant::ScalarDc, Variant::LatticeDc],
        vec![22],
        grid(16.0, 32.0, 0.5),
        vec![100_000.0],
    ))
    .unwrap()
}

fn lattice_advantage(rows: &[SweepResult]) -> Outcome {
    let s = ber_curve(rows, Variant::ScalarDc, 22, 100_000.0);
    let l = ber_curve(rows, Variant::LatticeDc, 22, 100_000.0);
    let gap = gap_db(&s, &l, TARGET_BER);
    outcome(
        gap.is_some_and(|g| (g - 2.0).abs() <= 1.5),
        format!(
            "N=22, 4 samples/bit: scalar-dc {} dB, lattice-dc {} dB, gap {} dB",
            fmt_opt(snr_at_ber(&s, TARGET_BER)),
            fmt_opt(snr_at_ber(&l, TARGET_BER)),
            fmt_opt(gap)
        ),
    )
}

fn mean_ber(rows: &[SweepResult]) -> f64 {
    let v: Vec<f64> = rows.iter().filter_map(|r| r.ber).collect();
    v.iter().sum::<f64>() / v.len() as f64
}

/// Runs one rate point with plain QIM, DC-QIM at the per-cell optimal alpha
/// and DC-QIM at every alpha of the 0.1..1.0 sweep. Returns all rows and the
/// best configuration by mean BER.
fn best_at_rate(host: HostSpec, levels: usize, rate: f64) -> (Vec<SweepResult>, String, f64) {
    let mut settings = vec![(Variant::Scalar, AlphaSetting::Fixed(1.0)), (Variant::ScalarDc, AlphaSetting::Optimal)];
    settings.extend((0..19).map(|i| (Variant::ScalarDc, AlphaSetting::Fixed(0.1 + 0.05 * i as f64))));
    let mut all = Vec::new();
    let mut best = (String::new(), f64::INFINITY);
    for (variant, alpha) in settings {
        let mut p = plan(host.clone(), vec![variant], vec![levels], vec![20.0], vec![rate]);
        p.alpha = alpha;
        let rows = run_plan(&p).unwrap();
        let b = mean_ber(&rows);
        if b < best.1 {
            let label = match alpha {
                AlphaSetting::Fixed(a) => format!("{variant} alpha={a:.2}"),
                AlphaSetting::Optimal => format!("{variant} optimal alpha"),
            };
            best = (label, b);
        }
        all.extend(rows);
    }
    (all, best.0, best.1)
}

fn throughput_endpoint() -> (Outcome, Vec<SweepResult>, Vec<SweepResult>) {
    let (am, av, ab) = best_at_rate(HostSpec::am_default(), 8, 8_000.0);
    // FM runs use 2-6 levels; 2 is the coarsest and most robust
    let (fm, fv, fb) = best_at_rate(HostSpec::fm_default(), 2, 200_000.0);
    let o = outcome(
        ab < TARGET_BER && fb < TARGET_BER,
        format!("AM 8 kbps N=8 20 dB best BER {ab:.4} ({av}); FM 200 kbps N=2 20 dB best BER {fb:.5} ({fv})"),
    );
    (o, am, fm)
}

fn spectral_mask() -> Outcome {
    let mut p = plan(HostSpec::fm_default(), Variant::ALL.to_vec(), vec![2, 4, 6, 22], vec![f64::INFINITY], vec![100_000.0]);
    p.message_length = 20_000;
    p.trials = 1;
    let results = run_spectrum(&p).unwrap();
    let worst = results.iter().map(|r| r.out_of_band_db).fold(f64::NEG_INFINITY, f64::max);
    let segments = results[0].psd.segments;
    outcome(
        worst <= -33.0,
        format!("{} composites, worst out-of-band bin {:.1} dB below main lobe ({segments} averaged segments)", results.len(), -worst),
    )
}

fn distortion_rows(host: HostSpec) -> Vec<SweepResult> {
    let rate = host.sample_rate;
    let mut p = plan(host, vec![Variant::ScalarDc], (2..=45).collect(), vec![f64::INFINITY], vec![rate]);
    p.trials = 3;
    run_plan(&p).unwrap()
}

fn mean_distortion(rows: &[SweepResult]) -> BTreeMap<usize, f64> {
    let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for r in rows {
        let e = acc.entry(r.levels).or_insert((0.0, 0));
        e.0 += r.d_norm.unwrap_or(f64::NAN);
        e.1 += 1;
    }
    acc.into_iter().map(|(n, (s, c))| (n, s / c as f64)).collect()
}

fn distortion_ordering(am: &[SweepResult], fm: &[SweepResult]) -> Outcome {
    let am = mean_distortion(am);
    let fm = mean_distortion(fm);
    let decreasing = |m: &BTreeMap<usize, f64>| m.values().collect::<Vec<_>>().windows(2).all(|w| w[1] < w[0]);
    let (a22, f22) = (am[&22], fm[&22]);
    outcome(
        f22 < a22 && decreasing(&am) && decreasing(&fm),
        format!(
            "N=22: FM {f22:.3}% < AM {a22:.3}%; AM {:.2}%..{:.3}%, FM {:.2}%..{:.3}% over N=2..45, monotone: AM {} FM {}",
            am[&2],
            am[&45],
            fm[&2],
            fm[&45],
            decreasing(&am),
            decreasing(&fm)
        ),
    )
}

/// Compares mean goodput per sample with mean capacity per sample for every
/// cell of every sweep.
fn capacity_bound(sweeps: &[(&str, f64, &[SweepResult])]) -> Outcome {
    let mut cells = 0;
    let mut violations = Vec::new();
    let mut tightest = (0.0_f64, String::new());
    for (name, fs, rows) in sweeps {
        let mut acc: BTreeMap<String, (f64, f64, usize)> = BTreeMap::new();
        for r in rows.iter().filter(|r| !r.is_flagged()) {
            let key = format!("{name} {} N={} {} dB {} bps", r.variant, r.levels, r.snr_db, r.bit_rate_bps);
            let e = acc.entry(key).or_insert((0.0, 0.0, 0));
            e.0 += r.throughput_bps.unwrap() / fs;
            e.1 += r.capacity_bits_per_sample.unwrap();
            e.2 += 1;
        }
        for (key, (g, c, n)) in acc {
            let (g, c) = (g / n as f64, c / n as f64);
            cells += 1;
            if g > c {
                violations.push(format!("{key}: {g:.4} > {c:.4}"));
            }
            if c.is_finite() && g / c > tightest.0 {
                tightest = (g / c, key);
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "{cells} cells, {} violations, tightest goodput/capacity {:.3} at {} {}",
            violations.len(),
            tightest.0,
            tightest.1,
            violations.join("; ")
        ),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut report = |id: u32, name: &'static str, o: Outcome| {
        println!("{} criterion {id} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, name, o));
    };

    report(1, "noiseless correctness", noiseless_round_trip());
    report(2, "step squared over twelve", step_squared_law());
    report(3, "unit-alpha reduction", unit_alpha_reduction());
    report(4, "optimal alpha", optimal_alpha_peak());
    let am = am_sweep();
    report(5, "level-vs-BER trend", level_trend(&am));
    report(6, "DC advantage", dc_advantage(&am));
    let pam = pam8_sweep();
    report(7, "lattice advantage", lattice_advantage(&pam));
    let (tp, am_tp, fm_tp) = throughput_endpoint();
    report(8, "throughput endpoint", tp);
    report(9, "spectral mask", spectral_mask());
    let (am_d, fm_d) = (distortion_rows(HostSpec::am_default()), distortion_rows(HostSpec::fm_default()));
    report(10, "normalized-distortion ordering", distortion_ordering(&am_d, &fm_d));
    let am_fs = HostSpec::am_default().sample_rate;
    let fm_fs = HostSpec::fm_default().sample_rate;
    let pam_fs = HostSpec::pam8_default().sample_rate;
    report(
        11,
        "capacity sanity",
        capacity_bound(&[
            ("am-levels", am_fs, &am),
            ("pam8", pam_fs, &pam),
            ("am-8kbps", am_fs, &am_tp),
            ("fm-200kbps", fm_fs, &fm_tp),
            ("am-distortion", am_fs, &am_d),
            ("fm-distortion", fm_fs, &fm_d),
        ]),
    );

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!("acceptance: {} of {} criteria pass", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failing criteria: {failed:?}");
        ExitCode::FAILURE
    }
}

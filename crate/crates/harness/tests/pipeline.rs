use std::fs;

use qim_core::{HostSpec, Variant};
use qim_harness::output::write_csv;
use qim_harness::{emit_csv, emit_series, parse_csv, run_plan, AlphaSetting, ExperimentPlan, Figure, HarnessError};

fn small_plan() -> ExperimentPlan {
    ExperimentPlan {
        seed: 42,
        trials: 3,
        message_length: 500,
        variants: vec![Variant::Scalar, Variant::ScalarDc],
        levels: vec![8, 10, 12],
        snr_db: vec![8.0, 14.0, 20.0, f64::INFINITY],
        bit_rates: vec![200.0],
        alpha: AlphaSetting::Fixed(0.7),
        pulse_shape: false,
        host_duration_s: None,
        spectrum_nfft: 1024,
        host: HostSpec::am_default(),
    }
}

#[test]
fn row_count_and_echoed_inputs() {
    let plan = small_plan();
    let rows = run_plan(&plan).unwrap();
    assert_eq!(rows.len(), 2 * 3 * 4 * 3);
    let mut i = 0;
    for cell in plan.cells() {
        for trial in 0..plan.trials {
            let r = &rows[i];
            assert_eq!((r.variant, r.levels, r.snr_db, r.bit_rate_bps, r.trial), (cell.variant, cell.levels, cell.snr_db, cell.bit_rate, trial));
            let ber = r.ber.unwrap();
            assert!((0.0..=1.0).contains(&ber));
            if r.snr_db.is_infinite() {
                assert_eq!(ber, 0.0);
            }
            i += 1;
        }
    }
}

#[test]
fn csv_is_byte_identical_across_runs() {
    let plan = small_plan();
    let mut a = Vec::new();
    let mut b = Vec::new();
    write_csv(&run_plan(&plan).unwrap(), &mut a).unwrap();
    write_csv(&run_plan(&plan).unwrap(), &mut b).unwrap();
    assert_eq!(a, b);

    let mut other = plan.clone();
    other.seed = 43;
    let mut c = Vec::new();
    write_csv(&run_plan(&other).unwrap(), &mut c).unwrap();
    assert_ne!(a, c);
}

#[test]
fn csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut plan = small_plan();
    plan.alpha = AlphaSetting::Optimal;
    let mut rows = run_plan(&plan).unwrap();
    // include a flagged row
    let mut short = small_plan();
    short.host_duration_s = Some(0.01);
    short.trials = 1;
    rows.extend(run_plan(&short).unwrap().into_iter().take(2));
    assert!(rows.last().unwrap().is_flagged());
    let path = dir.path().join("r.csv");
    emit_csv(&rows, &path).unwrap();
    assert_eq!(parse_csv(&path).unwrap(), rows);
    let header = fs::read_to_string(&path).unwrap();
    assert!(header.starts_with("variant,levels,alpha,snr_db,bit_rate_bps,trial,"));
}

#[test]
fn one_series_file_per_curve() {
    let dir = tempfile::tempdir().unwrap();
    let plan = small_plan();
    let rows = run_plan(&plan).unwrap();
    let ber = emit_series(&rows, Figure::Ber, dir.path()).unwrap();
    assert_eq!(ber.len(), plan.variants.len() * plan.levels.len());
    for v in &plan.variants {
        for n in &plan.levels {
            let p = dir.path().join(format!("ber_{}_N{}.dat", v.name(), n));
            assert!(ber.contains(&p));
            // the noiseless sentinel is not plotted
            assert_eq!(fs::read_to_string(&p).unwrap().lines().count(), 3);
        }
    }
    let tp = emit_series(&rows, Figure::Throughput, dir.path()).unwrap();
    assert_eq!(tp.len(), ber.len());
    let d = emit_series(&rows, Figure::Distortion, dir.path()).unwrap();
    assert_eq!(d.len(), plan.variants.len());
}

#[test]
fn empty_results_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(emit_csv(&[], &dir.path().join("x.csv")), Err(HarnessError::EmptyResults)));
}

#[test]
fn unwritable_path_is_an_error() {
    let rows = run_plan(&ExperimentPlan {
        trials: 1,
        snr_db: vec![f64::INFINITY],
        variants: vec![Variant::Scalar],
        levels: vec![4],
        ..small_plan()
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("missing").join("x.csv");
    assert!(matches!(emit_csv(&rows, &bad), Err(HarnessError::Io { .. })));
}

#[test]
fn lower_levels_give_lower_ber() {
    let plan = ExperimentPlan {
        variants: vec![Variant::ScalarDc],
        snr_db: vec![12.0],
        trials: 4,
        message_length: 2000,
        ..small_plan()
    };
    let rows = run_plan(&plan).unwrap();
    let mean = |n: usize| {
        let v: Vec<f64> = rows.iter().filter(|r| r.levels == n).map(|r| r.ber.unwrap()).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    assert!(mean(8) < mean(10) && mean(10) < mean(12));
}

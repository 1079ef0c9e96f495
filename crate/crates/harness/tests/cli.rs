use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qim_core::capture::{save_capture, CaptureFormat};
use qim_core::{synthesize_host, HostSpec};

fn qim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qim")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const PLAN: &str = r#"
seed = 9
trials = 2
message_length = 300
variants = ["scalar", "lattice-dc"]
levels = [8, 16]
snr_db = [10.0, 20.0]
bit_rates = [50000.0]

[host]
kind = "pam8"
sample_rate = 400000.0
symbol_rate = 100000.0
"#;

#[test]
fn run_writes_csv_and_series() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.toml");
    fs::write(&plan, PLAN).unwrap();
    let out = dir.path().join("out");
    let o = qim(&["run", s(&plan), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 2 * 2);
    for name in ["ber_scalar_N8.dat", "ber_lattice-dc_N16.dat", "throughput_scalar_N16.dat", "distortion_lattice-dc_N8-16.dat"] {
        assert!(out.join(name).exists(), "{name}");
    }

    // seed override changes the output, and repeating it does not
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(qim(&["run", s(&plan), "--out", s(&a), "--seed", "1"]).status.success());
    assert!(qim(&["run", s(&plan), "--out", s(&b), "--seed", "1"]).status.success());
    let ca = fs::read(a.join("results.csv")).unwrap();
    assert_eq!(ca, fs::read(b.join("results.csv")).unwrap());
    assert_ne!(ca, csv.into_bytes());
}

#[test]
fn spectrum_writes_one_file_per_curve() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.toml");
    fs::write(&plan, PLAN).unwrap();
    let out = dir.path().join("spec");
    let o = qim(&["spectrum", s(&plan), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let n = fs::read_dir(&out).unwrap().count();
    assert_eq!(n, 4);
    assert!(String::from_utf8_lossy(&o.stdout).contains("below main lobe"));
}

#[test]
fn bad_inputs_fail_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    let o = qim(&["run", s(&missing)]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("error:"));

    let plan = dir.path().join("bad.toml");
    fs::write(&plan, PLAN.replace("levels = [8, 16]", "levels = []")).unwrap();
    let o = qim(&["run", s(&plan), "--out", s(dir.path())]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("non-empty"));
}

#[test]
fn embed_and_decode_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (spec, variant) in [
        (HostSpec::am_default(), "scalar-dc"),
        (HostSpec::pam8_default(), "lattice"),
        (HostSpec::pam8_default(), "scalar"),
        (HostSpec::fm_default(), "lattice-dc"),
    ] {
        let host = synthesize_host(&spec, 0.05, 1).unwrap();
        let capture = dir.path().join("host.f32");
        save_capture(&host, &capture, CaptureFormat::RawF32).unwrap();
        let message = dir.path().join("msg.hex");
        fs::write(&message, "de ad be ef\n0123456789abcdef\n").unwrap();
        let config = dir.path().join("embed.toml");
        fs::write(&config, format!("levels = 16\nvariant = \"{variant}\"\nsamples_per_bit = 3\n")).unwrap();
        let out = dir.path().join("composite.f32");
        let o = qim(&[
            "embed-file",
            "--host",
            s(&capture),
            "--message",
            s(&message),
            "--config",
            s(&config),
            "--out",
            s(&out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let key = dir.path().join("composite.f32.key.toml");
        let decoded = dir.path().join("decoded.hex");
        let o = qim(&["decode-file", "--input", s(&out), "--key", s(&key), "--out", s(&decoded)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(fs::read_to_string(&decoded).unwrap().trim(), "deadbeef0123456789abcdef", "{variant}");
    }
}

#[test]
fn embed_file_rejects_oversized_message() {
    let dir = tempfile::tempdir().unwrap();
    let host = synthesize_host(&HostSpec::am_default(), 0.001, 1).unwrap();
    let capture = dir.path().join("h.f32");
    save_capture(&host, &capture, CaptureFormat::RawF32).unwrap();
    let message = dir.path().join("m.hex");
    fs::write(&message, "ff".repeat(64)).unwrap();
    let config = dir.path().join("c.toml");
    fs::write(&config, "levels = 8\nvariant = \"scalar\"\n").unwrap();
    let o = qim(&[
        "embed-file",
        "--host",
        s(&capture),
        "--message",
        s(&message),
        "--config",
        s(&config),
        "--out",
        s(&dir.path().join("o.f32")),
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("capacity") || String::from_utf8_lossy(&o.stderr).contains("needs"));
}

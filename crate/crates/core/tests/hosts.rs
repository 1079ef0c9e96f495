use qim_core::host::{synthesize_host_detailed, PAM8_LEVELS};
use qim_core::metrics::{audio_snr_db, DistortionReport};
use qim_core::{demodulate, embed_message, BitMessage, HostSpec, QimConfig, Variant};

#[test]
fn pam8_symbols_are_uniform() {
    let spec = HostSpec::pam8_default();
    let host = synthesize_host_detailed(&spec, 1.0, 21).unwrap();
    let symbols = &host.baseband;
    assert!(symbols.len() >= 100_000);
    let n = symbols.len() as f64;
    let p = 1.0 / 8.0;
    let sigma = (n * p * (1.0 - p)).sqrt();
    for level in PAM8_LEVELS {
        let count = symbols.iter().filter(|&&s| s == level).count() as f64;
        assert!((count - n * p).abs() <= 3.0 * sigma, "{level}: {count}");
    }
}

#[test]
fn pam8_noiseless_demodulation_recovers_symbols() {
    let spec = HostSpec::pam8_default();
    let host = synthesize_host_detailed(&spec, 0.01, 2).unwrap();
    let out = demodulate(&host.signal, &spec).unwrap();
    let got = out.as_real().unwrap();
    assert_eq!(got.len(), host.baseband.len());
    let errors = got.iter().zip(&host.baseband).filter(|(a, b)| a != b).count();
    assert_eq!(errors, 0);
}

#[test]
fn am_audio_quality_improves_with_levels() {
    let spec = HostSpec::am_default();
    let host = synthesize_host_detailed(&spec, 2.0, 8).unwrap();
    let msg = BitMessage::random(host.signal.len(), 9).unwrap();
    let mut last = f64::NEG_INFINITY;
    let mut last_d = f64::INFINITY;
    for levels in [4, 8, 16, 32] {
        let cfg = QimConfig::for_host(&host.signal, levels, Variant::ScalarDc).unwrap();
        let x = embed_message(&host.signal, &msg, &cfg).unwrap();
        let audio = demodulate(&x, &spec).unwrap();
        let snr = audio_snr_db(&host.baseband, audio.as_real().unwrap()).unwrap();
        let report = DistortionReport::measure(&host.signal, &x).unwrap();
        assert!(snr > last, "N={levels}: {snr} <= {last}");
        assert!(report.d_norm < last_d);
        last = snr;
        last_d = report.d_norm;
    }
}

//! Benchmark signal presets. Parameter tables are fixed; experiments refer
//! to them by name.

use num_complex::Complex64;
use rdmodal::signal::{RdMode, SignalSpec};
use thiserror::Error;

#[derive(Debug, Error)]
#[error("unknown signal preset '{0}' (see `rdmodal presets`)")]
pub struct UnknownPreset(pub String);

fn mode(freqs: &[f64], damps: &[f64]) -> RdMode {
    RdMode::new(freqs.to_vec(), damps.to_vec(), Complex64::new(1.0, 0.0))
}

/// Look up a preset signal by name (`signal1` .. `signal5`).
pub fn preset(name: &str) -> Result<SignalSpec, UnknownPreset> {
    let spec = match name {
        // 2-D single tone, 10x10
        "signal1" => SignalSpec::new(vec![10, 10], vec![mode(
            &[0.22, 0.34],
            &[-0.011, -0.015],
        )]),
        // 3-D, two well-separated modes, 8x8x8
        "signal2" => SignalSpec::new(vec![8, 8, 8], vec![
            mode(&[0.40, 0.10, 0.10], &[-0.01, -0.01, -0.01]),
            mode(&[0.20, 0.30, 0.25], &[-0.01, -0.15, -0.01]),
        ]),
        // 3-D, three modes with identical coordinates in dimensions 2-3,
        // first-dimension frequencies separated by 1/M1, 10x10x10
        "signal3" => SignalSpec::new(vec![10, 10, 10], vec![
            mode(&[0.30, 0.31, 0.22], &[-0.01, -0.01, -0.01]),
            mode(&[0.10, 0.45, 0.11], &[-0.01, -0.015, -0.01]),
            mode(&[0.20, 0.31, 0.11], &[-0.01, -0.01, -0.01]),
        ]),
        // like signal3 but with first-dimension frequencies closer than 1/M1
        "signal4" => SignalSpec::new(vec![10, 10, 10], vec![
            mode(&[0.28, 0.31, 0.22], &[-0.01, -0.01, -0.01]),
            mode(&[0.12, 0.45, 0.11], &[-0.01, -0.015, -0.01]),
            mode(&[0.20, 0.31, 0.11], &[-0.01, -0.01, -0.01]),
        ]),
        // four modes with only the first dimension longer than 4, 10x3x3
        "signal5" => SignalSpec::new(vec![10, 3, 3], vec![
            mode(&[0.30, 0.10, 0.10], &[-0.01, -0.01, -0.01]),
            mode(&[0.13, 0.45, 0.40], &[-0.01, -0.015, -0.01]),
            mode(&[0.20, 0.31, 0.10], &[-0.01, -0.01, -0.01]),
            mode(&[0.42, 0.22, 0.32], &[-0.012, -0.01, -0.01]),
        ]),
        other => return Err(UnknownPreset(other.to_string())),
    };
    Ok(spec.expect("preset tables are well formed"))
}

/// Names and one-line descriptions of all presets.
pub fn list_presets() -> Vec<(&'static str, String)> {
    ["signal1", "signal2", "signal3", "signal4", "signal5"]
        .iter()
        .map(|&name| {
            let spec = preset(name).unwrap();
            let sizes = spec
                .sizes
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join("x");
            (name, format!("{} modes, {}", spec.num_modes(), sizes))
        })
        .collect()
}

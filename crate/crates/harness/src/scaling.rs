//! Runtime scaling study: multiple-tone estimation cost versus the first
//! dimension's length, with the trailing dimensions held small.

use crate::experiment::ExperimentError;
use num_complex::Complex64;
use rdmodal::mtsm::{mtsm, MtsmConfig};
use rdmodal::signal::{add_noise, sigma_for_snr, NoiseSpec, RdMode, SignalSpec};
use rdmodal::stsm::MultigridConfig;
use std::fmt::Write as _;
use std::io::Write as _;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct ScalingConfig {
    /// First-dimension lengths, strictly increasing.
    pub m1_values: Vec<usize>,
    /// Timed repetitions per size (one warmup run is added on top).
    pub trials: usize,
    pub snr_db: f64,
    pub master_seed: u64,
    pub multigrid: MultigridConfig,
    pub out: Option<String>,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            m1_values: vec![64, 128, 256, 512],
            trials: 5,
            snr_db: 20.0,
            master_seed: 0,
            multigrid: MultigridConfig::default(),
            out: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScalingRow {
    pub m1: usize,
    pub mean_ms: f64,
    pub std_ms: f64,
}

/// Two 3-D modes on an `m1 x 4 x 4` support.
pub fn scaling_signal(m1: usize) -> SignalSpec {
    let mode = |freqs: &[f64], damps: &[f64]| {
        RdMode::new(freqs.to_vec(), damps.to_vec(), Complex64::new(1.0, 0.0))
    };
    SignalSpec::new(vec![m1, 4, 4], vec![
        mode(&[0.40, 0.10, 0.10], &[-0.01, -0.01, -0.01]),
        mode(&[0.20, 0.30, 0.25], &[-0.01, -0.05, -0.01]),
    ])
    .expect("scaling signal is well formed")
}

pub fn run_scaling(cfg: &ScalingConfig) -> Result<Vec<ScalingRow>, ExperimentError> {
    let mut rows = Vec::with_capacity(cfg.m1_values.len());
    for (i, &m1) in cfg.m1_values.iter().enumerate() {
        if i > 0 && m1 <= cfg.m1_values[i - 1] {
            return Err(ExperimentError::Config(
                crate::config::ConfigError::BadSnrRange(format!(
                    "m1 values must be strictly increasing, got {:?}",
                    cfg.m1_values
                )),
            ));
        }
        let spec = scaling_signal(m1);
        let clean = spec.synthesize()?;
        let sigma2 = sigma_for_snr(&clean, cfg.snr_db)?;
        let mcfg = MtsmConfig {
            f_modes: 2,
            k_iters: 2,
            stsm: cfg.multigrid.clone(),
        };

        let mut times = Vec::with_capacity(cfg.trials);
        for t in 0..=cfg.trials {
            let seed = crate::experiment::trial_seed(cfg.master_seed, i, t);
            let noisy = add_noise(&clean, &NoiseSpec { sigma2, seed })?;
            let start = Instant::now();
            let out = mtsm(&noisy, &mcfg);
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            if let Err(e) = out {
                return Err(ExperimentError::AllTrialsFailed {
                    snr_db: cfg.snr_db,
                    first: e.to_string(),
                });
            }
            if t > 0 {
                times.push(elapsed); // first run is warmup
            }
        }
        let mean = times.iter().sum::<f64>() / times.len() as f64;
        let var = times.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>()
            / times.len() as f64;
        rows.push(ScalingRow {
            m1,
            mean_ms: mean,
            std_ms: var.sqrt(),
        });
    }
    Ok(rows)
}

/// Least-squares slope of log(time) against log(m1): the empirical cost
/// exponent.
pub fn fit_exponent(rows: &[ScalingRow]) -> f64 {
    let n = rows.len() as f64;
    let xs: Vec<f64> = rows.iter().map(|r| (r.m1 as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean_ms.max(1e-9).ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

pub fn render_scaling_csv(rows: &[ScalingRow]) -> String {
    let mut out = String::from("m1,mean_ms,std_ms\n");
    for r in rows {
        let _ = writeln!(out, "{},{:.4},{:.4}", r.m1, r.mean_ms, r.std_ms);
    }
    out
}

pub fn write_scaling_csv(
    cfg: &ScalingConfig,
    rows: &[ScalingRow],
) -> Result<Option<std::path::PathBuf>, ExperimentError> {
    let Some(prefix) = &cfg.out else {
        return Ok(None);
    };
    let path = std::path::PathBuf::from(format!("{prefix}_scaling.csv"));
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut f = std::fs::File::create(&path)?;
    f.write_all(render_scaling_csv(rows).as_bytes())?;
    Ok(Some(path))
}

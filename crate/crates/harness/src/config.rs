//! Experiment configuration: a TOML document with CLI overrides layered on
//! top (defaults < file < flags). The fully resolved configuration is echoed
//! into the run's meta file.

use num_complex::Complex64;
use rdmodal::signal::{RdMode, SignalSpec};
use rdmodal::stsm::MultigridConfig;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse config file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("bad SNR range '{0}': use a single value, a:b:step, or a comma list")]
    BadSnrRange(String),
    #[error("no signal selected: set `signal` to a preset name or provide [signal_spec]")]
    NoSignal,
    #[error("{0}")]
    UnknownPreset(#[from] crate::presets::UnknownPreset),
    #[error("unknown estimator '{0}' (expected 'stsm' or 'mtsm')")]
    UnknownEstimator(String),
    #[error("dim_permutation {0:?} is not a permutation of 1..=R")]
    BadPermutation(Vec<usize>),
    #[error("inline signal spec invalid: {0}")]
    BadSignal(String),
    #[error("trials must be at least 1")]
    NoTrials,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Stsm,
    Mtsm,
}

impl std::str::FromStr for Estimator {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s.to_ascii_lowercase().as_str() {
            "stsm" => Ok(Estimator::Stsm),
            "mtsm" => Ok(Estimator::Mtsm),
            other => Err(ConfigError::UnknownEstimator(other.to_string())),
        }
    }
}

/// Multigrid settings as they appear in config files.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct MultigridSettings {
    pub n_freq0: usize,
    pub n_damp0: usize,
    pub beta_min: f64,
    pub eta_nu: usize,
    pub eta_alpha: usize,
    pub levels: usize,
}

impl Default for MultigridSettings {
    fn default() -> Self {
        let d = MultigridConfig::default();
        Self {
            n_freq0: d.n_freq0,
            n_damp0: d.n_damp0,
            beta_min: d.beta_min,
            eta_nu: d.eta_nu,
            eta_alpha: d.eta_alpha,
            levels: d.levels,
        }
    }
}

impl MultigridSettings {
    pub fn to_config(&self, freq_grid_shift: f64) -> MultigridConfig {
        MultigridConfig {
            n_freq0: self.n_freq0,
            n_damp0: self.n_damp0,
            beta_min: self.beta_min,
            eta_nu: self.eta_nu,
            eta_alpha: self.eta_alpha,
            levels: self.levels,
            freq_tol: None,
            damp_tol: None,
            freq_grid_shift,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct MtsmSettings {
    pub k_iters: usize,
}

impl Default for MtsmSettings {
    fn default() -> Self {
        Self { k_iters: 2 }
    }
}

/// Inline signal description for configs that do not use a preset.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SignalSpecConfig {
    pub sizes: Vec<usize>,
    pub modes: Vec<ModeConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModeConfig {
    pub freqs: Vec<f64>,
    pub damps: Vec<f64>,
    /// Complex amplitude as `[re, im]`.
    pub amplitude: [f64; 2],
}

impl SignalSpecConfig {
    pub fn to_spec(&self) -> Result<SignalSpec, ConfigError> {
        let modes = self
            .modes
            .iter()
            .map(|m| {
                RdMode::new(
                    m.freqs.clone(),
                    m.damps.clone(),
                    Complex64::new(m.amplitude[0], m.amplitude[1]),
                )
            })
            .collect();
        SignalSpec::new(self.sizes.clone(), modes)
            .map_err(|e| ConfigError::BadSignal(e.to_string()))
    }

    pub fn from_spec(spec: &SignalSpec) -> Self {
        Self {
            sizes: spec.sizes.clone(),
            modes: spec
                .modes
                .iter()
                .map(|m| ModeConfig {
                    freqs: m.freqs.clone(),
                    damps: m.damps.clone(),
                    amplitude: [m.amplitude.re, m.amplitude.im],
                })
                .collect(),
        }
    }
}

/// Full experiment description. All fields have defaults so a config file
/// only has to mention what it changes.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Preset name; ignored when `signal_spec` is present.
    pub signal: Option<String>,
    pub signal_spec: Option<SignalSpecConfig>,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub estimator: Estimator,
    pub master_seed: u64,
    /// 1-based dimension order applied before multiple-tone estimation.
    pub dim_permutation: Option<Vec<usize>>,
    /// Randomize the initial frequency grid placement per trial.
    pub perturb_grid: bool,
    /// Record wall-clock timings in the results CSV. Off by default so the
    /// CSV is byte-reproducible; enable for complexity studies.
    pub timing: bool,
    pub out: Option<String>,
    pub multigrid: MultigridSettings,
    pub mtsm: MtsmSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            signal: None,
            signal_spec: None,
            snr_db: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            trials: 200,
            estimator: Estimator::Mtsm,
            master_seed: 0,
            dim_permutation: None,
            perturb_grid: true,
            timing: false,
            out: None,
            multigrid: MultigridSettings::default(),
            mtsm: MtsmSettings::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_file(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Ok(toml::from_str(&text).map_err(ConfigError::Parse)?)
    }

    /// The signal this experiment runs on.
    pub fn resolve_signal(&self) -> Result<SignalSpec, ConfigError> {
        if let Some(spec) = &self.signal_spec {
            return spec.to_spec();
        }
        if let Some(name) = &self.signal {
            return Ok(crate::presets::preset(name)?);
        }
        Err(ConfigError::NoSignal)
    }

    /// Validate fields that depend on the signal.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == 0 {
            return Err(ConfigError::NoTrials);
        }
        let spec = self.resolve_signal()?;
        if let Some(perm) = &self.dim_permutation {
            let r = spec.order();
            let mut seen = vec![false; r];
            if perm.len() != r {
                return Err(ConfigError::BadPermutation(perm.clone()));
            }
            for &p in perm {
                if p == 0 || p > r || seen[p - 1] {
                    return Err(ConfigError::BadPermutation(perm.clone()));
                }
                seen[p - 1] = true;
            }
        }
        Ok(())
    }

    /// Serialized resolved configuration, written to the run's meta file.
    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

/// Parse an SNR list: one value, `a:b:step`, or a comma-separated list.
/// `inf` denotes a noiseless run.
pub fn parse_snr_range(text: &str) -> Result<Vec<f64>, ConfigError> {
    let bad = || ConfigError::BadSnrRange(text.to_string());
    let parse_one = |s: &str| -> Result<f64, ConfigError> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") {
            return Ok(f64::INFINITY);
        }
        s.parse::<f64>().map_err(|_| bad())
    };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let (a, b, step) = (
            parse_one(parts[0])?,
            parse_one(parts[1])?,
            parse_one(parts[2])?,
        );
        if !step.is_finite() || step <= 0.0 || !a.is_finite() || !b.is_finite() || b < a {
            return Err(bad());
        }
        let mut out = Vec::new();
        let mut v = a;
        let eps = step * 1e-9;
        while v <= b + eps {
            out.push(v);
            v += step;
        }
        return Ok(out);
    }
    text.split(',').map(parse_one).collect()
}

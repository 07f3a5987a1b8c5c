//! Pipeline configuration: built-in defaults, overridden by a TOML file,
//! overridden by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use platewise::dataprep::PrepConfig;
use platewise::evaluation::EvalConfig;
use platewise::features::DEFAULT_PLATE_DIAMETER_CM;
use platewise::regression::ModelSpec;
use platewise::synthgen::{DatasetConfig, SessionConfig};

/// Where per-food area-to-weight ratios come from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AwrSource {
    /// Least-squares fit against the sessions' weighed ground truth.
    #[default]
    Calibrate,
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ViewAngleSynth {
    pub n_samples: usize,
    pub aim_tilt_deg: (f64, f64),
    pub ebutton_tilt_deg: (f64, f64),
}

impl Default for ViewAngleSynth {
    fn default() -> Self {
        Self { n_samples: 400, aim_tilt_deg: (5.0, 25.0), ebutton_tilt_deg: (50.0, 70.0) }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub dataset: DatasetConfig,
    pub sessions: SessionConfig,
    pub view_angle: ViewAngleSynth,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub prep: PrepConfig,
    pub eval: EvalConfig,
    /// Learner short names crossed with `subsets` when `specs` is empty.
    pub models: Vec<String>,
    pub subsets: Vec<String>,
    /// Fully specified learners; replaces `models` × `subsets` when present.
    pub specs: Vec<ModelSpec>,
    pub awr: AwrSource,
    pub plate_diameter_cm: f64,
    pub synth: SynthConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            prep: PrepConfig::default(),
            eval: EvalConfig::default(),
            models: ["rf", "et", "gb", "mlp", "svr", "dt", "ensemble"].map(String::from).to_vec(),
            subsets: ["frr", "frr-ft", "full"].map(String::from).to_vec(),
            specs: Vec::new(),
            awr: AwrSource::Calibrate,
            plate_diameter_cm: DEFAULT_PLATE_DIAMETER_CM,
            synth: SynthConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: Self = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        // Relative AWR paths are taken relative to the config file.
        if let AwrSource::File(p) = &cfg.awr {
            if p.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.awr = AwrSource::File(base.join(p));
            }
        }
        Ok(cfg)
    }

    /// Applies the global seed everywhere a seed is consumed.
    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            self.seed = s;
        }
        self.eval.seed = self.seed;
        self.synth.dataset.seed = self.seed;
        self.synth.sessions.seed = self.seed;
        self
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.eval.validate()?;
        anyhow::ensure!(
            self.plate_diameter_cm.is_finite() && self.plate_diameter_cm > 0.0,
            "plate_diameter_cm must be positive"
        );
        Ok(())
    }
}

//! Run configuration: one JSON file per run, with flags overriding fields.
//!
//! The top-level `seed` is the only seed; it is copied into every section
//! when the configuration is resolved, so the echoed file states exactly
//! what ran.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use social_affordance::learning::{LearnConfig, Variant};
use social_affordance::synthbench::{ActorPool, HmmConfig, ScenarioConfig, ScenarioKind, SuiteConfig};
use social_affordance::synthesis::SynthesisConfig;

/// Scenario parameters for `gen-data`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioSection {
    pub kind: String,
    pub n: usize,
    pub noise_sigma: f64,
    pub fps: f64,
    pub phase_frames: u32,
    pub duration_jitter: f64,
    pub pool: ActorPool,
    pub noise_joint: bool,
    pub random_placement: bool,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        let base = ScenarioConfig::new(ScenarioKind::Handshake);
        ScenarioSection {
            kind: ScenarioKind::Handshake.name().to_string(),
            n: 12,
            noise_sigma: base.noise_sigma,
            fps: base.fps,
            phase_frames: base.phase_frames,
            duration_jitter: base.duration_jitter,
            pool: base.pool,
            noise_joint: base.noise_joint,
            random_placement: base.random_placement,
        }
    }
}

impl ScenarioSection {
    /// `None` when `kind` names no scenario.
    pub fn scenario_config(&self) -> Option<ScenarioConfig> {
        Some(ScenarioConfig {
            kind: ScenarioKind::from_name(&self.kind)?,
            noise_sigma: self.noise_sigma,
            fps: self.fps,
            phase_frames: self.phase_frames,
            duration_jitter: self.duration_jitter,
            pool: self.pool,
            noise_joint: self.noise_joint,
            random_placement: self.random_placement,
        })
    }
}

/// Everything a command may read. Input paths are recorded; the output
/// directory is not, so reruns into different directories echo the same file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub variant: Variant,
    pub data: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub trace: bool,
    pub scenario: ScenarioSection,
    pub learn: LearnConfig,
    pub synthesis: SynthesisConfig,
    pub suite: SuiteConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            variant: Variant::Full,
            data: None,
            model: None,
            trace: false,
            scenario: ScenarioSection::default(),
            learn: LearnConfig::default(),
            synthesis: SynthesisConfig::default(),
            suite: SuiteConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }

    /// Propagates the top-level seed and variant into every section.
    pub fn resolve(mut self) -> RunConfig {
        self.learn.seed = self.seed;
        self.learn.variant = self.variant;
        self.synthesis.seed = self.seed;
        self.suite.seed = self.seed;
        self.suite.hmm = HmmConfig {
            seed: self.seed,
            ..self.suite.hmm
        };
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize")
    }
}

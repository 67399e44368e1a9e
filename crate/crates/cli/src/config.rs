use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use streetlight_core::HysteresisThresholds;

pub const DEFAULT_CALIBRATION_BAND: f64 = 0.05;
pub const DEFAULT_DENOISE_RADIUS: usize = 1;

/// Optional settings file passed with `--config`. Command-line flags win
/// over values read here.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolConfig {
    pub class_map: Option<PathBuf>,
    pub thresholds: Option<HysteresisThresholds>,
    pub denoise_radius: Option<usize>,
    pub calibration_band: Option<f64>,
}

impl ToolConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        if let Some(th) = &cfg.thresholds {
            th.validate()
                .with_context(|| format!("config {}", path.display()))?;
        }
        Ok(cfg)
    }

    pub fn thresholds(&self) -> HysteresisThresholds {
        self.thresholds.unwrap_or_default()
    }

    pub fn denoise_radius(&self) -> usize {
        self.denoise_radius.unwrap_or(DEFAULT_DENOISE_RADIUS)
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::Axis;

/// How the closing structuring element is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MorphologyMode {
    /// Flat disk applied to every inline section `(m, n)` independently.
    #[serde(rename = "per-section-2d")]
    PerSection2d,
    /// Ball over the whole volume.
    #[serde(rename = "ball-3d")]
    Ball3d,
}

impl std::str::FromStr for MorphologyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-section-2d" => Ok(MorphologyMode::PerSection2d),
            "ball-3d" => Ok(MorphologyMode::Ball3d),
            other => Err(Error::InvalidParameter(format!(
                "unknown morphology mode {other:?} (expected per-section-2d or ball-3d)"
            ))),
        }
    }
}

/// Every tunable of the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Edge of the non-overlapping analysis cube.
    pub window: usize,
    /// Axis treated as the frame axis of the spectral split.
    pub temporal_axis: Axis,
    /// Quantized gray levels of the saliency map.
    pub levels: usize,
    /// Radius of the closing disk, in voxels.
    pub se_radius: usize,
    /// Number of thresholds swept for the ROC curve.
    pub n_thresholds: usize,
    pub morphology_mode: MorphologyMode,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            window: 8,
            temporal_axis: Axis::Inline,
            levels: 256,
            se_radius: 10,
            n_thresholds: 100,
            morphology_mode: MorphologyMode::PerSection2d,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 2 {
            return Err(Error::InvalidParameter(format!(
                "window must be >= 2, got {}",
                self.window
            )));
        }
        if self.levels < 2 {
            return Err(Error::InvalidParameter(format!(
                "levels must be >= 2, got {}",
                self.levels
            )));
        }
        if self.levels > u16::MAX as usize + 1 {
            return Err(Error::InvalidParameter(format!(
                "levels must be <= 65536, got {}",
                self.levels
            )));
        }
        if self.n_thresholds < 2 {
            return Err(Error::InvalidParameter(format!(
                "n_thresholds must be >= 2, got {}",
                self.n_thresholds
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// `key=value` lines, one per field.
    pub fn echo(&self) -> Vec<String> {
        vec![
            format!("window={}", self.window),
            format!("temporal_axis={}", self.temporal_axis),
            format!("levels={}", self.levels),
            format!("se_radius={}", self.se_radius),
            format!("n_thresholds={}", self.n_thresholds),
            format!(
                "morphology_mode={}",
                match self.morphology_mode {
                    MorphologyMode::PerSection2d => "per-section-2d",
                    MorphologyMode::Ball3d => "ball-3d",
                }
            ),
        ]
    }
}

//! Checked-in experiment presets reproducing the three reference figures:
//! MSD learning curves, steady-state PSD estimation, and spectrum tracking.
//! Presets are pure data: each one is a JSON config file embedded verbatim,
//! so running a preset and running its file give identical artifacts.

use crate::config::{parse_config, ConfigError, ExperimentConfig};

pub const FIG3_MSD: &str = include_str!("../presets/fig3-msd.json");
pub const FIG4_PSD: &str = include_str!("../presets/fig4-psd.json");
pub const FIG5_TRACKING: &str = include_str!("../presets/fig5-tracking.json");

pub const NAMES: [&str; 3] = ["fig3-msd", "fig4-psd", "fig5-tracking"];

/// Raw JSON text of a preset.
pub fn preset_text(name: &str) -> Option<&'static str> {
    match name {
        "fig3-msd" => Some(FIG3_MSD),
        "fig4-psd" => Some(FIG4_PSD),
        "fig5-tracking" => Some(FIG5_TRACKING),
        _ => None,
    }
}

/// Parsed and validated preset configuration.
pub fn load(name: &str) -> Result<ExperimentConfig, ConfigError> {
    let text = preset_text(name).ok_or_else(|| ConfigError::Invalid {
        field: "preset".to_string(),
        message: format!("unknown preset '{name}' (expected one of {NAMES:?})"),
    })?;
    parse_config(text)
}

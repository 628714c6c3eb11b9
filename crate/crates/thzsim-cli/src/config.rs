//! Scenario configuration: one JSON file per run, mode-tagged, with
//! unknown keys rejected. `--set key=value` overrides apply to the raw
//! JSON tree before the typed parse so they face the same validation.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ScenarioConfig {
    QdGen(QdGenConfig),
    QdStats(QdStatsConfig),
    MimoCap(MimoCapConfig),
    HbsRun(HbsRunConfig),
    HbsDoppler(HbsDopplerConfig),
    Validate(ValidateConfig),
}

impl ScenarioConfig {
    pub fn mode_name(&self) -> &'static str {
        match self {
            ScenarioConfig::QdGen(_) => "qd_gen",
            ScenarioConfig::QdStats(_) => "qd_stats",
            ScenarioConfig::MimoCap(_) => "mimo_cap",
            ScenarioConfig::HbsRun(_) => "hbs_run",
            ScenarioConfig::HbsDoppler(_) => "hbs_doppler",
            ScenarioConfig::Validate(_) => "validate",
        }
    }
}

fn default_bin_width() -> f64 {
    1.0
}
fn default_floor() -> f64 {
    -30.0
}
fn default_snr() -> f64 {
    20.0
}
fn default_beams() -> usize {
    4
}
fn default_hpbw() -> f64 {
    8.7
}
fn default_pitch() -> f64 {
    0.01
}
fn default_fs() -> f64 {
    30_000.0
}
fn default_carrier() -> f64 {
    300e9
}
fn default_window() -> usize {
    1024
}
fn default_hop() -> usize {
    512
}

/// Where the environment preset comes from: a built-in name or a file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetRef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl PresetRef {
    pub fn load(&self) -> Result<thzsim::qd::EnvironmentPreset> {
        match (&self.name, &self.path) {
            (Some(name), None) => Ok(thzsim::qd::EnvironmentPreset::builtin(name)?),
            (None, Some(path)) => Ok(thzsim::qd::EnvironmentPreset::from_path(
                std::path::Path::new(path),
            )?),
            _ => bail!("preset requires exactly one of `name` or `path`"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QdGenConfig {
    pub preset: PresetRef,
    /// Tx/Rx override; defaults to the preset's stats link.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx: Option<[f64; 3]>,
    pub seed_start: u64,
    pub seed_count: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QdStatsConfig {
    pub preset: PresetRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx: Option<[f64; 3]>,
    pub seed_count: u64,
    #[serde(default = "default_bin_width")]
    pub bin_width_ns: f64,
    #[serde(default = "default_floor")]
    pub floor_db: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MimoCapConfig {
    pub preset: PresetRef,
    pub seed_count: u64,
    #[serde(default = "default_snr")]
    pub snr_db: f64,
    #[serde(default = "default_beams")]
    pub beams: usize,
    #[serde(default = "default_hpbw")]
    pub hpbw_deg: f64,
}

/// Point-cloud frame source.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrameSource {
    /// CSV rows (t_s, point_id, x, y, z).
    Csv { path: String },
    /// Directory of ASCII PLY files, sorted by name.
    PlyDir { path: String, frame_rate_hz: f64 },
    /// Synthetic walking phantom.
    Phantom {
        start: [f64; 3],
        velocity: [f64; 3],
        duration_s: f64,
        frame_rate_hz: f64,
    },
}

impl FrameSource {
    pub fn load(&self) -> Result<Vec<thzsim::hbs::HumanFrame>> {
        match self {
            FrameSource::Csv { path } => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading frames from {path}"))?;
                Ok(thzsim::io::frames_from_csv(&text)?)
            }
            FrameSource::PlyDir {
                path,
                frame_rate_hz,
            } => Ok(thzsim::io::frames_from_ply_dir(
                std::path::Path::new(path),
                *frame_rate_hz,
            )?),
            FrameSource::Phantom {
                start,
                velocity,
                duration_s,
                frame_rate_hz,
            } => Ok(thzsim::hbs::phantom::walk_frames(
                &thzsim::hbs::phantom::PhantomParams::default(),
                thzsim::geometry::Point3::new(start[0], start[1], start[2]),
                thzsim::geometry::Vec3::new(velocity[0], velocity[1], velocity[2]),
                *duration_s,
                *frame_rate_hz,
            )),
        }
    }
}

fn default_model() -> String {
    "human_shaped".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HbsRunConfig {
    pub frames: FrameSource,
    pub tx: [f64; 3],
    pub rx: [f64; 3],
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default = "default_pitch")]
    pub pitch_m: f64,
    #[serde(default = "default_fs")]
    pub fs_hz: f64,
    #[serde(default = "default_carrier")]
    pub f_hz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HbsDopplerConfig {
    #[serde(flatten)]
    pub run: HbsRunConfig,
    #[serde(default = "default_window")]
    pub stft_window: usize,
    #[serde(default = "default_hop")]
    pub stft_hop: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {}

pub fn screen_model(name: &str) -> Result<thzsim::hbs::ScreenModel> {
    match name {
        "human_shaped" => Ok(thzsim::hbs::ScreenModel::HumanShaped),
        "rectangular" => Ok(thzsim::hbs::ScreenModel::Rectangular),
        other => bail!("unknown screen model `{other}` (human_shaped | rectangular)"),
    }
}

/// Apply one `--set key=value` override to the raw JSON tree. Dotted
/// keys traverse objects; the value is parsed as JSON when possible,
/// falling back to a string.
pub fn apply_override(tree: &mut serde_json::Value, spec: &str) -> Result<()> {
    let (key, value) = spec
        .split_once('=')
        .ok_or_else(|| anyhow!("override `{spec}` is not key=value"))?;
    let parsed: serde_json::Value = serde_json::from_str(value)
        .unwrap_or_else(|_| serde_json::Value::String(value.to_string()));
    let mut node = tree;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| anyhow!("override `{key}`: `{part}` is not an object"))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), parsed);
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    unreachable!()
}

/// Load the config file, apply overrides, parse strictly.
pub fn load(path: &std::path::Path, overrides: &[String]) -> Result<(ScenarioConfig, Vec<u8>)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut tree: serde_json::Value =
        serde_json::from_str(&text).context("config is not valid JSON")?;
    for spec in overrides {
        apply_override(&mut tree, spec)?;
    }
    let canonical = serde_json::to_vec(&tree).expect("value serializes");
    let config: ScenarioConfig =
        serde_json::from_value(tree).context("config rejected by the schema")?;
    Ok((config, canonical))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_traverse_and_parse() {
        let mut v: serde_json::Value = serde_json::json!({
            "mode": "qd_stats",
            "preset": {"name": "corridor"},
            "seed_count": 10
        });
        apply_override(&mut v, "seed_count=99").unwrap();
        apply_override(&mut v, "preset.name=open_square").unwrap();
        apply_override(&mut v, "floor_db=-25.0").unwrap();
        let cfg: ScenarioConfig = serde_json::from_value(v).unwrap();
        match cfg {
            ScenarioConfig::QdStats(c) => {
                assert_eq!(c.seed_count, 99);
                assert_eq!(c.preset.name.as_deref(), Some("open_square"));
                assert_eq!(c.floor_db, -25.0);
            }
            _ => panic!("wrong mode"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let v = serde_json::json!({
            "mode": "qd_stats",
            "preset": {"name": "corridor"},
            "seed_count": 10,
            "surprise": true
        });
        assert!(serde_json::from_value::<ScenarioConfig>(v).is_err());
    }
}

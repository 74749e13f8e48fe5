//! Flat key/value experiment configuration with explicit units in key names.
//!
//! Every key has a default, so an empty file is a valid configuration; the
//! resolved snapshot written next to results spells out every value.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use thz_doa::channel::BackgroundModel;
use thz_doa::experiment::{ExperimentConfig, SweepAxis};
use thz_doa::medium::{summer_air, AbsorptionProfile, SyntheticProfile, DEFAULT_PROFILE_BAND};
use thz_doa::spectrum::FrequencyGrid;
use thz_doa::subspace::AngleGrid;
use thz_doa::array::UlaGeometry;

/// Raised for content problems in a configuration file; maps to exit code 2.
#[derive(Debug)]
pub struct ValidationError(pub String);

impl std::fmt::Display for ValidationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid configuration: {}", self.0)
    }
}

impl std::error::Error for ValidationError {}

fn err(field: &str, message: impl std::fmt::Display) -> anyhow::Error {
    ValidationError(format!("{field}: {message}")).into()
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub scenario: ScenarioSection,
    pub pulse: PulseSection,
    pub array: ArraySection,
    pub grid: GridSection,
    pub music: MusicSection,
    pub noise: NoiseSection,
    pub medium: MediumSection,
    pub run: RunSection,
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSection {
    pub theta_deg: f64,
    pub distance_m: f64,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            theta_deg: 10.25,
            distance_m: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseSection {
    pub order: u32,
    pub fc_thz: f64,
    pub energy_aj: f64,
}

impl Default for PulseSection {
    fn default() -> Self {
        Self {
            order: 1,
            fc_thz: 6.0,
            energy_aj: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArraySection {
    pub elements: usize,
    pub spacing_um: f64,
}

impl Default for ArraySection {
    fn default() -> Self {
        Self {
            elements: 8,
            spacing_um: 15.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub f_start_thz: f64,
    pub bandwidth_thz: f64,
    pub observation_ps: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            f_start_thz: 1.0,
            bandwidth_thz: 9.0,
            observation_ps: 10.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MusicSection {
    pub angle_min_deg: f64,
    pub angle_max_deg: f64,
    pub angle_step_deg: f64,
    pub refine: bool,
    pub sources: usize,
}

impl Default for MusicSection {
    fn default() -> Self {
        Self {
            angle_min_deg: -90.0,
            angle_max_deg: 90.0,
            angle_step_deg: 0.01,
            refine: true,
            sources: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    /// "saturated" or "finite-distance".
    pub background: String,
    pub temperature_k: f64,
    /// Antenna center frequency; 0 means "track the pulse center frequency".
    pub antenna_center_thz: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            background: "saturated".into(),
            temperature_k: 296.0,
            antenna_center_thz: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MediumSection {
    /// "summer-air", "vacuum", "constant", or "file".
    pub kind: String,
    pub k0_per_m: f64,
    pub path: String,
}

impl Default for MediumSection {
    fn default() -> Self {
        Self {
            kind: "summer-air".into(),
            k0_per_m: 0.0,
            path: String::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub snapshots: usize,
    pub runs: usize,
    pub seed: u64,
    pub emit_estimates: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            snapshots: 50,
            runs: 100,
            seed: 123_456_789,
            emit_estimates: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// "none", "distance_m", "energy_aj", "snapshots", "order", or "fc_thz".
    pub axis: String,
    pub values: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            axis: "none".into(),
            values: Vec::new(),
        }
    }
}

impl SimConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let config: SimConfig =
            toml::from_str(&text).map_err(|e| ValidationError(e.to_string()))?;
        Ok(config)
    }

    /// Resolve into a runnable experiment, reporting the offending field on
    /// any validation failure.
    pub fn resolve(&self, config_dir: &Path) -> anyhow::Result<ExperimentConfig> {
        if !(self.scenario.theta_deg.is_finite()
            && self.scenario.theta_deg > -90.0
            && self.scenario.theta_deg < 90.0)
        {
            return Err(err(
                "scenario.theta_deg",
                "must lie in the open interval (-90, 90)",
            ));
        }
        if self.scenario.distance_m <= 0.0 || self.scenario.distance_m.is_nan() {
            return Err(err("scenario.distance_m", "must be positive"));
        }
        if self.pulse.order == 0 {
            return Err(err("pulse.order", "must be >= 1"));
        }
        if self.pulse.fc_thz <= 0.0 || self.pulse.fc_thz.is_nan() {
            return Err(err("pulse.fc_thz", "must be positive"));
        }
        if self.pulse.energy_aj <= 0.0 || self.pulse.energy_aj.is_nan() {
            return Err(err("pulse.energy_aj", "must be positive"));
        }
        let geometry = UlaGeometry::new(self.array.elements, self.array.spacing_um * 1e-6)
            .map_err(|e| err("array", e))?;
        let grid = FrequencyGrid::new(
            self.grid.f_start_thz * 1e12,
            self.grid.bandwidth_thz * 1e12,
            self.grid.observation_ps * 1e-12,
        )
        .map_err(|e| err("grid", e))?;
        let angles = AngleGrid::new(
            self.music.angle_min_deg,
            self.music.angle_max_deg,
            self.music.angle_step_deg,
        )
        .map_err(|e| err("music", e))?;
        if self.music.sources == 0 || self.music.sources >= self.array.elements {
            return Err(err("music.sources", "must lie in 1..array.elements"));
        }
        let background = match self.noise.background.as_str() {
            "saturated" => BackgroundModel::Saturated,
            "finite-distance" => BackgroundModel::FiniteDistance,
            other => {
                return Err(err(
                    "noise.background",
                    format!("unknown model {other:?}; use \"saturated\" or \"finite-distance\""),
                ))
            }
        };
        if self.noise.temperature_k <= 0.0 || self.noise.temperature_k.is_nan() {
            return Err(err("noise.temperature_k", "must be positive"));
        }
        if self.noise.antenna_center_thz < 0.0 {
            return Err(err("noise.antenna_center_thz", "must be >= 0"));
        }
        let medium = Arc::new(self.build_medium(config_dir)?);
        if self.run.snapshots == 0 {
            return Err(err("run.snapshots", "must be >= 1"));
        }
        if self.run.runs == 0 {
            return Err(err("run.runs", "must be >= 1"));
        }
        let sweep = self.build_sweep()?;

        let mut config = ExperimentConfig::baseline(medium);
        config.geometry = geometry;
        config.grid = grid;
        config.pulse_order = self.pulse.order;
        config.center_frequency = self.pulse.fc_thz * 1e12;
        config.pulse_energy = self.pulse.energy_aj * 1e-18;
        config.theta_deg = self.scenario.theta_deg;
        config.distance = self.scenario.distance_m;
        config.antenna_center = if self.noise.antenna_center_thz > 0.0 {
            Some(self.noise.antenna_center_thz * 1e12)
        } else {
            None
        };
        config.temperature = self.noise.temperature_k;
        config.background = background;
        config.snapshots = self.run.snapshots;
        config.runs = self.run.runs;
        config.base_seed = self.run.seed;
        config.angles = angles;
        config.refine = self.music.refine;
        config.source_count = self.music.sources;
        config.sweep = sweep;
        config
            .validate()
            .map_err(|e| ValidationError(e.to_string()))?;
        Ok(config)
    }

    fn build_medium(&self, config_dir: &Path) -> anyhow::Result<AbsorptionProfile> {
        match self.medium.kind.as_str() {
            "summer-air" => Ok(summer_air()),
            "vacuum" => SyntheticProfile::Vacuum
                .build(DEFAULT_PROFILE_BAND.0, DEFAULT_PROFILE_BAND.1, "vacuum")
                .map_err(|e| err("medium", e)),
            "constant" => {
                if self.medium.k0_per_m < 0.0 {
                    return Err(err("medium.k0_per_m", "must be >= 0"));
                }
                SyntheticProfile::Constant(self.medium.k0_per_m)
                    .build(DEFAULT_PROFILE_BAND.0, DEFAULT_PROFILE_BAND.1, "constant")
                    .map_err(|e| err("medium", e))
            }
            "file" => {
                if self.medium.path.is_empty() {
                    return Err(err("medium.path", "required when medium.kind = \"file\""));
                }
                let path = resolve_path(config_dir, &self.medium.path);
                AbsorptionProfile::load(&path).map_err(|e| err("medium.path", e))
            }
            other => Err(err(
                "medium.kind",
                format!(
                    "unknown kind {other:?}; use \"summer-air\", \"vacuum\", \"constant\" or \"file\""
                ),
            )),
        }
    }

    fn build_sweep(&self) -> anyhow::Result<SweepAxis> {
        let values = &self.sweep.values;
        let need_values = |axis: &str| -> anyhow::Result<()> {
            if values.is_empty() {
                Err(err(
                    "sweep.values",
                    format!("must be non-empty for sweep.axis = {axis:?}"),
                ))
            } else {
                Ok(())
            }
        };
        match self.sweep.axis.as_str() {
            "none" => Ok(SweepAxis::None),
            "distance_m" => {
                need_values("distance_m")?;
                Ok(SweepAxis::Distance(values.clone()))
            }
            "energy_aj" => {
                need_values("energy_aj")?;
                Ok(SweepAxis::EnergyAttojoules(values.clone()))
            }
            "snapshots" => {
                need_values("snapshots")?;
                let ks = values
                    .iter()
                    .map(|&v| {
                        if v >= 1.0 && v.fract() == 0.0 {
                            Ok(v as usize)
                        } else {
                            Err(err("sweep.values", format!("{v} is not a valid snapshot count")))
                        }
                    })
                    .collect::<anyhow::Result<Vec<usize>>>()?;
                Ok(SweepAxis::Snapshots(ks))
            }
            "order" => {
                need_values("order")?;
                let ns = values
                    .iter()
                    .map(|&v| {
                        if v >= 1.0 && v.fract() == 0.0 {
                            Ok(v as u32)
                        } else {
                            Err(err("sweep.values", format!("{v} is not a valid pulse order")))
                        }
                    })
                    .collect::<anyhow::Result<Vec<u32>>>()?;
                Ok(SweepAxis::Order(ns))
            }
            "fc_thz" => {
                need_values("fc_thz")?;
                Ok(SweepAxis::CenterFrequency(
                    values.iter().map(|&v| v * 1e12).collect(),
                ))
            }
            other => Err(err(
                "sweep.axis",
                format!("unknown axis {other:?}"),
            )),
        }
    }

    /// Snapshot with every default spelled out and file paths made absolute.
    pub fn resolved_snapshot(&self, config_dir: &Path) -> Self {
        let mut resolved = self.clone();
        if resolved.medium.kind == "file" && !resolved.medium.path.is_empty() {
            resolved.medium.path = resolve_path(config_dir, &resolved.medium.path)
                .to_string_lossy()
                .into_owned();
        }
        resolved
    }
}

fn resolve_path(base: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

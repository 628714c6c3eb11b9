//! Environment presets: planar reflector geometry plus the stochastic
//! cluster model calibrated per environment. Presets ship as JSON
//! files embedded in the crate and can also be loaded from disk.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Plane, Point3, Vec3};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReflectorSpec {
    pub label: String,
    pub origin: [f64; 3],
    pub normal: [f64; 3],
    /// Half extents of the reflector rectangle along the plane basis.
    pub half_u: f64,
    pub half_v: f64,
    /// Amplitude loss per interaction, dB.
    pub loss_db: f64,
}

/// Random-cluster statistics. `mean_total_clusters` is the combined
/// deterministic-plus-random cluster count the environment should show
/// on average; the sampler subtracts the deterministic path count for
/// the actual placement. The power law in dB relative to the LoS path
/// is base - decay * excess_delay + shadowing, censored at the floor
/// (clusters that land below the observation floor are redrawn, like
/// paths under a sounder's dynamic range are never seen).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterModel {
    pub mean_total_clusters: f64,
    pub base_power_db: f64,
    pub decay_db_per_ns: f64,
    pub excess_delay_scale_ns: f64,
    pub shadow_sigma_db: f64,
    pub floor_db: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntraCluster {
    pub subpath_count: usize,
    pub delay_spread_ns: f64,
    pub angle_spread_deg: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    pub tx: [f64; 3],
    pub rx: [f64; 3],
}

/// Tx fixed, Rx drawn uniformly from a box; this is the documented
/// placement sampling behind the capacity figures.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityPlacement {
    pub tx: [f64; 3],
    pub rx_min: [f64; 3],
    pub rx_max: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentPreset {
    pub name: String,
    pub description: String,
    pub carrier_hz: f64,
    pub bounds_min: [f64; 3],
    pub bounds_max: [f64; 3],
    pub reflectors: Vec<ReflectorSpec>,
    pub clusters: ClusterModel,
    pub intra_cluster: IntraCluster,
    /// Canonical link for the environment statistics.
    pub stats_link: LinkSpec,
    pub capacity_placement: Option<CapacityPlacement>,
}

pub const BUILTIN_PRESETS: [&str; 4] = [
    "corridor",
    "conference_medium",
    "conference_large",
    "open_square",
];

const CORRIDOR_JSON: &str = include_str!("../../presets/corridor.json");
const CONFERENCE_MEDIUM_JSON: &str = include_str!("../../presets/conference_medium.json");
const CONFERENCE_LARGE_JSON: &str = include_str!("../../presets/conference_large.json");
const OPEN_SQUARE_JSON: &str = include_str!("../../presets/open_square.json");

impl EnvironmentPreset {
    pub fn builtin(name: &str) -> Result<Self> {
        let json = match name {
            "corridor" => CORRIDOR_JSON,
            "conference_medium" => CONFERENCE_MEDIUM_JSON,
            "conference_large" => CONFERENCE_LARGE_JSON,
            "open_square" => OPEN_SQUARE_JSON,
            other => return Err(Error::UnknownPreset(other.into())),
        };
        Self::from_json(json)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let preset: Self = serde_json::from_str(json)?;
        preset.validate()?;
        Ok(preset)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.clusters;
        if !(c.mean_total_clusters >= 0.0) {
            return Err(Error::BadPreset("mean_total_clusters must be >= 0".into()));
        }
        if !(c.decay_db_per_ns > 0.0) {
            return Err(Error::BadPreset("decay_db_per_ns must be > 0".into()));
        }
        if !(c.excess_delay_scale_ns > 0.0) {
            return Err(Error::BadPreset("excess_delay_scale_ns must be > 0".into()));
        }
        if !(c.floor_db < 0.0) {
            return Err(Error::BadPreset("floor_db must be negative".into()));
        }
        if self.intra_cluster.subpath_count == 0 {
            return Err(Error::BadPreset("subpath_count must be >= 1".into()));
        }
        for r in &self.reflectors {
            if !(r.half_u > 0.0) || !(r.half_v > 0.0) {
                return Err(Error::BadPreset(format!(
                    "reflector {} has a degenerate extent",
                    r.label
                )));
            }
            let n = Vec3::new(r.normal[0], r.normal[1], r.normal[2]);
            if n.norm() < 1e-9 {
                return Err(Error::BadPreset(format!(
                    "reflector {} has a zero normal",
                    r.label
                )));
            }
        }
        for p in [self.stats_link.tx, self.stats_link.rx] {
            self.check_bounds(Point3::new(p[0], p[1], p[2]))?;
        }
        Ok(())
    }

    pub fn check_bounds(&self, p: Point3) -> Result<()> {
        let inside = p.x >= self.bounds_min[0]
            && p.y >= self.bounds_min[1]
            && p.z >= self.bounds_min[2]
            && p.x <= self.bounds_max[0]
            && p.y <= self.bounds_max[1]
            && p.z <= self.bounds_max[2];
        if inside {
            Ok(())
        } else {
            Err(Error::OutsideBounds(p.x, p.y, p.z))
        }
    }

    pub fn stats_tx(&self) -> Point3 {
        let p = self.stats_link.tx;
        Point3::new(p[0], p[1], p[2])
    }

    pub fn stats_rx(&self) -> Point3 {
        let p = self.stats_link.rx;
        Point3::new(p[0], p[1], p[2])
    }

    /// Reflector planes with their extents resolved into runtime form.
    pub fn reflector_planes(&self) -> Result<Vec<(Plane, &ReflectorSpec)>> {
        self.reflectors
            .iter()
            .map(|r| {
                let plane = Plane::new(
                    Point3::new(r.origin[0], r.origin[1], r.origin[2]),
                    Vec3::new(r.normal[0], r.normal[1], r.normal[2]),
                )?;
                Ok((plane, r))
            })
            .collect()
    }
}

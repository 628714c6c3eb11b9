//! Quasi-deterministic channel generator: deterministic direct and
//! single-bounce specular components plus stochastic random clusters
//! with intra-cluster dispersion.

pub mod clusters;
pub mod deterministic;
pub mod preset;
pub mod rng;

pub use clusters::{expand_intra_cluster, sample_random_clusters, ClusterDescriptor};
pub use deterministic::generate_deterministic_mpcs;
pub use preset::{EnvironmentPreset, BUILTIN_PRESETS};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MpcKind {
    Direct,
    Specular,
    RandomSubpath,
}

impl std::fmt::Display for MpcKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MpcKind::Direct => write!(f, "direct"),
            MpcKind::Specular => write!(f, "specular"),
            MpcKind::RandomSubpath => write!(f, "random_subpath"),
        }
    }
}

/// One propagation path.
#[derive(Debug, Clone, PartialEq)]
pub struct Mpc {
    pub delay_ns: f64,
    /// Departure azimuth, radians in [-pi, pi).
    pub aod_rad: f64,
    /// Arrival azimuth, radians in [-pi, pi).
    pub aoa_rad: f64,
    /// Complex voltage gain referenced to isotropic antennas.
    pub amplitude: Complex64,
    pub kind: MpcKind,
    /// Interaction points along the path; empty for the direct path
    /// and for stochastic subpaths (no synthesized geometry).
    pub interaction_points: Vec<Point3>,
    /// Random cluster provenance; None for deterministic paths.
    pub cluster_id: Option<usize>,
}

/// Channel impulse response for one placement and seed.
#[derive(Debug, Clone)]
pub struct Cir {
    pub mpcs: Vec<Mpc>,
    pub tx: Point3,
    pub rx: Point3,
    pub preset_name: String,
    pub rng_seed: u64,
    pub carrier_hz: f64,
    /// Observation floor the preset was calibrated with, dB vs LoS.
    pub cluster_floor_db: f64,
}

impl Cir {
    pub fn direct(&self) -> Option<&Mpc> {
        self.mpcs.iter().find(|m| m.kind == MpcKind::Direct)
    }

    /// Incoherent total power over all paths.
    pub fn total_power(&self) -> f64 {
        self.mpcs.iter().map(|m| m.amplitude.norm_sqr()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.mpcs.is_empty() {
            return Err(Error::EmptyCir);
        }
        let n_direct = self
            .mpcs
            .iter()
            .filter(|m| m.kind == MpcKind::Direct)
            .count();
        if n_direct != 1 {
            return Err(Error::InvalidArgument(format!(
                "expected exactly one direct path, found {n_direct}"
            )));
        }
        let direct_delay = self.direct().unwrap().delay_ns;
        for m in &self.mpcs {
            if !(m.amplitude.norm() > 0.0) {
                return Err(Error::InvalidArgument("zero-amplitude path".into()));
            }
            if m.delay_ns < direct_delay - 1e-6 {
                return Err(Error::InvalidArgument(
                    "path earlier than the direct path".into(),
                ));
            }
            if !(-std::f64::consts::PI..std::f64::consts::PI).contains(&m.aod_rad)
                || !(-std::f64::consts::PI..std::f64::consts::PI).contains(&m.aoa_rad)
            {
                return Err(Error::InvalidArgument("azimuth out of range".into()));
            }
        }
        Ok(())
    }
}

/// Full synthesis: deterministic components plus expanded random
/// clusters. Bit-identical for identical (preset, tx, rx, seed).
pub fn synthesize_cir(
    preset: &EnvironmentPreset,
    tx: Point3,
    rx: Point3,
    seed: u64,
) -> Result<Cir> {
    let det = generate_deterministic_mpcs(preset, tx, rx)?;
    let direct = &det[0];
    let direct_delay_ns = direct.delay_ns;
    let reference_amplitude = direct.amplitude.norm();

    let cluster_set = clusters::sample_random_clusters_with_det(preset, tx, rx, seed, det.len())?;

    let mut mpcs = det;
    for (i, cl) in cluster_set.iter().enumerate() {
        let ctx = clusters::ExpansionContext {
            direct_delay_ns,
            reference_amplitude,
            seed,
            tx,
            rx,
            cluster_index: i,
        };
        mpcs.extend(expand_intra_cluster(cl, preset, &ctx));
    }

    let cir = Cir {
        mpcs,
        tx,
        rx,
        preset_name: preset.name.clone(),
        rng_seed: seed,
        carrier_hz: preset.carrier_hz,
        cluster_floor_db: preset.clusters.floor_db,
    };
    cir.validate()?;
    Ok(cir)
}

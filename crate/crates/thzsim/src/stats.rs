//! Summary statistics over channel realizations: omnidirectional power
//! delay profiles, delay spreads, cluster counts and relative powers,
//! and the sounder averaging-gain arithmetic.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::map_range;
use crate::geometry::Point3;
use crate::qd::{Cir, EnvironmentPreset, MpcKind};

/// Omnidirectional power delay profile. Bin k covers
/// [origin_ns + k*w, origin_ns + (k+1)*w); the origin sits at the
/// direct-path delay so bin index times width is excess delay.
#[derive(Debug, Clone)]
pub struct Pdp {
    pub bin_width_ns: f64,
    pub origin_ns: f64,
    /// Linear power per bin (incoherent sum of |gamma|^2).
    pub powers: Vec<f64>,
    /// LoS power the profile is referenced to.
    pub reference_power: f64,
}

impl Pdp {
    pub fn peak_power(&self) -> f64 {
        self.powers.iter().copied().fold(0.0, f64::max)
    }

    pub fn total_power(&self) -> f64 {
        self.powers.iter().sum()
    }
}

/// Power delay profile by incoherent binning (average power profile,
/// no small-scale phase interference).
pub fn omni_pdp(cir: &Cir, bin_width_ns: f64) -> Result<Pdp> {
    if cir.mpcs.is_empty() {
        return Err(Error::EmptyCir);
    }
    if !(bin_width_ns > 0.0) {
        return Err(Error::InvalidArgument("bin width must be positive".into()));
    }
    let origin = cir
        .mpcs
        .iter()
        .map(|m| m.delay_ns)
        .fold(f64::INFINITY, f64::min);
    let reference_power = cir
        .direct()
        .map(|m| m.amplitude.norm_sqr())
        .unwrap_or_else(|| {
            cir.mpcs
                .iter()
                .map(|m| m.amplitude.norm_sqr())
                .fold(0.0, f64::max)
        });
    let max_delay = cir
        .mpcs
        .iter()
        .map(|m| m.delay_ns)
        .fold(f64::NEG_INFINITY, f64::max);
    let n_bins = ((max_delay - origin) / bin_width_ns).floor() as usize + 1;
    let mut powers = vec![0.0; n_bins];
    for m in &cir.mpcs {
        let k = (((m.delay_ns - origin) / bin_width_ns).floor() as usize).min(n_bins - 1);
        powers[k] += m.amplitude.norm_sqr();
    }
    Ok(Pdp {
        bin_width_ns,
        origin_ns: origin,
        powers,
        reference_power,
    })
}

fn bins_above_floor(pdp: &Pdp, floor_db: f64) -> Result<Vec<(usize, f64)>> {
    if !(floor_db < 0.0) {
        return Err(Error::InvalidArgument(
            "floor must be negative (dB below peak)".into(),
        ));
    }
    let peak = pdp.peak_power();
    if !(peak > 0.0) {
        return Err(Error::AllBelowFloor);
    }
    let threshold = peak * 10f64.powf(floor_db / 10.0);
    let bins: Vec<(usize, f64)> = pdp
        .powers
        .iter()
        .enumerate()
        .filter(|(_, p)| **p >= threshold)
        .map(|(k, p)| (k, *p))
        .collect();
    if bins.is_empty() {
        return Err(Error::AllBelowFloor);
    }
    Ok(bins)
}

/// Power-weighted RMS delay spread over bins within `floor_db` of the
/// peak, ns.
pub fn rms_delay_spread(pdp: &Pdp, floor_db: f64) -> Result<f64> {
    let bins = bins_above_floor(pdp, floor_db)?;
    let total: f64 = bins.iter().map(|(_, p)| p).sum();
    let mean: f64 = bins
        .iter()
        .map(|(k, p)| *k as f64 * pdp.bin_width_ns * p)
        .sum::<f64>()
        / total;
    let second: f64 = bins
        .iter()
        .map(|(k, p)| {
            let t = *k as f64 * pdp.bin_width_ns;
            t * t * p
        })
        .sum::<f64>()
        / total;
    Ok((second - mean * mean).max(0.0).sqrt())
}

/// Latest bin above the floor minus the direct-path delay, ns.
pub fn max_excess_delay(pdp: &Pdp, floor_db: f64) -> Result<f64> {
    let bins = bins_above_floor(pdp, floor_db)?;
    let last = bins.last().map(|(k, _)| *k).unwrap_or(0);
    Ok(last as f64 * pdp.bin_width_ns)
}

/// Cluster-level summary of one realization. Cluster identity comes
/// from generation provenance: the direct path and each specular path
/// are clusters of their own, random subpaths group by cluster id.
/// Anything below the preset's observation floor is dropped, like a
/// path under the sounder's dynamic range.
#[derive(Debug, Clone, Serialize)]
pub struct ClusterStats {
    pub count: usize,
    /// Power of each counted cluster relative to the LoS path, dB.
    /// The LoS entry itself is first and exactly 0 dB.
    pub relative_powers_db: Vec<f64>,
}

impl ClusterStats {
    /// Fraction of multipath clusters (the LoS entry excluded) whose
    /// relative power exceeds `threshold_db`.
    pub fn multipath_fraction_above_db(&self, threshold_db: f64) -> Option<f64> {
        let multipath = &self.relative_powers_db[1..];
        if multipath.is_empty() {
            return None;
        }
        let above = multipath.iter().filter(|p| **p > threshold_db).count();
        Some(above as f64 / multipath.len() as f64)
    }
}

pub fn cluster_stats(cir: &Cir) -> ClusterStats {
    let reference = cir.direct().map(|m| m.amplitude.norm_sqr()).unwrap_or(1.0);
    let mut rel = Vec::new();
    // LoS first, exactly 0 dB
    rel.push(0.0);
    // specular paths, one cluster each
    for m in &cir.mpcs {
        if m.kind == MpcKind::Specular {
            rel.push(10.0 * (m.amplitude.norm_sqr() / reference).log10());
        }
    }
    // random clusters by provenance id
    let mut by_id: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
    for m in &cir.mpcs {
        if let Some(id) = m.cluster_id {
            *by_id.entry(id).or_insert(0.0) += m.amplitude.norm_sqr();
        }
    }
    for (_, p) in by_id {
        rel.push(10.0 * (p / reference).log10());
    }
    let rel: Vec<f64> = rel
        .into_iter()
        .filter(|p| *p >= cir.cluster_floor_db)
        .collect();
    ClusterStats {
        count: rel.len(),
        relative_powers_db: rel,
    }
}

/// Coherent-averaging SNR gain of a sounder, 10 log10(M) dB.
pub fn averaging_gain_db(m: u64) -> Result<f64> {
    if m < 1 {
        return Err(Error::InvalidArgument(
            "averaging count must be at least 1".into(),
        ));
    }
    Ok(10.0 * (m as f64).log10())
}

/// Compact per-seed summary used by ensemble statistics.
#[derive(Debug, Clone, Serialize)]
pub struct CirSummary {
    pub seed: u64,
    pub cluster_count: usize,
    /// Relative powers of the multipath clusters (LoS excluded), dB.
    pub multipath_rel_powers_db: Vec<f64>,
    pub rms_delay_spread_ns: f64,
    pub max_excess_delay_ns: f64,
    /// Incoherent total power over FSPL-only power, dB.
    pub power_over_fspl_db: f64,
    /// Linear power carried by random subpaths, relative to LoS.
    pub random_power_rel: f64,
}

/// Generate `n_seeds` realizations of the preset's stats link and
/// summarize each. Work is parallel per seed; output order is by seed.
pub fn ensemble_summaries(
    preset: &EnvironmentPreset,
    tx: Point3,
    rx: Point3,
    n_seeds: u64,
    bin_width_ns: f64,
    floor_db: f64,
) -> Result<Vec<CirSummary>> {
    let results = map_range(n_seeds as usize, |i| -> Result<CirSummary> {
        let seed = i as u64;
        let cir = crate::qd::synthesize_cir(preset, tx, rx, seed)?;
        let pdp = omni_pdp(&cir, bin_width_ns)?;
        let cs = cluster_stats(&cir);
        let reference = cir.direct().expect("cir has direct").amplitude.norm_sqr();
        let random_power: f64 = cir
            .mpcs
            .iter()
            .filter(|m| m.kind == MpcKind::RandomSubpath)
            .map(|m| m.amplitude.norm_sqr())
            .sum();
        Ok(CirSummary {
            seed,
            cluster_count: cs.count,
            multipath_rel_powers_db: cs.relative_powers_db[1..].to_vec(),
            rms_delay_spread_ns: rms_delay_spread(&pdp, floor_db)?,
            max_excess_delay_ns: max_excess_delay(&pdp, floor_db)?,
            power_over_fspl_db: 10.0 * (cir.total_power() / reference).log10(),
            random_power_rel: random_power / reference,
        })
    });
    results.into_iter().collect()
}

/// Pooled ensemble aggregates for one preset.
#[derive(Debug, Clone, Serialize)]
pub struct EnsembleAggregate {
    pub preset: String,
    pub seeds: u64,
    pub mean_cluster_count: f64,
    /// Pooled fraction of multipath clusters above -10 dB.
    pub fraction_above_minus10: f64,
    pub median_rms_delay_spread_ns: f64,
    pub max_excess_delay_ns: f64,
    pub mean_power_over_fspl_db: f64,
    pub mean_random_power_rel: f64,
}

pub fn aggregate(preset: &str, summaries: &[CirSummary]) -> EnsembleAggregate {
    let n = summaries.len().max(1) as f64;
    let mean_count = summaries
        .iter()
        .map(|s| s.cluster_count as f64)
        .sum::<f64>()
        / n;
    let mut above = 0usize;
    let mut total = 0usize;
    for s in summaries {
        total += s.multipath_rel_powers_db.len();
        above += s
            .multipath_rel_powers_db
            .iter()
            .filter(|p| **p > -10.0)
            .count();
    }
    let mut rms: Vec<f64> = summaries.iter().map(|s| s.rms_delay_spread_ns).collect();
    rms.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median_rms = if rms.is_empty() {
        0.0
    } else {
        rms[rms.len() / 2]
    };
    EnsembleAggregate {
        preset: preset.to_string(),
        seeds: summaries.len() as u64,
        mean_cluster_count: mean_count,
        fraction_above_minus10: if total > 0 {
            above as f64 / total as f64
        } else {
            0.0
        },
        median_rms_delay_spread_ns: median_rms,
        max_excess_delay_ns: summaries
            .iter()
            .map(|s| s.max_excess_delay_ns)
            .fold(0.0, f64::max),
        mean_power_over_fspl_db: summaries.iter().map(|s| s.power_over_fspl_db).sum::<f64>() / n,
        mean_random_power_rel: summaries.iter().map(|s| s.random_power_rel).sum::<f64>() / n,
    }
}

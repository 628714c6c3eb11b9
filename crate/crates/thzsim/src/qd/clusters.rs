//! Random multipath clusters and their intra-cluster expansion.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use std::f64::consts::{PI, TAU};

use crate::error::Result;
use crate::geometry::Point3;
use crate::qd::preset::EnvironmentPreset;
use crate::qd::rng::stream;
use crate::qd::{deterministic::generate_deterministic_mpcs, Mpc, MpcKind};
use crate::wrap_angle;

/// One random cluster before intra-cluster expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterDescriptor {
    pub excess_delay_ns: f64,
    /// Power relative to the LoS path, dB.
    pub rel_power_db: f64,
    pub aod_rad: f64,
    pub aoa_rad: f64,
}

/// Invert E[max(Poisson(lambda), 1)] = lambda + exp(-lambda) = target.
/// For targets at or below one the clipping already pins the mean, so
/// lambda = 0 (the draw is then deterministically 1).
fn clipped_poisson_mean(target: f64) -> f64 {
    if target <= 1.0 {
        return 0.0;
    }
    let mut lambda = target;
    for _ in 0..32 {
        let f = lambda + (-lambda).exp() - target;
        let df = 1.0 - (-lambda).exp();
        let step = f / df;
        lambda -= step;
        if step.abs() < 1e-12 {
            break;
        }
    }
    lambda.max(0.0)
}

/// Draw the random cluster set for one placement. The cluster count is
/// Poisson (clipped to at least one) with a mean chosen so that the
/// deterministic paths plus the random clusters average to the
/// preset's total cluster count; clusters below the observation floor
/// are redrawn, mirroring paths a sounder would never report.
pub fn sample_random_clusters(
    preset: &EnvironmentPreset,
    tx: Point3,
    rx: Point3,
    seed: u64,
) -> Result<Vec<ClusterDescriptor>> {
    let det_count = generate_deterministic_mpcs(preset, tx, rx)?.len();
    sample_random_clusters_with_det(preset, tx, rx, seed, det_count)
}

pub(crate) fn sample_random_clusters_with_det(
    preset: &EnvironmentPreset,
    tx: Point3,
    rx: Point3,
    seed: u64,
    det_count: usize,
) -> Result<Vec<ClusterDescriptor>> {
    let model = &preset.clusters;
    let needed = model.mean_total_clusters - det_count as f64;
    if needed <= 0.0 && model.mean_total_clusters == 0.0 {
        return Ok(Vec::new());
    }
    if needed <= 0.0 {
        // over-determined placement: the clip keeps one random cluster
    }

    let mut rng = stream(seed, tx, rx, "clusters", 0);
    let lambda = clipped_poisson_mean(needed);
    let raw = if lambda > 1e-9 {
        Poisson::new(lambda).expect("lambda > 0").sample(&mut rng) as u64
    } else {
        0
    };
    let count = raw.max(1);

    let shadow = Normal::new(0.0, model.shadow_sigma_db).expect("sigma >= 0");
    let mut clusters = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let mut picked = None;
        for _ in 0..1000 {
            let u: f64 = rng.random();
            let tau = -model.excess_delay_scale_ns * (1.0 - u).ln();
            let p = model.base_power_db - model.decay_db_per_ns * tau + shadow.sample(&mut rng);
            if p >= model.floor_db {
                picked = Some((tau, p));
                break;
            }
        }
        // pathological presets only: accept at the floor
        let (tau, p) = picked.unwrap_or((0.0, model.floor_db));
        let aod = wrap_angle(rng.random_range(-PI..PI));
        let aoa = wrap_angle(rng.random_range(-PI..PI));
        clusters.push(ClusterDescriptor {
            excess_delay_ns: tau,
            rel_power_db: p,
            aod_rad: aod,
            aoa_rad: aoa,
        });
    }
    clusters.sort_by(|a, b| a.excess_delay_ns.partial_cmp(&b.excess_delay_ns).unwrap());
    Ok(clusters)
}

/// Context the intra-cluster expansion needs from the deterministic
/// part of the channel.
#[derive(Debug, Clone, Copy)]
pub struct ExpansionContext {
    pub direct_delay_ns: f64,
    /// LoS amplitude magnitude the cluster powers are relative to.
    pub reference_amplitude: f64,
    pub seed: u64,
    pub tx: Point3,
    pub rx: Point3,
    pub cluster_index: usize,
}

fn laplace_sample<R: Rng>(rng: &mut R, std_dev: f64) -> f64 {
    // inverse CDF; the Laplace scale is std/sqrt(2)
    let b = std_dev / std::f64::consts::SQRT_2;
    let u: f64 = rng.random::<f64>() - 0.5;
    -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// Expand one cluster into subpaths: exponential delay offsets,
/// Laplacian angle offsets, powers normalized to the cluster power,
/// i.i.d. uniform phases.
pub fn expand_intra_cluster(
    cluster: &ClusterDescriptor,
    preset: &EnvironmentPreset,
    ctx: &ExpansionContext,
) -> Vec<Mpc> {
    let intra = &preset.intra_cluster;
    let n = intra.subpath_count.max(1);
    let mut rng = stream(ctx.seed, ctx.tx, ctx.rx, "intra", ctx.cluster_index as u64);

    let cluster_power =
        10f64.powf(cluster.rel_power_db / 10.0) * ctx.reference_amplitude * ctx.reference_amplitude;
    let angle_std = intra.angle_spread_deg.to_radians();

    if n == 1 {
        let phase = rng.random_range(0.0..TAU);
        return vec![Mpc {
            delay_ns: ctx.direct_delay_ns + cluster.excess_delay_ns,
            aod_rad: cluster.aod_rad,
            aoa_rad: cluster.aoa_rad,
            amplitude: Complex64::from_polar(cluster_power.sqrt(), phase),
            kind: MpcKind::RandomSubpath,
            interaction_points: Vec::new(),
            cluster_id: Some(ctx.cluster_index),
        }];
    }

    struct Draw {
        dtau: f64,
        daod: f64,
        daoa: f64,
        phase: f64,
    }
    let draws: Vec<Draw> = (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            Draw {
                dtau: -intra.delay_spread_ns * (1.0 - u).ln(),
                daod: laplace_sample(&mut rng, angle_std),
                daoa: laplace_sample(&mut rng, angle_std),
                phase: rng.random_range(0.0..TAU),
            }
        })
        .collect();

    // exponential power shaping over the subpath delays, normalized so
    // the subpaths carry exactly the cluster power
    let weights: Vec<f64> = draws
        .iter()
        .map(|d| (-d.dtau / intra.delay_spread_ns).exp())
        .collect();
    let total: f64 = weights.iter().sum();

    draws
        .iter()
        .zip(&weights)
        .map(|(d, w)| Mpc {
            delay_ns: ctx.direct_delay_ns + cluster.excess_delay_ns + d.dtau,
            aod_rad: wrap_angle(cluster.aod_rad + d.daod),
            aoa_rad: wrap_angle(cluster.aoa_rad + d.daoa),
            amplitude: Complex64::from_polar((cluster_power * w / total).sqrt(), d.phase),
            kind: MpcKind::RandomSubpath,
            interaction_points: Vec::new(),
            cluster_id: Some(ctx.cluster_index),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qd::preset::EnvironmentPreset;

    fn ctx(seed: u64, idx: usize) -> ExpansionContext {
        ExpansionContext {
            direct_delay_ns: 33.36,
            reference_amplitude: 1.0e-4,
            seed,
            tx: Point3::new(1.2, 5.0, 1.5),
            rx: Point3::new(1.2, 15.0, 1.5),
            cluster_index: idx,
        }
    }

    fn test_cluster() -> ClusterDescriptor {
        ClusterDescriptor {
            excess_delay_ns: 7.0,
            rel_power_db: -12.0,
            aod_rad: 0.8,
            aoa_rad: -2.1,
        }
    }

    #[test]
    fn clipped_mean_inversion() {
        for target in [1.0, 1.5, 2.0, 3.0, 5.0, 7.0] {
            let lambda = clipped_poisson_mean(target);
            let mean = lambda + (-lambda).exp();
            if target <= 1.0 {
                assert_eq!(lambda, 0.0);
            } else {
                assert!((mean - target).abs() < 1e-9, "target {target}: {mean}");
            }
        }
    }

    #[test]
    fn same_seed_same_clusters() {
        let p = EnvironmentPreset::builtin("corridor").unwrap();
        let (tx, rx) = (p.stats_tx(), p.stats_rx());
        let a = sample_random_clusters(&p, tx, rx, 42).unwrap();
        let b = sample_random_clusters(&p, tx, rx, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_random_clusters(&p, tx, rx, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn clusters_respect_floor_and_angle_range() {
        let p = EnvironmentPreset::builtin("open_square").unwrap();
        let (tx, rx) = (p.stats_tx(), p.stats_rx());
        for seed in 0..200 {
            for c in sample_random_clusters(&p, tx, rx, seed).unwrap() {
                assert!(c.rel_power_db >= p.clusters.floor_db);
                assert!(c.excess_delay_ns >= 0.0);
                assert!((-PI..PI).contains(&c.aod_rad));
                assert!((-PI..PI).contains(&c.aoa_rad));
            }
        }
    }

    #[test]
    fn single_subpath_carries_full_cluster_power() {
        let mut p = EnvironmentPreset::builtin("corridor").unwrap();
        p.intra_cluster.subpath_count = 1;
        let cl = test_cluster();
        let c = ctx(5, 0);
        let mpcs = expand_intra_cluster(&cl, &p, &c);
        assert_eq!(mpcs.len(), 1);
        let power = mpcs[0].amplitude.norm_sqr();
        let expected = 10f64.powf(-1.2) * 1e-8;
        assert!((power - expected).abs() / expected < 1e-12);
        assert_eq!(mpcs[0].aod_rad, cl.aod_rad);
        assert!((mpcs[0].delay_ns - (33.36 + 7.0)).abs() < 1e-12);
    }

    #[test]
    fn subpath_powers_sum_to_cluster_power() {
        let p = EnvironmentPreset::builtin("corridor").unwrap();
        let cl = test_cluster();
        let c = ctx(9, 3);
        let mpcs = expand_intra_cluster(&cl, &p, &c);
        assert_eq!(mpcs.len(), 20);
        let total: f64 = mpcs.iter().map(|m| m.amplitude.norm_sqr()).sum();
        let expected = 10f64.powf(-1.2) * 1e-8;
        assert!((total - expected).abs() / expected < 1e-9);
        for m in &mpcs {
            assert!(m.delay_ns >= 33.36 + 7.0 - 1e-12);
        }
    }

    #[test]
    fn monte_carlo_angular_spread_matches_parameter() {
        let p = EnvironmentPreset::builtin("corridor").unwrap();
        let cl = test_cluster();
        let target = p.intra_cluster.angle_spread_deg.to_radians();
        let mut acc = 0.0;
        let n_trials = 10_000;
        for i in 0..n_trials {
            let c = ctx(1000 + i as u64, i);
            let mpcs = expand_intra_cluster(&cl, &p, &c);
            let total: f64 = mpcs.iter().map(|m| m.amplitude.norm_sqr()).sum();
            // power-weighted second moment around the cluster center
            let var: f64 = mpcs
                .iter()
                .map(|m| {
                    let d = crate::wrap_angle(m.aod_rad - cl.aod_rad);
                    m.amplitude.norm_sqr() * d * d
                })
                .sum::<f64>()
                / total;
            acc += var;
        }
        let rms = (acc / n_trials as f64).sqrt();
        assert!(
            (rms - target).abs() / target < 0.10,
            "angular spread {:.5} vs parameter {:.5}",
            rms,
            target
        );
    }
}

//! Multi-beam MIMO channel matrices and capacity, with and without
//! passive reflecting surfaces at the interaction points.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::map_range;
use crate::fspl_amplitude;
use crate::geometry::Point3;
use crate::qd::{synthesize_cir, Cir, EnvironmentPreset, MpcKind};
use crate::wrap_angle;

/// A set of directional beams. The pattern is a Gaussian main lobe
/// with no sidelobes; at half the HPBW off boresight the amplitude is
/// 1/sqrt(2) (half power).
#[derive(Debug, Clone, Serialize)]
pub struct BeamSet {
    pub pointing_rad: Vec<f64>,
    pub hpbw_deg: f64,
    pub peak_gain_dbi: f64,
}

impl BeamSet {
    pub fn new(pointing_rad: Vec<f64>, hpbw_deg: f64, peak_gain_dbi: f64) -> Result<Self> {
        if !(hpbw_deg > 0.0) {
            return Err(Error::InvalidArgument("HPBW must be positive".into()));
        }
        Ok(Self {
            pointing_rad,
            hpbw_deg,
            peak_gain_dbi,
        })
    }

    pub fn count(&self) -> usize {
        self.pointing_rad.len()
    }

    /// Normalized amplitude pattern at `delta` radians off boresight.
    pub fn amplitude(&self, delta_rad: f64) -> f64 {
        let hpbw = self.hpbw_deg.to_radians();
        let x = 2.0 * wrap_angle(delta_rad) / hpbw;
        (-(std::f64::consts::LN_2 / 2.0) * x * x).exp()
    }
}

/// Narrowband beam-domain channel matrix (rx beams x tx beams),
/// normalized so a direct-only channel with boresight beams has unit
/// gain; capacity at reference SNR rho then sees per-branch SNR rho.
#[derive(Debug, Clone)]
pub struct MimoChannel {
    pub entries: Vec<Complex64>,
    pub rx_beams: usize,
    pub tx_beams: usize,
}

impl MimoChannel {
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.tx_beams + j]
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            entries[i * n + i] = Complex64::new(1.0, 0.0);
        }
        Self {
            entries,
            rx_beams: n,
            tx_beams: n,
        }
    }

    fn is_finite(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.re.is_finite() && e.im.is_finite())
    }

    /// H H^dagger, row-major (rx_beams x rx_beams).
    fn gram(&self) -> Vec<Complex64> {
        let n = self.rx_beams;
        let m = self.tx_beams;
        let mut g = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..m {
                    acc += self.get(i, j) * self.get(k, j).conj();
                }
                g[i * n + k] = acc;
            }
        }
        g
    }
}

/// Beam-domain channel from a channel realization. Each MPC couples
/// through both beam patterns; the matrix is normalized by the LoS
/// amplitude so the reference SNR is defined at the direct path.
pub fn build_channel_matrix(
    cir: &Cir,
    tx_beams: &BeamSet,
    rx_beams: &BeamSet,
) -> Result<MimoChannel> {
    if cir.mpcs.is_empty() {
        return Err(Error::EmptyCir);
    }
    if tx_beams.count() == 0 || rx_beams.count() == 0 {
        return Err(Error::InvalidArgument("empty beam set".into()));
    }
    let reference = cir.direct().map(|m| m.amplitude.norm()).unwrap_or_else(|| {
        cir.mpcs
            .iter()
            .map(|m| m.amplitude.norm())
            .fold(0.0, f64::max)
    });
    let mut entries = vec![Complex64::new(0.0, 0.0); rx_beams.count() * tx_beams.count()];
    for (i, &rx_point) in rx_beams.pointing_rad.iter().enumerate() {
        for (j, &tx_point) in tx_beams.pointing_rad.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for m in &cir.mpcs {
                let gt = tx_beams.amplitude(m.aod_rad - tx_point);
                let gr = rx_beams.amplitude(m.aoa_rad - rx_point);
                acc += m.amplitude * (gt * gr);
            }
            entries[i * tx_beams.count() + j] = acc / reference;
        }
    }
    Ok(MimoChannel {
        entries,
        rx_beams: rx_beams.count(),
        tx_beams: tx_beams.count(),
    })
}

/// Cholesky log2-determinant of I + alpha * H H^dagger.
fn log2_det_capacity(h: &MimoChannel, alpha: f64) -> f64 {
    let n = h.rx_beams;
    let mut a = h.gram();
    for i in 0..n {
        a[i * n + i] += Complex64::new(1.0 / alpha, 0.0);
    }
    // chol of (1/alpha I + G); det(I + alpha G) = alpha^n det(1/alpha I + G)
    let mut log2det = n as f64 * alpha.log2();
    for k in 0..n {
        let mut d = a[k * n + k].re;
        for j in 0..k {
            d -= a[k * n + j].norm_sqr();
        }
        let d = d.max(1e-300);
        let l = d.sqrt();
        log2det += 2.0 * l.log2();
        a[k * n + k] = Complex64::new(l, 0.0);
        for i in (k + 1)..n {
            let mut v = a[i * n + k];
            for j in 0..k {
                v -= a[i * n + j] * a[k * n + j].conj();
            }
            a[i * n + k] = v / l;
        }
    }
    log2det
}

/// Shannon capacity with equal power allocation:
/// log2 det(I + rho/Nt * H H^dagger), bps/Hz.
pub fn capacity_bps_hz(h: &MimoChannel, snr_db: f64) -> Result<f64> {
    if !snr_db.is_finite() {
        return Err(Error::NonFinite("snr_db"));
    }
    if !h.is_finite() {
        return Err(Error::NonFinite("channel matrix"));
    }
    let rho = 10f64.powf(snr_db / 10.0);
    Ok(log2_det_capacity(h, rho / h.tx_beams as f64))
}

/// Eigenvalues of the Hermitian PSD Gram matrix via a Jacobi sweep on
/// the real-symmetric embedding [[Re, -Im], [Im, Re]] (each eigenvalue
/// appears twice).
fn gram_eigenvalues(h: &MimoChannel) -> Vec<f64> {
    let n = h.rx_beams;
    let g = h.gram();
    let m = 2 * n;
    let mut a = vec![0.0f64; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = g[i * n + j];
            a[i * m + j] = z.re;
            a[i * m + (j + n)] = -z.im;
            a[(i + n) * m + j] = z.im;
            a[(i + n) * m + (j + n)] = z.re;
        }
    }
    // classical cyclic Jacobi
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..m {
            for q in (p + 1)..m {
                off += a[p * m + q] * a[p * m + q];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = a[p * m + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * m + p];
                let aqq = a[q * m + q];
                let theta = 0.5
                    * (aqq - app).atan2(2.0 * apq)
                    * if (aqq - app).abs() < 1e-300 && apq.abs() < 1e-300 {
                        0.0
                    } else {
                        1.0
                    };
                let theta = if theta == 0.0 && apq != 0.0 {
                    std::f64::consts::FRAC_PI_4
                } else {
                    theta
                };
                let (s, c) = theta.sin_cos();
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..m).map(|i| a[i * m + i]).collect();
    eig.sort_by(|x, y| y.partial_cmp(x).unwrap());
    // doubled spectrum: take every second entry
    eig.into_iter().step_by(2).map(|e| e.max(0.0)).collect()
}

/// Water-filling capacity over the eigenmodes of H H^dagger with the
/// same total power as the equal-allocation case.
pub fn capacity_waterfilling_bps_hz(h: &MimoChannel, snr_db: f64) -> Result<f64> {
    if !snr_db.is_finite() {
        return Err(Error::NonFinite("snr_db"));
    }
    if !h.is_finite() {
        return Err(Error::NonFinite("channel matrix"));
    }
    let rho = 10f64.powf(snr_db / 10.0);
    let gains: Vec<f64> = gram_eigenvalues(h)
        .into_iter()
        .filter(|l| *l > 1e-15)
        .map(|l| rho * l)
        .collect();
    if gains.is_empty() {
        return Ok(0.0);
    }
    // fill over the strongest k modes with unit total power budget
    let mut best = 0.0f64;
    for k in 1..=gains.len() {
        let inv_sum: f64 = gains[..k].iter().map(|g| 1.0 / g).sum();
        let mu = (1.0 + inv_sum) / k as f64;
        if gains[..k].iter().any(|g| mu - 1.0 / g <= 0.0) {
            continue;
        }
        let c: f64 = gains[..k].iter().map(|g| (mu * g).log2()).sum();
        best = best.max(c);
    }
    Ok(best)
}

/// Which interaction components a passive reflecting surface covers.
#[derive(Debug, Clone)]
pub enum PrsTargets {
    /// Every non-direct component.
    AllInteractions,
    /// Specular wall reflections only.
    Specular,
    /// Random clusters by provenance id.
    Clusters(Vec<usize>),
    /// Explicit MPC indices into `Cir::mpcs`.
    Mpcs(Vec<usize>),
}

/// Raise the selected components' magnitudes to their free-space value
/// over the unfolded path (interaction loss removed); phases are kept.
/// Components already at or above that bound are left untouched.
pub fn apply_prs(cir: &Cir, targets: &PrsTargets) -> Result<Cir> {
    let mut out = cir.clone();
    let selected: Vec<usize> = match targets {
        PrsTargets::AllInteractions => (0..cir.mpcs.len())
            .filter(|&i| cir.mpcs[i].kind != MpcKind::Direct)
            .collect(),
        PrsTargets::Specular => (0..cir.mpcs.len())
            .filter(|&i| cir.mpcs[i].kind == MpcKind::Specular)
            .collect(),
        PrsTargets::Clusters(ids) => (0..cir.mpcs.len())
            .filter(|&i| {
                cir.mpcs[i]
                    .cluster_id
                    .map(|id| ids.contains(&id))
                    .unwrap_or(false)
            })
            .collect(),
        PrsTargets::Mpcs(idx) => {
            for &i in idx {
                if i >= cir.mpcs.len() {
                    return Err(Error::InvalidArgument(format!(
                        "mpc index {i} out of range"
                    )));
                }
                if cir.mpcs[i].kind == MpcKind::Direct {
                    return Err(Error::PrsOnDirectPath);
                }
            }
            idx.clone()
        }
    };
    let c_m_per_ns = crate::SPEED_OF_LIGHT * 1e-9;
    for i in selected {
        let m = &mut out.mpcs[i];
        let unfolded_m = m.delay_ns * c_m_per_ns;
        let lossless = fspl_amplitude(unfolded_m, cir.carrier_hz);
        let mag = m.amplitude.norm();
        if lossless > mag {
            m.amplitude *= lossless / mag;
        }
    }
    Ok(out)
}

/// Which side of the link a beam set serves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkEnd {
    Departure,
    Arrival,
}

/// Point `count` beams at the strongest distinct components, greedily,
/// keeping at least one HPBW of separation. Candidates are cluster
/// aggregates (deterministic paths individually, random clusters as a
/// whole). When candidates run out the remaining beams revisit the
/// list without the separation rule.
pub fn design_beams(
    cir: &Cir,
    count: usize,
    hpbw_deg: f64,
    peak_gain_dbi: f64,
    end: LinkEnd,
) -> Result<BeamSet> {
    if cir.mpcs.is_empty() {
        return Err(Error::EmptyCir);
    }
    let angle_of = |m: &crate::qd::Mpc| match end {
        LinkEnd::Departure => m.aod_rad,
        LinkEnd::Arrival => m.aoa_rad,
    };
    // aggregate candidates: (angle, power)
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    for m in &cir.mpcs {
        if m.cluster_id.is_none() {
            candidates.push((angle_of(m), m.amplitude.norm_sqr()));
        }
    }
    let mut by_id: std::collections::BTreeMap<usize, (f64, f64)> = Default::default();
    for m in &cir.mpcs {
        if let Some(id) = m.cluster_id {
            let e = by_id.entry(id).or_insert((0.0, 0.0));
            // power-weighted circular mean is overkill at 2 deg spread;
            // track the strongest subpath angle and the total power
            if m.amplitude.norm_sqr() > e.1 {
                e.0 = angle_of(m);
            }
            e.1 += m.amplitude.norm_sqr();
        }
    }
    candidates.extend(by_id.into_values());
    candidates.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());

    let min_sep = hpbw_deg.to_radians();
    let mut pointing: Vec<f64> = Vec::with_capacity(count);
    for &(angle, _) in &candidates {
        if pointing.len() >= count {
            break;
        }
        if pointing
            .iter()
            .all(|p| wrap_angle(angle - *p).abs() >= min_sep)
        {
            pointing.push(angle);
        }
    }
    let mut cycle = candidates.iter().cycle();
    while pointing.len() < count {
        let (angle, _) = cycle.next().expect("candidates non-empty");
        pointing.push(*angle);
    }
    BeamSet::new(pointing, hpbw_deg, peak_gain_dbi)
}

/// One capacity draw of the ensemble.
#[derive(Debug, Clone, Serialize)]
pub struct CapacitySample {
    pub seed: u64,
    pub snr_db: f64,
    pub no_prs_bps_hz: f64,
    pub with_prs_bps_hz: f64,
    /// Multipath clusters above the observation floor in this draw.
    pub multipath_clusters: usize,
}

/// Capacity over the preset's documented placement sampling: Tx fixed,
/// Rx uniform in the capacity box (falling back to the stats link when
/// the preset has none), one channel draw per seed, beams redesigned
/// after the PRS is applied.
pub fn capacity_ensemble(
    preset: &EnvironmentPreset,
    n_seeds: u64,
    snr_db: f64,
    beams: usize,
    hpbw_deg: f64,
) -> Result<Vec<CapacitySample>> {
    let results = map_range(n_seeds as usize, |i| -> Result<CapacitySample> {
        let seed = i as u64;
        let (tx, rx) = placement_for_seed(preset, seed);
        let cir = synthesize_cir(preset, tx, rx, seed)?;

        let c0 = {
            let tb = design_beams(&cir, beams, hpbw_deg, 26.0, LinkEnd::Departure)?;
            let rb = design_beams(&cir, beams, hpbw_deg, 26.0, LinkEnd::Arrival)?;
            capacity_bps_hz(&build_channel_matrix(&cir, &tb, &rb)?, snr_db)?
        };
        let prs_cir = apply_prs(&cir, &PrsTargets::AllInteractions)?;
        let c1 = {
            let tb = design_beams(&prs_cir, beams, hpbw_deg, 26.0, LinkEnd::Departure)?;
            let rb = design_beams(&prs_cir, beams, hpbw_deg, 26.0, LinkEnd::Arrival)?;
            capacity_bps_hz(&build_channel_matrix(&prs_cir, &tb, &rb)?, snr_db)?
        };

        let stats = crate::stats::cluster_stats(&cir);
        Ok(CapacitySample {
            seed,
            snr_db,
            no_prs_bps_hz: c0,
            with_prs_bps_hz: c1,
            multipath_clusters: stats.count.saturating_sub(1),
        })
    });
    results.into_iter().collect()
}

/// Deterministic Rx placement draw for a seed.
pub fn placement_for_seed(preset: &EnvironmentPreset, seed: u64) -> (Point3, Point3) {
    use rand::Rng;
    match &preset.capacity_placement {
        Some(cp) => {
            let tx = Point3::new(cp.tx[0], cp.tx[1], cp.tx[2]);
            let mut rng = crate::qd::rng::stream(
                seed,
                tx,
                Point3::new(cp.rx_min[0], cp.rx_min[1], cp.rx_min[2]),
                "capacity-rx",
                0,
            );
            let mut coord = [0.0; 3];
            for (c, (lo, hi)) in coord.iter_mut().zip(cp.rx_min.iter().zip(&cp.rx_max)) {
                *c = if hi > lo {
                    rng.random_range(*lo..*hi)
                } else {
                    *lo
                };
            }
            (tx, Point3::new(coord[0], coord[1], coord[2]))
        }
        None => (preset.stats_tx(), preset.stats_rx()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qd::Mpc;

    fn direct_only_cir(aod: f64, aoa: f64) -> Cir {
        Cir {
            mpcs: vec![Mpc {
                delay_ns: 11.67,
                aod_rad: aod,
                aoa_rad: aoa,
                amplitude: Complex64::from_polar(2.84e-5, -1.0),
                kind: MpcKind::Direct,
                interaction_points: Vec::new(),
                cluster_id: None,
            }],
            tx: Point3::new(0.0, 0.0, 1.5),
            rx: Point3::new(3.5, 0.0, 1.5),
            preset_name: "test".into(),
            rng_seed: 0,
            carrier_hz: 300e9,
            cluster_floor_db: -30.0,
        }
    }

    #[test]
    fn identity_capacity_closed_form() {
        let h = MimoChannel::identity(4);
        let c = capacity_bps_hz(&h, 20.0).unwrap();
        let expected = 4.0 * (1.0 + 100.0 / 4.0f64).log2();
        assert!((c - expected).abs() < 1e-9, "{c} vs {expected}");
        assert!((c - 18.80).abs() < 0.01);
    }

    #[test]
    fn zero_channel_zero_capacity() {
        let h = MimoChannel {
            entries: vec![Complex64::new(0.0, 0.0); 16],
            rx_beams: 4,
            tx_beams: 4,
        };
        assert!(capacity_bps_hz(&h, 20.0).unwrap().abs() < 1e-9);
    }

    #[test]
    fn normalization_anchor_direct_only() {
        let cir = direct_only_cir(0.3, -2.8);
        let tb = BeamSet::new(vec![0.3], 8.7, 26.0).unwrap();
        let rb = BeamSet::new(vec![-2.8], 8.7, 26.0).unwrap();
        let h = build_channel_matrix(&cir, &tb, &rb).unwrap();
        assert!((h.get(0, 0).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_hpbw_offset_is_half_power() {
        let b = BeamSet::new(vec![0.0], 8.7, 26.0).unwrap();
        let amp = b.amplitude(8.7f64.to_radians() / 2.0);
        assert!((amp - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn well_separated_beams_give_diagonal_matrix() {
        // four paths at angles >= 3 HPBW apart
        let hpbw = 8.7f64;
        let sep = 3.0 * hpbw.to_radians();
        let mut mpcs = Vec::new();
        for k in 0..4 {
            mpcs.push(Mpc {
                delay_ns: 11.67 + k as f64,
                aod_rad: wrap_angle(k as f64 * sep),
                aoa_rad: wrap_angle(-(k as f64) * sep),
                amplitude: Complex64::from_polar(1e-5, k as f64),
                kind: if k == 0 {
                    MpcKind::Direct
                } else {
                    MpcKind::Specular
                },
                interaction_points: Vec::new(),
                cluster_id: None,
            });
        }
        let cir = Cir {
            mpcs,
            ..direct_only_cir(0.0, 0.0)
        };
        let tb = BeamSet::new(
            (0..4).map(|k| wrap_angle(k as f64 * sep)).collect(),
            hpbw,
            26.0,
        )
        .unwrap();
        let rb = BeamSet::new(
            (0..4).map(|k| wrap_angle(-(k as f64) * sep)).collect(),
            hpbw,
            26.0,
        )
        .unwrap();
        let h = build_channel_matrix(&cir, &tb, &rb).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    let leak = h.get(i, j).norm() / h.get(i, i).norm().max(1e-300);
                    assert!(leak < 10f64.powf(-20.0 / 20.0), "leakage {i},{j}: {leak}");
                }
            }
        }
    }

    #[test]
    fn matrix_is_linear_in_path_amplitudes() {
        let mut cir = direct_only_cir(0.0, 0.0);
        cir.mpcs.push(Mpc {
            delay_ns: 14.0,
            aod_rad: 0.5,
            aoa_rad: -0.5,
            amplitude: Complex64::new(1e-5, 2e-6),
            kind: MpcKind::Specular,
            interaction_points: Vec::new(),
            cluster_id: None,
        });
        let tb = BeamSet::new(vec![0.0, 0.5], 8.7, 26.0).unwrap();
        let rb = BeamSet::new(vec![0.0, -0.5], 8.7, 26.0).unwrap();
        let h_both = build_channel_matrix(&cir, &tb, &rb).unwrap();

        let mut only_direct = cir.clone();
        only_direct.mpcs.truncate(1);
        let mut only_spec = cir.clone();
        only_spec.mpcs.remove(0);
        // keep the same normalization: reuse the direct amplitude
        let h_d = build_channel_matrix(&only_direct, &tb, &rb).unwrap();
        let reference = cir.direct().unwrap().amplitude.norm();
        for i in 0..2 {
            for j in 0..2 {
                let manual = h_d.get(i, j)
                    + only_spec.mpcs[0].amplitude
                        * (tb.amplitude(0.5 - tb.pointing_rad[j])
                            * rb.amplitude(-0.5 - rb.pointing_rad[i]))
                        / reference;
                assert!((h_both.get(i, j) - manual).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn capacity_monotone_in_snr() {
        let cir = direct_only_cir(0.0, 0.0);
        let tb = BeamSet::new(vec![0.0, 0.6], 8.7, 26.0).unwrap();
        let h = build_channel_matrix(&cir, &tb, &tb).unwrap();
        let mut prev = 0.0;
        for snr in [-10.0, 0.0, 10.0, 20.0, 30.0] {
            let c = capacity_bps_hz(&h, snr).unwrap();
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn capacity_invariant_under_row_permutation() {
        // permutations are the unitary rotations easiest to apply
        let mut cir = direct_only_cir(0.1, 0.2);
        cir.mpcs.push(Mpc {
            delay_ns: 13.0,
            aod_rad: 1.1,
            aoa_rad: -1.3,
            amplitude: Complex64::new(8e-6, -3e-6),
            kind: MpcKind::Specular,
            interaction_points: Vec::new(),
            cluster_id: None,
        });
        let tb = BeamSet::new(vec![0.1, 1.1], 8.7, 26.0).unwrap();
        let rb = BeamSet::new(vec![0.2, -1.3], 8.7, 26.0).unwrap();
        let h = build_channel_matrix(&cir, &tb, &rb).unwrap();
        let swapped = MimoChannel {
            entries: vec![h.get(1, 0), h.get(1, 1), h.get(0, 0), h.get(0, 1)],
            rx_beams: 2,
            tx_beams: 2,
        };
        let c0 = capacity_bps_hz(&h, 17.0).unwrap();
        let c1 = capacity_bps_hz(&swapped, 17.0).unwrap();
        assert!((c0 - c1).abs() < 1e-9);
    }

    #[test]
    fn capacity_invariant_under_complex_unitary_rotation() {
        let mut cir = direct_only_cir(0.1, 0.2);
        cir.mpcs.push(Mpc {
            delay_ns: 13.0,
            aod_rad: 1.1,
            aoa_rad: -1.3,
            amplitude: Complex64::new(8e-6, -3e-6),
            kind: MpcKind::Specular,
            interaction_points: Vec::new(),
            cluster_id: None,
        });
        let tb = BeamSet::new(vec![0.1, 1.1], 8.7, 26.0).unwrap();
        let rb = BeamSet::new(vec![0.2, -1.3], 8.7, 26.0).unwrap();
        let h = build_channel_matrix(&cir, &tb, &rb).unwrap();
        // complex Givens rotation on the rows
        let (c, s) = (0.6f64, 0.8f64);
        let phase = Complex64::from_polar(1.0, 0.7);
        let u = [
            [Complex64::new(c, 0.0), phase * s],
            [-phase.conj() * s, Complex64::new(c, 0.0)],
        ];
        let mut rotated = vec![Complex64::new(0.0, 0.0); 4];
        for i in 0..2 {
            for j in 0..2 {
                rotated[i * 2 + j] = u[i][0] * h.get(0, j) + u[i][1] * h.get(1, j);
            }
        }
        let hr = MimoChannel {
            entries: rotated,
            rx_beams: 2,
            tx_beams: 2,
        };
        let c0 = capacity_bps_hz(&h, 17.0).unwrap();
        let c1 = capacity_bps_hz(&hr, 17.0).unwrap();
        assert!((c0 - c1).abs() < 1e-9, "{c0} vs {c1}");
    }

    #[test]
    fn waterfilling_never_below_equal_power() {
        let p = EnvironmentPreset::builtin("open_square").unwrap();
        for seed in 0..20 {
            let (tx, rx) = placement_for_seed(&p, seed);
            let cir = synthesize_cir(&p, tx, rx, seed).unwrap();
            let tb = design_beams(&cir, 4, 8.7, 26.0, LinkEnd::Departure).unwrap();
            let rb = design_beams(&cir, 4, 8.7, 26.0, LinkEnd::Arrival).unwrap();
            let h = build_channel_matrix(&cir, &tb, &rb).unwrap();
            let eq = capacity_bps_hz(&h, 20.0).unwrap();
            let wf = capacity_waterfilling_bps_hz(&h, 20.0).unwrap();
            assert!(
                wf >= eq - 1e-6,
                "seed {seed}: waterfilling {wf} < equal {eq}"
            );
        }
    }

    #[test]
    fn waterfilling_matches_equal_power_for_identity() {
        let h = MimoChannel::identity(4);
        let eq = capacity_bps_hz(&h, 20.0).unwrap();
        let wf = capacity_waterfilling_bps_hz(&h, 20.0).unwrap();
        assert!((eq - wf).abs() < 1e-9);
    }

    #[test]
    fn prs_raises_lossy_components_only() {
        let p = EnvironmentPreset::builtin("corridor").unwrap();
        let cir = synthesize_cir(&p, p.stats_tx(), p.stats_rx(), 5).unwrap();
        let prs = apply_prs(&cir, &PrsTargets::Specular).unwrap();
        let c_m_per_ns = crate::SPEED_OF_LIGHT * 1e-9;
        for (a, b) in cir.mpcs.iter().zip(&prs.mpcs) {
            match a.kind {
                MpcKind::Specular => {
                    let lossless = fspl_amplitude(a.delay_ns * c_m_per_ns, cir.carrier_hz);
                    // 12 dB wall loss removed exactly
                    assert!((b.amplitude.norm() - lossless).abs() / lossless < 1e-12);
                    let boost = 20.0 * (b.amplitude.norm() / a.amplitude.norm()).log10();
                    assert!((boost - 12.0).abs() < 1e-9);
                    // phase preserved
                    assert!((b.amplitude.arg() - a.amplitude.arg()).abs() < 1e-12);
                }
                _ => assert_eq!(a.amplitude, b.amplitude),
            }
        }
        // idempotent: already lossless components stay put
        let again = apply_prs(&prs, &PrsTargets::Specular).unwrap();
        for (a, b) in prs.mpcs.iter().zip(&again.mpcs) {
            assert_eq!(a.amplitude, b.amplitude);
        }
    }

    #[test]
    fn prs_on_direct_rejected() {
        let cir = direct_only_cir(0.0, 0.0);
        assert!(matches!(
            apply_prs(&cir, &PrsTargets::Mpcs(vec![0])),
            Err(Error::PrsOnDirectPath)
        ));
    }

    #[test]
    fn prs_never_reduces_capacity_on_ensembles() {
        let p = EnvironmentPreset::builtin("open_square").unwrap();
        let samples = capacity_ensemble(&p, 40, 20.0, 4, 8.7).unwrap();
        for s in &samples {
            assert!(
                s.with_prs_bps_hz >= s.no_prs_bps_hz - 1e-6,
                "seed {}: prs {} < base {}",
                s.seed,
                s.with_prs_bps_hz,
                s.no_prs_bps_hz
            );
        }
    }
}

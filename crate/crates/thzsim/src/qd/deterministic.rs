//! Deterministic components of the impulse response: the direct path
//! and single-bounce specular reflections found with the image method.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::fspl_amplitude;
use crate::geometry::{mirror_point, Point3};
use crate::qd::preset::EnvironmentPreset;
use crate::qd::{Mpc, MpcKind};
use crate::{wavelength, wrap_angle};

fn azimuth_of(direction: Point3) -> f64 {
    wrap_angle(direction.y.atan2(direction.x))
}

fn path_amplitude(unfolded_m: f64, loss_db: f64, f_hz: f64) -> Complex64 {
    let mag = fspl_amplitude(unfolded_m, f_hz) * 10f64.powf(-loss_db / 20.0);
    let phase = -TAU * unfolded_m / wavelength(f_hz);
    Complex64::from_polar(mag, phase)
}

/// Direct path plus one specular path per reflector whose image-method
/// path hits the reflector extent. Only single-bounce reflections are
/// generated; grazing hits exactly on an extent edge are excluded.
pub fn generate_deterministic_mpcs(
    preset: &EnvironmentPreset,
    tx: Point3,
    rx: Point3,
) -> Result<Vec<Mpc>> {
    if !tx.is_finite() || !rx.is_finite() {
        return Err(Error::NonFinite("antenna position"));
    }
    let d = tx.distance(rx);
    if d < 1e-12 {
        return Err(Error::CoincidentAntennas);
    }
    preset.check_bounds(tx)?;
    preset.check_bounds(rx)?;

    let f = preset.carrier_hz;
    let c_m_per_ns = crate::SPEED_OF_LIGHT * 1e-9;

    let mut mpcs = Vec::with_capacity(1 + preset.reflectors.len());
    mpcs.push(Mpc {
        delay_ns: d / c_m_per_ns,
        aod_rad: azimuth_of(rx - tx),
        aoa_rad: azimuth_of(tx - rx),
        amplitude: path_amplitude(d, 0.0, f),
        kind: MpcKind::Direct,
        interaction_points: Vec::new(),
        cluster_id: None,
    });

    for (plane, spec) in preset.reflector_planes()? {
        let s_tx = plane.signed_distance(tx);
        let s_rx = plane.signed_distance(rx);
        // both antennas strictly on one side of the reflector
        if s_tx * s_rx <= 0.0 || s_tx.abs() < 1e-9 || s_rx.abs() < 1e-9 {
            continue;
        }
        let image = mirror_point(tx, &plane)?;
        let s_img = plane.signed_distance(image);
        let t = s_img / (s_img - s_rx);
        if !(0.0..=1.0).contains(&t) {
            continue;
        }
        let q = image + (rx - image) * t;
        // inside the reflector extent, strictly
        let basis = plane.basis();
        let rel = q - plane.origin;
        let qu = rel.dot(basis.u);
        let qv = rel.dot(basis.v);
        if qu.abs() >= spec.half_u || qv.abs() >= spec.half_v {
            continue;
        }
        let unfolded = image.distance(rx);
        mpcs.push(Mpc {
            delay_ns: unfolded / c_m_per_ns,
            aod_rad: azimuth_of(q - tx),
            aoa_rad: azimuth_of(q - rx),
            amplitude: path_amplitude(unfolded, spec.loss_db, f),
            kind: MpcKind::Specular,
            interaction_points: vec![q],
            cluster_id: None,
        });
    }
    Ok(mpcs)
}

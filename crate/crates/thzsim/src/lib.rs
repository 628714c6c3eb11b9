//! Desk-scale simulation toolkit for 300 GHz short-range channels.
//!
//! Two engines share a small geometry core:
//!
//! * a quasi-deterministic multipath channel generator (`qd`) with
//!   environment presets, summary statistics (`stats`) and multi-beam
//!   MIMO capacity evaluation (`mimo`);
//! * a human-body-shadowing engine (`hbs`) that turns point-cloud frames
//!   into human-shaped screens, computes stationary-phase knife-edge
//!   diffraction fields, synthesizes 30 kHz fading series and Doppler
//!   spectrograms, and validates against a physical-optics aperture
//!   integral.
//!
//! Everything is deterministic given an explicit seed; ensemble work
//! parallelizes with rayon (the `parallel` feature, on by default) and
//! falls back to sequential execution without it.

// validation guards use `!(x > 0.0)` so NaN fails them too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod geometry;
pub mod hbs;
pub mod io;
pub mod mimo;
pub mod qd;
pub mod stats;

pub use error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default carrier for every preset and HBS scenario, Hz.
pub const CARRIER_HZ: f64 = 300e9;

/// Wavelength at a carrier frequency, meters.
pub fn wavelength(f_hz: f64) -> f64 {
    SPEED_OF_LIGHT / f_hz
}

/// Free-space amplitude gain (linear voltage ratio between isotropic
/// antennas) over a path of `dist_m` meters: lambda / (4 pi d).
pub fn fspl_amplitude(dist_m: f64, f_hz: f64) -> f64 {
    wavelength(f_hz) / (4.0 * std::f64::consts::PI * dist_m)
}

/// Wrap an angle into [-pi, pi).
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut x = (a + PI).rem_euclid(2.0 * PI) - PI;
    if x >= PI {
        x = -PI;
    }
    x
}

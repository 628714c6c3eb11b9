//! Synthetic articulated phantom: a torso cylinder with two swinging
//! arm cylinders. Stands in for MoCap recordings in demos and
//! validation runs; every frame carries the same point count so the
//! per-point interpolation in the fading synthesis applies directly.

use crate::geometry::{Point3, Vec3};
use crate::hbs::HumanFrame;

#[derive(Debug, Clone, Copy)]
pub struct PhantomParams {
    pub torso_diameter_m: f64,
    pub torso_height_m: f64,
    pub arm_diameter_m: f64,
    pub arm_length_m: f64,
    /// Peak arm swing from vertical, degrees.
    pub arm_swing_deg: f64,
    /// Arm swing cadence, Hz.
    pub stride_hz: f64,
    /// Surface sampling distance, m.
    pub point_spacing_m: f64,
}

impl Default for PhantomParams {
    fn default() -> Self {
        Self {
            torso_diameter_m: 0.40,
            torso_height_m: 1.70,
            arm_diameter_m: 0.09,
            arm_length_m: 0.62,
            arm_swing_deg: 25.0,
            stride_hz: 1.6,
            point_spacing_m: 0.025,
        }
    }
}

fn cylinder_surface(
    base: Point3,
    axis: Vec3,
    length: f64,
    radius: f64,
    spacing: f64,
) -> Vec<Point3> {
    let axis = axis.normalized();
    // orthonormal frame around the axis
    let helper = if axis.z.abs() < 0.9 {
        Vec3::new(0.0, 0.0, 1.0)
    } else {
        Vec3::new(1.0, 0.0, 0.0)
    };
    let e1 = axis.cross(helper).normalized();
    let e2 = axis.cross(e1);
    let n_phi = ((std::f64::consts::TAU * radius / spacing).ceil() as usize).max(6);
    let n_len = ((length / spacing).ceil() as usize).max(2);
    let mut pts = Vec::with_capacity(n_phi * (n_len + 1));
    for il in 0..=n_len {
        let along = axis * (length * il as f64 / n_len as f64);
        for ip in 0..n_phi {
            let phi = std::f64::consts::TAU * ip as f64 / n_phi as f64;
            let radial = e1 * (radius * phi.cos()) + e2 * (radius * phi.sin());
            pts.push(base + along + radial);
        }
    }
    pts
}

/// One phantom pose: feet center at `feet`, walking direction `heading`
/// (horizontal unit vector), arms swung by `swing_rad` (left arm
/// forward for positive swing).
pub fn phantom_pose(
    params: &PhantomParams,
    feet: Point3,
    heading: Vec3,
    swing_rad: f64,
) -> Vec<Point3> {
    let up = Vec3::new(0.0, 0.0, 1.0);
    let heading = Vec3::new(heading.x, heading.y, 0.0).normalized();
    let side = heading.cross(up); // to the phantom's right

    let mut pts = cylinder_surface(
        feet,
        up,
        params.torso_height_m,
        params.torso_diameter_m / 2.0,
        params.point_spacing_m,
    );

    let shoulder_h = params.torso_height_m * 0.82;
    let shoulder_off = params.torso_diameter_m / 2.0 + params.arm_diameter_m / 2.0;
    for (dir, phase) in [(1.0, 1.0), (-1.0, -1.0)] {
        let shoulder = feet + up * shoulder_h + side * (dir * shoulder_off);
        // arm hangs down, pivoting about the shoulder in the
        // heading/up plane
        let s = swing_rad * phase;
        let arm_axis = heading * s.sin() - up * s.cos();
        pts.extend(cylinder_surface(
            shoulder,
            arm_axis,
            params.arm_length_m,
            params.arm_diameter_m / 2.0,
            params.point_spacing_m,
        ));
    }
    pts
}

/// Generate a walking sequence: the phantom translates from `start`
/// with horizontal `velocity` (m/s) while the arms swing at the stride
/// cadence.
pub fn walk_frames(
    params: &PhantomParams,
    start: Point3,
    velocity: Vec3,
    duration_s: f64,
    frame_rate_hz: f64,
) -> Vec<HumanFrame> {
    let n = (duration_s * frame_rate_hz).floor() as usize + 1;
    let heading = if velocity.norm() > 1e-12 {
        velocity
    } else {
        Vec3::new(1.0, 0.0, 0.0)
    };
    let swing_amp = params.arm_swing_deg.to_radians();
    (0..n)
        .map(|i| {
            let t = i as f64 / frame_rate_hz;
            let feet = start + velocity * t;
            let swing = swing_amp * (std::f64::consts::TAU * params.stride_hz * t).sin();
            HumanFrame {
                t_s: t,
                points: phantom_pose(params, feet, heading, swing),
            }
        })
        .collect()
}

//! Elementary 3-D vector, plane and image-method primitives shared by
//! the channel generator and the shadowing engine. Meters throughout,
//! double precision.

use crate::error::{Error, Result};
use crate::hbs::screen::ScreenSilhouette;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// A point or displacement in 3-D space, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Displacements use the same representation as points.
pub type Vec3 = Point3;

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(&self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(&self) -> f64 {
        self.dot(*self).sqrt()
    }

    pub fn distance(&self, o: Point3) -> f64 {
        (*self - o).norm()
    }

    pub fn normalized(&self) -> Vec3 {
        let n = self.norm();
        Vec3::new(self.x / n, self.y / n, self.z / n)
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

/// An oriented plane: origin point plus unit normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub origin: Point3,
    pub normal: Vec3,
}

/// Orthonormal in-plane frame. `u` follows the world-horizontal
/// component, `v` completes the right-handed (u, v, normal) triple.
/// `fallback` is set when the normal was parallel to world-up and the
/// alternate reference axis had to be used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneBasis {
    pub u: Vec3,
    pub v: Vec3,
    pub fallback: bool,
}

const WORLD_UP: Vec3 = Vec3::new(0.0, 0.0, 1.0);
const WORLD_X: Vec3 = Vec3::new(1.0, 0.0, 0.0);

impl Plane {
    /// Build a plane, normalizing the given normal.
    pub fn new(origin: Point3, normal: Vec3) -> Result<Self> {
        if !origin.is_finite() || !normal.is_finite() {
            return Err(Error::NonFinite("plane"));
        }
        let n = normal.norm();
        if n < 1e-12 {
            return Err(Error::InvalidArgument("zero plane normal".into()));
        }
        Ok(Self {
            origin,
            normal: normal * (1.0 / n),
        })
    }

    /// Signed distance of `p` from the plane along the normal.
    pub fn signed_distance(&self, p: Point3) -> f64 {
        (p - self.origin).dot(self.normal)
    }

    /// In-plane basis: u = normalize(normal x up), v = normal x u.
    /// If the normal is within 1e-6 of world-up, world-x replaces up.
    pub fn basis(&self) -> PlaneBasis {
        let c = self.normal.cross(WORLD_UP);
        if c.norm() >= 1e-6 {
            let u = c.normalized();
            PlaneBasis {
                u,
                v: self.normal.cross(u),
                fallback: false,
            }
        } else {
            let u = self.normal.cross(WORLD_X).normalized();
            PlaneBasis {
                u,
                v: self.normal.cross(u),
                fallback: true,
            }
        }
    }
}

/// Reflect `p` across `wall`. The reflection is an involution.
pub fn mirror_point(p: Point3, wall: &Plane) -> Result<Point3> {
    if !p.is_finite() {
        return Err(Error::NonFinite("mirror_point input"));
    }
    let d = wall.signed_distance(p);
    Ok(p - wall.normal * (2.0 * d))
}

/// Orthogonal projection of `p` into the plane, expressed in the plane
/// basis. The component along the normal is discarded.
pub fn project_to_plane(p: Point3, plane: &Plane) -> Result<(f64, f64)> {
    if !p.is_finite() {
        return Err(Error::NonFinite("project_to_plane input"));
    }
    let b = plane.basis();
    let d = p - plane.origin;
    Ok((d.dot(b.u), d.dot(b.v)))
}

/// True iff the tx-rx segment pierces an occupied cell of the screen.
/// The screen plane must lie strictly between the antennas.
pub fn los_blocked(tx: Point3, rx: Point3, screen: &ScreenSilhouette) -> Result<bool> {
    screen.blocks_los(tx, rx)
}

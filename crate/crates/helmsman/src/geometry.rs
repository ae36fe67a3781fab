//! Higher-order ellipsoid primitives, planar pose algebra, and scaling-factor
//! arithmetic shared by the barrier and preview modules.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("semi-axis `{axis}` must be strictly positive (got {value})")]
    NonPositiveSemiAxis { axis: &'static str, value: f64 },
    #[error("ellipsoid order must be >= 1 (got {0})")]
    InvalidOrder(u32),
}

/// A point or free vector in 3-space, in meters (or unitless for directions).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, rhs: Vec3) -> f64 {
        self.x * rhs.x + self.y * rhs.y + self.z * rhs.z
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn distance(self, rhs: Vec3) -> f64 {
        (self - rhs).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// `x^(2d)` by squaring first, so odd signs never leak through.
#[inline(always)]
pub(crate) fn pow_2d(x: f64, d: u32) -> f64 {
    (x * x).powi(d as i32)
}

/// Axis-aligned higher-order ellipsoid `sum_i (p_i / axis_i)^(2d) <= 1`.
///
/// Order `d = 1` is a standard ellipsoid; larger orders flatten the level set
/// toward a box. Semi-axes are in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperEllipsoid {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Order of the ellipsoid; the exponent on each term is `2d`.
    pub d: u32,
}

impl HyperEllipsoid {
    pub fn new(a: f64, b: f64, c: f64, d: u32) -> Result<Self, GeometryError> {
        for (axis, value) in [("a", a), ("b", b), ("c", c)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(GeometryError::NonPositiveSemiAxis { axis, value });
            }
        }
        if d < 1 {
            return Err(GeometryError::InvalidOrder(d));
        }
        Ok(HyperEllipsoid { a, b, c, d })
    }

    pub fn semi_axes(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn max_semi_axis(&self) -> f64 {
        self.a.max(self.b).max(self.c)
    }

    pub fn min_semi_axis(&self) -> f64 {
        self.a.min(self.b).min(self.c)
    }

    /// The scaling-factor field evaluated at a body-frame point:
    /// `alpha = sum_i (p_i / axis_i)^(2d)`.
    ///
    /// `alpha = 1` exactly on the boundary, `< 1` inside, and it grows
    /// strictly along rays from the origin.
    #[inline]
    pub fn alpha(&self, p: Vec3) -> f64 {
        pow_2d(p.x / self.a, self.d) + pow_2d(p.y / self.b, self.d) + pow_2d(p.z / self.c, self.d)
    }

    /// The uniform geometric scale `s = alpha^(1/(2d))`: scaling the body by
    /// `s` places its boundary through `p`.
    #[inline]
    pub fn geometric_scale(&self, p: Vec3) -> f64 {
        let root = self.alpha(p).sqrt();
        match self.d {
            1 => root,
            2 => root.sqrt(),
            d => root.powf(1.0 / d as f64),
        }
    }
}

/// Wrap an angle to `[-pi, pi)`.
#[inline]
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    // rem_euclid can return exactly 2*pi for inputs just below -pi due to
    // rounding; fold that single case back.
    if w >= PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// World-frame position plus yaw. Orientation about the world z axis only;
/// the derived quaternion is `(cos(yaw/2), 0, 0, sin(yaw/2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarPose {
    pub r: Vec3,
    pub yaw: f64,
}

impl PlanarPose {
    pub fn new(r: Vec3, yaw: f64) -> Self {
        PlanarPose { r, yaw: wrap_angle(yaw) }
    }

    pub fn identity() -> Self {
        PlanarPose { r: Vec3::ZERO, yaw: 0.0 }
    }

    /// Unit quaternion `(w, x, y, z)` for this yaw.
    pub fn quaternion(&self) -> [f64; 4] {
        let half = 0.5 * self.yaw;
        [half.cos(), 0.0, 0.0, half.sin()]
    }

    #[inline]
    pub fn cos_sin(&self) -> (f64, f64) {
        (self.yaw.cos(), self.yaw.sin())
    }

    /// Rotate a body-frame vector into the world frame (no translation).
    #[inline]
    pub fn rotate_to_world(&self, v: Vec3) -> Vec3 {
        let (c, s) = self.cos_sin();
        Vec3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z)
    }

    /// Rotate a world-frame vector into the body frame (no translation).
    #[inline]
    pub fn rotate_to_body(&self, v: Vec3) -> Vec3 {
        let (c, s) = self.cos_sin();
        Vec3::new(c * v.x + s * v.y, -s * v.x + c * v.y, v.z)
    }

    /// `p_b = R(yaw)^T (p_w - r)`.
    #[inline]
    pub fn body_from_world(&self, p_w: Vec3) -> Vec3 {
        self.rotate_to_body(p_w - self.r)
    }

    /// `p_w = R(yaw) p_b + r`.
    #[inline]
    pub fn world_from_body(&self, p_b: Vec3) -> Vec3 {
        self.rotate_to_world(p_b) + self.r
    }
}

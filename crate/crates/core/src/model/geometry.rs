use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use nalgebra::{Isometry3, Quaternion, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in the world frame, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        crate::math::sqrt(self.distance_squared(other))
    }

    pub fn distance_squared(&self, other: &Point3) -> f64 {
        let d = *self - *other;
        d.x * d.x + d.y * d.y + d.z * d.z
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v.x, v.y, v.z)
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

/// The LiDAR map accumulated up to `stamp`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PointCloudMap {
    pub points: Vec<Point3>,
    pub stamp: f64,
}

impl PointCloudMap {
    pub fn new(points: Vec<Point3>, stamp: f64) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::Malformed(alloc::format!("point {i} is not finite")));
        }
        Ok(Self { points, stamp })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Axis-aligned XY bounds as `(min, max)`.
    pub fn xy_bounds(&self) -> Option<([f64; 2], [f64; 2])> {
        let first = self.points.first()?;
        let mut lo = [first.x, first.y];
        let mut hi = lo;
        for p in &self.points[1..] {
            lo[0] = lo[0].min(p.x);
            lo[1] = lo[1].min(p.y);
            hi[0] = hi[0].max(p.x);
            hi[1] = hi[1].max(p.y);
        }
        Some((lo, hi))
    }
}

/// Robot body pose in the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub stamp: f64,
    pub translation: Point3,
    /// Unit quaternion as `[qx, qy, qz, qw]`.
    pub rotation: [f64; 4],
}

const QUATERNION_NORM_TOLERANCE: f64 = 1e-6;

impl Pose {
    pub fn new(stamp: f64, translation: Point3, rotation: [f64; 4]) -> Result<Self> {
        let [x, y, z, w] = rotation;
        let norm = crate::math::sqrt(x * x + y * y + z * z + w * w);
        if !(norm - 1.0).abs().le(&QUATERNION_NORM_TOLERANCE) {
            return Err(Error::InvalidArgument(alloc::format!(
                "pose quaternion norm {norm} is not 1"
            )));
        }
        if !translation.is_finite() || !stamp.is_finite() {
            return Err(Error::InvalidArgument("pose is not finite".into()));
        }
        Ok(Self { stamp, translation, rotation })
    }

    pub fn identity(stamp: f64) -> Self {
        Self { stamp, translation: Point3::default(), rotation: [0.0, 0.0, 0.0, 1.0] }
    }

    /// Pose from a position and a yaw angle about +z.
    pub fn from_yaw(stamp: f64, translation: Point3, yaw: f64) -> Self {
        let half = yaw * 0.5;
        Self {
            stamp,
            translation,
            rotation: [0.0, 0.0, crate::math::sin(half), crate::math::cos(half)],
        }
    }

    /// Body-to-world rigid transform.
    pub fn isometry(&self) -> Isometry3<f64> {
        let [x, y, z, w] = self.rotation;
        let q = UnitQuaternion::from_quaternion(Quaternion::new(w, x, y, z));
        Isometry3::from_parts(
            Translation3::new(self.translation.x, self.translation.y, self.translation.z),
            q,
        )
    }
}

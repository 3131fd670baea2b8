use nalgebra::{Isometry3, Matrix3, Matrix4, Point3 as NPoint3, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use super::geometry::{Point3, Pose};
use crate::error::{Error, Result};

const ORTHONORMAL_TOLERANCE: f64 = 1e-6;

/// Rectified pinhole camera: zero-skew intrinsics plus a rigid extrinsic that
/// maps world points into the optical frame (z forward).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// Row-major 4x4 world→optical transform.
    pub extrinsic: [[f64; 4]; 4],
    pub width: u32,
    pub height: u32,
}

/// Projection of a point onto the image plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagePoint {
    pub u: f64,
    pub v: f64,
    pub depth: f64,
}

impl CameraModel {
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        extrinsic: [[f64; 4]; 4],
        width: u32,
        height: u32,
    ) -> Result<Self> {
        let cam = Self { fx, fy, cx, cy, extrinsic, width, height };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::InvalidArgument("focal lengths must be positive".into()));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidArgument("camera image size must be nonzero".into()));
        }
        let e = self.extrinsic_matrix();
        let r = e.fixed_view::<3, 3>(0, 0);
        let err = (r * r.transpose() - Matrix3::identity()).amax();
        if !(err <= ORTHONORMAL_TOLERANCE) {
            return Err(Error::InvalidArgument("extrinsic rotation is not orthonormal".into()));
        }
        let last = e.row(3);
        if last[0] != 0.0 || last[1] != 0.0 || last[2] != 0.0 || last[3] != 1.0 {
            return Err(Error::InvalidArgument("extrinsic is not a rigid transform".into()));
        }
        Ok(())
    }

    pub fn intrinsic_matrix(&self) -> Matrix3<f64> {
        Matrix3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0)
    }

    pub fn extrinsic_matrix(&self) -> Matrix4<f64> {
        let e = &self.extrinsic;
        Matrix4::from_row_slice(&[
            e[0][0], e[0][1], e[0][2], e[0][3], e[1][0], e[1][1], e[1][2], e[1][3], e[2][0],
            e[2][1], e[2][2], e[2][3], e[3][0], e[3][1], e[3][2], e[3][3],
        ])
    }

    pub fn with_extrinsic(&self, m: &Matrix4<f64>) -> Self {
        let mut extrinsic = [[0.0; 4]; 4];
        for (r, row) in extrinsic.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = m[(r, c)];
            }
        }
        Self { extrinsic, ..*self }
    }

    /// Camera for a robot at `pose`, treating this model's extrinsic as the
    /// body→optical mount transform.
    pub fn at_pose(&self, pose: &Pose) -> Self {
        let world_to_body = pose.isometry().inverse().to_homogeneous();
        self.with_extrinsic(&(self.extrinsic_matrix() * world_to_body))
    }

    /// `P_camera = E · P_world`, `p_image = K · P_camera` with perspective division.
    pub fn project_point(&self, p: &Point3) -> Result<ImagePoint> {
        let pc = self.extrinsic_matrix() * Vector4::new(p.x, p.y, p.z, 1.0);
        if pc.z <= 0.0 {
            return Err(Error::BehindCamera);
        }
        let pi = self.intrinsic_matrix() * Vector3::new(pc.x, pc.y, pc.z);
        Ok(ImagePoint { u: pi.x / pi.z, v: pi.y / pi.z, depth: pc.z })
    }

    pub fn in_image(&self, ip: &ImagePoint) -> bool {
        ip.u >= 0.0 && ip.v >= 0.0 && ip.u < self.width as f64 && ip.v < self.height as f64
    }

    /// Camera center in world coordinates.
    pub fn center(&self) -> Point3 {
        let inv = self.optical_to_world();
        Point3::from_vector(&inv.translation.vector)
    }

    pub fn optical_to_world(&self) -> Isometry3<f64> {
        let e = self.extrinsic_matrix();
        let r = e.fixed_view::<3, 3>(0, 0).into_owned();
        let t = Vector3::new(e[(0, 3)], e[(1, 3)], e[(2, 3)]);
        let rot = nalgebra::UnitQuaternion::from_matrix(&r);
        Isometry3::from_parts(nalgebra::Translation3::from(t), rot).inverse()
    }

    /// World point at optical-axis depth `depth` along the ray through `(u, v)`.
    pub fn unproject(&self, u: f64, v: f64, depth: f64) -> Point3 {
        let pc = NPoint3::new((u - self.cx) / self.fx * depth, (v - self.cy) / self.fy * depth, depth);
        let pw = self.optical_to_world() * pc;
        Point3::new(pw.x, pw.y, pw.z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const IDENTITY: [[f64; 4]; 4] =
        [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];

    fn cam() -> CameraModel {
        CameraModel::new(500.0, 500.0, 500.0, 500.0, IDENTITY, 1000, 1000).unwrap()
    }

    #[test]
    fn optical_axis_hits_principal_point() {
        let ip = cam().project_point(&Point3::new(0.0, 0.0, 2.0)).unwrap();
        assert_eq!((ip.u, ip.v, ip.depth), (500.0, 500.0, 2.0));
    }

    #[test]
    fn lateral_offset() {
        let ip = cam().project_point(&Point3::new(0.2, 0.0, 2.0)).unwrap();
        assert_eq!((ip.u, ip.v, ip.depth), (550.0, 500.0, 2.0));
    }

    #[test]
    fn behind_camera() {
        assert_eq!(cam().project_point(&Point3::new(0.0, 0.0, -1.0)), Err(Error::BehindCamera));
        assert_eq!(cam().project_point(&Point3::new(0.0, 0.0, 0.0)), Err(Error::BehindCamera));
    }

    #[test]
    fn rejects_skewed_extrinsic() {
        let mut e = IDENTITY;
        e[0][1] = 0.1;
        assert!(CameraModel::new(500.0, 500.0, 0.0, 0.0, e, 10, 10).is_err());
        assert!(CameraModel::new(0.0, 500.0, 0.0, 0.0, IDENTITY, 10, 10).is_err());
    }

    #[test]
    fn unproject_inverts_projection() {
        let pose = Pose::from_yaw(0.0, Point3::new(1.0, 2.0, 0.5), 0.7);
        let c = cam().at_pose(&pose);
        let p = Point3::new(1.3, 2.9, 0.8);
        let ip = c.project_point(&p).unwrap();
        let back = c.unproject(ip.u, ip.v, ip.depth);
        assert!(back.distance(&p) < 1e-9);
        assert!(c.center().distance(&pose.translation) < 1e-12);
    }
}

//! Pinhole camera over a flat road, and rigid ego-motion.
//!
//! Frame convention: right-handed, X right, Y down, Z forward. The road is
//! the plane `nᵀX = h_cam` in camera coordinates.

use crate::error::GeometryError;
use crate::geometry::linalg::{Mat3, Vec2, Vec3};
use crate::scalar::Real;

/// Minimum value of `nᵀK⁻¹x̃` for a pixel to count as below the horizon.
pub const EPS_HORIZON: f64 = 1e-6;

/// Default per-frame ego-motion uncertainty: translation (meters) and
/// rotation (radians).
pub const DEFAULT_TRANS_SIGMA: f64 = 0.1;
pub const DEFAULT_ROT_SIGMA: f64 = 0.002;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraRig<T> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
    pub image_width: T,
    pub image_height: T,
    /// Unit normal of the road plane in camera coordinates.
    pub normal: Vec3<T>,
    /// Height of the camera centre above the road (meters).
    pub h_cam: T,
}

impl<T: Real> CameraRig<T> {
    /// Rig with a level camera (`n = (0, 1, 0)`).
    pub fn new(fx: T, fy: T, cx: T, cy: T, image_width: T, image_height: T, h_cam: T) -> Result<Self, GeometryError> {
        Self::with_ground(fx, fy, cx, cy, image_width, image_height, Vec3::new(T::zero(), T::one(), T::zero()), h_cam)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn with_ground(
        fx: T,
        fy: T,
        cx: T,
        cy: T,
        image_width: T,
        image_height: T,
        normal: Vec3<T>,
        h_cam: T,
    ) -> Result<Self, GeometryError> {
        let rig = Self { fx, fy, cx, cy, image_width, image_height, normal, h_cam };
        rig.validate()?;
        Ok(rig)
    }

    /// KITTI-like rig: 1242×375 image, level camera 1.65 m above the road.
    pub fn kitti_like() -> Self {
        Self::new(
            T::lit(721.5377),
            T::lit(721.5377),
            T::lit(609.5593),
            T::lit(172.854),
            T::lit(1242.0),
            T::lit(375.0),
            T::lit(1.65),
        )
        .expect("valid default rig")
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let unit = (self.normal.norm() - T::one()).abs() <= T::tolerance();
        if !(self.fx > T::zero() && self.fy > T::zero()) {
            return Err(GeometryError::InvalidRig("focal lengths must be positive"));
        }
        if !unit {
            return Err(GeometryError::InvalidRig("ground normal must be unit length"));
        }
        if !(self.h_cam > T::zero()) {
            return Err(GeometryError::InvalidRig("camera height must be positive"));
        }
        if !(self.image_width > T::zero() && self.image_height > T::zero()) {
            return Err(GeometryError::InvalidRig("image size must be positive"));
        }
        Ok(())
    }

    /// `K⁻¹ x̃` for a pixel.
    pub fn ray(&self, pixel: Vec2<T>) -> Vec3<T> {
        Vec3::new((pixel.x - self.cx) / self.fx, (pixel.y - self.cy) / self.fy, T::one())
    }

    pub fn in_image(&self, p: Vec2<T>) -> bool {
        p.x >= T::zero() && p.y >= T::zero() && p.x <= self.image_width && p.y <= self.image_height
    }
}

/// Intersects the viewing ray of `pixel` with the road plane:
/// `X = h · K⁻¹x̃ / (nᵀK⁻¹x̃)`.
pub fn backproject_ground<T: Real>(pixel: Vec2<T>, rig: &CameraRig<T>) -> Result<Vec3<T>, GeometryError> {
    let r = rig.ray(pixel);
    let denom = rig.normal.dot(r);
    if !(denom > T::lit(EPS_HORIZON)) {
        return Err(GeometryError::DegenerateHorizon);
    }
    Ok(r * (rig.h_cam / denom))
}

pub fn project<T: Real>(point: Vec3<T>, rig: &CameraRig<T>) -> Result<Vec2<T>, GeometryError> {
    if !(point.z > T::zero()) {
        return Err(GeometryError::BehindCamera);
    }
    Ok(Vec2::new(rig.fx * point.x / point.z + rig.cx, rig.fy * point.y / point.z + rig.cy))
}

/// Derivative of [`backproject_ground`] with respect to the pixel, as a
/// 3×2 matrix stored column-wise (`[∂X/∂u, ∂X/∂v]`).
pub fn backprojection_jacobian<T: Real>(pixel: Vec2<T>, rig: &CameraRig<T>) -> Result<[Vec3<T>; 2], GeometryError> {
    let r = rig.ray(pixel);
    let d = rig.normal.dot(r);
    if !(d > T::lit(EPS_HORIZON)) {
        return Err(GeometryError::DegenerateHorizon);
    }
    let dr_du = Vec3::new(rig.fx.recip(), T::zero(), T::zero());
    let dr_dv = Vec3::new(T::zero(), rig.fy.recip(), T::zero());
    let col = |dr: Vec3<T>| (dr * d - r * rig.normal.dot(dr)) * (rig.h_cam / (d * d));
    Ok([col(dr_du), col(dr_dv)])
}

/// Camera motion between two frames: maps a point from the earlier camera's
/// coordinates into the later one's as `R·p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidMotion<T> {
    pub rotation: Mat3<T>,
    pub translation: Vec3<T>,
    /// Isotropic translation uncertainty (meters).
    pub trans_sigma: T,
    /// Rotation uncertainty (radians).
    pub rot_sigma: T,
}

impl<T: Real> RigidMotion<T> {
    pub fn identity() -> Self {
        Self { rotation: Mat3::identity(), translation: Vec3::zeros(), trans_sigma: T::zero(), rot_sigma: T::zero() }
    }

    pub fn new(rotation: Mat3<T>, translation: Vec3<T>) -> Result<Self, GeometryError> {
        let m = Self { rotation, translation, trans_sigma: T::zero(), rot_sigma: T::zero() };
        m.validate()?;
        Ok(m)
    }

    pub fn with_uncertainty(mut self, trans_sigma: T, rot_sigma: T) -> Self {
        self.trans_sigma = trans_sigma;
        self.rot_sigma = rot_sigma;
        self
    }

    pub fn translation(t: Vec3<T>) -> Self {
        Self { translation: t, ..Self::identity() }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let tol = T::tolerance();
        if self.rotation.orthonormality_residual() > tol || (self.rotation.det() - T::one()).abs() > tol {
            return Err(GeometryError::NonOrthonormalRotation);
        }
        if !(self.trans_sigma >= T::zero() && self.rot_sigma >= T::zero()) {
            return Err(GeometryError::InvalidRig("motion uncertainty must be non-negative"));
        }
        Ok(())
    }

    /// `self ∘ first`: apply `first`, then `self`. Uncertainties add.
    pub fn compose(&self, first: &Self) -> Self {
        Self {
            rotation: self.rotation * first.rotation,
            translation: self.rotation * first.translation + self.translation,
            trans_sigma: self.trans_sigma + first.trans_sigma,
            rot_sigma: self.rot_sigma + first.rot_sigma,
        }
    }

    pub fn yaw(&self) -> T {
        self.rotation.yaw()
    }

    /// Inverse rigid transform; uncertainties are kept.
    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self { rotation: rt, translation: -(rt * self.translation), ..*self }
    }
}

pub fn apply_motion<T: Real>(motion: &RigidMotion<T>, point: Vec3<T>) -> Vec3<T> {
    motion.rotation * point + motion.translation
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_rig() -> CameraRig<f64> {
        CameraRig::new(700.0, 700.0, 600.0, 180.0, 1200.0, 360.0, 1.65).unwrap()
    }

    #[test]
    fn backproject_reference_pixel() {
        let x = backproject_ground(Vec2::new(600.0, 250.0), &reference_rig()).unwrap();
        assert!((x - Vec3::new(0.0, 1.65, 16.5)).norm() < 1e-12);
    }

    #[test]
    fn horizon_pixel_is_degenerate() {
        assert_eq!(
            backproject_ground(Vec2::new(800.0, 180.0), &reference_rig()),
            Err(GeometryError::DegenerateHorizon)
        );
        assert!(backproject_ground(Vec2::new(800.0, 100.0), &reference_rig()).is_err());
    }

    #[test]
    fn project_reference_point() {
        let p = project(Vec3::new(0.0, 1.65, 16.5), &reference_rig()).unwrap();
        assert!((p - Vec2::new(600.0, 250.0)).norm() < 1e-9);
    }

    #[test]
    fn optical_axis_and_behind_camera() {
        let rig = CameraRig::new(1.0, 1.0, 0.0, 0.0, 10.0, 10.0, 1.0).unwrap();
        assert_eq!(project(Vec3::new(0.0, 0.0, 1.0), &rig).unwrap(), Vec2::new(0.0, 0.0));
        assert_eq!(project(Vec3::new(0.0, 0.0, -1.0), &rig), Err(GeometryError::BehindCamera));
        assert_eq!(project(Vec3::new(0.0, 0.0, 0.0), &rig), Err(GeometryError::BehindCamera));
    }

    #[test]
    fn motion_examples() {
        let p = Vec3::new(0.3, -2.0, 7.0);
        assert_eq!(apply_motion(&RigidMotion::identity(), p), p);

        let m = RigidMotion::translation(Vec3::new(0.0, 0.0, -5.0));
        assert_eq!(apply_motion(&m, Vec3::new(0.0, 1.65, 16.5)), Vec3::new(0.0, 1.65, 11.5));

        let yaw = RigidMotion::new(Mat3::rot_y(std::f64::consts::FRAC_PI_2), Vec3::zeros()).unwrap();
        let q = apply_motion(&yaw, Vec3::new(1.0, 0.0, 0.0));
        assert!((q - Vec3::new(0.0, 0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn jacobian_scales_with_camera_height() {
        let rig = reference_rig();
        let mut tall = rig;
        tall.h_cam = 2.0 * rig.h_cam;
        let px = Vec2::new(450.0, 300.0);
        let a = backprojection_jacobian(px, &rig).unwrap();
        let b = backprojection_jacobian(px, &tall).unwrap();
        for c in 0..2 {
            assert!((b[c] - a[c] * 2.0).norm() < 1e-15);
        }
    }

    #[test]
    fn depth_shrinks_when_moving_down_the_image() {
        let j = backprojection_jacobian(Vec2::new(620.0, 340.0), &reference_rig()).unwrap();
        assert!(j[1].z < 0.0);
    }

    #[test]
    fn invalid_rigs_rejected() {
        assert!(CameraRig::new(-1.0, 700.0, 0.0, 0.0, 10.0, 10.0, 1.0).is_err());
        assert!(CameraRig::new(1.0, 700.0, 0.0, 0.0, 10.0, 10.0, 0.0).is_err());
        assert!(CameraRig::with_ground(1.0, 1.0, 0.0, 0.0, 10.0, 10.0, Vec3::new(0.0, 2.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn compose_matches_sequential_application() {
        let a = RigidMotion::new(Mat3::rot_y(0.1), Vec3::new(0.2, 0.0, -1.0)).unwrap();
        let b = RigidMotion::new(Mat3::rot_y(-0.3), Vec3::new(-0.5, 0.01, -0.7)).unwrap();
        let p = Vec3::new(1.0, 1.65, 12.0);
        let seq = apply_motion(&b, apply_motion(&a, p));
        let comp = apply_motion(&b.compose(&a), p);
        assert!((seq - comp).norm() < 1e-12);
    }
}

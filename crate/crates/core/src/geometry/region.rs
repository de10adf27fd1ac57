//! 3D uncertainty regions around backprojected detections.
//!
//! A region is an oriented box in camera coordinates: it rotates only about
//! the vertical axis, and its half extents are ordered X (lateral),
//! Y (vertical), Z (depth) in the box's own frame.

use crate::detection::Detection;
use crate::error::GeometryError;
use crate::geometry::camera::{
    apply_motion, backproject_ground, backprojection_jacobian, project, CameraRig, RigidMotion,
};
use crate::geometry::linalg::{Mat3, Vec2, Vec3};
use crate::geometry::polygon::ConvexPolygon2D;
use crate::scalar::Real;

/// Default pixel standard deviation of a detection with score 1.
pub const DEFAULT_SIGMA0: f64 = 4.0;
/// Score floor used when mapping confidence to pixel noise.
pub const MIN_SCORE_FOR_SIGMA: f64 = 0.1;
/// Object dimensions used when the estimator gave none: height, width, length.
pub const DEFAULT_DIMS: [f64; 3] = [1.5, 1.6, 4.0];
/// Number of standard deviations covered by a region.
pub const REGION_SIGMAS: f64 = 3.0;
/// Near plane used when a region straddles the camera.
const NEAR_PLANE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GatedRegion3D<T> {
    pub center: Vec3<T>,
    pub half_extents: Vec3<T>,
    pub yaw: T,
}

impl<T: Real> GatedRegion3D<T> {
    pub fn point(center: Vec3<T>) -> Self {
        Self { center, half_extents: Vec3::zeros(), yaw: T::zero() }
    }

    pub fn orientation(&self) -> Mat3<T> {
        Mat3::rot_y(self.yaw)
    }

    /// The eight box corners.
    pub fn corners(&self) -> [Vec3<T>; 8] {
        let r = self.orientation();
        let h = self.half_extents;
        let mut out = [Vec3::zeros(); 8];
        let mut k = 0;
        for sx in [-T::one(), T::one()] {
            for sy in [-T::one(), T::one()] {
                for sz in [-T::one(), T::one()] {
                    out[k] = self.center + r * Vec3::new(sx * h.x, sy * h.y, sz * h.z);
                    k += 1;
                }
            }
        }
        out
    }

    pub fn contains(&self, p: Vec3<T>) -> bool {
        let local = self.orientation().transpose() * (p - self.center);
        local.x.abs() <= self.half_extents.x
            && local.y.abs() <= self.half_extents.y
            && local.z.abs() <= self.half_extents.z
    }

    /// Footprint on the road plane as a polygon in `(X, Z)` coordinates.
    pub fn xz_footprint(&self) -> ConvexPolygon2D<T> {
        let r = self.orientation();
        let h = self.half_extents;
        let pts: Vec<Vec2<T>> = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
            .iter()
            .map(|&(sx, sz)| {
                let p = self.center + r * Vec3::new(T::lit(sx) * h.x, T::zero(), T::lit(sz) * h.z);
                Vec2::new(p.x, p.z)
            })
            .collect();
        ConvexPolygon2D::hull(&pts)
    }
}

/// Region around the ground point under a pixel, given the pixel standard
/// deviation, the object's (height, width, length) and its yaw.
pub fn region_from_pixel<T: Real>(
    pixel: Vec2<T>,
    sigma: T,
    dims: Vec3<T>,
    yaw: T,
    rig: &CameraRig<T>,
) -> Result<GatedRegion3D<T>, GeometryError> {
    let center = backproject_ground(pixel, rig)?;
    let [ju, jv] = backprojection_jacobian(pixel, rig)?;
    // covariance σ²·J·Jᵀ expressed in the box frame; take per-axis marginals
    let rt = Mat3::rot_y(yaw).transpose();
    let (ju, jv) = (rt * ju, rt * jv);
    let k = T::lit(REGION_SIGMAS) * sigma;
    let spread = |a: T, b: T| k * (a * a + b * b).sqrt();
    let half = T::lit(0.5);
    let half_extents = Vec3::new(
        spread(ju.x, jv.x) + dims.y * half,
        spread(ju.y, jv.y) + dims.x * half,
        spread(ju.z, jv.z) + dims.z * half,
    );
    Ok(GatedRegion3D { center, half_extents, yaw })
}

/// Pixel standard deviation for a detector score.
pub fn score_sigma<T: Real>(sigma0: T, score: T) -> T {
    sigma0 / score.max(T::lit(MIN_SCORE_FOR_SIGMA))
}

/// Region for a detection: backprojects the bottom centre of its box and
/// grows it by the linearised pixel uncertainty and the object dimensions.
pub fn build_region<T: Real>(
    detection: &Detection<T>,
    rig: &CameraRig<T>,
    sigma0: T,
) -> Result<GatedRegion3D<T>, GeometryError> {
    let (dims, yaw) = match &detection.features {
        Some(f) => (f.dims, f.yaw()),
        None => (Vec3::new(T::lit(DEFAULT_DIMS[0]), T::lit(DEFAULT_DIMS[1]), T::lit(DEFAULT_DIMS[2])), T::zero()),
    };
    region_from_pixel(detection.bbox.bottom_center(), score_sigma(sigma0, detection.score), dims, yaw, rig)
}

/// Moves a region into the next camera frame and inflates it by the motion
/// uncertainty: every half extent grows by `trans_sigma + rot_sigma·‖center‖`.
pub fn transport_region<T: Real>(region: &GatedRegion3D<T>, motion: &RigidMotion<T>) -> GatedRegion3D<T> {
    let grow = motion.trans_sigma + motion.rot_sigma * region.center.norm();
    GatedRegion3D {
        center: apply_motion(motion, region.center),
        half_extents: region.half_extents + Vec3::splat(grow),
        yaw: crate::geometry::linalg::wrap_angle(region.yaw + motion.yaw()),
    }
}

/// Image-plane footprint of a region: convex hull of its projected corners,
/// clipped to the image. Parts of the box behind the near plane are cut off
/// before projecting.
pub fn project_region<T: Real>(
    region: &GatedRegion3D<T>,
    rig: &CameraRig<T>,
) -> Result<ConvexPolygon2D<T>, GeometryError> {
    let corners = region.corners();
    if corners.iter().all(|c| !(c.z > T::zero())) {
        return Err(GeometryError::BehindCamera);
    }
    let near = T::lit(NEAR_PLANE);
    let mut visible: Vec<Vec3<T>> = corners.iter().copied().filter(|c| c.z >= near).collect();
    if visible.len() < corners.len() {
        // corner indices differ in exactly one bit along each box edge
        for i in 0..8usize {
            for bit in [1usize, 2, 4] {
                let j = i ^ bit;
                if j < i {
                    continue;
                }
                let (a, b) = (corners[i], corners[j]);
                if (a.z < near) != (b.z < near) {
                    let t = (near - a.z) / (b.z - a.z);
                    visible.push(a + (b - a) * t);
                }
            }
        }
    }
    if visible.is_empty() {
        return Err(GeometryError::BehindCamera);
    }
    let pixels: Vec<Vec2<T>> = visible.iter().filter_map(|&p| project(p, rig).ok()).collect();
    let hull = ConvexPolygon2D::hull(&pixels);
    let image = ConvexPolygon2D::rectangle(T::zero(), T::zero(), rig.image_width, rig.image_height);
    Ok(hull.clip(&image))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::{BBox, ObjectFeatures};

    fn rig() -> CameraRig<f64> {
        CameraRig::new(700.0, 700.0, 600.0, 180.0, 1200.0, 360.0, 1.65).unwrap()
    }

    fn features(dims: Vec3<f64>) -> ObjectFeatures<f64> {
        ObjectFeatures { psi: vec![], lambda: [0.0; 5], omega: Vec3::zeros(), dims }
    }

    // bottom centre (600, 250)
    fn det() -> Detection<f64> {
        Detection::new(0, BBox::new(560.0, 200.0, 80.0, 50.0), 0.9)
    }

    #[test]
    fn zero_sigma_zero_dims_is_point_region() {
        let d = det().with_features(features(Vec3::zeros()));
        let r = build_region(&d, &rig(), 0.0).unwrap();
        assert_eq!(r.half_extents, Vec3::zeros());
        assert!((r.center - Vec3::new(0.0, 1.65, 16.5)).norm() < 1e-12);
    }

    #[test]
    fn zero_sigma_is_pure_dimension_expansion() {
        let d = det().with_features(features(Vec3::new(1.5, 1.6, 4.0)));
        let r = build_region(&d, &rig(), 0.0).unwrap();
        assert_eq!(r.half_extents, Vec3::new(0.8, 0.75, 2.0));
        let defaults = build_region(&det(), &rig(), 0.0).unwrap();
        assert_eq!(defaults.half_extents, Vec3::new(0.8, 0.75, 2.0));
    }

    #[test]
    fn level_ground_has_no_vertical_spread() {
        let r = build_region(&det().with_features(features(Vec3::zeros())), &rig(), 4.0).unwrap();
        assert!(r.half_extents.y.abs() < 1e-12);
        assert!(r.half_extents.z > r.half_extents.x);
    }

    #[test]
    fn above_horizon_detection_fails() {
        let d = Detection::new(0, BBox::new(560.0, 100.0, 80.0, 50.0), 0.9);
        assert_eq!(build_region(&d, &rig(), 4.0), Err(GeometryError::DegenerateHorizon));
    }

    #[test]
    fn identity_transport_is_identity() {
        let r = build_region(&det(), &rig(), 4.0).unwrap();
        assert_eq!(transport_region(&r, &RigidMotion::identity()), r);
    }

    #[test]
    fn translation_moves_center_only() {
        let r = build_region(&det(), &rig(), 4.0).unwrap();
        let t = transport_region(&r, &RigidMotion::translation(Vec3::new(0.5, 0.0, -2.0)));
        assert_eq!(t.half_extents, r.half_extents);
        assert_eq!(t.center, r.center + Vec3::new(0.5, 0.0, -2.0));
    }

    #[test]
    fn translation_sigma_inflates_additively() {
        let r = build_region(&det(), &rig(), 4.0).unwrap();
        let m = RigidMotion::identity().with_uncertainty(0.5, 0.0);
        let t = transport_region(&r, &m);
        let d = t.half_extents - r.half_extents;
        for v in d.to_array() {
            assert!((v - 0.5).abs() < 1e-12);
        }
        let m = RigidMotion::identity().with_uncertainty(0.0, 0.01);
        let t = transport_region(&r, &m);
        assert!((t.half_extents.x - r.half_extents.x - 0.01 * r.center.norm()).abs() < 1e-12);
    }

    #[test]
    fn transport_composes_yaw() {
        let r = GatedRegion3D { center: Vec3::new(0.0, 1.65, 10.0), half_extents: Vec3::splat(1.0), yaw: 0.2_f64 };
        let m = RigidMotion::new(Mat3::rot_y(0.3), Vec3::zeros()).unwrap();
        assert!((transport_region(&r, &m).yaw - 0.5).abs() < 1e-12);
    }

    #[test]
    fn point_region_projects_to_single_pixel() {
        let p = project_region(&GatedRegion3D::point(Vec3::new(0.0, 1.65, 16.5)), &rig()).unwrap();
        assert_eq!(p.len(), 1);
        assert!((p.vertices()[0] - Vec2::new(600.0, 250.0)).norm() < 1e-9);
    }

    #[test]
    fn box_in_view_projects_to_hull_of_corners() {
        let region =
            GatedRegion3D { center: Vec3::new(1.0, 1.0, 20.0), half_extents: Vec3::new(0.8, 0.75, 2.0), yaw: 0.0 };
        let p = project_region(&region, &rig()).unwrap();
        assert!((4..=6).contains(&p.len()), "{} vertices", p.len());
        let corners: Vec<Vec2<f64>> = region.corners().iter().map(|&c| project(c, &rig()).unwrap()).collect();
        for v in p.vertices() {
            assert!(rig().in_image(*v));
            assert!(corners.iter().any(|c| (*c - *v).norm() < 1e-9));
        }
        let hull = ConvexPolygon2D::hull(&corners);
        assert_eq!(hull.len(), p.len());
        assert!((hull.area() - p.area()).abs() < 1e-9 * hull.area());
    }

    #[test]
    fn region_at_image_edge_is_clipped() {
        let region =
            GatedRegion3D { center: Vec3::new(10.0, 1.0, 12.0), half_extents: Vec3::new(1.5, 0.75, 2.0), yaw: 0.0 };
        let clipped = project_region(&region, &rig()).unwrap();
        let pts: Vec<Vec2<f64>> = region.corners().iter().map(|&c| project(c, &rig()).unwrap()).collect();
        let unclipped = ConvexPolygon2D::hull(&pts);
        assert!(unclipped.vertices().iter().any(|v| v.x > 1200.0));
        assert!(clipped.area() < unclipped.area());
        assert!(clipped.area() > 0.0);
    }

    #[test]
    fn region_behind_camera() {
        let region = GatedRegion3D { center: Vec3::new(0.0, 1.0, -12.0), half_extents: Vec3::splat(1.0), yaw: 0.0 };
        assert_eq!(project_region(&region, &rig()), Err(GeometryError::BehindCamera));
    }

    #[test]
    fn straddling_region_is_cut_at_near_plane() {
        let region =
            GatedRegion3D { center: Vec3::new(0.0, 1.65, 1.0), half_extents: Vec3::new(1.0, 0.75, 3.0), yaw: 0.0 };
        let p = project_region(&region, &rig()).unwrap();
        assert!(p.area() > 0.0);
    }
}
